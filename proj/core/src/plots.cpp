#include "log2sig/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "log2sig/common.hpp"

namespace log2sig {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

}  // namespace

void write_plot_svg(const std::string& path, const std::string& title,
                    const std::vector<PlotPanel>& panels) {
    const int width = 960;
    const int panel_h = 180;
    const int margin_l = 64, margin_r = 16, margin_t = 40, margin_b = 28;
    const int height = margin_t + int(panels.size()) * (panel_h + margin_b);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write plot: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";

    int top = margin_t;
    for (const auto& panel : panels) {
        const int plot_w = width - margin_l - margin_r;
        const int plot_h = panel_h - 24;

        std::size_t n = 0;
        double lo = 0.0, hi = 1.0;
        bool first = true;
        for (const auto& s : panel.series) {
            n = std::max(n, s.values.size());
            for (double v : s.values) {
                if (!std::isfinite(v)) continue;
                if (first) {
                    lo = hi = v;
                    first = false;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
        if (first) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            hi += 0.5;
            lo -= 0.5;
        }

        out << "<text x=\"" << margin_l << "\" y=\"" << top - 6
            << "\" font-size=\"12\" fill=\"#333\">" << panel.title << "</text>\n";
        out << "<rect x=\"" << margin_l << "\" y=\"" << top << "\" width=\"" << plot_w
            << "\" height=\"" << plot_h
            << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << margin_l - 6 << "\" y=\"" << top + 10
            << "\" text-anchor=\"end\" font-size=\"10\" fill=\"#555\">" << fmt(hi)
            << "</text>\n";
        out << "<text x=\"" << margin_l - 6 << "\" y=\"" << top + plot_h
            << "\" text-anchor=\"end\" font-size=\"10\" fill=\"#555\">" << fmt(lo)
            << "</text>\n";

        int color_idx = 0;
        int legend_x = margin_l + 8;
        for (const auto& s : panel.series) {
            const std::string color =
                s.color.empty() ? kPalette[color_idx % 8] : s.color;
            ++color_idx;
            if (s.values.size() >= 2) {
                out << "<polyline fill=\"none\" stroke=\"" << color
                    << "\" stroke-width=\"1.2\" points=\"";
                for (std::size_t i = 0; i < s.values.size(); ++i) {
                    const double x =
                        margin_l + double(plot_w) * double(i) / double(n - 1 ? n - 1 : 1);
                    double v = s.values[i];
                    if (!std::isfinite(v)) v = lo;
                    const double y = top + plot_h - (v - lo) / (hi - lo) * plot_h;
                    out << fmt(x) << ',' << fmt(y) << ' ';
                }
                out << "\"/>\n";
            }
            if (!s.label.empty()) {
                out << "<text x=\"" << legend_x << "\" y=\"" << top + plot_h + 14
                    << "\" font-size=\"10\" fill=\"" << color << "\">" << s.label
                    << "</text>\n";
                legend_x += int(s.label.size()) * 7 + 18;
            }
        }
        top += panel_h + margin_b;
    }
    out << "</svg>\n";
}

}  // namespace log2sig
