#pragma once

#include <string>
#include <vector>

namespace log2sig {

struct PlotSeries {
    std::string label;
    std::vector<double> values;
    std::string color;  // css color; defaults assigned when empty
};

struct PlotPanel {
    std::string title;
    std::vector<PlotSeries> series;
};

// Static SVG, panels stacked vertically with a shared x axis (sample index).
void write_plot_svg(const std::string& path, const std::string& title,
                    const std::vector<PlotPanel>& panels);

}  // namespace log2sig
