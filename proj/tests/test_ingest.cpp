#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "log2sig/fusion.hpp"
#include "log2sig/ingest.hpp"
#include "log2sig/signal.hpp"

using namespace log2sig;

namespace {

const char* kLogonCsv =
    "id,date,user,pc,activity\n"
    "L001,01/04/2010 08:12:00,ACM2278,PC-1,Logon\n"
    "L002,01/04/2010 17:02:11,ACM2278,PC-1,Logoff\n"
    "L003,01/05/2010 08:30:00,TNM0961,PC-9,Logon\n";

ParsedLog parse_str(const std::string& text, LogSource source) {
    std::istringstream in(text);
    return parse_log_stream(in, source, "<test>");
}

}  // namespace

TEST_CASE("parse_log_file maps rows to events") {
    const ParsedLog log = parse_str(kLogonCsv, LogSource::Logon);
    REQUIRE(log.events.size() == 3);
    CHECK(log.skipped_rows == 0);
    const RawEvent& ev = log.events[0];
    CHECK(ev.event_id == "L001");
    CHECK(ev.user == "ACM2278");
    CHECK(ev.host == "PC-1");
    CHECK(ev.source == LogSource::Logon);
    CHECK(ev.action_detail == "Logon");
    CHECK(hour_of_timestamp(ev.timestamp) == 8);
    CHECK(format_day(day_of_timestamp(ev.timestamp)) == "2010-01-04");
}

TEST_CASE("parse_log_file edge cases") {
    SUBCASE("empty file with a valid header") {
        const ParsedLog log = parse_str("id,date,user,pc,activity\n", LogSource::Logon);
        CHECK(log.events.empty());
        CHECK(log.skipped_rows == 0);
    }
    SUBCASE("garbage timestamps are skipped, not fatal") {
        const ParsedLog log = parse_str(
            "id,date,user,pc,activity\nL1,garbage,ACM2278,PC-1,Logon\n", LogSource::Logon);
        CHECK(log.events.empty());
        CHECK(log.skipped_rows == 1);
    }
    SUBCASE("header mismatch names the offending column") {
        try {
            (void)parse_str("id,when,user,pc,activity\nX,Y,Z,W,V\n", LogSource::Logon);
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            const std::string what = e.what();
            CHECK(what.find("column 2") != std::string::npos);
            CHECK(what.find("'when'") != std::string::npos);
        }
    }
    SUBCASE("quoted fields with embedded commas") {
        const ParsedLog log = parse_str(
            "id,date,user,pc,url\nH1,01/04/2010 02:00:00,U1,PC-2,\"http://x.test/a,b\"\n",
            LogSource::Http);
        REQUIRE(log.events.size() == 1);
        CHECK(log.events[0].action_detail == "http://x.test/a,b");
    }
    SUBCASE("missing file is an IO error") {
        CHECK_THROWS_AS(parse_log_file("/nonexistent/logon.csv", LogSource::Logon), IoError);
    }
}

TEST_CASE("map_event default rules") {
    const BehaviorVocabulary vocab = BehaviorVocabulary::default_vocabulary();
    RawEvent ev;
    ev.user = "U";

    SUBCASE("logon actions") {
        ev.source = LogSource::Logon;
        ev.action_detail = "Logon";
        ev.timestamp = days_from_civil(2010, 1, 4) * kSecondsPerDay + 8 * 3600;
        CHECK(vocab.token_name(map_event(ev, vocab)) == "LOGON");
        ev.action_detail = "Logoff";
        CHECK(vocab.token_name(map_event(ev, vocab)) == "LOGOFF");
    }
    SUBCASE("http splits on the after-hours window") {
        ev.source = LogSource::Http;
        ev.action_detail = "http://x.test";
        ev.timestamp = days_from_civil(2010, 1, 4) * kSecondsPerDay + 2 * 3600;
        CHECK(vocab.token_name(map_event(ev, vocab)) == "HTTP_AFTERHOURS");
        ev.timestamp = days_from_civil(2010, 1, 4) * kSecondsPerDay + 14 * 3600;
        CHECK(vocab.token_name(map_event(ev, vocab)) == "HTTP_VISIT");
        // boundary: 07:00 is business hours, 19:00 is after hours
        ev.timestamp = days_from_civil(2010, 1, 4) * kSecondsPerDay + 7 * 3600;
        CHECK(vocab.token_name(map_event(ev, vocab)) == "HTTP_VISIT");
        ev.timestamp = days_from_civil(2010, 1, 4) * kSecondsPerDay + 19 * 3600;
        CHECK(vocab.token_name(map_event(ev, vocab)) == "HTTP_AFTERHOURS");
    }
    SUBCASE("device and file actions") {
        ev.source = LogSource::Device;
        ev.action_detail = "Connect";
        CHECK(vocab.token_name(map_event(ev, vocab)) == "DEVICE_CONNECT");
        ev.source = LogSource::File;
        ev.action_detail = "File Copy";
        CHECK(vocab.token_name(map_event(ev, vocab)) == "FILE_COPY");
    }
    SUBCASE("unmapped combination carries the pair") {
        ev.source = LogSource::Device;
        ev.action_detail = "Eject";
        try {
            (void)map_event(ev, vocab);
            FAIL("expected ClassificationError");
        } catch (const ClassificationError& e) {
            const std::string what = e.what();
            CHECK(what.find("device") != std::string::npos);
            CHECK(what.find("Eject") != std::string::npos);
        }
    }
    SUBCASE("catch-all token when configured") {
        auto tokens = vocab.tokens();
        tokens.push_back({"OTHER", 7});
        auto names = vocab.channel_names();
        names.push_back("other");
        const auto relaxed = BehaviorVocabulary::create(tokens, names, true, "OTHER");
        ev.source = LogSource::Device;
        ev.action_detail = "Eject";
        CHECK(relaxed.token_name(map_event(ev, relaxed)) == "OTHER");
    }
}

TEST_CASE("vocabulary invariants are checked at construction") {
    CHECK_THROWS_AS(BehaviorVocabulary::create({{"A", 0}, {"A", 0}}, {"ch0"}), ConfigError);
    CHECK_THROWS_AS(BehaviorVocabulary::create({{"A", 0}, {"B", 2}}, {}), ConfigError);
    CHECK_THROWS_AS(BehaviorVocabulary::create({}, {}), ConfigError);
}

TEST_CASE("build_sessions groups, sorts, and labels") {
    const BehaviorVocabulary vocab = BehaviorVocabulary::default_vocabulary();
    const Day day0 = days_from_civil(2010, 1, 4);

    std::vector<RawEvent> events;
    auto add = [&](const char* id, Day day, int hour, const char* user, LogSource src,
                   const char* detail) {
        RawEvent ev;
        ev.event_id = id;
        ev.timestamp = std::int64_t(day) * kSecondsPerDay + hour * 3600;
        ev.user = user;
        ev.host = "PC";
        ev.source = src;
        ev.action_detail = detail;
        events.push_back(ev);
    };
    // deliberately out of order
    add("C", day0, 17, "A", LogSource::Logon, "Logoff");
    add("A", day0, 8, "A", LogSource::Logon, "Logon");
    add("B", day0, 12, "A", LogSource::Http, "http://x");
    add("D", day0 + 1, 9, "A", LogSource::Logon, "Logon");
    add("E", day0 + 1, 10, "A", LogSource::Email, "to@x");
    add("F", day0, 9, "B", LogSource::Logon, "Logon");

    LabelSet labels;
    labels.emplace("A", day0 + 1);

    const auto sessions = build_sessions(events, vocab, labels);
    REQUIRE(sessions.size() == 3);

    CHECK(sessions[0].user == "A");
    CHECK(sessions[0].day == day0);
    CHECK(sessions[0].label == 0);
    REQUIRE(sessions[0].tokens.size() == 3);
    CHECK(vocab.token_name(sessions[0].tokens[0]) == "LOGON");
    CHECK(vocab.token_name(sessions[0].tokens[1]) == "HTTP_VISIT");
    CHECK(vocab.token_name(sessions[0].tokens[2]) == "LOGOFF");

    CHECK(sessions[1].user == "A");
    CHECK(sessions[1].day == day0 + 1);
    CHECK(sessions[1].label == 1);
    CHECK(sessions[1].tokens.size() == 2);

    CHECK(sessions[2].user == "B");
    CHECK(sessions[2].tokens.size() == 1);

    SUBCASE("every event lands in exactly one session") {
        std::size_t total = 0;
        for (const auto& s : sessions) total += s.tokens.size();
        CHECK(total == events.size());
    }
    SUBCASE("equal timestamps break ties by source then id") {
        std::vector<RawEvent> tie;
        add("Z2", day0, 8, "C", LogSource::Device, "Connect");
        add("Z1", day0, 8, "C", LogSource::Logon, "Logon");
        tie.push_back(events[events.size() - 2]);
        tie.push_back(events[events.size() - 1]);
        const auto out = build_sessions(tie, vocab, {});
        REQUIRE(out.size() == 1);
        CHECK(vocab.token_name(out[0].tokens[0]) == "LOGON");
        CHECK(vocab.token_name(out[0].tokens[1]) == "DEVICE_CONNECT");
    }
}

TEST_CASE("session dump round-trips byte-identically") {
    const BehaviorVocabulary vocab = BehaviorVocabulary::default_vocabulary();
    std::vector<DaySession> sessions(2);
    sessions[0].user = "A";
    sessions[0].day = days_from_civil(2010, 2, 1);
    sessions[0].tokens = {0, 4, 6, 1};
    sessions[0].label = 1;
    sessions[1].user = "B";
    sessions[1].day = days_from_civil(2010, 2, 2);
    sessions[1].tokens = {2, 3};
    sessions[1].label = 0;

    std::ostringstream first;
    write_sessions(first, sessions, vocab);
    std::istringstream back(first.str());
    const auto parsed = read_sessions(back, vocab);
    std::ostringstream second;
    write_sessions(second, parsed, vocab);
    CHECK(first.str() == second.str());
    CHECK(first.str().find("A,2010-02-01,1,LOGON HTTP_VISIT EMAIL_SEND LOGOFF") == 0);
}

TEST_CASE("frequency matrix counting") {
    const BehaviorVocabulary vocab = BehaviorVocabulary::default_vocabulary();
    const Day day0 = days_from_civil(2010, 1, 4);

    DaySession s1;
    s1.user = "A";
    s1.day = day0;
    s1.tokens = {vocab.find("HTTP_VISIT"), vocab.find("HTTP_VISIT"), vocab.find("EMAIL_SEND")};
    DaySession s2;
    s2.user = "A";
    s2.day = day0 + 2;  // leaves a zero-filled gap at day0+1
    s2.tokens = {vocab.find("LOGON")};

    const FrequencyMatrix f = build_frequency_matrix({s1, s2}, vocab, day0, day0 + 2);
    CHECK(f.channels() == 7);
    CHECK(f.days() == 3);
    CHECK(f.values(4, 0) == 2.0);  // http channel
    CHECK(f.values(5, 0) == 1.0);  // email channel
    CHECK(f.values(0, 0) == 0.0);
    for (int c = 0; c < 7; ++c) CHECK(f.values(c, 1) == 0.0);
    CHECK(f.values(0, 2) == 1.0);

    SUBCASE("column sums equal session lengths") {
        double col0 = 0, col1 = 0, col2 = 0;
        for (int c = 0; c < 7; ++c) {
            col0 += f.values(c, 0);
            col1 += f.values(c, 1);
            col2 += f.values(c, 2);
        }
        CHECK(col0 == 3.0);
        CHECK(col1 == 0.0);
        CHECK(col2 == 1.0);
    }
    SUBCASE("session outside the range is a range error") {
        DaySession out_of_range = s1;
        out_of_range.day = day0 + 40;
        CHECK_THROWS_AS(build_frequency_matrix({out_of_range}, vocab, day0, day0 + 2),
                        RangeError);
    }
    SUBCASE("T=1 single column") {
        const FrequencyMatrix one = build_frequency_matrix({s1}, vocab, day0, day0);
        CHECK(one.days() == 1);
        double sum = 0;
        for (int c = 0; c < 7; ++c) sum += one.values(c, 0);
        CHECK(sum == 3.0);
    }
}

TEST_CASE("normalize modes") {
    FrequencyMatrix f;
    f.user = "A";
    f.start_day = 0;
    f.values = Matrix(2, 3);
    f.values(0, 0) = 2;
    f.values(0, 1) = 2;
    f.values(0, 2) = 2;
    f.values(1, 0) = 0;
    f.values(1, 1) = 2;
    f.values(1, 2) = 4;

    SUBCASE("none is the identity") {
        const NormalizedSignal n = normalize(f, NormalizeMode::None);
        CHECK(n.values.data == f.values.data);
    }
    SUBCASE("constant channel passes through with unit stddev") {
        const NormalizedSignal n = normalize(f, NormalizeMode::ZscorePerChannel);
        CHECK(n.values(0, 0) == 0.0);
        CHECK(n.values(0, 1) == 0.0);
        CHECK(n.stats[0].mean == 2.0);
        CHECK(n.stats[0].stddev == 1.0);
    }
    SUBCASE("two-point z-score") {
        FrequencyMatrix g;
        g.values = Matrix(1, 2);
        g.values(0, 0) = 0;
        g.values(0, 1) = 2;
        const NormalizedSignal n = normalize(g, NormalizeMode::ZscorePerChannel);
        CHECK(n.values(0, 0) == doctest::Approx(-1.0));
        CHECK(n.values(0, 1) == doctest::Approx(1.0));
    }
    SUBCASE("inverse map reproduces the input") {
        const NormalizedSignal n = normalize(f, NormalizeMode::ZscorePerChannel);
        const Matrix back = denormalize(n);
        for (std::size_t i = 0; i < back.data.size(); ++i) {
            CHECK(back.data[i] == doctest::Approx(f.values.data[i]).epsilon(1e-9));
        }
    }
    SUBCASE("z-score needs two samples") {
        FrequencyMatrix g;
        g.values = Matrix(1, 1, 5.0);
        CHECK_THROWS_AS(normalize(g, NormalizeMode::ZscorePerChannel), DimensionError);
    }
}

TEST_CASE("frequency csv round trip") {
    FrequencyMatrix f;
    f.user = "A";
    f.start_day = days_from_civil(2010, 3, 1);
    f.values = Matrix(2, 4);
    for (std::size_t i = 0; i < f.values.data.size(); ++i) f.values.data[i] = double(i) * 1.5;

    const std::string path = "freq_roundtrip_test.csv";
    write_frequency_csv_file(path, f, {"http", "email"});
    const FrequencyMatrix back = read_frequency_csv_file(path);
    CHECK(back.start_day == f.start_day);
    CHECK(back.values.rows == 2);
    CHECK(back.values.cols == 4);
    for (std::size_t i = 0; i < f.values.data.size(); ++i) {
        CHECK(back.values.data[i] == doctest::Approx(f.values.data[i]).epsilon(1e-12));
    }
    std::remove(path.c_str());
}

TEST_CASE("fusion block layout") {
    FrequencyMatrix f;
    f.user = "A";
    f.start_day = 0;
    f.values = Matrix(2, 1);
    f.values(0, 0) = 3;
    f.values(1, 0) = 1;

    ModeTensor u;
    u.modes.assign(2, Matrix(2, 1));
    u.modes[0](0, 0) = 2;
    u.modes[0](1, 0) = 0.5;
    u.modes[1](0, 0) = 1;
    u.modes[1](1, 0) = 0.5;
    u.omegas = {0.1, 0.3};

    const FusedSignal z = fuse(f, u);
    CHECK(z.rows() == 6);
    CHECK(z.days() == 1);
    const std::vector<double> expect = {3, 1, 2, 0.5, 1, 0.5};
    for (int r = 0; r < 6; ++r) CHECK(z.z(r, 0) == expect[r]);

    SUBCASE("slicing rows recovers the blocks exactly") {
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(z.z(c, 0) == f.values(c, 0));
            CHECK(z.z(2 + c, 0) == u.modes[0](c, 0));
            CHECK(z.z(4 + c, 0) == u.modes[1](c, 0));
        }
    }
    SUBCASE("K=0 tensor folds to the frequency matrix") {
        ModeTensor empty;
        const FusedSignal same = fuse(f, empty);
        CHECK(same.rows() == 2);
        CHECK(same.z.data == f.values.data);
    }
    SUBCASE("shape mismatch raises") {
        ModeTensor bad;
        bad.modes.assign(1, Matrix(3, 1));
        CHECK_THROWS_AS(fuse(f, bad), DimensionError);
    }
}
