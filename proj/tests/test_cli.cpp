#include <gtest/gtest.h>

#include "cli.hpp"

using namespace linvol;
using namespace linvol::cli;
namespace fs = std::filesystem;

namespace {

const char* kGolden = R"({"top":["a","b"],"bottom":["b","a"],"lengths":{"a":"-1/2+1/2√5","b":"3/2-1/2√5"}})";

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("linvol_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    return dir;
}

Config config(const std::string& command, const std::string& perm, const std::string& out) {
    Config c;
    c.command = command;
    c.perm = perm;
    c.out = out;
    return c;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(path.string()));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

struct Captured {
    Outcome outcome;
    std::string out, err;
};

Captured capture(const Config& c) {
    std::ostringstream out, err;
    auto o = run(c, out, err);
    return {o, out.str(), err.str()};
}

} // namespace

TEST(Cli, ValidateExample) {
    auto dir = scratch("validate");
    auto r = capture(config("validate", "a a b b / c c", dir.string()));
    ASSERT_EQ(r.outcome.exit_code, 0) << r.err;
    auto s = json::parse(read_file((dir / "summary.json").string()));
    // expected values from the genperm module itself
    auto p = parse_permutation("a a b b / c c");
    EXPECT_EQ(s["result"]["d"], std::to_string(p.size()));
    EXPECT_EQ(s["result"]["d"], "3");
    EXPECT_EQ(s["result"]["type"], json({"4", "2"}));
    EXPECT_EQ(s["result"]["irreducible"], true);
    EXPECT_EQ(s["result"]["stratum"], stratum(p).str());
    EXPECT_EQ(json::parse(r.out), s);
}

TEST(Cli, ValidateReducibleIsAVerdict) {
    auto dir = scratch("reducible");
    auto r = capture(config("validate", "a b / a b", dir.string()));
    EXPECT_EQ(r.outcome.exit_code, 2);
    auto s = json::parse(read_file((dir / "summary.json").string()));
    EXPECT_EQ(s["result"]["irreducible"], false);
}

TEST(Cli, InductGoldenAlternates) {
    auto dir = scratch("induct");
    auto c = config("induct", kGolden, dir.string());
    c.steps = 10;
    auto r = capture(c);
    ASSERT_EQ(r.outcome.exit_code, 0) << r.err;
    auto rows = read_csv(dir / "induction.csv");
    ASSERT_EQ(rows.size(), 11u);
    // oracle: step the rauzy module directly
    QuadraticNumber g(Rational(-1, 2), Rational(1, 2), 5);
    auto state = InductionState<QuadraticNumber>::from(LinearInvolution<QuadraticNumber>(parse_permutation("a b / b a"), {g, QuadraticNumber(1) - g}));
    for (std::size_t k = 1; k <= 10; ++k) {
        auto step = induction_step(state);
        state = step.next;
        EXPECT_EQ(rows[k][1], to_string(step.move.arrow.row));
        EXPECT_EQ(rows[k][4], state.lengths[0].str());
        if (k > 1) {
            EXPECT_NE(rows[k][1], rows[k - 1][1]);
            EXPECT_NE(rows[k][2], rows[k - 1][2]);
        }
    }
}

TEST(Cli, SolveRefusalIsMachineReadable) {
    auto dir = scratch("refusal");
    auto c = config("solve", "a b c d / d c b a", dir.string());
    c.seed = 3;
    c.steps = 20;
    c.samples = 1000;
    auto r = capture(c);
    ASSERT_EQ(r.outcome.exit_code, 2) << r.err;
    auto s = json::parse(read_file((dir / "summary.json").string()));
    EXPECT_EQ(s["result"]["refused"], true);
    EXPECT_EQ(s["result"]["reason"]["code"], "DiagnosticsFailed");
    auto line = json::parse(r.err.substr(0, r.err.find('\n')));
    EXPECT_EQ(line["code"], "DiagnosticsFailed");
}

TEST(Cli, SolveGoldenWritesDecades) {
    auto dir = scratch("solve");
    auto c = config("solve", kGolden, dir.string());
    c.steps = 30;
    c.samples = 10000;
    auto r = capture(c);
    ASSERT_EQ(r.outcome.exit_code, 0) << r.err;
    auto s = json::parse(read_file((dir / "summary.json").string()));
    EXPECT_EQ(s["result"]["residual"], "0");
    // one row per decade 1..10, ..., 1000..10000
    auto plot = read_csv(dir / "decades_plot.csv");
    ASSERT_EQ(plot.size(), 5u);
    EXPECT_EQ(plot[0][0], "n [iterations]");
    EXPECT_EQ(read_csv(dir / "decades.csv").size(), 5u);
}

TEST(Cli, RothRatioSeriesHasOneRowPerBlock) {
    auto dir = scratch("roth");
    auto c = config("roth", kGolden, dir.string());
    c.steps = 12;
    auto r = capture(c);
    ASSERT_NE(r.outcome.exit_code, 1) << r.err;
    auto s = json::parse(read_file((dir / "summary.json").string()));
    const auto blocks = parse_unsigned(s["result"]["blocks"].get<std::string>(), "blocks");
    EXPECT_EQ(blocks, 12u);
    auto plot = read_csv(dir / "condition_a_ratio.csv");
    EXPECT_EQ(plot.size(), blocks + 1);
    EXPECT_EQ(plot[0][0], "k [block]");
}

TEST(Cli, SummaryRoundTrips) {
    auto dir = scratch("roundtrip");
    auto c = config("measure", "a b c / c b a", dir.string());
    c.samples = 20;
    c.steps = 8;
    c.epsilon = 0.3;
    c.tol = 1e-7;
    c.seed = 18446744073709551557ULL;
    c.phi = {{"a", {"1/3", "2"}}};
    c.subset = {"a", "b"};
    c.qext_depth = 4;
    auto r = capture(c);
    ASSERT_NE(r.outcome.exit_code, 1) << r.err;
    auto s = json::parse(read_file((dir / "summary.json").string()));
    EXPECT_EQ(from_json(s["config"]), c);
    EXPECT_EQ(s, r.outcome.summary);
    // numerics are strings that parse back
    EXPECT_NO_THROW(parse_double(s["result"]["fraction"].get<std::string>(), "fraction"));
    for (const auto& x : s["result"]["wilson"]) EXPECT_NO_THROW(parse_double(x.get<std::string>(), "wilson"));
    EXPECT_TRUE(s["result"].contains("qext"));
}

TEST(Cli, DeterministicCsv) {
    auto a = scratch("det_a"), b = scratch("det_b");
    auto c = config("measure", "a a b / b c c", a.string());
    c.samples = 30;
    c.steps = 10;
    c.seed = 11;
    ASSERT_NE(capture(c).outcome.exit_code, 1);
    c.out = b.string();
    c.threads = 2;
    ASSERT_NE(capture(c).outcome.exit_code, 1);
    EXPECT_EQ(read_file((a / "samples.csv").string()), read_file((b / "samples.csv").string()));
    for (const auto& e : fs::directory_iterator(a)) EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos);
}

TEST(Cli, SampledLengthsFollowTheSeed) {
    auto a = scratch("seed_a"), b = scratch("seed_b");
    auto c = config("induct", "a b c / c b a", a.string());
    c.steps = 5;
    c.seed = 4;
    ASSERT_EQ(capture(c).outcome.exit_code, 0);
    c.out = b.string();
    ASSERT_EQ(capture(c).outcome.exit_code, 0);
    EXPECT_EQ(read_file((a / "induction.csv").string()), read_file((b / "induction.csv").string()));
    auto s = json::parse(read_file((a / "summary.json").string()));
    auto expected = sample_lengths(parse_permutation("a b c / c b a"), 4, SampleMode::Rational, 512);
    EXPECT_EQ(s["result"]["lengths"]["a"], to_string(expected.exact[0]));
}

TEST(Cli, InputErrors) {
    auto dir = scratch("errors");
    auto r = capture(config("validate", "a b / b", dir.string()));
    EXPECT_EQ(r.outcome.exit_code, 1);
    auto rec = json::parse(r.err);
    EXPECT_EQ(rec["code"], "NotTwoToOne");
    EXPECT_TRUE(rec.contains("message") && rec.contains("context"));

    EXPECT_EQ(capture(config("validate", "/nonexistent/perm.json", dir.string())).outcome.exit_code, 1);
    EXPECT_EQ(capture(config("frobnicate", "a b / b a", dir.string())).outcome.exit_code, 1);
    auto bad = capture(config("induct", R"({"top":["a","b"],"bottom":["b","a"],"lengths":{"a":"1"}})", dir.string()));
    EXPECT_EQ(bad.outcome.exit_code, 1);
    EXPECT_EQ(json::parse(bad.err)["code"], "InvalidInput");
    auto unbalanced = capture(config("induct", R"({"top":["a","a","b"],"bottom":["b","c","c"],"lengths":{"a":"1","b":"1","c":"2"}})", dir.string()));
    EXPECT_EQ(json::parse(unbalanced.err)["code"], "BalanceViolated");

    try {
        from_json(json{{"steps", "3"}, {"horizon", "5"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
        EXPECT_EQ(e.context(), "horizon");
    }
    EXPECT_THROW(from_json(json{{"steps", "-3"}}), Error);
    EXPECT_EQ(from_json(json{{"steps", 7}, {"epsilon", 0.25}}).steps, 7u);
}

TEST(Cli, PermutationFile) {
    auto dir = scratch("file");
    fs::create_directories(dir);
    write_atomic(dir / "perm.json", kGolden);
    auto c = config("validate", (dir / "perm.json").string(), dir.string());
    EXPECT_EQ(capture(c).outcome.exit_code, 0);
}

TEST(PlotData, WritesUnitsAndRejectsEmpty) {
    auto dir = scratch("plot");
    Series s{"k", "block", "ratio", "1", {{0, 1.5}, {1, 2.25}}};
    emit_plotdata(s, dir / "p.csv");
    EXPECT_EQ(read_file((dir / "p.csv").string()), "k [block],ratio [1]\n0,1.5\n1,2.25\n");
    s.points.clear();
    try {
        emit_plotdata(s, dir / "q.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    }
    EXPECT_FALSE(fs::exists(dir / "q.csv"));
    s.points = {{0, 1}};
    try {
        emit_plotdata(s, "/proc/linvol/forbidden.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}
