#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "pmetric/harness.hpp"

namespace {

using namespace pmetric;
using namespace pmetric::harness;

std::size_t column(const Table& t, const std::string& name) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw std::runtime_error("missing column " + name);
    return static_cast<std::size_t>(it - t.columns.begin());
}

const char* kSmallGrid = "grid_points = 256\nrefine_points = 8\n";

}  // namespace

TEST(Config, ParsesValuesAndComments) {
    const Config c = Config::parse_string("# header\n  a = 1.5  # trailing\n\nname= arnold\nlist = 1, 2,3\nflag = true\n");
    EXPECT_DOUBLE_EQ(c.get_double("a", 0.0), 1.5);
    EXPECT_EQ(c.get_string("name", ""), "arnold");
    EXPECT_EQ(c.get_int_list("list", {}), (std::vector<long long>{1, 2, 3}));
    EXPECT_TRUE(c.get_bool("flag", false));
    EXPECT_EQ(c.get_int("missing", 7), 7);
    EXPECT_EQ(c.line_of("name"), 4);
}

TEST(Config, ErrorsCarryLineNumbers) {
    try {
        (void)Config::parse_string("a = 1\nnot a pair\n", "x.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_NE(std::string(e.what()).find("x.cfg:2"), std::string::npos);
    }
    EXPECT_THROW((void)Config::parse_string("a = 1\na = 2\n"), ConfigError);
    const Config bad = Config::parse_string("a = 1\nb = oops\n");
    try {
        (void)bad.get_double("b", 0.0);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    const Config unknown = Config::parse_string("k = 3\nbogus = 1\n");
    try {
        unknown.check_keys({"k"});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    }
}

TEST(Harness, UnknownKeyIsConfigFailure) {
    const RunResult r = run("partition", Config::parse_string("k = 3\ncolour = red\n"));
    EXPECT_EQ(r.exit_code, kConfigFailure);
    ASSERT_FALSE(r.messages.empty());
    EXPECT_NE(r.messages[0].find(":2"), std::string::npos);
}

TEST(Harness, UnknownCommandAndFamily) {
    EXPECT_EQ(run("frobnicate", Config{}).exit_code, kConfigFailure);
    EXPECT_EQ(run("partition", Config::parse_string("family = tent\n")).exit_code, kConfigFailure);
}

TEST(Harness, PartitionSchemaAndTiling) {
    const RunResult r = run("partition", Config::parse_string("family = arnold\nk = 5\n"));
    ASSERT_EQ(r.exit_code, kPass);
    const Table& t = r.table;
    for (const char* c : {"order", "kind", "orbit_index", "lo", "hi", "length", "seed", "grid", "eps_guard", "code_version"})
        EXPECT_NO_THROW((void)column(t, c)) << c;
    EXPECT_EQ(t.rows.size(), 8u + 5u);
    double total = 0.0;
    for (const auto& row : t.rows) {
        const std::string& kind = row[column(t, "kind")];
        EXPECT_TRUE(kind == "lengthy" || kind == "short") << kind;
        total += std::stod(row[column(t, "length")]);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    ASSERT_FALSE(t.footer.empty());
    EXPECT_EQ(t.footer[0].rfind("tiling_defect=", 0), 0u);
}

TEST(Harness, DepthCapRefusal) {
    EXPECT_EQ(run("partition", Config::parse_string("k = 11\n")).exit_code, kAccuracyRefusal);
    EXPECT_EQ(run("partition", Config::parse_string("k = 11\nacknowledge_accuracy = true\n")).exit_code, kPass);
    EXPECT_EQ(run("puresing", Config::parse_string("kappa_max = 12\n")).exit_code, kAccuracyRefusal);
}

TEST(Harness, KappaNotAboveLambdaIsConfigFailure) {
    const RunResult r = run("puresing", Config::parse_string("lambda = 4\nkappa_min = 4\nkappa_max = 6\n"));
    EXPECT_EQ(r.exit_code, kConfigFailure);
    ASSERT_FALSE(r.messages.empty());
    EXPECT_NE(r.messages[0].find("lambda"), std::string::npos);
}

TEST(Harness, NumericalFailureIsRefusal) {
    // Too deep for the available parameter precision.
    const RunResult r = run("partition", Config::parse_string("k = 40\nacknowledge_accuracy = true\n"));
    EXPECT_EQ(r.exit_code, kAccuracyRefusal);
}

TEST(Harness, NegativeQFailsUbdl) {
    const RunResult r =
        run("ubdl", Config::parse_string(std::string(kSmallGrid) + "count = 5\nQ = -50\nd1_samples = 2000\n"));
    EXPECT_EQ(r.exit_code, kBoundFailure);
    EXPECT_EQ(r.table.rows.size(), 5u);
    const std::size_t p = column(r.table, "pass");
    EXPECT_TRUE(std::any_of(r.table.rows.begin(), r.table.rows.end(), [&](const auto& row) { return row[p] == "false"; }));
}

TEST(Harness, UbdlSmallSuitePasses) {
    const RunResult r = run("ubdl", Config::parse_string(std::string(kSmallGrid) + "count = 4\nd1_samples = 2000\n"));
    EXPECT_EQ(r.exit_code, kPass);
    EXPECT_EQ(r.table.rows.front()[column(r.table, "seed")], std::to_string(kUbdlSuiteSeed));
}

TEST(Harness, IdentitySuitesVanish) {
    const RunResult u = run("ubdl", Config::parse_string(std::string(kSmallGrid) + "suite = identity\ncount = 3\n"));
    ASSERT_EQ(u.exit_code, kPass);
    for (const auto& row : u.table.rows) {
        EXPECT_LE(std::stod(row[column(u.table, "measured")]), 1e-12);
        EXPECT_EQ(std::stod(row[column(u.table, "d1")]), 0.0);
    }
    const RunResult c = run("cancel", Config::parse_string(std::string(kSmallGrid) + "suite = identity\ncount = 3\n"));
    ASSERT_EQ(c.exit_code, kPass);
    for (const auto& row : c.table.rows) {
        EXPECT_LE(std::stod(row[column(c.table, "gap")]), 1e-12);
        EXPECT_LE(std::stod(row[column(c.table, "bound")]), 1e-12);
    }
}

TEST(Harness, SeedOverrideAndDeterminism) {
    const Config cfg = Config::parse_string(std::string(kSmallGrid) + "count = 6\nmax_stages = 4\n");
    const std::string a = to_csv(run("cancel", cfg, 99).table);
    const std::string b = to_csv(run("cancel", cfg, 99).table);
    const std::string other = to_csv(run("cancel", cfg, 100).table);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, other);
    EXPECT_NE(a.find(",99,"), std::string::npos);
}

TEST(Harness, CsvTimestampIsOptional) {
    Table t;
    t.columns = {"x", "y"};
    t.add({"1", "2"});
    t.footer.push_back("note");
    EXPECT_EQ(to_csv(t), "x,y\n1,2\n# note\n");
    EXPECT_EQ(to_csv(t, "2020-01-01T00:00:00Z").rfind("# generated 2020-01-01T00:00:00Z\n", 0), 0u);
    EXPECT_THROW(t.add({"1"}), Error);
}

TEST(Harness, PuresingRigidIsZeroRun) {
    const RunResult r =
        run("puresing", Config::parse_string(std::string(kSmallGrid) + "family = rigid\nkappa_min = 5\nkappa_max = 7\n"));
    EXPECT_EQ(r.exit_code, kPass);
    ASSERT_EQ(r.table.rows.size(), 3u);
    for (const auto& row : r.table.rows) EXPECT_LE(std::stod(row[column(r.table, "gap")]), 1e-10);
    for (const char* c : {"kappa", "lambda", "j", "delta", "d_tilde", "gap", "bound", "E_chi", "v_j", "L1_density_dev",
                          "fit_K1", "fit_K2", "residual", "seed", "grid", "eps_guard"})
        EXPECT_NO_THROW((void)column(r.table, c)) << c;
}
