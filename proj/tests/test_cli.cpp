#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "commands.hpp"

using namespace mwcli;

namespace {

ExperimentConfig cfg(const std::string& text) { return parse_config_text(text); }

const json& first_char(const CommandResult& r) { return r.report.at("results").at("characteristics").at(0); }

bool has_failed(const json& report, const std::string& suite) {
    for (const json& a : report.at("assertions"))
        if (a.at("suite") == suite && !a.at("pass").get<bool>()) return true;
    return false;
}

}  // namespace

TEST(Config, MinimalDefaults) {
    const ExperimentConfig c = cfg(R"({"weight": {"kind": "identity"}})");
    EXPECT_EQ(c.weight.m(), 1);
    ASSERT_EQ(c.ps.size(), 1u);
    EXPECT_EQ(c.ps[0], 2.0);
    EXPECT_EQ(c.box.dim(), 1);
}

TEST(Config, NestedWeights) {
    const ExperimentConfig c = cfg(R"({
      "weight": {"kind": "conjugated", "unitary": {"rotation": 0.3},
                 "inner": {"kind": "diagonal", "entries": [{"kind": "power", "a": 1}, {"kind": "log_out", "a": -0.5, "b": 1}]}},
      "p": [1, 2]})");
    EXPECT_EQ(c.weight.m(), 2);
    EXPECT_EQ(c.ps.size(), 2u);
}

TEST(Config, SyntaxErrorReportsLine) {
    try {
        cfg("{\n  \"weight\": {\"kind\": \"identity\"},\n  \"p\": ,\n}");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(Config, UnknownKeyNamesField) {
    try {
        cfg(R"({"weight": {"kind": "power", "a": 1, "alpha": 2}})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "weight.alpha");
    }
    EXPECT_THROW(cfg(R"({"weight": {"kind": "nope"}})"), ConfigError);
    EXPECT_THROW(cfg(R"({"weight": {"kind": "identity"}, "p": -1})"), ConfigError);
    EXPECT_THROW(cfg(R"({"weight": {"kind": "identity"}, "family": {"box": [[0], [1, 2]]}})"), ConfigError);
    EXPECT_THROW(cfg(R"({"weight": {"kind": "identity"}, "kinds": ["bogus"]})"), ConfigError);
}

TEST(Config, NonFiniteNumbersAsStrings) {
    EXPECT_EQ(num(std::numeric_limits<double>::infinity()), json("inf"));
    EXPECT_TRUE(std::isinf(from_num(json("inf"))));
    EXPECT_EQ(from_num(num(0.25)), 0.25);
}

TEST(Characteristic, IdentityIsOne) {
    const CommandResult r = cmd_characteristic(cfg(R"({"weight": {"kind": "identity", "m": 2}, "kinds": ["ap", "apinf"]})"));
    EXPECT_EQ(r.exit_code, kPass);
    for (const json& ch : r.report.at("results").at("characteristics")) EXPECT_NEAR(ch.at("value").get<double>(), 1.0, 1e-9);
    EXPECT_EQ(r.report.at("schema"), kSchema);
    EXPECT_TRUE(r.report.at("config").contains("seed"));
}

TEST(Characteristic, PowerBridgeValue) {
    const CommandResult r = cmd_characteristic(cfg(R"({"weight": {"kind": "power", "a": 1}, "p": 1})"));
    EXPECT_NEAR(first_char(r).at("value").get<double>(), std::numbers::e / 2.0, 1e-3);
}

TEST(Characteristic, DivergenceExitAndWitness) {
    const CommandResult r = cmd_characteristic(
        cfg(R"({"weight": {"kind": "power", "a": 3}, "p": 3, "family": {"box": [[-1], [1]]}, "kinds": ["ap"]})"));
    EXPECT_EQ(r.exit_code, kAssertionFailure);
    EXPECT_EQ(first_char(r).at("value"), json("inf"));
    EXPECT_FALSE(first_char(r).at("witness").is_null());
}

TEST(Reduce, Examples) {
    const CommandResult id = cmd_reduce(cfg(R"({"weight": {"kind": "identity", "m": 2}, "cube": [0, 1]})"));
    const json& a = id.report.at("results").at("reducing_operators").at(0);
    EXPECT_NEAR(a.at("matrix").at("re")[0][0].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(a.at("c_low").get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(a.at("c_high").get<double>(), 1.0, 1e-12);

    const CommandResult d = cmd_reduce(cfg(R"({"weight": {"kind": "diagonal", "entries":
        [{"kind": "power", "a": 1}, {"kind": "power", "a": 0}]}, "p": 2, "cube": [0, 1]})"));
    const json& m = d.report.at("results").at("reducing_operators").at(0).at("matrix").at("re");
    EXPECT_NEAR(m[0][0].get<double>(), std::sqrt(0.5), 1e-5);
    EXPECT_NEAR(m[1][1].get<double>(), 1.0, 1e-5);

    const CommandResult s = cmd_reduce(cfg(R"({"weight": {"kind": "power", "a": 1}, "p": 1, "cube": [0, 1]})"));
    EXPECT_NEAR(s.report.at("results").at("reducing_operators").at(0).at("matrix").at("re")[0][0].get<double>(), 0.5,
                1e-5);
}

TEST(Verify, IdentityAllSuitesPass) {
    const CommandResult r = cmd_verify(cfg(R"({"weight": {"kind": "identity", "m": 2}, "p": [0.5, 2]})"));
    EXPECT_EQ(r.exit_code, kPass) << r.report.at("assertions").dump(1);
    EXPECT_GT(r.report.at("assertions").size(), 20u);
}

TEST(Verify, SharpnessFitsReported) {
    const CommandResult r = cmd_verify(cfg(R"({"weight": {"kind": "sharpness", "d1": 0.5, "d2": 1}, "p": 1,
                                             "sharp": {"d1": 0.5, "d2": 1}})"),
                                       {"sharp"});
    EXPECT_EQ(r.exit_code, kPass);
    const json& fit = r.report.at("results").at("suites").at("sharp").at(0).at("fit");
    EXPECT_GE(fit.at("c_fit").get<double>(), 1.35);
}

TEST(Verify, WrongDimensionFails) {
    const CommandResult r = cmd_verify(
        cfg(R"({"weight": {"kind": "power", "a": -0.5}, "p": 1, "sharp": {"d1": 0.1, "d2": 0}})"), {"sharp"});
    EXPECT_EQ(r.exit_code, kAssertionFailure);
    EXPECT_TRUE(has_failed(r.report, "sharp"));
    // Nested pairs grow like 2^{0.4 j}; doubling the depth from 10 to 20 multiplies the max by 2^4.
    for (const json& a : r.report.at("assertions"))
        if (!a.at("pass").get<bool>()) EXPECT_NEAR(a.at("value").get<double>(), 16.0, 0.5);
}

TEST(Verify, UnknownSuite) {
    EXPECT_THROW(cmd_verify(cfg(R"({"weight": {"kind": "identity"}})"), {"nope"}), ConfigError);
}

TEST(Verify, Deterministic) {
    const ExperimentConfig c = cfg(R"({"weight": {"kind": "log_out", "a": -0.5, "b": 1}, "p": 2, "seed": 99})");
    const std::vector<std::string> s{"compare", "multiplier", "rhi"};
    EXPECT_EQ(cmd_verify(c, s).report.dump(), cmd_verify(c, s).report.dump());
}

TEST(Report, SingleInputIdempotent) {
    const CommandResult a = cmd_characteristic(cfg(R"({"weight": {"kind": "power", "a": 1}, "p": [1, 2]})"));
    const CommandResult m = cmd_report({a.report}, {"a.json"});
    EXPECT_EQ(m.report.at("results"), a.report.at("results"));
    EXPECT_EQ(m.report.at("assertions"), a.report.at("assertions"));
}

TEST(Report, DisjointFamiliesTakeMax) {
    const CommandResult a = cmd_characteristic(
        cfg(R"({"weight": {"kind": "log_out", "a": -0.5, "b": 1}, "family": {"box": [[0], [1]], "jmax": 2}})"));
    const CommandResult b = cmd_characteristic(
        cfg(R"({"weight": {"kind": "log_out", "a": -0.5, "b": 1}, "family": {"box": [[2], [3]], "jmax": 2}})"));
    const CommandResult m = cmd_report({a.report, b.report}, {"a", "b"});
    const json& ch = first_char(m);
    const double va = first_char(a).at("value").get<double>(), vb = first_char(b).at("value").get<double>();
    EXPECT_DOUBLE_EQ(ch.at("value").get<double>(), std::max(va, vb));
    EXPECT_EQ(ch.at("per_cube").size(), first_char(a).at("per_cube").size() + first_char(b).at("per_cube").size());
}

TEST(Report, TenDimensionReportsTenSlopeRows) {
    std::vector<json> docs;
    std::vector<std::string> names;
    for (int i = 0; i < 10; ++i) {
        const std::string text = R"({"weight": {"kind": "power", "a": )" + std::to_string(-0.5 + 0.25 * i) +
                                 R"(}, "p": 2, "dimension": {"extreme_exp": 8, "scan_step": 8}})";
        json r = cmd_verify(cfg(text), {"dimension"}).report;
        // keep one estimate per report
        json dims = json::array();
        dims.push_back(r["results"]["dimensions"][0]);
        r["results"]["dimensions"] = dims;
        docs.push_back(r);
        names.push_back("r" + std::to_string(i));
    }
    const std::string csv = to_csv(cmd_report(docs, names).report);
    const auto start = csv.find("source,route,kind,p,d_hat");
    const auto end = csv.find("\n\n", start);
    const std::string section = csv.substr(start, end - start);
    EXPECT_EQ(std::count(section.begin(), section.end(), '\n'), 10);
}

TEST(Report, SchemaMismatch) {
    json bad{{"schema", "mwlab-report/0"}, {"config", json::object()}, {"results", json::object()},
             {"assertions", json::array()}};
    try {
        cmd_report({bad}, {"old.json"});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("mwlab-report/0"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find(kSchema), std::string::npos);
    }
}

TEST(Csv, SectionsPresent) {
    const CommandResult r = cmd_characteristic(cfg(R"({"weight": {"kind": "identity"}})"));
    const std::string csv = to_csv(r.report);
    EXPECT_EQ(csv.rfind("kind,p,center,edge,value,error,diverged\n", 0), 0u);
}
