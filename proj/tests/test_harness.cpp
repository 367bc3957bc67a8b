#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace homspace;

namespace {

const std::string kDir = HOMSPACE_SCENARIO_DIR;

std::size_t lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Generators, DocumentedExamples) {
    EXPECT_EQ(gen::from_json(json{{"kind", "grid1d"}, {"n", 8}}).space.size(), 8u);
    auto sf = gen::from_json(json{{"kind", "snowflake"}, {"beta", 2}, {"base", {{"kind", "grid1d"}, {"n", 3}}}});
    EXPECT_DOUBLE_EQ(sf.space.A0(), 2.0);
    auto c = gen::from_json(json{{"kind", "cantor"}, {"level", 3}, {"ratio", 1.0 / 3}});
    EXPECT_EQ(c.space.size(), 8u);
    EXPECT_NEAR(c.space.A1(), oracle::A1(c.space), 1e-12);
}

TEST(Generators, BadParameters) {
    EXPECT_THROW(gen::from_json(json{{"kind", "torus"}}), InvalidInput);
    EXPECT_THROW(gen::from_json(json{{"kind", "grid2d"}, {"n", 3}, {"metric", "taxi"}}), ParameterError);
    EXPECT_THROW(gen::from_json(json{{"kind", "cantor"}, {"level", 3}, {"ratio", 0.7}}), ParameterError);
    EXPECT_THROW(gen::from_json(json{{"kind", "grid1d"}, {"n", 4}, {"masses", {1, 2}}}), InvalidInput);
    EXPECT_THROW(gen::stretch_pair(1, 2.0), ParameterError);
}

TEST(Generators, MixedPackShape) {
    auto pack = gen::mixed_pack(2024);
    ASSERT_EQ(pack.size(), 50u);
    std::set<std::string> kinds;
    for (const auto& desc : pack) {
        auto g = gen::from_json(desc);
        EXPECT_LE(g.space.size(), 512u);
        kinds.insert(g.kind);
    }
    EXPECT_EQ(kinds, (std::set<std::string>{"grid1d", "grid2d", "cantor", "random_doubling", "snowflake"}));
}

TEST(Report, CsvRowsFollowChecks) {
    RunReport empty;
    empty.scenario = "empty";
    EXPECT_EQ(lines(report_csv(empty)), 1u);
    RunReport one = empty;
    one.rows.push_back({"c", "s", "step", 1.0, 2.0, true, true, 0.5, "w,\"q\""});
    const std::string csv = report_csv(one);
    EXPECT_EQ(lines(csv), 2u);
    EXPECT_NE(csv.find("\"w,\"\"q\"\"\""), std::string::npos);
}

TEST(Report, NonFiniteNumbersStayValidJson) {
    RunReport r;
    r.rows.push_back({"c", "s", "info", 3.0, std::numeric_limits<double>::infinity(), true, false, 1.0, ""});
    json j = json::parse(report_json(r).dump());
    EXPECT_EQ(j["rows"][0]["bound"], "inf");
    EXPECT_TRUE(j.contains("timing"));
    EXPECT_FALSE(report_json(r, false).contains("timing"));
}

TEST(Scenario, IdentitySanityPasses) {
    RunReport r = run_scenario_file(kDir + "/identity-sanity.json");
    EXPECT_TRUE(r.ok());
    for (const auto& o : r.outcomes) EXPECT_TRUE(o.met) << o.check << " " << o.error;
    for (const auto& row : r.rows)
        if (row.step.find("BMO") != std::string::npos && row.required) {
            EXPECT_EQ(row.measured, 0.0) << row.step;
        }
}

TEST(Scenario, RerunIsByteIdentical) {
    json sc = read_json_file(kDir + "/identity-sanity.json");
    RunReport a = run_scenario(sc, kDir, std::nullopt), b = run_scenario(sc, kDir, std::nullopt);
    EXPECT_EQ(report_json(a, false).dump(2), report_json(b, false).dump(2));
    RunReport c = run_scenario(sc, kDir, 99);
    EXPECT_EQ(c.seed, 99u);
}

TEST(Scenario, ExpectationsDecideOutcome) {
    RunReport r = run_scenario_file(kDir + "/negative-controls.json");
    ASSERT_EQ(r.outcomes.size(), 3u);
    EXPECT_TRUE(r.ok());
    EXPECT_GT(r.outcomes[0].failed, 0u);
    EXPECT_FALSE(r.outcomes[1].error.empty());
    json flipped = read_json_file(kDir + "/negative-controls.json");
    flipped["checks"][0]["expect"] = "pass";
    EXPECT_FALSE(run_scenario(flipped, kDir, std::nullopt).ok());
}

TEST(Scenario, RoundTripIsStable) {
    json sc = read_json_file(kDir + "/power-construction.json");
    EXPECT_EQ(json::parse(sc.dump()).dump(), sc.dump());
    RunReport r = run_scenario(sc, kDir, std::nullopt);
    EXPECT_EQ(r.input_hash, fnv1a_hex(sc.dump()));
    EXPECT_TRUE(r.ok());
}
