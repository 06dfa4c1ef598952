#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "test_support.hpp"

using taxopt::testing::read_text;
using taxopt::testing::TempDir;

namespace {

const std::string kCli = TAXOPT_CLI_PATH;
const std::filesystem::path kData = TAXOPT_TEST_DATA_DIR;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(const TempDir& dir, const std::string& args)
{
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "'" + kCli + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(out);
    r.err = read_text(err);
    return r;
}

std::string q(const std::filesystem::path& p)
{
    return "'" + p.string() + "'";
}

bool empty_dir(const std::filesystem::path& p)
{
    return !std::filesystem::exists(p) || std::filesystem::is_empty(p);
}

} // namespace

TEST(Cli, SimulateWritesOutputsAndManifest)
{
    TempDir dir;
    const auto out = dir / "sim";
    const auto r = run(dir, "simulate --scenario uk_synthetic --policy flat:0 --seed 1 --out " + q(out));
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"years.csv", "mix.csv", "objectives.csv", "events.csv", "manifest.json"}) {
        EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
    }
    const auto m = nlohmann::json::parse(read_text(out / "manifest.json"));
    EXPECT_EQ(m["command"], "simulate");
    EXPECT_EQ(m["seed"], 1);
    EXPECT_EQ(m["outputs"].size(), 4U);
    EXPECT_NE(r.out.find("objective_rci"), std::string::npos);
}

TEST(Cli, SimulateIsDeterministic)
{
    TempDir dir;
    for (const char* name : {"a", "b"}) {
        ASSERT_EQ(run(dir, "simulate --scenario uk_synthetic --policy linear:5,50 --seed 3 --out " + q(dir / name)).code,
                  0);
    }
    for (const char* f : {"years.csv", "mix.csv", "objectives.csv", "events.csv"}) {
        EXPECT_EQ(read_text(dir / "a" / f), read_text(dir / "b" / f)) << f;
    }
}

TEST(Cli, InvalidInputExitsOneWithoutOutput)
{
    TempDir dir;
    const auto out = dir / "never";
    EXPECT_EQ(run(dir, "simulate --scenario " + q(kData / "short_year.scenario") + " --policy flat:0 --out " + q(out))
                  .code,
              1);
    EXPECT_EQ(run(dir, "simulate --scenario uk_synthetic --policy flat:900 --out " + q(out)).code, 1);
    EXPECT_EQ(run(dir, "simulate --scenario uk_synthetic --policy wobbly --out " + q(out)).code, 1);
    EXPECT_EQ(run(dir, "simulate --scenario no_such_file --policy flat:0 --out " + q(out)).code, 1);
    EXPECT_EQ(run(dir, "optimize --scenario uk_synthetic --pop 7 --out " + q(out)).code, 1);
    EXPECT_EQ(run(dir, "optimize --scenario uk_synthetic --kind cubic --out " + q(out)).code, 1);
    EXPECT_EQ(run(dir, "benchmark --problem nope --out " + q(out)).code, 1);
    EXPECT_EQ(run(dir, "frobnicate").code, 1);
    EXPECT_EQ(run(dir, "").code, 1);
    EXPECT_TRUE(empty_dir(out));

    const auto r = run(dir, "simulate --scenario " + q(kData / "short_year.scenario") + " --policy flat:0 --out " +
                                q(out));
    EXPECT_NE(r.err.find("representative_days"), std::string::npos);
}

TEST(Cli, RuntimeFailureExitsTwoWithoutOutput)
{
    TempDir dir;
    // All-solar start year gives a zero base intensity, then the solar farm
    // retires and gas takes over: the relative intensity is undefined.
    auto j = nlohmann::json::parse(read_text(kData / "minimal.scenario"));
    j["technologies"].push_back({{"name", "solar"},
                                 {"capacity_mw", 1000},
                                 {"capital_cost", 1e6},
                                 {"variable_om", 0},
                                 {"emission_factor", 0},
                                 {"lifetime_years", 1},
                                 {"resource", "solar"}});
    j["initial_fleet"][0]["commission_year"] = 2021;
    j["initial_fleet"].push_back({{"technology", "solar"}, {"owner", "g1"}, {"commission_year", 2020}});
    j["representative_days"][0]["segments"][0]["solar_capacity_factor"] = 1.0;
    const auto path = dir.write("flip.scenario", j.dump());
    const auto out = dir / "never";
    const auto r = run(dir, "simulate --scenario " + q(path) + " --policy flat:0 --out " + q(out));
    EXPECT_EQ(r.code, 2) << r.err;
    EXPECT_TRUE(empty_dir(out));
}

TEST(Cli, OptimizeFreeGenomesAndReplay)
{
    TempDir dir;
    const auto out = dir / "opt";
    const auto r =
        run(dir, "optimize --scenario uk_synthetic --kind free --pop 4 --gens 1 --seed 2 --out " + q(out));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("final front"), std::string::npos);
    const auto pareto = nlohmann::json::parse(read_text(out / "pareto.json"));
    EXPECT_EQ(pareto["kind"], "free");
    ASSERT_FALSE(pareto["front"].empty());
    for (const auto& m : pareto["front"]) {
        ASSERT_EQ(m["genome"].size(), 18U);
        for (const auto& g : m["genome"]) {
            EXPECT_GE(g.get<double>(), 0.0);
            EXPECT_LE(g.get<double>(), 250.0);
        }
        EXPECT_EQ(m["carbon_prices"], m["genome"]);
    }

    const auto again = dir / "again";
    ASSERT_EQ(run(dir, "replay --manifest " + q(out / "manifest.json") + " --out " + q(again) + " --jobs 2").code, 0);
    EXPECT_EQ(read_text(out / "generations.csv"), read_text(again / "generations.csv"));
    EXPECT_EQ(read_text(out / "pareto.json"), read_text(again / "pareto.json"));
}

TEST(Cli, OptimizeLinearGenomesStayInBounds)
{
    TempDir dir;
    const auto out = dir / "opt";
    ASSERT_EQ(run(dir, "optimize --scenario uk_synthetic --kind linear --pop 6 --gens 2 --seed 4 --out " + q(out)).code,
              0);
    const auto pareto = nlohmann::json::parse(read_text(out / "pareto.json"));
    for (const auto& m : pareto["front"]) {
        ASSERT_EQ(m["genome"].size(), 2U);
        EXPECT_GE(m["genome"][0].get<double>(), -14.0);
        EXPECT_LE(m["genome"][0].get<double>(), 14.0);
        EXPECT_GE(m["genome"][1].get<double>(), 0.0);
        EXPECT_LE(m["genome"][1].get<double>(), 250.0);
    }
    const auto rows = read_text(out / "generations.csv");
    EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 1 + 3 * 6);
}

TEST(Cli, BenchmarkThresholdControlsExitCode)
{
    TempDir dir;
    EXPECT_EQ(run(dir, "benchmark --problem schaffer --pop 20 --gens 20 --fail-above 0.05 --out " + q(dir / "ok")).code,
              0);
    const auto summary = nlohmann::json::parse(read_text(dir / "ok" / "benchmark.json"));
    EXPECT_TRUE(summary["passed"].get<bool>());
    EXPECT_EQ(run(dir, "benchmark --problem zdt1 --pop 4 --gens 0 --fail-above 0.05 --out " + q(dir / "bad")).code, 2);
}

TEST(Cli, ReplayRejectsChangedScenario)
{
    TempDir dir;
    const auto scenario = dir / "copy.scenario";
    std::filesystem::copy_file(kData / "minimal.scenario", scenario);
    const auto out = dir / "sim";
    ASSERT_EQ(run(dir, "simulate --scenario " + q(scenario) + " --policy flat:10 --out " + q(out)).code, 0);
    dir.write("copy.scenario", read_text(scenario) + "\n// edited\n");
    EXPECT_EQ(run(dir, "replay --manifest " + q(out / "manifest.json") + " --out " + q(dir / "again")).code, 1);
    EXPECT_EQ(run(dir, "replay --manifest " + q(dir / "missing.json") + " --out " + q(dir / "again")).code, 1);
}
