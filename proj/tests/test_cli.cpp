#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"

namespace mginf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "mginf");
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mginf_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(Cli, ClassifyStrange) {
    const auto r = invoke({"classify", "--law", "strange(b=2.5)", "--lambda", "1"});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["k0"], 2);
    EXPECT_EQ(j["regime"], "Mixed");
    EXPECT_EQ(j["method"], "symbolic-profile");
}

TEST(Cli, ClassifyExponentialAndPareto) {
    auto j = json::parse(invoke({"classify", "--law", "exp(mean=1)", "--lambda", "1"}).out);
    EXPECT_EQ(j["k0"], 0);
    EXPECT_EQ(j["regime"], "Recurrent");
    j = json::parse(invoke({"classify", "--law", "pareto(alpha=0.5,scale=1)", "--lambda", "1"}).out);
    EXPECT_EQ(j["k0"], "inf");
    EXPECT_EQ(j["regime"], "Transient");
}

TEST(Cli, ClassifyNumeric) {
    const auto r = invoke({"classify", "--law", "strange(b=2.5)", "--lambda", "1", "--numeric", "--k-max", "4", "--trace"});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["k0"], 2);
    EXPECT_EQ(j["method"], "numeric-diagnostic");
    EXPECT_EQ(j["verdicts"][0]["basis"], "numeric-only");
    EXPECT_TRUE(j["verdicts"][2].contains("partial_integral_trace"));
}

TEST(Cli, NumericTransientIsInconclusive) {
    const auto r = invoke({"classify", "--law", "pareto(alpha=0.5)", "--lambda", "1", "--numeric", "--k-max", "2"});
    EXPECT_EQ(r.code, kInconclusive);
    const auto j = json::parse(r.out);
    EXPECT_TRUE(j["k0"].is_null());
    EXPECT_EQ(j["k0_lower_bound"], 3);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(invoke({}).code, kUsage);
    EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
    const auto bad_law = invoke({"classify", "--law", "weibull(k=2)", "--lambda", "1"});
    EXPECT_EQ(bad_law.code, kUsage);
    EXPECT_NE(bad_law.err.find("weibull"), std::string::npos);
    EXPECT_EQ(invoke({"classify", "--law", "exp(mean=1)", "--lambda", "-1"}).code, kUsage);
    EXPECT_EQ(invoke({"growth", "--law", "exp(mean=1)", "--horizon", "10", "--q", "1.5"}).code, kUsage);
    EXPECT_EQ(invoke({"occupancy", "--law", "exp(mean=1)", "--horizon", "10", "--replicas", "1"}).code, kUsage);
}

TEST(Cli, HelpAndVersionSucceed) {
    EXPECT_EQ(invoke({"--help"}).code, kOk);
    const auto v = invoke({"--version"});
    EXPECT_EQ(v.code, kOk);
    EXPECT_NE((v.out + v.err).find(kVersion), std::string::npos);
}

TEST(Cli, SimulateIsByteIdentical) {
    const auto a = scratch("sim_a");
    const auto b = scratch("sim_b");
    for (const auto& dir : {a, b}) {
        const auto r = invoke({"simulate", "--law", "exp(mean=1)", "--lambda", "1", "--horizon", "50", "--seed", "7",
                               "--out", dir.string()});
        ASSERT_EQ(r.code, kOk) << r.err;
    }
    for (const char* f : {"trajectory.csv", "occupation.csv", "manifest.json"}) {
        EXPECT_FALSE(slurp(a / f).empty()) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_EQ(slurp(a / "trajectory.csv").rfind("t,y\n0,0\n", 0), 0u);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
    const auto dir = scratch("env");
    ::setenv(kOutDirEnv, dir.string().c_str(), 1);
    const auto r = invoke({"simulate", "--law", "det(value=1)", "--lambda", "1", "--horizon", "5"});
    ::unsetenv(kOutDirEnv);
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
}

TEST(Cli, UnwritableOutputDirectory) {
    const auto dir = scratch("blocked");
    std::ofstream(dir / "file") << "x";
    const auto r = invoke({"simulate", "--law", "exp(mean=1)", "--horizon", "5", "--out", (dir / "file" / "sub").string()});
    EXPECT_EQ(r.code, kUsage);
}

TEST(Cli, OverflowWritesPartial) {
    const auto dir = scratch("partial");
    const auto r = invoke({"simulate", "--law", "exp(mean=1)", "--horizon", "1000", "--max-events", "10", "--out",
                           dir.string()});
    EXPECT_EQ(r.code, kPartial);
    EXPECT_TRUE(fs::exists(dir / "PARTIAL"));
}

TEST(Cli, OccupancyTable) {
    const auto dir = scratch("occ");
    const auto r = invoke({"occupancy", "--law", "exp(mean=1)", "--lambda", "1", "--horizon", "50", "--replicas", "200",
                           "--k-max", "3", "--seed", "1", "--out", dir.string()});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto table = slurp(dir / "occupancy.csv");
    EXPECT_EQ(table.rfind("k,mc_mean,mc_stderr,theory,z\n", 0), 0u);
    const auto j = json::parse(slurp(dir / "experiment.json"));
    EXPECT_EQ(j["replicas"], 200);
    EXPECT_EQ(j["states"].size(), 4u);
}

TEST(Cli, GrowthReport) {
    const auto dir = scratch("growth");
    const auto r = invoke({"growth", "--law", "pareto(alpha=0.5,scale=1)", "--lambda", "1", "--horizon", "1000", "--q",
                           "0.5", "--replicas", "20", "--seed", "1", "--out", dir.string()});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto j = json::parse(slurp(dir / "growth.json"));
    for (const char* key : {"q", "t_min", "h_q_measure", "bound_value", "first_violation_after"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["t_min"], 100.0);
    EXPECT_EQ(j["replicas"], 20);
}

TEST(Cli, Liminf) {
    const auto dir = scratch("liminf");
    const auto r = invoke({"liminf", "--law", "exp(mean=1)", "--lambda", "1", "--horizons", "10,100,1000", "--replicas",
                           "50", "--out", dir.string()});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto j = json::parse(slurp(dir / "liminf.json"));
    EXPECT_EQ(j["stabilized_value"], 0);
    EXPECT_TRUE(j["consistent"].get<bool>());
}

}  // namespace
}  // namespace mginf::cli
