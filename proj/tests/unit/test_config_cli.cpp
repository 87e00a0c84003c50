#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mergesim/config.hpp"
#include "mergesim/errors.hpp"

using namespace mergesim;
namespace fs = std::filesystem;

namespace {

struct Output {
    int code = -1;
    std::string text;  // stdout and stderr
};

Output run_cli(const std::string& args) {
    const std::string cmd = "MERGESIM_LOG=info " + std::string(MERGESIM_CLI) + " " + args + " 2>&1";
    Output out;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.text.append(buf, n);
    const int status = ::pclose(pipe);
    out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mergesim_cli_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Every file under `a` exists under `b` with the same bytes, and vice versa.
bool same_tree(const fs::path& a, const fs::path& b) {
    std::size_t count_a = 0, count_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++count_a;
        const fs::path other = b / fs::relative(e.path(), a);
        if (!fs::exists(other) || read_file(e.path()) != read_file(other)) return false;
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file() ? 1 : 0;
    return count_a == count_b && count_a > 0;
}

const std::string kDefaultConfig = std::string(MERGESIM_SOURCE_DIR) + "/configs/default.yaml";

}  // namespace

TEST(Config, DefaultFileIsValidAndMatchesBuiltInDefaults) {
    const RunConfig rc = load_run_config(kDefaultConfig);
    EXPECT_TRUE(validate_run_config(rc).ok());
    EXPECT_TRUE(validate_run_config(rc).warnings.empty());
    EXPECT_EQ(rc.sim.scenario.n_vehicles, 9);
    EXPECT_EQ(rc.sim.scenario.tau, 0.5);
    EXPECT_EQ(rc.sim.scenario.comm_range, 180.0);
    EXPECT_EQ(rc.sim.road.merge_length, 100.0);
    EXPECT_EQ(rc.sim.reward.w_h, 1.0);
    EXPECT_EQ(rc.sim.reward.w_s, 4.0);
    EXPECT_EQ(rc.sim.reward.w_m, 8.0);
    EXPECT_EQ(rc.sim.shield.mode, ShieldMode::mass);
}

TEST(Config, EmptyDocumentKeepsDefaults) {
    const RunConfig rc = parse_run_config("");
    EXPECT_EQ(rc.sim.scenario.n_vehicles, 9);
    EXPECT_TRUE(validate_run_config(rc).ok());
}

TEST(Config, NegativeTauIsAnError) {
    const RunConfig rc = parse_run_config("scenario:\n  tau: -1\n");
    const ValidationReport r = validate_run_config(rc);
    ASSERT_FALSE(r.ok());
    EXPECT_NE(r.errors.front().find("tau"), std::string::npos);
}

TEST(Config, UnknownKeyNamesItsLine) {
    try {
        parse_run_config("scenario:\n  n_vehicles: 9\n  spead: 3\n", "test.yaml");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("test.yaml:3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("scenario.spead"), std::string::npos) << msg;
    }
}

TEST(Config, MalformedValueIsAnError) {
    EXPECT_THROW(parse_run_config("scenario:\n  n_vehicles: many\n"), ConfigError);
    EXPECT_THROW(parse_run_config("shield:\n  mode: strict\n"), ConfigError);
    EXPECT_THROW(parse_run_config("run:\n  policy: greedy\n"), ConfigError);
}

TEST(Config, FleetOutsideTheReferenceRangeWarns) {
    const ValidationReport r = validate_run_config(parse_run_config("scenario:\n  n_vehicles: 12\n"));
    EXPECT_TRUE(r.ok());
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings.front().find("n_vehicles"), std::string::npos);

    // Twenty vehicles also warn, and do not fit the spawn regions.
    const ValidationReport big = validate_run_config(parse_run_config("scenario:\n  n_vehicles: 20\n"));
    EXPECT_EQ(big.warnings.size(), 1u);
    ASSERT_FALSE(big.ok());
    EXPECT_NE(big.errors.front().find("spawn"), std::string::npos);
}

TEST(Config, SimConfigJsonRoundTrip) {
    RunConfig rc = parse_run_config("scenario:\n  n_vehicles: 11\n  tau: 0.7\nshield:\n  mode: hss\n");
    const SimConfig back = sim_config_from_json(nlohmann::json::parse(to_json(rc.sim).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(rc.sim).dump());
    EXPECT_EQ(back.scenario.tau, 0.7);
    EXPECT_EQ(back.shield.mode, ShieldMode::hss);
}

TEST(Cli, ValidateReportsErrorsWithExitCode) {
    const fs::path dir = scratch_dir("validate");
    write_file(dir / "bad.yaml", "scenario:\n  tau: -1\n");
    const Output bad = run_cli("validate " + (dir / "bad.yaml").string());
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.text.find("invalid"), std::string::npos);
    const Output good = run_cli("validate " + kDefaultConfig);
    EXPECT_EQ(good.code, 0);
    EXPECT_NE(good.text.find("valid"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, OutOfRangeFleetNeedsExplicitPermission) {
    const fs::path dir = scratch_dir("range");
    write_file(dir / "big.yaml", "scenario:\n  n_vehicles: 12\n  episode_steps: 10\n  ramp_share: 0.3\n");
    const std::string base = "run --config " + (dir / "big.yaml").string() + " --episodes 1 --out " + (dir / "o").string();
    const Output refused = run_cli(base);
    EXPECT_EQ(refused.code, 1);
    EXPECT_NE(refused.text.find("warning"), std::string::npos);
    const Output allowed = run_cli(base + " --allow-out-of-range");
    EXPECT_EQ(allowed.code, 0) << allowed.text;
    EXPECT_TRUE(fs::exists(dir / "o" / "summaries.csv"));
    fs::remove_all(dir);
}

TEST(Cli, FlagsOverrideTheConfigFile) {
    const fs::path dir = scratch_dir("precedence");
    write_file(dir / "c.yaml", "scenario:\n  episode_steps: 20\nshield:\n  mode: hss\nrun:\n  episodes: 5\n  seed: 1\n");
    const Output out = run_cli("run --config " + (dir / "c.yaml").string() + " --episodes 2 --seed 77 --shield mass --out " +
                               (dir / "o").string());
    ASSERT_EQ(out.code, 0) << out.text;
    const std::string csv = read_file(dir / "o" / "summaries.csv");
    EXPECT_NE(csv.find("\n77,mass,"), std::string::npos) << csv;
    EXPECT_NE(csv.find("\n78,mass,"), std::string::npos) << csv;
    EXPECT_EQ(csv.find("hss"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, UnknownShieldIsAConfigError) {
    EXPECT_EQ(run_cli("run --shield strict --episodes 1 --out /tmp/unused").code, 1);
}

TEST(Cli, RewardCurveCrossesZeroAtTheDesiredGap) {
    const Output out = run_cli("reward-curve --speed 25 --tau 0.5 --dx-min 2.5 --dx-max 50 --points 20");
    ASSERT_EQ(out.code, 0);
    EXPECT_NE(out.text.find("12.5,0\n"), std::string::npos) << out.text;
}

TEST(Cli, RunIsByteIdenticalAcrossRepeatsAndJobCounts) {
    const fs::path dir = scratch_dir("determinism");
    const std::string base = "run --episodes 4 --seed 300 --trajectories --policy heuristic";
    ASSERT_EQ(run_cli(base + " --jobs 1 --out " + (dir / "a").string()).code, 0);
    ASSERT_EQ(run_cli(base + " --jobs 1 --out " + (dir / "b").string()).code, 0);
    ASSERT_EQ(run_cli(base + " --jobs 4 --out " + (dir / "c").string()).code, 0);
    EXPECT_TRUE(same_tree(dir / "a", dir / "b"));
    EXPECT_TRUE(same_tree(dir / "a", dir / "c"));
    fs::remove_all(dir);
}

TEST(Cli, ReplayRecomputesTheStoredSummary) {
    const fs::path dir = scratch_dir("replay");
    ASSERT_EQ(run_cli("run --episodes 1 --seed 9 --trajectories --out " + (dir / "o").string()).code, 0);
    const fs::path record = dir / "o" / "episodes" / "episode_9.jsonl";
    ASSERT_TRUE(fs::exists(record));
    const Output ok = run_cli("replay " + record.string());
    EXPECT_EQ(ok.code, 0) << ok.text;
    EXPECT_NE(ok.text.find("\"seed\": 9"), std::string::npos);

    // Tamper with the stored summary: the recomputation disagrees.
    std::string text = read_file(record);
    const auto pos = text.find("\"collisions\":");
    ASSERT_NE(pos, std::string::npos);
    text.insert(pos + 13, "1");
    write_file(dir / "tampered.jsonl", text);
    EXPECT_EQ(run_cli("replay " + (dir / "tampered.jsonl").string()).code, 4);
    fs::remove_all(dir);
}

TEST(Cli, ProtocolFailureHasItsOwnExitCode) {
    const fs::path dir = scratch_dir("protocol");
    write_file(dir / "c.yaml", "run:\n  policy_timeout: 0.3\n");
    const Output out = run_cli("run --config " + (dir / "c.yaml").string() + " --episodes 1 --policy 'external:" +
                               std::string(MERGESIM_RESPONDER) + " silent' --out " + (dir / "o").string());
    EXPECT_EQ(out.code, 3) << out.text;
    fs::remove_all(dir);
}
