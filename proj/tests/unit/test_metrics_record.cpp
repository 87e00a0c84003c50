#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mergesim/errors.hpp"
#include "mergesim/metrics.hpp"
#include "mergesim/policy.hpp"
#include "mergesim/record.hpp"
#include "mergesim/runner.hpp"
#include "oracles.hpp"

using namespace mergesim;
using oracle::make_vehicle;

namespace {

EpisodeRecord record_of(const World& w) {
    EpisodeRecord r;
    r.config.road = w.road;
    for (const auto& v : w.vehicles) r.vehicles.push_back({v.id, v.origin_lane, v.params.length, v.params.width});
    r.initial = snapshot(w);
    return r;
}

std::string text_of(const EpisodeRecord& r) {
    std::ostringstream out;
    write_record(out, r);
    return out.str();
}

EpisodeSummary summary_with(int spawned, int merged) {
    EpisodeSummary s;
    s.ramp_spawned = spawned;
    s.merged = merged;
    if (spawned > 0) s.merging_pct = 100.0 * merged / spawned;
    return s;
}

}  // namespace

TEST(SnapshotMinHeadway, FollowerAtTheDesiredGap) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 100.0 + 5.0 + 12.5, 25.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 100.0, 25.0));
    const EpisodeRecord r = record_of(w);
    EXPECT_DOUBLE_EQ(snapshot_min_headway(r.initial, r), 0.5);
}

TEST(SnapshotMinHeadway, SingleVehicleHasNoHeadway) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 100.0, 25.0));
    const EpisodeRecord r = record_of(w);
    EXPECT_EQ(min_time_headway(r), std::numeric_limits<double>::infinity());
}

TEST(SnapshotMinHeadway, SlowFollowersAndOtherLanesAreSkipped) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 110.0, 25.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 100.0, 0.5));
    w.vehicles.push_back(make_vehicle(w, 2, Lane::ramp, 100.0, 25.0));
    const EpisodeRecord r = record_of(w);
    EXPECT_EQ(snapshot_min_headway(r.initial, r), std::numeric_limits<double>::infinity());
}

TEST(MinTimeHeadway, CollisionMakesItZero) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 200.0, 25.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 100.0, 25.0));
    EpisodeRecord r = record_of(w);
    StepRecord s;
    s.vehicles = r.initial;
    s.vehicles[1].crashed = true;
    r.steps.push_back(s);
    EXPECT_EQ(min_time_headway(r), 0.0);
}

TEST(MinTimeHeadway, MatchesBruteForceOverLaneKeepingEpisodes) {
    std::mt19937_64 rng(51);
    constexpr BehaviorAction kKeep[] = {BehaviorAction::follow_lane, BehaviorAction::speed_up,
                                        BehaviorAction::slow_down};
    for (ShieldMode mode : {ShieldMode::none, ShieldMode::mass}) {
        for (int e = 0; e < 10; ++e) {
            ScenarioConfig sc;
            sc.n_vehicles = 7 + e % 5;
            sc.rng_seed = rng();
            ShieldConfig shield;
            shield.mode = mode;
            World w = make_world(sc, RoadNetwork{}, shield, VehicleParams{});
            EpisodeRecord r = record_of(w);
            double expected = oracle::brute_min_headway(w);
            bool crashed = false;
            for (int k = 0; k < 150; ++k) {
                std::map<int, BehaviorAction> actions;
                for (const auto& v : w.vehicles) actions[v.id] = kKeep[std::uniform_int_distribution<int>(0, 2)(rng)];
                const StepReport report = step_world(w, actions);
                r.steps.push_back(make_step_record(w, report, {}));
                expected = std::min(expected, oracle::brute_min_headway(w));
                for (const auto& v : w.vehicles) crashed = crashed || v.crashed;
            }
            EXPECT_EQ(min_time_headway(r), crashed ? 0.0 : expected);
        }
    }
}

TEST(AverageSpeed, MeanOverActiveUncrashedVehicleSteps) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 200.0, 20.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 100.0, 30.0));
    w.vehicles.push_back(make_vehicle(w, 2, Lane::ramp, 100.0, 99.0));
    EpisodeRecord r = record_of(w);
    StepRecord s;
    s.vehicles = r.initial;
    s.vehicles[2].crashed = true;
    r.steps.push_back(s);
    s.vehicles[0].state.v_x = 10.0;
    s.vehicles[1].exited = true;
    r.steps.push_back(s);
    EXPECT_DOUBLE_EQ(average_speed(r), (20.0 + 30.0 + 10.0) / 3.0);
}

TEST(MergingPercentage, Examples) {
    EXPECT_EQ(merging_percentage(std::vector<EpisodeSummary>{summary_with(2, 2)}), 100.0);
    EXPECT_EQ(merging_percentage(std::vector<EpisodeSummary>{summary_with(3, 1), summary_with(1, 1)}), 50.0);
    EXPECT_THROW(merging_percentage(std::vector<EpisodeSummary>{summary_with(0, 0)}), UndefinedMetric);
}

TEST(MergingPercentage, CountsRampOriginVehiclesThatMerged) {
    World w = oracle::empty_world();
    Vehicle a = make_vehicle(w, 0, Lane::ramp, 200.0, 20.0);
    Vehicle b = make_vehicle(w, 1, Lane::ramp, 150.0, 20.0);
    w.vehicles = {a, b, make_vehicle(w, 2, Lane::highway, 100.0, 20.0)};
    EpisodeRecord r = record_of(w);
    StepRecord s;
    s.vehicles = r.initial;
    s.vehicles[0].merged = true;
    r.steps.push_back(s);
    EXPECT_EQ(merge_count(r).spawned, 2);
    EXPECT_EQ(merge_count(r).merged, 1);
    EXPECT_EQ(merging_percentage(std::vector<EpisodeRecord>{r}), 50.0);
}

TEST(Aggregate, MeanAndStandardError) {
    std::vector<EpisodeSummary> s(3);
    s[0].avg_speed = 20.0;
    s[1].avg_speed = 22.0;
    s[2].avg_speed = 24.0;
    s[0].min_headway = 0.6;
    s[1].min_headway = std::numeric_limits<double>::infinity();
    s[2].min_headway = 0.8;
    const auto rows = aggregate(s);
    auto find = [&](const std::string& m) {
        for (const auto& r : rows)
            if (r.metric == m) return r;
        return AggregateRow{};
    };
    EXPECT_DOUBLE_EQ(find("avg_speed").mean, 22.0);
    EXPECT_DOUBLE_EQ(find("avg_speed").std_error, 2.0 / std::sqrt(3.0));
    EXPECT_EQ(find("avg_speed").n, 3);
    EXPECT_DOUBLE_EQ(find("min_headway").mean, 0.7);
    EXPECT_EQ(find("min_headway").n, 2);
    EXPECT_EQ(find("merging_pct").n, 0);
    EXPECT_EQ(find("min_headway_worst").mean, 0.6);
}

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(25.0), "25");
    EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = d(rng);
        EXPECT_EQ(std::stod(format_number(x)), x);
    }
}

TEST(Record, WriteReadWriteIsByteIdentical) {
    SimConfig c;
    c.scenario.episode_steps = 60;
    HeuristicPolicy h;
    const EpisodeRecord r = run_episode(c, 3, h, "heuristic");
    const std::string first = text_of(r);
    std::istringstream in(first);
    const EpisodeRecord back = read_record(in);
    EXPECT_EQ(text_of(back), first);
    EXPECT_EQ(back.steps.size(), 60u);
    EXPECT_EQ(back.seed, 3u);
    EXPECT_EQ(back.policy, "heuristic");
}

TEST(Record, SummaryIsReproducibleFromTheRecord) {
    SimConfig c;
    c.scenario.episode_steps = 100;
    c.shield.mode = ShieldMode::none;
    RandomPolicy p;
    const EpisodeRecord r = run_episode(c, 17, p, "random");
    std::istringstream in(text_of(r));
    const EpisodeSummary again = summarize(read_record(in));
    EXPECT_EQ(to_json(again).dump(), to_json(*r.summary).dump());
}

TEST(Record, RejectsMalformedInput) {
    std::istringstream empty("");
    EXPECT_THROW(read_record(empty), ConfigError);
    std::istringstream wrong(R"({"type":"header","schema":"other/9"})" "\n");
    EXPECT_THROW(read_record(wrong), ConfigError);
    std::istringstream garbage("{not json\n");
    EXPECT_THROW(read_record(garbage), ConfigError);
}

TEST(SummariesCsv, RoundTrip) {
    std::vector<EpisodeSummary> s(2);
    s[0].seed = 5;
    s[0].shield = "mass";
    s[0].min_headway = std::numeric_limits<double>::infinity();
    s[0].avg_speed = 23.123456789012345;
    s[1] = summary_with(3, 2);
    s[1].seed = 6;
    s[1].mean_reward = -0.1;
    s[1].collisions = 2;
    std::ostringstream out;
    write_summaries_csv(out, s);
    std::istringstream in(out.str());
    const auto back = read_summaries_csv(in);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(to_json(back[i]).dump(), to_json(s[i]).dump());
    std::ostringstream again;
    write_summaries_csv(again, back);
    EXPECT_EQ(again.str(), out.str());
}
