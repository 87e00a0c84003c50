#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mergesim/errors.hpp"
#include "mergesim/topology.hpp"
#include "oracles.hpp"

using namespace mergesim;
using oracle::make_vehicle;

namespace {

void start_change(const World& w, Vehicle& v, Lane target) {
    v.target_lane = target;
    v.lc_phase = LaneChangePhase::changing;
    v.state.y = 0.5 * (w.road.centerline_y(v.lane, v.state.x) + w.road.centerline_y(target, v.state.x));
}

}  // namespace

TEST(BuildTopology, SingleVehicleHasNoParents) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 100.0, 25.0));
    const InteractionTopology g = build_topology(w);
    ASSERT_EQ(g.parents.size(), 1u);
    EXPECT_TRUE(g.parents_of(1).empty());
}

TEST(BuildTopology, FollowerDependsOnLeader) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 130.0, 25.0));  // L
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 100.0, 25.0));  // F
    const InteractionTopology g = build_topology(w);
    EXPECT_EQ(g.parents_of(1), std::vector<int>{0});
    EXPECT_TRUE(g.parents_of(0).empty());
}

TEST(BuildTopology, MergerBetweenEgoAndLeaderReplacesLeader) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 300.0, 25.0));  // L
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 250.0, 25.0));  // E
    Vehicle m = make_vehicle(w, 2, Lane::ramp, 270.0, 25.0);               // M
    start_change(w, m, Lane::highway);
    w.vehicles.push_back(m);
    EXPECT_EQ(build_topology(w).parents_of(1), std::vector<int>{2});
}

TEST(BuildTopology, MergerAheadOfLeaderDoesNotReplaceIt) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 270.0, 25.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 250.0, 25.0));
    Vehicle m = make_vehicle(w, 2, Lane::ramp, 300.0, 25.0);
    start_change(w, m, Lane::highway);
    w.vehicles.push_back(m);
    EXPECT_EQ(build_topology(w).parents_of(1), std::vector<int>{0});
}

TEST(BuildTopology, ChangingEgoAddsTargetLaneLeader) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::ramp, 300.0, 25.0));     // L
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 290.0, 25.0));  // T
    Vehicle e = make_vehicle(w, 2, Lane::ramp, 260.0, 25.0);               // E
    start_change(w, e, Lane::highway);
    w.vehicles.push_back(e);
    EXPECT_EQ(build_topology(w).parents_of(2), (std::vector<int>{0, 1}));
}

TEST(BuildTopology, AdjacentRearIsNeverAParent) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 240.0, 25.0));
    Vehicle e = make_vehicle(w, 1, Lane::ramp, 260.0, 25.0);
    start_change(w, e, Lane::highway);
    w.vehicles.push_back(e);
    EXPECT_TRUE(build_topology(w).parents_of(1).empty());
}

TEST(BuildTopology, OutOfRangeVehiclesAreInvisible) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 100.0 + w.scenario.comm_range + 1.0, 25.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 100.0, 25.0));
    EXPECT_TRUE(build_topology(w).parents_of(1).empty());
}

TEST(BuildTopology, MatchesNaiveTranscriptionOnRandomSnapshots) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        const World w = oracle::random_snapshot(rng, 11);
        EXPECT_EQ(build_topology(w), oracle::naive_topology(w)) << "snapshot " << i;
    }
}

TEST(TopologyProperty, ParentsAheadAtMostTwoAndPairsOnlyWhenChanging) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 2000; ++i) {
        const World w = oracle::random_snapshot(rng, 11);
        const InteractionTopology g = build_topology(w);
        for (const auto& [child, parents] : g.parents) {
            const Vehicle* c = w.find(child);
            EXPECT_LE(parents.size(), 2u);
            if (parents.size() == 2) {
                EXPECT_TRUE(c->changing());
            }
            for (int p : parents) EXPECT_TRUE(ahead_of(*w.find(p), *c));
        }
    }
}

TEST(TopologyProperty, WithoutLaneChangesParentIsTheLeaderOrNone) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        World w = oracle::random_snapshot(rng, 11);
        for (auto& v : w.vehicles) {
            v.lc_phase = LaneChangePhase::not_changing;
            v.target_lane = v.lane;
        }
        const InteractionTopology g = build_topology(w);
        for (const Vehicle* v : w.active()) {
            const Neighbors n = neighbors(w, *v);
            const std::vector<int> expected = n.leader ? std::vector<int>{n.leader->id} : std::vector<int>{};
            EXPECT_EQ(g.parents_of(v->id), expected);
        }
    }
}

TEST(TopologyProperty, IsAPureFunctionOfTheSnapshot) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        World w = oracle::random_snapshot(rng, 11);
        const InteractionTopology a = build_topology(w);
        std::reverse(w.vehicles.begin(), w.vehicles.end());
        EXPECT_EQ(build_topology(w), a);
    }
}

TEST(EvaluationOrder, ChainPutsLeaderFirst) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 100.0, 25.0));  // F
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 130.0, 25.0));  // L
    EXPECT_EQ(evaluation_order(build_topology(w), w), (std::vector<int>{1, 0}));
}

TEST(EvaluationOrder, EmptyTopologyUsesDescendingPosition) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 10.0, 25.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::ramp, 30.0, 25.0));
    w.vehicles.push_back(make_vehicle(w, 2, Lane::highway, 30.0, 25.0));
    EXPECT_EQ(evaluation_order(InteractionTopology{}, w), (std::vector<int>{1, 2, 0}));
}

TEST(EvaluationOrder, EveryParentPrecedesItsChildren) {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 1000; ++i) {
        const World w = oracle::random_snapshot(rng, 11);
        const InteractionTopology g = build_topology(w);
        const std::vector<int> order = evaluation_order(g, w);
        auto index = [&](int id) { return std::find(order.begin(), order.end(), id) - order.begin(); };
        for (const auto& [child, parents] : g.parents)
            for (int p : parents) EXPECT_LT(index(p), index(child));
    }
}

TEST(EvaluationOrder, RejectsBackwardEdges) {
    World w = oracle::empty_world();
    w.vehicles.push_back(make_vehicle(w, 0, Lane::highway, 100.0, 25.0));
    w.vehicles.push_back(make_vehicle(w, 1, Lane::highway, 130.0, 25.0));
    InteractionTopology g;
    g.parents[1] = {0};
    EXPECT_THROW(evaluation_order(g, w), InvariantError);
}
