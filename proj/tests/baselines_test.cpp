#include <c2g/baselines.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace c2g;

namespace
{
    // Disks on a ring of radius 0.75 around the base, leaving a gap around +y.
    Workspace ring_with_gap ()
    {
        Workspace w;
        for (double a = -kPi; a < kPi; a += 0.19)
            if (std::abs (a - kPi / 2) > 0.35)
                w.obstacles.push_back (Obstacle::disk (0.75 * std::cos (a), 0.75 * std::sin (a), 0.06));
        return w;
    }

    void expect_sound (const Trajectory &t, const RobotModel &m, const Workspace &w, double step)
    {
        ASSERT_TRUE (t.success);
        for (const auto &q : t.waypoints)
            EXPECT_FALSE (config_in_collision (m, q, w));
        for (std::size_t i = 1; i < t.waypoints.size (); ++i)
            EXPECT_FALSE (edge_in_collision (m, t.waypoints[i - 1], t.waypoints[i], w, step));
        EXPECT_NEAR (t.length, trajectory_length (m.joints, t.waypoints), 1e-9);
    }
} // namespace

TEST (AStar, StartEqualsGoal)
{
    const auto g = GridMap::free_grid ({5, 5}, {Joint::revolute (), Joint::revolute ()});
    const auto t = astar (g, 7, 7);
    EXPECT_TRUE (t.success);
    EXPECT_EQ (t.waypoints.size (), 1u);
    EXPECT_EQ (t.length, 0.0);
}

TEST (AStar, MatchesDijkstra)
{
    Rng rng (31);
    int solved = 0;
    for (int trial = 0; trial < 300; ++trial)
    {
        auto g = oracle::random_grid (rng);
        if (std::count (g.occupancy.begin (), g.occupancy.end (), 0) == 0)
            continue;
        const std::size_t s = sample_free_cell (g, rng), goal = sample_free_cell (g, rng);
        const auto field = dijkstra_cost_field (g, goal);
        const auto t = astar (g, s, goal);
        EXPECT_EQ (t.success, std::isfinite (field.cost[s]));
        if (t.success)
        {
            ++solved;
            EXPECT_NEAR (t.length, field.cost[s], 1e-9);
            EXPECT_EQ (t.waypoints.front (), g.cell_center (s));
            EXPECT_EQ (t.waypoints.back (), g.cell_center (goal));
        }
    }
    EXPECT_GT (solved, 100);
}

TEST (AStar, DisconnectedAndOccupied)
{
    auto g = GridMap::free_grid ({5, 5}, {Joint::limited (0, 5), Joint::limited (0, 5)});
    for (int r = 0; r < 5; ++r)
        g.occupancy[g.flatten (std::vector<int>{r, 2})] = 1;
    const auto t = astar (g, 0, 4);
    EXPECT_FALSE (t.success);
    EXPECT_EQ (t.waypoints.size (), 1u);
    EXPECT_THROW (astar (g, 2, 4), Error);
}

TEST (Rrt, EmptyWorkspaceNearby)
{
    const auto m = RobotModel::planar2 ();
    RrtParams p;
    const auto t = rrt_plan (m, Workspace{}, Config{0.1, 0.2}, Config{0.15, 0.25}, p);
    expect_sound (t, m, Workspace{}, p.collision_step);
    EXPECT_LE (t.waypoints.size (), 5u);
    EXPECT_LE (t.length, 0.5);
    EXPECT_EQ (p.goal_bias, 0.03);
}

TEST (Rrt, ThreadsGap)
{
    const auto m = RobotModel::planar2 ();
    const auto w = ring_with_gap ();
    const Config start{kPi / 2, 0.0}, goal{-kPi / 2, 2.6};
    ASSERT_FALSE (config_in_collision (m, start, w));
    ASSERT_FALSE (config_in_collision (m, goal, w));
    RrtParams p;
    p.seed = 4;
    const auto t = rrt_plan (m, w, start, goal, p);
    expect_sound (t, m, w, p.collision_step);
    EXPECT_EQ (t.waypoints.front (), start);
    EXPECT_NEAR (config_distance (m, t.waypoints.back (), goal), 0.0, 1e-12);
}

TEST (Rrt, DeterministicAndCountsHonestly)
{
    const auto m = RobotModel::planar2 ();
    const auto w = generate_random_workspace ({}, 14);
    Rng rng (3);
    Config s, g;
    do
        s = {rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
    while (config_in_collision (m, s, w));
    do
        g = {rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
    while (config_in_collision (m, g, w));
    RrtParams p;
    p.seed = 8;
    const auto before = collision_checks_total ();
    const auto a = rrt_plan (m, w, s, g, p);
    EXPECT_EQ (collision_checks_total () - before, a.collision_checks);
    const auto b = rrt_plan (m, w, s, g, p);
    EXPECT_EQ (a.waypoints, b.waypoints);
}

TEST (Rrt, ExhaustedBudget)
{
    const auto m = RobotModel::planar2 ();
    // walls of disks along both halves of the y axis: the first link can never
    // cross from +x to -x
    Workspace w;
    for (double y = 0.12; y < 1.05; y += 0.08)
        w.obstacles.push_back (Obstacle::disk (0.0, y, 0.035));
    for (double y = 0.12; y < 1.05; y += 0.08)
        w.obstacles.push_back (Obstacle::disk (0.0, -y, 0.035));
    RrtParams p;
    p.max_iters = 300;
    const Config s{0.0, 0.0}, g{kPi, 0.0};
    ASSERT_FALSE (config_in_collision (m, s, w));
    ASSERT_FALSE (config_in_collision (m, g, w));
    const auto t = rrt_plan (m, w, s, g, p);
    EXPECT_FALSE (t.success);
    EXPECT_EQ (t.waypoints.size (), 1u);
    EXPECT_GT (t.collision_checks, 0u);
}

TEST (Smooth, StraightLineAndZeroIters)
{
    const auto m = RobotModel::planar2 ();
    Trajectory t;
    t.waypoints = {{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}};
    t.length = trajectory_length (m.joints, t.waypoints);
    const auto s = shortcut_smooth (t, m, Workspace{}, 200, 1);
    EXPECT_NEAR (s.length, t.length, 1e-12);
    const auto z = shortcut_smooth (t, m, Workspace{}, 0, 1);
    EXPECT_EQ (z.waypoints, t.waypoints);
}

TEST (Smooth, RightAngleDetourShrinks)
{
    const auto m = RobotModel::planar2 ();
    Trajectory t;
    t.planner = PlannerTag::Rrt;
    t.waypoints = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}};
    t.length = trajectory_length (m.joints, t.waypoints);
    const auto s = shortcut_smooth (t, m, Workspace{}, 200, 5);
    EXPECT_LT (s.length, t.length - 1e-6);
    EXPECT_LE (s.length, std::sqrt (2.0) + 0.05);
    EXPECT_GE (s.length, std::sqrt (2.0) - 1e-12);
    EXPECT_EQ (s.planner, PlannerTag::RrtSmooth);
    EXPECT_EQ (s.waypoints.front (), t.waypoints.front ());
    EXPECT_EQ (s.waypoints.back (), t.waypoints.back ());
}

TEST (Smooth, NeverLongerAndStaysFree)
{
    const auto m = RobotModel::planar2 ();
    const auto w = generate_random_workspace ({}, 2);
    Rng rng (6);
    for (int trial = 0; trial < 30; ++trial)
    {
        Config s, g;
        do
            s = {rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
        while (config_in_collision (m, s, w));
        do
            g = {rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
        while (config_in_collision (m, g, w));
        RrtParams p;
        p.seed = static_cast<std::uint64_t> (trial);
        const auto t = rrt_plan (m, w, s, g, p);
        if (!t.success)
            continue;
        const auto sm = shortcut_smooth (t, m, w, 100, trial);
        EXPECT_LE (sm.length, t.length + 1e-12);
        expect_sound (sm, m, w, p.collision_step);
    }
}

TEST (Trajectory, JsonShape)
{
    Trajectory t;
    t.waypoints = {{0.0, 1.0}};
    t.planner = PlannerTag::RrtSmooth;
    const auto j = to_json (t);
    for (const char *key : {"planner", "waypoints", "length", "planning_time_s", "collision_checks", "success"})
        EXPECT_TRUE (j.contains (key)) << key;
    EXPECT_EQ (j["planner"], "rrt-smooth");
    for (auto tag : {PlannerTag::C2gHof, PlannerTag::Rrt, PlannerTag::RrtSmooth, PlannerTag::AStar, PlannerTag::Prm})
        EXPECT_EQ (planner_tag_from_string (to_string (tag)), tag);
}
