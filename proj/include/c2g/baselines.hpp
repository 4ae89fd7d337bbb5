#pragma once
/**
 * @file baselines.hpp
 * @brief Comparison planners: grid A*, bidirectional goal-biased RRT and
 *        shortcut smoothing, plus the Trajectory record all planners share.
 */

#include <c2g/cspace_oracle.hpp>
#include <c2g/robot.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace c2g
{
    enum class PlannerTag
    {
        C2gHof,
        Rrt,
        RrtSmooth,
        AStar,
        Prm,
    };

    std::string to_string (PlannerTag t);
    PlannerTag planner_tag_from_string (const std::string &s);

    struct Trajectory
    {
        std::vector<Config> waypoints;
        double length = 0.0;
        PlannerTag planner = PlannerTag::AStar;
        bool success = false;
        double planning_time_s = 0.0;
        std::uint64_t collision_checks = 0;
        std::string note;
    };

    double trajectory_length (std::span<const Joint> joints, std::span<const Config> waypoints);

    /// JSON-lines record {planner, waypoints, length, planning_time_s, collision_checks, success}.
    nlohmann::json to_json (const Trajectory &t);

    /**
     * @brief A* over the grid stencil with the torus-Euclidean heuristic.
     *
     * Disconnected instances return success = false with the start as the only
     * waypoint. Ties on f are broken by the smaller cell index.
     */
    Trajectory astar (const GridMap &g, std::size_t start, std::size_t goal);

    struct RrtParams
    {
        double step = 0.1;
        double goal_bias = 0.03;
        std::size_t max_iters = 50000;
        std::uint64_t seed = 0;
        double collision_step = 0.02; ///< resolution of edge checks
    };

    /// RRT-Connect: alternate extending one tree and greedily connecting the other.
    Trajectory rrt_plan (const RobotModel &m, const Workspace &w, const Config &start, const Config &goal, const RrtParams &params);

    /**
     * @brief Shortcut smoothing: cut points drawn uniformly by arc length.
     *
     * A shortcut is kept only if its segment is collision free and the
     * recomputed length strictly decreases.
     */
    Trajectory shortcut_smooth (const Trajectory &t, const RobotModel &m, const Workspace &w, std::size_t iters, std::uint64_t seed,
                                double collision_step = 0.02);

} // namespace c2g
