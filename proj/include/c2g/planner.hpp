#pragma once
/**
 * @file planner.hpp
 * @brief Trajectories by normalized gradient descent on a learned cost-to-go
 *        field, and their collision validation.
 *
 * Descent only sees the emitted network, never the workspace, so it cannot
 * spend collision checks. Validation afterwards is the only place checks are
 * used.
 */

#include <c2g/baselines.hpp>
#include <c2g/c2g_net.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace c2g
{
    struct PlanOptions
    {
        double step_size = 0.05;
        std::size_t max_steps = 2000; ///< total descent iterations, perturbations included
        double goal_tolerance = 0.1;
        std::size_t stall_window = 25;
        double stall_threshold = 0.01;
        double perturb_scale = 0.2;
        std::size_t restarts = 3;
        std::uint64_t seed = 0;

        void check () const;
    };

    struct DescentResult
    {
        Trajectory trajectory; ///< collision_checks is always 0 here
        bool reached = false;
        std::size_t descent_steps = 0;
        std::size_t perturbations_used = 0;
    };

    /**
     * @brief Follows -d/dq1 of c2g(q1, goal) with unit steps of opts.step_size.
     *
     * Stalls (displacement below stall_threshold over stall_window steps, or
     * over one or two steps fewer, which catches short cycles) are
     * escaped with a random kick of length perturb_scale, at most
     * opts.restarts times.
     */
    DescentResult plan_gradient_descent (const C2GParams &p, const Config &start, const Config &goal, const PlanOptions &opts = {});

    struct ValidationReport
    {
        bool collision_free = true;
        std::uint64_t checks_used = 0;
        std::optional<std::size_t> first_violation; ///< offending segment (or 0 for a lone waypoint)
    };

    ValidationReport validate_trajectory (const Trajectory &t, const RobotModel &m, const Workspace &w, double step);

    struct PlanResult
    {
        DescentResult descent;
        ValidationReport validation;

        /// Reached the goal and validated collision free.
        bool success () const { return descent.reached && validation.collision_free; }
        /// Trajectory with success, collision checks and planning time filled in.
        Trajectory trajectory () const;
    };

    /// Descent then validation; the workspace is used for validation only.
    PlanResult plan_and_validate (const C2GParams &p, const RobotModel &m, const Workspace &w, const Config &start, const Config &goal,
                                  const PlanOptions &opts = {}, double validation_step = 0.02);

    /// Trajectory JSON plus descent_steps, perturbations_used and validated.
    nlohmann::json to_json (const PlanResult &r);

} // namespace c2g
