#include <c2g/planner.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace c2g
{
    void PlanOptions::check () const
    {
        require (step_size > 0.0 && max_steps > 0 && goal_tolerance > 0.0, "step_size, max_steps and goal_tolerance must be > 0");
        require (stall_window > 0 && stall_threshold > 0.0 && perturb_scale > 0.0, "stall and perturbation settings must be > 0");
        require (goal_tolerance < step_size * static_cast<double> (max_steps), "goal_tolerance must be below step_size * max_steps");
    }

    namespace
    {
        using Clock = std::chrono::steady_clock;

        void wrap (std::span<const Joint> joints, Config &q)
        {
            for (std::size_t i = 0; i < q.size (); ++i)
                q[i] = joints[i].periodic () ? wrap_angle (q[i]) : std::clamp (q[i], joints[i].lo, joints[i].hi);
        }

        bool inside (std::span<const Joint> joints, const Config &q)
        {
            if (q.size () != joints.size ())
                return false;
            for (std::size_t i = 0; i < q.size (); ++i)
                if (!std::isfinite (q[i]) || (!joints[i].periodic () && (q[i] < joints[i].lo || q[i] > joints[i].hi)))
                    return false;
            return true;
        }
    } // namespace

    DescentResult plan_gradient_descent (const C2GParams &p, const Config &start, const Config &goal, const PlanOptions &opts)
    {
        opts.check ();
        p.check ();
        const auto &joints = p.layout.joints;
        require (inside (joints, start) && inside (joints, goal), "start and goal must lie within the joint ranges");
        const auto t0 = Clock::now ();

        DescentResult r;
        Trajectory &t = r.trajectory;
        t.planner = PlannerTag::C2gHof;
        Config q = start;
        wrap (joints, q);
        Config g = goal;
        wrap (joints, g);
        t.waypoints.push_back (q);

        Rng rng (mix_seed (opts.seed, 0x504c4e));
        std::size_t window_start = 0; // index into waypoints where the stall window begins
        bool done = config_distance (joints, q, g) <= opts.goal_tolerance;
        for (std::size_t it = 0; !done && it < opts.max_steps; ++it)
        {
            const auto grad = c2g_input_gradient (p, q, g).d_q1;
            double norm = 0.0;
            for (double v : grad)
                norm += v * v;
            norm = std::sqrt (norm);
            if (!std::isfinite (norm))
            {
                t.note = "non-finite gradient at step " + std::to_string (it);
                break;
            }
            if (norm >= 1e-12)
                for (std::size_t k = 0; k < q.size (); ++k)
                    q[k] -= opts.step_size * grad[k] / norm;
            wrap (joints, q);
            ++r.descent_steps;
            t.waypoints.push_back (q);
            if (config_distance (joints, q, g) <= opts.goal_tolerance)
            {
                done = true;
                break;
            }

            if (t.waypoints.size () - 1 - window_start >= opts.stall_window)
            {
                // the shortest of the last few lags, so that short cycles around a
                // spurious minimum also count as a stall
                double moved = kInf;
                for (std::size_t lag = opts.stall_window; lag + 3 > opts.stall_window && lag > 0; --lag)
                    moved = std::min (moved, config_distance (joints, t.waypoints[t.waypoints.size () - 1 - lag], q));
                if (moved < opts.stall_threshold)
                {
                    if (r.perturbations_used >= opts.restarts)
                    {
                        t.note = "stalled after " + std::to_string (r.perturbations_used) + " perturbations";
                        break;
                    }
                    std::vector<double> dir (q.size ());
                    double dn = 0.0;
                    while (dn < 1e-12)
                    {
                        dn = 0.0;
                        for (auto &v : dir)
                            v = rng.normal (), dn += v * v;
                        dn = std::sqrt (dn);
                    }
                    for (std::size_t k = 0; k < q.size (); ++k)
                        q[k] += opts.perturb_scale * dir[k] / dn;
                    wrap (joints, q);
                    ++r.perturbations_used;
                    t.waypoints.push_back (q);
                    window_start = t.waypoints.size () - 1;
                    ++it; // a perturbation uses one iteration of the budget
                    if (config_distance (joints, q, g) <= opts.goal_tolerance)
                        done = true;
                }
            }
        }

        if (done)
        {
            r.reached = true;
            t.waypoints.push_back (g);
        }
        else if (t.note.empty ())
            t.note = "max_steps exhausted";
        t.length = trajectory_length (joints, t.waypoints);
        t.success = r.reached;
        t.planning_time_s = std::chrono::duration<double> (Clock::now () - t0).count ();
        return r;
    }

    ValidationReport validate_trajectory (const Trajectory &t, const RobotModel &m, const Workspace &w, double step)
    {
        require (step > 0.0, "validation step must be > 0");
        require (!t.waypoints.empty (), "cannot validate an empty trajectory");
        ValidationReport v;
        if (t.waypoints.size () == 1)
        {
            ++v.checks_used;
            if (config_in_collision (m, t.waypoints[0], w))
                v.collision_free = false, v.first_violation = 0;
            return v;
        }
        for (std::size_t i = 0; i + 1 < t.waypoints.size (); ++i)
            if (edge_in_collision (m, t.waypoints[i], t.waypoints[i + 1], w, step, &v.checks_used))
            {
                v.collision_free = false;
                v.first_violation = i;
                break;
            }
        return v;
    }

    Trajectory PlanResult::trajectory () const
    {
        Trajectory t = descent.trajectory;
        t.success = success ();
        t.collision_checks = validation.checks_used;
        if (descent.reached && !validation.collision_free)
            t.note = "validation failed at segment " + std::to_string (*validation.first_violation);
        return t;
    }

    PlanResult plan_and_validate (const C2GParams &p, const RobotModel &m, const Workspace &w, const Config &start, const Config &goal,
                                  const PlanOptions &opts, double validation_step)
    {
        require (m.dof () == p.layout.dof (), "robot dof does not match the cost-to-go network");
        const auto t0 = Clock::now ();
        PlanResult r;
        r.descent = plan_gradient_descent (p, start, goal, opts);
        r.validation = validate_trajectory (r.descent.trajectory, m, w, validation_step);
        r.descent.trajectory.planning_time_s = std::chrono::duration<double> (Clock::now () - t0).count ();
        return r;
    }

    nlohmann::json to_json (const PlanResult &r)
    {
        auto j = to_json (r.trajectory ());
        j["descent_steps"] = r.descent.descent_steps;
        j["perturbations_used"] = r.descent.perturbations_used;
        j["validated"] = r.validation.collision_free;
        return j;
    }

} // namespace c2g
