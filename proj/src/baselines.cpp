#include <c2g/baselines.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace c2g
{
    namespace
    {
        using Clock = std::chrono::steady_clock;

        double seconds_since (Clock::time_point t0) { return std::chrono::duration<double> (Clock::now () - t0).count (); }
    } // namespace

    std::string to_string (PlannerTag t)
    {
        switch (t)
        {
        case PlannerTag::C2gHof:
            return "c2g-hof";
        case PlannerTag::Rrt:
            return "rrt";
        case PlannerTag::RrtSmooth:
            return "rrt-smooth";
        case PlannerTag::AStar:
            return "astar";
        case PlannerTag::Prm:
            return "prm";
        }
        return "unknown";
    }

    PlannerTag planner_tag_from_string (const std::string &s)
    {
        for (auto t : {PlannerTag::C2gHof, PlannerTag::Rrt, PlannerTag::RrtSmooth, PlannerTag::AStar, PlannerTag::Prm})
            if (to_string (t) == s)
                return t;
        fail (ErrorCode::InvalidArgument, "unknown planner tag " + s);
    }

    double trajectory_length (std::span<const Joint> joints, std::span<const Config> waypoints)
    {
        double len = 0.0;
        for (std::size_t i = 1; i < waypoints.size (); ++i)
            len += config_distance (joints, waypoints[i - 1], waypoints[i]);
        return len;
    }

    nlohmann::json to_json (const Trajectory &t)
    {
        nlohmann::json j{
            {"planner", to_string (t.planner)},
            {"waypoints", t.waypoints},
            {"length", t.length},
            {"planning_time_s", t.planning_time_s},
            {"collision_checks", t.collision_checks},
            {"success", t.success},
        };
        if (!t.note.empty ())
            j["note"] = t.note;
        return j;
    }

    Trajectory astar (const GridMap &g, std::size_t start, std::size_t goal)
    {
        require (start < g.size () && goal < g.size (), "A* cell out of range");
        if (g.occupied (start) || g.occupied (goal))
            fail (ErrorCode::Collision, "A* endpoints must be free cells");
        const auto t0 = Clock::now ();
        Trajectory t;
        t.planner = PlannerTag::AStar;

        const Config goal_q = g.cell_center (goal);
        auto heuristic = [&] (std::size_t idx) { return config_distance (g.joints, g.cell_center (idx), goal_q); };
        const auto stencil = grid_stencil (g);

        constexpr std::size_t kNone = static_cast<std::size_t> (-1);
        std::vector<double> cost (g.size (), kInf);
        std::vector<std::size_t> parent (g.size (), kNone);
        using Item = std::pair<double, std::size_t>; // (f, cell): equal f pops the smaller index
        std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
        cost[start] = 0.0;
        open.emplace (heuristic (start), start);
        bool found = false;
        while (!open.empty ())
        {
            const auto [f, u] = open.top ();
            open.pop ();
            if (u == goal)
            {
                found = true;
                break;
            }
            if (f > cost[u] + heuristic (u))
                continue; // stale entry
            for_each_free_neighbor (g, stencil, u, [&] (std::size_t v, double wt) {
                const double nc = cost[u] + wt;
                if (nc < cost[v])
                {
                    cost[v] = nc;
                    parent[v] = u;
                    open.emplace (nc + heuristic (v), v);
                }
            });
        }

        if (!found)
        {
            t.waypoints = {g.cell_center (start)};
            t.success = false;
            t.note = "no path";
            t.planning_time_s = seconds_since (t0);
            return t;
        }
        std::vector<std::size_t> cells;
        for (std::size_t c = goal; c != kNone; c = parent[c])
            cells.push_back (c);
        std::reverse (cells.begin (), cells.end ());
        for (std::size_t c : cells)
            t.waypoints.push_back (g.cell_center (c));
        t.length = trajectory_length (g.joints, t.waypoints);
        t.success = true;
        t.planning_time_s = seconds_since (t0);
        return t;
    }

    namespace
    {
        struct Tree
        {
            std::vector<Config> nodes;
            std::vector<std::size_t> parent;

            std::size_t nearest (const RobotModel &m, const Config &q) const
            {
                std::size_t best = 0;
                double best_d = kInf;
                for (std::size_t i = 0; i < nodes.size (); ++i)
                {
                    const double d = config_distance (m, nodes[i], q);
                    if (d < best_d)
                        best_d = d, best = i;
                }
                return best;
            }

            std::vector<Config> path_to_root (std::size_t i) const
            {
                std::vector<Config> out;
                for (;;)
                {
                    out.push_back (nodes[i]);
                    if (i == 0)
                        break;
                    i = parent[i];
                }
                return out;
            }
        };

        enum class Extend
        {
            Trapped,
            Advanced,
            Reached,
        };

        Extend extend (Tree &tree, const Config &target, CollisionChecker &cc, const RrtParams &p, std::size_t &added)
        {
            const RobotModel &m = cc.model ();
            const std::size_t near = tree.nearest (m, target);
            const Config &from = tree.nodes[near];
            const auto delta = joint_delta (m.joints, from, target);
            double dist = 0.0;
            for (double v : delta)
                dist += v * v;
            dist = std::sqrt (dist);
            if (dist == 0.0)
            {
                added = near;
                return Extend::Reached;
            }
            Config q_new;
            Extend status;
            if (dist <= p.step)
            {
                q_new = target;
                status = Extend::Reached;
            }
            else
            {
                q_new = from;
                for (std::size_t k = 0; k < q_new.size (); ++k)
                    q_new[k] += p.step * delta[k] / dist;
                q_new = normalize (m, std::move (q_new));
                status = Extend::Advanced;
            }
            if (cc.edge (from, q_new, p.collision_step))
                return Extend::Trapped;
            tree.nodes.push_back (std::move (q_new));
            tree.parent.push_back (near);
            added = tree.nodes.size () - 1;
            return status;
        }

        Config random_config (const RobotModel &m, Rng &rng)
        {
            Config q (m.dof ());
            for (std::size_t i = 0; i < q.size (); ++i)
            {
                const Joint &j = m.joints[i];
                q[i] = j.periodic () ? rng.uniform (-kPi, kPi) : rng.uniform (j.lo, j.hi);
            }
            return q;
        }
    } // namespace

    Trajectory rrt_plan (const RobotModel &m, const Workspace &w, const Config &start, const Config &goal, const RrtParams &p)
    {
        require (p.step > 0.0 && p.collision_step > 0.0, "RRT step sizes must be > 0");
        require (p.goal_bias >= 0.0 && p.goal_bias <= 1.0, "goal bias must be in [0, 1]");
        const auto t0 = Clock::now ();
        CollisionChecker cc (m, w);
        Trajectory t;
        t.planner = PlannerTag::Rrt;
        const Config s = normalize (m, start);
        const Config g = normalize (m, goal);
        if (cc.config (s) || cc.config (g))
            fail (ErrorCode::Collision, "RRT start or goal in collision");

        Tree trees[2];
        trees[0].nodes = {s};
        trees[0].parent = {0};
        trees[1].nodes = {g};
        trees[1].parent = {0};
        Rng rng (mix_seed (p.seed, 0x525254));
        int a = 0; // tree being extended; tree 0 is rooted at the start

        for (std::size_t iter = 0; iter < p.max_iters; ++iter)
        {
            const int b = 1 - a;
            const Config q_rand = rng.uniform () < p.goal_bias ? trees[b].nodes[0] : random_config (m, rng);
            std::size_t new_a = 0;
            if (extend (trees[a], q_rand, cc, p, new_a) != Extend::Trapped)
            {
                const Config target = trees[a].nodes[new_a];
                std::size_t new_b = 0;
                Extend status;
                do
                    status = extend (trees[b], target, cc, p, new_b);
                while (status == Extend::Advanced);
                if (status == Extend::Reached)
                {
                    auto from_a = trees[a].path_to_root (new_a);
                    auto from_b = trees[b].path_to_root (new_b);
                    // from_a ends at tree a's root; from_b ends at tree b's root
                    std::vector<Config> path;
                    if (a == 0)
                    {
                        path.assign (from_a.rbegin (), from_a.rend ());
                        path.insert (path.end (), from_b.begin () + 1, from_b.end ());
                    }
                    else
                    {
                        path.assign (from_b.rbegin (), from_b.rend ());
                        path.insert (path.end (), from_a.begin () + 1, from_a.end ());
                    }
                    t.waypoints = std::move (path);
                    t.length = trajectory_length (m.joints, t.waypoints);
                    t.success = true;
                    t.collision_checks = cc.checks ();
                    t.planning_time_s = seconds_since (t0);
                    return t;
                }
            }
            a = 1 - a;
        }
        t.waypoints = {s};
        t.success = false;
        t.note = "max_iters exhausted";
        t.collision_checks = cc.checks ();
        t.planning_time_s = seconds_since (t0);
        return t;
    }

    namespace
    {
        // Configuration at arc length s along the polyline, with the index of the
        // segment it falls on.
        std::pair<Config, std::size_t> point_at (const RobotModel &m, const std::vector<Config> &wp, const std::vector<double> &cum, double s)
        {
            auto it = std::upper_bound (cum.begin (), cum.end (), s);
            std::size_t seg = it == cum.begin () ? 0 : static_cast<std::size_t> (it - cum.begin ()) - 1;
            seg = std::min (seg, wp.size () - 2);
            const double len = cum[seg + 1] - cum[seg];
            const double t = len > 0.0 ? std::clamp ((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
            return {interpolate (m, wp[seg], wp[seg + 1], t), seg};
        }
    } // namespace

    Trajectory shortcut_smooth (const Trajectory &in, const RobotModel &m, const Workspace &w, std::size_t iters, std::uint64_t seed, double collision_step)
    {
        const auto t0 = Clock::now ();
        Trajectory t = in;
        if (t.waypoints.size () < 3 || iters == 0)
            return t;
        CollisionChecker cc (m, w);
        Rng rng (mix_seed (seed, 0x534d4f));
        std::vector<double> cum;
        auto rebuild = [&] {
            cum.assign (1, 0.0);
            for (std::size_t i = 1; i < t.waypoints.size (); ++i)
                cum.push_back (cum.back () + config_distance (m, t.waypoints[i - 1], t.waypoints[i]));
        };
        rebuild ();
        for (std::size_t it = 0; it < iters; ++it)
        {
            const double total = cum.back ();
            if (total <= 0.0 || t.waypoints.size () < 3)
                break;
            double s1 = rng.uniform () * total;
            double s2 = rng.uniform () * total;
            if (s1 > s2)
                std::swap (s1, s2);
            auto [p1, seg1] = point_at (m, t.waypoints, cum, s1);
            auto [p2, seg2] = point_at (m, t.waypoints, cum, s2);
            if (seg1 == seg2)
                continue; // already a geodesic piece

            std::vector<Config> cand (t.waypoints.begin (), t.waypoints.begin () + static_cast<long> (seg1) + 1);
            cand.push_back (p1);
            cand.push_back (p2);
            cand.insert (cand.end (), t.waypoints.begin () + static_cast<long> (seg2) + 1, t.waypoints.end ());
            const double cand_len = trajectory_length (m.joints, cand);
            if (!(cand_len < cum.back ()))
                continue;
            // the partial pieces next to the cut points are sampled differently
            // from the edges they came from, so they are checked as well
            if (cc.edge (p1, p2, collision_step) || cc.edge (t.waypoints[seg1], p1, collision_step) || cc.edge (p2, t.waypoints[seg2 + 1], collision_step))
                continue;
            t.waypoints = std::move (cand);
            rebuild ();
        }
        t.length = trajectory_length (m.joints, t.waypoints);
        t.collision_checks += cc.checks ();
        t.planning_time_s += seconds_since (t0);
        if (in.planner == PlannerTag::Rrt)
            t.planner = PlannerTag::RrtSmooth;
        return t;
    }

} // namespace c2g
