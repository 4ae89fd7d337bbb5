// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance --work <dir> [--only 1,2,...]
//
// Criteria 5-8 share one trained model. Training takes tens of minutes on a
// single core, so the checkpoint is kept in <work>/learn and reused when the
// dataset checksums and the training config are unchanged.

#include <c2g/bench.hpp>

#include "oracles.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

using namespace c2g;
namespace fs = std::filesystem;

namespace
{
    using Clock = std::chrono::steady_clock;

    double since (Clock::time_point t0) { return std::chrono::duration<double> (Clock::now () - t0).count (); }

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string fmt (const char *f, auto... args)
    {
        char buf[512];
        std::snprintf (buf, sizeof buf, f, args...);
        return buf;
    }

    fs::path work_dir;

    fs::path fresh (const std::string &name)
    {
        const auto p = work_dir / name;
        fs::remove_all (p);
        fs::create_directories (p);
        return p;
    }

    // ------------------------------------------------------------------ 1

    Outcome oracle_equivalence ()
    {
        const auto t0 = Clock::now ();
        Rng rng (1001);
        double worst = 0.0;
        bool inf_mismatch = false;
        auto compare = [&] (const std::vector<double> &a, const std::vector<double> &b) {
            for (std::size_t i = 0; i < a.size (); ++i)
            {
                if (std::isinf (a[i]) || std::isinf (b[i]))
                    inf_mismatch |= a[i] != b[i];
                else
                    worst = std::max (worst, std::abs (a[i] - b[i]));
            }
        };
        for (int trial = 0; trial < 100; ++trial)
        {
            auto g = oracle::random_grid (rng);
            g.occupancy[rng.below (g.size ())] = 0;
            const std::size_t goal = sample_free_cell (g, rng);
            compare (dijkstra_cost_field (g, goal).cost, oracle::bellman_ford (g.size (), oracle::grid_edges (g), goal));
        }
        for (int trial = 0; trial < 100; ++trial)
        {
            const auto r = oracle::random_roadmap (rng);
            const std::size_t goal = rng.below (r.vertices.size ());
            compare (roadmap_cost_field (r, goal), oracle::bellman_ford (r.vertices.size (), oracle::roadmap_edges (r), goal));
        }
        const double s = since (t0);
        return {worst <= 1e-9 && !inf_mismatch && s < 10.0,
                fmt ("100 grids + 100 roadmaps, max |diff| %.3g, reachability %s, %.2f s", worst, inf_mismatch ? "MISMATCH" : "agrees", s)};
    }

    // ------------------------------------------------------------------ 2

    Outcome astar_consistency ()
    {
        const auto t0 = Clock::now ();
        Rng rng (2002);
        double worst = 0.0;
        int mismatched = 0, solved = 0;
        for (int trial = 0; trial < 1000; ++trial)
        {
            auto g = oracle::random_grid (rng, 24);
            g.occupancy[rng.below (g.size ())] = 0;
            const std::size_t start = sample_free_cell (g, rng), goal = sample_free_cell (g, rng);
            const auto field = dijkstra_cost_field (g, goal);
            const auto path = astar (g, start, goal);
            if (path.success != std::isfinite (field.cost[start]))
            {
                ++mismatched;
                continue;
            }
            if (path.success)
            {
                ++solved;
                worst = std::max (worst, std::abs (path.length - field.cost[start]));
            }
        }
        const double s = since (t0);
        return {worst <= 1e-9 && mismatched == 0 && s < 30.0,
                fmt ("1000 triples (%d connected), max |A* - field| %.3g, %d reachability mismatches, %.2f s", solved, worst, mismatched, s)};
    }

    // ------------------------------------------------------------------ 3

    // Central differences at h = 1e-5 carry roundoff near eps * |f| / h, so the
    // floor of the denominator grows with the size of the differentiated value.
    double rel (double a, double b, double f) { return std::abs (a - b) / std::max ({std::abs (a), std::abs (b), 1e-6 * std::max (1.0, std::abs (f))}); }

    Outcome gradient_fidelity ()
    {
        const auto t0 = Clock::now ();
        const double h = 1e-5;
        HofLayout l;
        l.encoder = {4, 5};
        l.head_hidden = 6;
        l.child.joints = {Joint::revolute ()};
        l.child.n_basis = 2;
        l.child.hidden1 = l.child.hidden2 = 2;
        Rng rng (3003);
        double worst_input = 0.0, worst_param = 0.0;
        std::size_t checked = 0;
        for (int draw = 0; draw < 100; ++draw)
        {
            HofParams hp = hof_init (l, rng.next ());
            for (auto &v : hp.theta)
                v += rng.uniform (-0.3, 0.3);
            // positive biases keep most ReLUs away from their kink
            for (std::size_t k = 0; k + 1 < l.layer_count (); ++k)
                for (std::size_t i = 0; i < l.layer_out (k); ++i)
                    hp.theta[l.bias_offset (k) + i] = rng.uniform (0.3, 0.8);
            PointCloud pc;
            for (int i = 0; i < 8; ++i)
                pc.points.push_back (rng.uniform (-1, 1));
            std::vector<CostTuple> tuples;
            for (int i = 0; i < 3; ++i)
                tuples.push_back ({{rng.uniform (-kPi, kPi)}, {rng.uniform (-kPi, kPi)}, rng.uniform (0.0, kPi)});

            // input gradient of the emitted child
            auto child = hof_forward (hp, pc);
            for (const auto &t : tuples)
            {
                const auto g = c2g_input_gradient (child, t.q1, t.q2);
                const Config a1{t.q1[0] + h}, b1{t.q1[0] - h}, a2{t.q2[0] + h}, b2{t.q2[0] - h};
                const double n1 = (c2g_eval (child, a1, t.q2) - c2g_eval (child, b1, t.q2)) / (2 * h);
                const double n2 = (c2g_eval (child, t.q1, a2) - c2g_eval (child, t.q1, b2)) / (2 * h);
                const double f = c2g_eval (child, t.q1, t.q2);
                worst_input = std::max ({worst_input, rel (g.d_q1[0], n1, f), rel (g.d_q2[0], n2, f)});
            }

            // end-to-end: loss through the child back to every hypernetwork weight
            const auto lg = loss_and_gradients (hp, pc, tuples, kPi);
            for (std::size_t k = 0; k < hp.theta.size (); ++k)
            {
                const double keep = hp.theta[k];
                hp.theta[k] = keep + h;
                const double up = hof_loss (hp, pc, tuples, kPi);
                hp.theta[k] = keep - h;
                const double down = hof_loss (hp, pc, tuples, kPi);
                hp.theta[k] = keep;
                worst_param = std::max (worst_param, rel (lg.grad[k], (up - down) / (2 * h), lg.loss));
                ++checked;
            }
        }
        const double s = since (t0);
        return {worst_input < 1e-4 && worst_param < 1e-4 && s < 60.0,
                fmt ("100 draws, worst relative error: input %.2e, hof parameters %.2e over %zu entries, %.2f s", worst_input, worst_param, checked, s)};
    }

    // ------------------------------------------------------------------ 4

    Outcome encoder_invariance ()
    {
        HofLayout l;
        l.child = C2GLayout::for_robot (RobotModel::planar2 (), 64, 64, 64);
        const auto hp = hof_init (l, 44);
        Rng rng (4004);
        int broken = 0;
        for (int trial = 0; trial < 100; ++trial)
        {
            PointCloud pc;
            const std::size_t n = 1 + rng.below (300);
            for (std::size_t i = 0; i < 2 * n; ++i)
                pc.points.push_back (rng.uniform (-1, 1));
            const auto base = hof_forward (hp, pc).theta;

            std::vector<std::size_t> order (n);
            std::iota (order.begin (), order.end (), 0);
            for (std::size_t i = n; i > 1; --i)
                std::swap (order[i - 1], order[rng.below (i)]);
            PointCloud shuffled, duplicated = pc;
            for (std::size_t i : order)
                shuffled.points.insert (shuffled.points.end (), {pc.points[2 * i], pc.points[2 * i + 1]});
            for (std::size_t k = 0, extra = 1 + rng.below (n); k < extra; ++k)
            {
                const std::size_t i = rng.below (n);
                duplicated.points.insert (duplicated.points.end (), {pc.points[2 * i], pc.points[2 * i + 1]});
            }
            broken += hof_forward (hp, shuffled).theta != base;
            broken += hof_forward (hp, duplicated).theta != base;
        }
        return {broken == 0, fmt ("100 clouds x (permutation, duplication), %d outputs differ bitwise", broken)};
    }

    // ------------------------------------------------------------ 5 - 8

    struct Learned
    {
        std::vector<DatasetShard> shards;
        HofCheckpoint ckpt;
        std::string checkpoint_path;
        std::string data_dir;
        double train_s = 0.0;
        bool reused = false;
    };

    Learned &learned ()
    {
        static Learned L = [] {
            Learned x;
            const auto root = work_dir / "learn";
            fs::create_directories (root);
            GenDataConfig g;
            g.n_workspaces = 50;
            g.grid_cells = 72;
            g.goals = 20;
            g.tuples_per_goal = 2000;
            g.seed = 5005;
            g.threads = thread_count ();
            g.out_dir = (root / "data").string ();
            fs::remove_all (g.out_dir);
            const auto t0 = Clock::now ();
            const auto rep = gen_data (g);
            spdlog::info ("criterion 5: generated {} workspaces in {:.1f} s", rep.written, since (t0));
            x.data_dir = g.out_dir;
            x.shards = load_dataset (g.out_dir);

            TrainCommandConfig t; // defaults: 500 epochs, 2000 tuples per iteration
            t.dataset_dir = g.out_dir;
            t.out_dir = (root / "model").string ();
            t.train.threads = thread_count ();
            std::string stamp = to_json (t).dump ();
            for (const auto &s : rep.manifest["shards"])
                stamp += s["sha256"].get<std::string> ();
            stamp = sha256_hex (stamp);

            const auto final_ck = fs::path (t.out_dir) / "checkpoint_000500.c2gh";
            const auto stamp_file = fs::path (t.out_dir) / "acceptance_stamp";
            if (fs::exists (final_ck) && fs::exists (stamp_file) && read_file (stamp_file.string ()) == stamp)
                x.reused = true;
            else
            {
                fs::remove_all (t.out_dir);
                const auto t1 = Clock::now ();
                const auto tr = train_command (t);
                x.train_s = since (t1);
                write_file (stamp_file.string (), stamp);
                write_file ((fs::path (t.out_dir) / "train_seconds").string (), std::to_string (x.train_s));
            }
            if (x.reused && fs::exists (fs::path (t.out_dir) / "train_seconds"))
                x.train_s = std::stod (read_file ((fs::path (t.out_dir) / "train_seconds").string ()));
            x.checkpoint_path = final_ck.string ();
            x.ckpt = load_checkpoint (x.checkpoint_path);
            return x;
        }();
        return L;
    }

    Outcome learning_quality ()
    {
        auto &L = learned ();
        const auto m = RobotModel::planar2 ();
        const int cells[2] = {72, 72};
        std::vector<double> errs;
        double gt_sum = 0.0;
        std::size_t skipped_goals = 0;
        for (const auto &shard : L.shards)
        {
            const auto g = build_grid_map (m, shard.workspace, cells, kDefaultMaxGridCells, thread_count ());
            std::set<Config> trained_goals;
            for (const auto &t : shard.tuples)
                trained_goals.insert (t.q2);
            const auto child = emit_c2g (L.ckpt, shard.cloud, 256, shard.workspace_id);
            Rng rng (mix_seed (0xe7a1, shard.workspace_id));
            for (int k = 0; k < 5;)
            {
                const std::size_t goal = sample_free_cell (g, rng);
                const Config gq = g.cell_center (goal);
                Config stored (gq.size ()); // shards keep float32 configurations
                for (std::size_t d = 0; d < gq.size (); ++d)
                    stored[d] = static_cast<float> (gq[d]);
                if (trained_goals.count (stored))
                {
                    ++skipped_goals;
                    continue;
                }
                ++k;
                const auto f = dijkstra_cost_field (g, goal);
                for (std::size_t c = 0; c < g.size (); ++c)
                    if (std::isfinite (f.cost[c]))
                    {
                        const double pred = c2g_eval (child, g.cell_center (c), gq) * L.ckpt.target_scale;
                        errs.push_back (std::abs (pred - f.cost[c]));
                        gt_sum += f.cost[c];
                    }
            }
        }
        const double mean_gt = gt_sum / static_cast<double> (errs.size ());
        std::nth_element (errs.begin (), errs.begin () + static_cast<long> (errs.size () / 2), errs.end ());
        const double median = errs[errs.size () / 2];
        const double ratio = median / mean_gt;
        return {ratio <= 0.15 && L.train_s <= 7200.0,
                fmt ("median |err| %.4f rad vs mean cost %.4f rad = %.2f%% (bound 15%%) over %zu cells, %zu training-goal draws skipped; training %.0f s%s",
                     median, mean_gt, 100 * ratio, errs.size (), skipped_goals, L.train_s, L.reused ? " (cached model)" : "")};
    }

    struct PlanStats
    {
        int pairs = 0, reached = 0, validated_of_reached = 0;
        std::vector<double> ratios; // c2g length / A* length, reached and validated
        std::uint64_t checks_during_descent = 0;
    };

    PlanStats &plan_stats ()
    {
        static PlanStats S = [] {
            PlanStats st;
            auto &L = learned ();
            const auto m = RobotModel::planar2 ();
            const int cells[2] = {72, 72};
            const std::size_t nws = L.shards.size ();
            for (std::size_t i = 0; i < nws; ++i)
            {
                const auto &shard = L.shards[i];
                const auto g = build_grid_map (m, shard.workspace, cells, kDefaultMaxGridCells, thread_count ());
                const auto child = emit_c2g (L.ckpt, shard.cloud, 256, shard.workspace_id);
                Rng rng (mix_seed (0x9a125, shard.workspace_id));
                const int want = static_cast<int> (200 / nws + (i < 200 % nws));
                for (int got = 0; got < want;)
                {
                    const std::size_t a = sample_free_cell (g, rng), b = sample_free_cell (g, rng);
                    const Config qa = g.cell_center (a), qb = g.cell_center (b);
                    if (config_distance (m, qa, qb) < kPi)
                        continue;
                    const auto ref = astar (g, a, b);
                    if (!ref.success)
                        continue;
                    ++got;
                    ++st.pairs;
                    PlanOptions o;
                    o.seed = static_cast<std::uint64_t> (st.pairs);
                    const auto before = collision_checks_total ();
                    const auto r = plan_gradient_descent (child, qa, qb, o);
                    st.checks_during_descent += collision_checks_total () - before;
                    if (!r.reached)
                        continue;
                    ++st.reached;
                    if (!validate_trajectory (r.trajectory, m, shard.workspace, 0.02).collision_free)
                        continue;
                    ++st.validated_of_reached;
                    st.ratios.push_back (r.trajectory.length / ref.length);
                }
            }
            return st;
        }();
        return S;
    }

    Outcome planning_success ()
    {
        const auto &st = plan_stats ();
        const double rate = static_cast<double> (st.reached) / st.pairs;
        return {rate >= 0.8 && st.validated_of_reached == st.reached,
                fmt ("%d/%d pairs reached the goal (%.1f%%, bound 80%%); %d/%d of those pass validation", st.reached, st.pairs, 100 * rate,
                     st.validated_of_reached, st.reached)};
    }

    Outcome trajectory_quality ()
    {
        const auto &st = plan_stats ();
        if (st.ratios.empty ())
            return {false, "no successful instances"};
        const double mean = std::accumulate (st.ratios.begin (), st.ratios.end (), 0.0) / static_cast<double> (st.ratios.size ());
        double var = 0.0;
        for (double r : st.ratios)
            var += (r - mean) * (r - mean);
        return {mean <= 1.25,
                fmt ("mean length / A* length %.3f (std %.3f) over %zu successes (bound 1.25)", mean, std::sqrt (var / static_cast<double> (st.ratios.size ())),
                     st.ratios.size ())};
    }

    Outcome structural_speed ()
    {
        const auto &st = plan_stats ();
        auto &L = learned ();
        BenchConfig b;
        b.checkpoint = L.checkpoint_path;
        b.dataset_dir = L.data_dir;
        b.n_workspaces = 5;
        b.pairs_per_workspace = 4;
        b.seed = 8008;
        b.threads = thread_count ();
        b.out_dir = fresh ("bench").string ();
        const auto rep = bench (b);
        bool shaped = true;
        for (const char *f : {"bench_table.csv", "bench_breakdown.csv", "instances.jsonl"})
            shaped &= fs::exists (fs::path (b.out_dir) / f);
        const auto breakdown = read_file ((fs::path (b.out_dir) / "bench_breakdown.csv").string ());
        shaped &= breakdown.rfind ("planner,preproc_s,traj_s,postproc_s,total_s", 0) == 0;
        shaped &= rep.rows.size () == b.planners.size ();
        std::ostringstream rows;
        for (const auto &r : rep.rows)
            rows << " " << r.planner << fmt (" %.0f%%/%.2gs", 100 * r.success_rate, r.mean_time_s);
        return {st.checks_during_descent == 0 && shaped,
                fmt ("%llu collision checks during %d descents; bench CSVs %s in %s;", static_cast<unsigned long long> (st.checks_during_descent), st.pairs,
                     shaped ? "written" : "MISSING OR MALFORMED", b.out_dir.c_str ()) +
                    rows.str ()};
    }

    // ------------------------------------------------------------------ 9

    Outcome baseline_soundness ()
    {
        const auto m = RobotModel::planar2 ();
        int runs = 0, solved = 0, unsound = 0, smoothed = 0, longer = 0, smooth_unsound = 0;
        std::vector<std::pair<Trajectory, Workspace>> inputs;
        for (; runs < 500; ++runs)
        {
            const auto w = generate_random_workspace ({}, 9000 + static_cast<std::uint64_t> (runs));
            Rng rng (mix_seed (9009, runs));
            Config a, b;
            do
                a = {rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
            while (config_in_collision (m, a, w));
            do
                b = {rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
            while (config_in_collision (m, b, w));
            RrtParams p;
            p.seed = static_cast<std::uint64_t> (runs);
            const auto t = rrt_plan (m, w, a, b, p);
            if (!t.success)
                continue;
            ++solved;
            const bool ends = t.waypoints.front () == a && t.waypoints.back () == b;
            if (!ends || !validate_trajectory (t, m, w, p.collision_step).collision_free)
                ++unsound;
            inputs.emplace_back (t, w);
        }
        // top up with random feasible polylines so smoothing sees 500 inputs
        for (std::uint64_t s = 0; inputs.size () < 500; ++s)
        {
            Rng rng (mix_seed (9010, s));
            Trajectory t;
            t.planner = PlannerTag::Rrt;
            Config q{rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
            t.waypoints.push_back (q);
            for (int k = 0; k < 20; ++k)
            {
                q = {wrap_angle (q[0] + rng.uniform (-0.5, 0.5)), wrap_angle (q[1] + rng.uniform (-0.5, 0.5))};
                t.waypoints.push_back (q);
            }
            t.length = trajectory_length (m.joints, t.waypoints);
            t.success = true;
            inputs.emplace_back (t, Workspace{});
        }
        std::uint64_t seed = 0;
        for (const auto &[t, w] : inputs)
        {
            const auto s = shortcut_smooth (t, m, w, 200, seed++);
            ++smoothed;
            if (s.length > t.length)
                ++longer;
            if (!validate_trajectory (s, m, w, 0.02).collision_free)
                ++smooth_unsound;
        }
        return {unsound == 0 && longer == 0 && smooth_unsound == 0 && smoothed >= 500,
                fmt ("RRT: %d/%d runs solved, %d unsound; smoothing: %d inputs, %d lengthened, %d made invalid", solved, runs, unsound, smoothed, longer,
                     smooth_unsound)};
    }

    // ----------------------------------------------------------------- 10

    Outcome determinism ()
    {
        GenDataConfig g;
        g.n_workspaces = 4;
        g.grid_cells = 48;
        g.goals = 4;
        g.tuples_per_goal = 300;
        g.seed = 1010;
        g.threads = 1;
        g.out_dir = fresh ("det_data_a").string ();
        const auto a = gen_data (g);
        g.out_dir = fresh ("det_data_b").string ();
        g.threads = std::max (2u, thread_count ());
        const auto b = gen_data (g);
        bool shards_equal = a.manifest["shards"].size () == b.manifest["shards"].size ();
        for (std::size_t i = 0; shards_equal && i < a.manifest["shards"].size (); ++i)
            shards_equal = a.manifest["shards"][i]["sha256"] == b.manifest["shards"][i]["sha256"];

        auto train_once = [&] (const std::string &name) {
            TrainCommandConfig t;
            t.dataset_dir = (work_dir / "det_data_a").string ();
            t.out_dir = fresh (name).string ();
            t.encoder = {16, 32};
            t.head_hidden = 32;
            t.n_basis = t.hidden1 = t.hidden2 = 16;
            t.train.epochs = 20;
            t.train.tuples_per_iteration = 200;
            t.train.checkpoint_every = 10;
            t.train.threads = 1;
            t.log_wall_time = false;
            const auto rep = train_command (t);
            return std::make_pair (sha256_hex (read_file (rep.log_path)), sha256_hex (read_file (rep.checkpoints.back ())));
        };
        const auto r1 = train_once ("det_train_a"), r2 = train_once ("det_train_b");
        return {shards_equal && r1 == r2, fmt ("gen-data shard checksums %s (1 vs %u threads); train log %s, final checkpoint %s", shards_equal ? "identical" : "DIFFER",
                                               g.threads, r1.first == r2.first ? "identical" : "DIFFERS", r1.second == r2.second ? "identical" : "DIFFERS")};
    }
} // namespace

int main (int argc, char **argv)
{
    work_dir = fs::current_path () / "acceptance_work";
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
    {
        const std::string arg = argv[i];
        if (arg == "--work" && i + 1 < argc)
            work_dir = argv[++i];
        else if (arg == "--only" && i + 1 < argc)
        {
            std::stringstream ss (argv[++i]);
            for (std::string item; std::getline (ss, item, ',');)
                only.insert (std::stoi (item));
        }
        else
        {
            std::fprintf (stderr, "usage: acceptance [--work DIR] [--only 1,2,...]\n");
            return 2;
        }
    }
    fs::create_directories (work_dir);
    spdlog::set_level (spdlog::level::info);

    const std::vector<std::pair<const char *, std::function<Outcome ()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"A*/Dijkstra consistency", astar_consistency},
        {"gradient fidelity", gradient_fidelity},
        {"encoder invariance", encoder_invariance},
        {"learning quality", learning_quality},
        {"planning success", planning_success},
        {"trajectory quality", trajectory_quality},
        {"structural speed", structural_speed},
        {"baseline soundness", baseline_soundness},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size (); ++i)
    {
        const int id = static_cast<int> (i + 1);
        if (!only.empty () && !only.count (id))
            continue;
        Outcome o;
        const auto t0 = Clock::now ();
        try
        {
            o = criteria[i].second ();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string ("threw: ") + e.what ()};
        }
        failed += !o.pass;
        std::printf ("criterion %2d %-26s %s  %s [%.1f s]\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str (), since (t0));
        std::fflush (stdout);
    }
    return failed ? 1 : 0;
}
