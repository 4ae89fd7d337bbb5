#include <c2g/bench.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <queue>
#include <set>

namespace fs = std::filesystem;

namespace c2g
{
    namespace
    {
        using Clock = std::chrono::steady_clock;
        using json = nlohmann::json;

        double seconds_since (Clock::time_point t0) { return std::chrono::duration<double> (Clock::now () - t0).count (); }

        template <typename T> void read_opt (const json &j, const char *key, T &out)
        {
            if (j.contains (key) && !j[key].is_null ())
                out = j[key].get<T> ();
        }

        std::string numbered (const std::string &stem, std::size_t n, int width, const std::string &ext)
        {
            char buf[32];
            std::snprintf (buf, sizeof buf, "%0*zu", width, n);
            return stem + buf + ext;
        }

        void ensure_dir (const std::string &dir)
        {
            require (!dir.empty (), "output directory must be set");
            std::error_code ec;
            fs::create_directories (dir, ec);
            if (ec)
                fail (ErrorCode::Io, "cannot create directory " + dir + ": " + ec.message ());
        }

        template <typename Fn> auto parse_guard (const char *what, Fn &&fn)
        {
            try
            {
                return fn ();
            }
            catch (const json::exception &e)
            {
                fail (ErrorCode::InvalidArgument, std::string (what) + ": " + e.what ());
            }
        }

        PrmOptions prm_from_json (const json &j, PrmOptions o)
        {
            read_opt (j, "n_vertices", o.n_vertices);
            read_opt (j, "k", o.k);
            read_opt (j, "step", o.step);
            read_opt (j, "seed", o.seed);
            read_opt (j, "min_free_fraction", o.min_free_fraction);
            return o;
        }

        json to_json_prm (const PrmOptions &o)
        {
            return {{"n_vertices", o.n_vertices}, {"k", o.k}, {"step", o.step}, {"seed", o.seed}, {"min_free_fraction", o.min_free_fraction}};
        }

        RrtParams rrt_from_json (const json &j, RrtParams p)
        {
            read_opt (j, "step", p.step);
            read_opt (j, "goal_bias", p.goal_bias);
            read_opt (j, "max_iters", p.max_iters);
            read_opt (j, "seed", p.seed);
            read_opt (j, "collision_step", p.collision_step);
            return p;
        }

        PlanOptions plan_from_json (const json &j, PlanOptions o)
        {
            read_opt (j, "step_size", o.step_size);
            read_opt (j, "max_steps", o.max_steps);
            read_opt (j, "goal_tolerance", o.goal_tolerance);
            read_opt (j, "stall_window", o.stall_window);
            read_opt (j, "stall_threshold", o.stall_threshold);
            read_opt (j, "perturb_scale", o.perturb_scale);
            read_opt (j, "restarts", o.restarts);
            read_opt (j, "seed", o.seed);
            return o;
        }

        json to_json_plan (const PlanOptions &o)
        {
            return {{"step_size", o.step_size},           {"max_steps", o.max_steps},         {"goal_tolerance", o.goal_tolerance},
                    {"stall_window", o.stall_window},     {"stall_threshold", o.stall_threshold}, {"perturb_scale", o.perturb_scale},
                    {"restarts", o.restarts},             {"seed", o.seed}};
        }

        RobotModel robot_field (const json &j, RobotModel fallback)
        {
            if (j.contains ("robot"))
                return robot_from_json (j["robot"]);
            return fallback;
        }

        Workspace empty_like (const Workspace &w)
        {
            Workspace e;
            e.dim = w.dim;
            e.bounds = w.bounds;
            return e;
        }

        std::vector<int> grid_dims (const RobotModel &m, int cells) { return std::vector<int> (m.dof (), cells); }
    } // namespace

    int exit_code_for (ErrorCode code)
    {
        switch (code)
        {
        case ErrorCode::InvalidArgument:
        case ErrorCode::Infeasible:
        case ErrorCode::Collision:
            return 2;
        default:
            return 1;
        }
    }

    // ------------------------------------------------------------ gen-data

    GenDataConfig gen_data_config_from_json (const json &j)
    {
        return parse_guard ("gen-data config", [&] {
            GenDataConfig c;
            c.threads = thread_count ();
            c.robot = robot_field (j, c.robot);
            c.workspace.dim = c.robot.workspace_dim ();
            if (c.workspace.dim == 3)
            {
                c.workspace.bounds = {{-1.0, -1.0, 0.0}, {1.0, 1.0, 1.0}};
                c.workspace.base_clearance = 0.2;
            }
            if (j.contains ("workspace"))
                c.workspace = workspace_spec_from_json (j["workspace"], c.workspace);
            read_opt (j, "n_workspaces", c.n_workspaces);
            read_opt (j, "first_workspace_id", c.first_workspace_id);
            if (j.contains ("oracle"))
            {
                const auto o = j["oracle"].get<std::string> ();
                if (o == "grid")
                    c.oracle = OracleKind::Grid;
                else if (o == "prm")
                    c.oracle = OracleKind::Prm;
                else
                    fail (ErrorCode::InvalidArgument, "oracle must be \"grid\" or \"prm\"");
            }
            read_opt (j, "grid_cells", c.grid_cells);
            if (j.contains ("prm"))
                c.prm = prm_from_json (j["prm"], c.prm);
            read_opt (j, "goals", c.goals);
            read_opt (j, "tuples_per_goal", c.tuples_per_goal);
            read_opt (j, "cloud_points", c.cloud_points);
            read_opt (j, "seed", c.seed);
            read_opt (j, "threads", c.threads);
            read_opt (j, "out_dir", c.out_dir);
            return c;
        });
    }

    json to_json (const GenDataConfig &c)
    {
        return {
            {"robot", to_json (c.robot)},
            {"workspace", to_json (c.workspace)},
            {"n_workspaces", c.n_workspaces},
            {"first_workspace_id", c.first_workspace_id},
            {"oracle", c.oracle == OracleKind::Grid ? "grid" : "prm"},
            {"grid_cells", c.grid_cells},
            {"prm", to_json_prm (c.prm)},
            {"goals", c.goals},
            {"tuples_per_goal", c.tuples_per_goal},
            {"cloud_points", c.cloud_points},
            {"seed", c.seed},
        };
    }

    namespace
    {
        DatasetShard make_shard (const GenDataConfig &cfg, std::uint32_t id)
        {
            const std::uint64_t ws_seed = mix_seed (cfg.seed, id);
            DatasetShard s;
            s.dof = static_cast<std::uint32_t> (cfg.robot.dof ());
            s.workspace_id = id;
            s.workspace = generate_random_workspace (cfg.workspace, ws_seed);
            s.cloud = sample_point_cloud (s.workspace, cfg.cloud_points, mix_seed (ws_seed, 1));
            Rng rng (mix_seed (ws_seed, 2));
            if (cfg.oracle == OracleKind::Grid)
            {
                const auto dims = grid_dims (cfg.robot, cfg.grid_cells);
                const GridMap g = build_grid_map (cfg.robot, s.workspace, dims);
                std::vector<GridCostField> fields;
                for (std::size_t k = 0; k < cfg.goals; ++k)
                    fields.push_back (dijkstra_cost_field (g, sample_free_cell (g, rng)));
                s.tuples = emit_tuples (g, fields, cfg.tuples_per_goal, mix_seed (ws_seed, 3));
            }
            else
            {
                PrmOptions po = cfg.prm;
                po.seed = mix_seed (ws_seed, 4);
                po.threads = 1;
                const Roadmap r = build_prm (cfg.robot, s.workspace, po);
                std::vector<std::pair<std::size_t, std::vector<double>>> fields;
                for (std::size_t k = 0; k < cfg.goals; ++k)
                {
                    const auto goal = static_cast<std::size_t> (rng.below (r.vertices.size ()));
                    fields.emplace_back (goal, roadmap_cost_field (r, goal));
                }
                s.tuples = emit_tuples (r, fields, cfg.tuples_per_goal, mix_seed (ws_seed, 3));
            }
            if (s.tuples.empty ())
                fail (ErrorCode::Infeasible, "no goal in this workspace reaches any other configuration");
            return s;
        }
    } // namespace

    GenDataReport gen_data (const GenDataConfig &cfg)
    {
        validate (cfg.robot);
        validate (cfg.workspace);
        require (cfg.workspace.dim == cfg.robot.workspace_dim (), "workspace dim does not match the robot");
        require (cfg.n_workspaces >= 1 && cfg.goals >= 1 && cfg.tuples_per_goal >= 1, "n_workspaces, goals and tuples_per_goal must be >= 1");
        if (cfg.oracle == OracleKind::Grid)
        {
            if (cfg.robot.dof () > 3)
                fail (ErrorCode::InvalidArgument, "grid oracle is limited to dof <= 3 (robot has dof " + std::to_string (cfg.robot.dof ()) + "); use the prm oracle");
            require (cfg.grid_cells >= 2, "grid_cells must be >= 2");
        }
        ensure_dir (cfg.out_dir);

        const std::size_t n = cfg.n_workspaces;
        std::vector<std::string> blobs (n), errors (n);
        std::vector<std::size_t> tuple_counts (n, 0);
        parallel_for (n, std::max (1u, cfg.threads), [&] (std::size_t i) {
            const auto id = static_cast<std::uint32_t> (cfg.first_workspace_id + i);
            try
            {
                const DatasetShard s = make_shard (cfg, id);
                tuple_counts[i] = s.tuples.size ();
                blobs[i] = encode_shard (s);
            }
            catch (const std::exception &e)
            {
                errors[i] = e.what ();
            }
        });

        GenDataReport rep;
        json shards = json::array (), failures = json::array ();
        for (std::size_t i = 0; i < n; ++i)
        {
            const std::size_t id = cfg.first_workspace_id + i;
            if (!errors[i].empty ())
            {
                spdlog::warn ("gen-data: workspace {} failed: {}", id, errors[i]);
                failures.push_back ({{"workspace_id", id}, {"error", errors[i]}});
                ++rep.failed;
                continue;
            }
            const std::string file = numbered ("shard_", id, 5, ".c2gd");
            write_file ((fs::path (cfg.out_dir) / file).string (), blobs[i]);
            shards.push_back ({{"file", file}, {"workspace_id", id}, {"tuples", tuple_counts[i]}, {"bytes", blobs[i].size ()}, {"sha256", sha256_hex (blobs[i])}});
            ++rep.written;
        }
        rep.manifest = {{"format", "c2g-dataset"}, {"version", 1}, {"dof", cfg.robot.dof ()}, {"config", to_json (cfg)}, {"shards", shards}, {"failures", failures}};
        write_file ((fs::path (cfg.out_dir) / "manifest.json").string (), rep.manifest.dump (2) + "\n");
        return rep;
    }

    std::vector<DatasetShard> load_dataset (const std::string &dir, json *manifest_out)
    {
        const std::string mpath = (fs::path (dir) / "manifest.json").string ();
        if (!fs::exists (mpath))
            fail (ErrorCode::InvalidArgument, "no manifest.json in dataset directory " + dir);
        json manifest;
        try
        {
            manifest = json::parse (read_file (mpath));
        }
        catch (const json::exception &e)
        {
            fail (ErrorCode::Io, "manifest: " + std::string (e.what ()));
        }
        std::vector<DatasetShard> shards;
        for (const auto &entry : manifest.at ("shards"))
        {
            const auto file = entry.at ("file").get<std::string> ();
            const std::string bytes = read_file ((fs::path (dir) / file).string ());
            if (sha256_hex (bytes) != entry.at ("sha256").get<std::string> ())
                fail (ErrorCode::Io, "checksum mismatch for shard " + file);
            shards.push_back (decode_shard (bytes));
        }
        if (shards.empty ())
            fail (ErrorCode::InvalidArgument, "dataset " + dir + " has no shards");
        for (const auto &s : shards)
            if (s.dof != shards.front ().dof)
                fail (ErrorCode::InvalidArgument, "dataset mixes dof " + std::to_string (shards.front ().dof) + " and " + std::to_string (s.dof));
        if (manifest_out)
            *manifest_out = std::move (manifest);
        return shards;
    }

    // --------------------------------------------------------------- train

    TrainCommandConfig train_config_from_json (const json &j)
    {
        return parse_guard ("train config", [&] {
            TrainCommandConfig c;
            c.train.threads = thread_count ();
            read_opt (j, "dataset_dir", c.dataset_dir);
            read_opt (j, "out_dir", c.out_dir);
            auto &t = c.train;
            read_opt (j, "learning_rate", t.adam.learning_rate);
            read_opt (j, "beta1", t.adam.beta1);
            read_opt (j, "beta2", t.adam.beta2);
            read_opt (j, "epsilon", t.adam.epsilon);
            read_opt (j, "epochs", t.epochs);
            read_opt (j, "tuples_per_iteration", t.tuples_per_iteration);
            read_opt (j, "pointcloud_subsample", t.pointcloud_subsample);
            read_opt (j, "workspaces_per_step", t.workspaces_per_step);
            read_opt (j, "seed", t.seed);
            read_opt (j, "target_scale", t.target_scale);
            read_opt (j, "holdout_fraction", t.holdout_fraction);
            read_opt (j, "holdout_shards", t.holdout_shards);
            read_opt (j, "holdout_tuples", t.holdout_tuples);
            read_opt (j, "checkpoint_every", t.checkpoint_every);
            read_opt (j, "threads", t.threads);
            read_opt (j, "init_beta", t.init.beta0);
            read_opt (j, "init_output", t.init.output0);
            read_opt (j, "head_out_scale", t.init.head_out_scale);
            read_opt (j, "encoder", c.encoder);
            read_opt (j, "head_hidden", c.head_hidden);
            read_opt (j, "n_basis", c.n_basis);
            read_opt (j, "hidden1", c.hidden1);
            read_opt (j, "hidden2", c.hidden2);
            if (j.contains ("embedding"))
            {
                const auto e = j["embedding"].get<std::string> ();
                require (e == "angle" || e == "raw", "embedding must be \"angle\" or \"raw\"");
                c.embedding = e == "angle" ? Embedding::Angle : Embedding::Raw;
            }
            read_opt (j, "log_wall_time", c.log_wall_time);
            return c;
        });
    }

    json to_json (const TrainCommandConfig &c)
    {
        const auto &t = c.train;
        return {
            {"dataset_dir", c.dataset_dir},
            {"learning_rate", t.adam.learning_rate},
            {"beta1", t.adam.beta1},
            {"beta2", t.adam.beta2},
            {"epsilon", t.adam.epsilon},
            {"epochs", t.epochs},
            {"tuples_per_iteration", t.tuples_per_iteration},
            {"pointcloud_subsample", t.pointcloud_subsample},
            {"workspaces_per_step", t.workspaces_per_step},
            {"seed", t.seed},
            {"target_scale", t.target_scale},
            {"holdout_fraction", t.holdout_fraction},
            {"holdout_shards", t.holdout_shards},
            {"holdout_tuples", t.holdout_tuples},
            {"checkpoint_every", t.checkpoint_every},
            {"threads", t.threads},
            {"init_beta", t.init.beta0},
            {"init_output", t.init.output0},
            {"head_out_scale", t.init.head_out_scale},
            {"encoder", c.encoder},
            {"head_hidden", c.head_hidden},
            {"n_basis", c.n_basis},
            {"hidden1", c.hidden1},
            {"hidden2", c.hidden2},
            {"embedding", c.embedding == Embedding::Angle ? "angle" : "raw"},
            {"log_wall_time", c.log_wall_time},
        };
    }

    TrainCommandReport train_command (const TrainCommandConfig &cfg)
    {
        json manifest;
        const auto shards = load_dataset (cfg.dataset_dir, &manifest);
        const RobotModel robot = robot_from_json (manifest.at ("config").at ("robot"));
        if (robot.dof () != shards.front ().dof)
            fail (ErrorCode::InvalidArgument, "manifest robot does not match the shard dof");
        ensure_dir (cfg.out_dir);

        HofLayout layout;
        layout.point_dim = static_cast<std::size_t> (robot.workspace_dim ());
        layout.encoder = cfg.encoder;
        layout.head_hidden = cfg.head_hidden;
        layout.child = C2GLayout::for_robot (robot, cfg.n_basis, cfg.hidden1, cfg.hidden2, cfg.embedding);

        TrainCommandConfig effective = cfg;
        if (effective.train.target_scale <= 0.0)
            effective.train.target_scale = default_target_scale (robot.dof ());
        json eff = to_json (effective);
        eff["robot"] = to_json (robot);
        eff["layout"] = to_json (layout);
        write_file ((fs::path (cfg.out_dir) / "effective_config.json").string (), eff.dump (2) + "\n");

        TrainCommandReport rep;
        rep.log_path = (fs::path (cfg.out_dir) / "train_log.csv").string ();
        std::vector<TrainLogRow> rows;
        auto on_checkpoint = [&] (std::size_t epoch, const HofParams &p) {
            HofCheckpoint c;
            c.params = p;
            c.target_scale = effective.train.target_scale;
            c.epoch = epoch;
            c.robot = to_json (robot);
            const std::string path = (fs::path (cfg.out_dir) / numbered ("checkpoint_", epoch, 6, ".c2gh")).string ();
            write_file (path, encode_checkpoint (c));
            rep.checkpoints.push_back (path);
            // The log is rewritten at each checkpoint so an interrupted run keeps it.
            write_file (rep.log_path, format_train_log (rows, cfg.log_wall_time));
        };
        auto on_epoch = [&] (const TrainLogRow &r) {
            rows.push_back (r);
            spdlog::info ("epoch {} loss {:.6g} holdout {:.6g}", r.epoch, r.loss, r.holdout_loss);
        };
        rep.result = train (shards, layout, effective.train, on_checkpoint, on_epoch);
        write_file (rep.log_path, format_train_log (rep.result.log, cfg.log_wall_time));
        return rep;
    }

    HofCheckpoint load_checkpoint (const std::string &path)
    {
        if (!fs::exists (path))
            fail (ErrorCode::InvalidArgument, "checkpoint not found: " + path);
        return decode_checkpoint (read_file (path));
    }

    RobotModel checkpoint_robot (const HofCheckpoint &c)
    {
        if (c.robot.is_null ())
            fail (ErrorCode::InvalidArgument, "checkpoint does not record its robot");
        RobotModel m = robot_from_json (c.robot);
        if (m.dof () != c.params.layout.child.dof ())
            fail (ErrorCode::InvalidArgument, "checkpoint robot dof does not match its network layout");
        return m;
    }

    C2GParams emit_c2g (const HofCheckpoint &c, const PointCloud &cloud, std::size_t subsample, std::uint64_t seed)
    {
        Rng rng (mix_seed (seed, 0x454d4954));
        return hof_forward (c.params, subsample > 0 ? c2g::subsample (cloud, subsample, rng) : cloud);
    }

    // ------------------------------------------------------------------ PRM

    Roadmap build_base_roadmap (const RobotModel &m, const Workspace &like, const PrmOptions &opts)
    {
        return build_prm (m, empty_like (like), opts);
    }

    PrmReplanner prepare_prm (const Roadmap &base, const RobotModel &m, const Workspace &w)
    {
        const auto t0 = Clock::now ();
        PrmReplanner p;
        p.base = &base;
        p.valid.assign (base.vertices.size (), 1);
        for (std::size_t i = 0; i < base.vertices.size (); ++i)
        {
            ++p.preproc_checks;
            if (config_in_collision (m, base.vertices[i], w))
                p.valid[i] = 0;
        }
        p.preproc_s = seconds_since (t0);
        return p;
    }

    Trajectory prm_replan (const PrmReplanner &prm, const RobotModel &m, const Workspace &w, const Config &start, const Config &goal, int k, double step)
    {
        require (prm.base != nullptr, "PRM replanner is not prepared");
        require (k >= 1 && step > 0.0, "PRM query needs k >= 1 and step > 0");
        const auto t0 = Clock::now ();
        const Roadmap &base = *prm.base;
        const std::size_t n = base.vertices.size ();
        const std::size_t s = n, g = n + 1; // query vertices appended after the roadmap
        Trajectory t;
        t.planner = PlannerTag::Prm;
        CollisionChecker cc (m, w);

        std::vector<Config> valid_vertices;
        std::vector<std::size_t> valid_index;
        for (std::size_t i = 0; i < n; ++i)
            if (prm.valid[i])
                valid_vertices.push_back (base.vertices[i]), valid_index.push_back (i);

        // Query vertices connect lazily to their k nearest valid vertices.
        std::vector<std::vector<std::pair<std::size_t, double>>> extra (n + 2);
        auto connect = [&] (std::size_t q, const Config &c) {
            for (std::size_t j : nearest_vertices (m, valid_vertices, c, static_cast<std::size_t> (k)))
            {
                const std::size_t v = valid_index[j];
                const double d = config_distance (m, c, base.vertices[v]);
                extra[q].emplace_back (v, d);
                extra[v].emplace_back (q, d);
            }
        };
        connect (s, start);
        connect (g, goal);
        auto vertex = [&] (std::size_t v) -> const Config & { return v == s ? start : v == g ? goal : base.vertices[v]; };
        auto edge_key = [] (std::size_t a, std::size_t b) { return std::make_pair (std::min (a, b), std::max (a, b)); };
        std::set<std::pair<std::size_t, std::size_t>> removed, verified;

        if (cc.config (start) || cc.config (goal))
        {
            t.waypoints = {start};
            t.note = "start or goal in collision";
            t.collision_checks = cc.checks ();
            t.planning_time_s = seconds_since (t0);
            return t;
        }

        for (;;)
        {
            // Dijkstra from start over valid vertices and non-removed edges.
            std::vector<double> dist (n + 2, kInf);
            std::vector<std::size_t> parent (n + 2, static_cast<std::size_t> (-1));
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
            dist[s] = 0.0;
            open.emplace (0.0, s);
            auto relax = [&] (std::size_t u, std::size_t v, double wt) {
                if (v < n && !prm.valid[v])
                    return;
                if (removed.count (edge_key (u, v)))
                    return;
                if (dist[u] + wt < dist[v])
                {
                    dist[v] = dist[u] + wt;
                    parent[v] = u;
                    open.emplace (dist[v], v);
                }
            };
            while (!open.empty ())
            {
                const auto [d, u] = open.top ();
                open.pop ();
                if (d > dist[u])
                    continue;
                if (u == g)
                    break;
                if (u < n)
                    for (const auto &[v, wt] : base.adjacency[u])
                        relax (u, v, wt);
                for (const auto &[v, wt] : extra[u])
                    relax (u, v, wt);
            }
            if (!std::isfinite (dist[g]))
            {
                t.waypoints = {start};
                t.note = "no path in roadmap";
                break;
            }
            std::vector<std::size_t> path;
            for (std::size_t v = g; v != static_cast<std::size_t> (-1); v = parent[v])
                path.push_back (v);
            std::reverse (path.begin (), path.end ());

            bool ok = true;
            for (std::size_t i = 0; i + 1 < path.size (); ++i)
            {
                const auto key = edge_key (path[i], path[i + 1]);
                if (verified.count (key))
                    continue;
                if (cc.edge (vertex (path[i]), vertex (path[i + 1]), step))
                {
                    removed.insert (key);
                    ok = false;
                    break;
                }
                verified.insert (key);
            }
            if (ok)
            {
                for (std::size_t v : path)
                    t.waypoints.push_back (vertex (v));
                t.length = trajectory_length (m.joints, t.waypoints);
                t.success = true;
                break;
            }
        }
        t.collision_checks = cc.checks ();
        t.planning_time_s = seconds_since (t0);
        return t;
    }

    // --------------------------------------------------------------- bench

    BenchConfig bench_config_from_json (const json &j)
    {
        return parse_guard ("bench config", [&] {
            BenchConfig c;
            c.threads = thread_count ();
            read_opt (j, "checkpoint", c.checkpoint);
            read_opt (j, "dataset_dir", c.dataset_dir);
            if (j.contains ("workspace"))
                c.workspace = workspace_spec_from_json (j["workspace"], c.workspace);
            read_opt (j, "n_workspaces", c.n_workspaces);
            read_opt (j, "pairs_per_workspace", c.pairs_per_workspace);
            read_opt (j, "min_separation", c.min_separation);
            read_opt (j, "grid_cells", c.grid_cells);
            read_opt (j, "cloud_points", c.cloud_points);
            read_opt (j, "pointcloud_subsample", c.pointcloud_subsample);
            read_opt (j, "planners", c.planners);
            if (j.contains ("rrt"))
                c.rrt = rrt_from_json (j["rrt"], c.rrt);
            read_opt (j, "smooth_iters", c.smooth_iters);
            if (j.contains ("prm"))
                c.prm = prm_from_json (j["prm"], c.prm);
            if (j.contains ("plan"))
                c.plan = plan_from_json (j["plan"], c.plan);
            read_opt (j, "validation_step", c.validation_step);
            read_opt (j, "repeat", c.repeat);
            read_opt (j, "max_pair_attempts", c.max_pair_attempts);
            read_opt (j, "seed", c.seed);
            read_opt (j, "threads", c.threads);
            read_opt (j, "out_dir", c.out_dir);
            return c;
        });
    }

    json to_json (const BenchConfig &c)
    {
        return {
            {"checkpoint", c.checkpoint},
            {"dataset_dir", c.dataset_dir},
            {"workspace", to_json (c.workspace)},
            {"n_workspaces", c.n_workspaces},
            {"pairs_per_workspace", c.pairs_per_workspace},
            {"min_separation", c.min_separation},
            {"grid_cells", c.grid_cells},
            {"cloud_points", c.cloud_points},
            {"pointcloud_subsample", c.pointcloud_subsample},
            {"planners", c.planners},
            {"rrt", {{"step", c.rrt.step}, {"goal_bias", c.rrt.goal_bias}, {"max_iters", c.rrt.max_iters}, {"seed", c.rrt.seed}, {"collision_step", c.rrt.collision_step}}},
            {"smooth_iters", c.smooth_iters},
            {"prm", to_json_prm (c.prm)},
            {"plan", to_json_plan (c.plan)},
            {"validation_step", c.validation_step},
            {"repeat", c.repeat},
            {"seed", c.seed},
            {"threads", c.threads},
        };
    }

    std::vector<BenchRow> aggregate (std::span<const InstanceResult> instances, std::span<const BenchPair> pairs, std::span<const std::string> planners,
                                     std::span<const Joint> joints)
    {
        // Instances every planner solved, with their reference length.
        std::map<std::size_t, std::size_t> solved;
        std::map<std::size_t, double> reference;
        const bool has_astar = std::find (planners.begin (), planners.end (), "astar") != planners.end ();
        for (const auto &r : instances)
        {
            if (r.trajectory.success)
                ++solved[r.pair_index];
            if (has_astar && r.planner == "astar" && r.trajectory.success)
                reference[r.pair_index] = r.trajectory.length;
        }
        if (!has_astar)
            for (std::size_t i = 0; i < pairs.size (); ++i)
                reference[i] = config_distance (joints, pairs[i].start, pairs[i].goal);

        std::vector<BenchRow> rows;
        for (const auto &name : planners)
        {
            BenchRow row;
            row.planner = name;
            std::vector<double> times, norms;
            double checks = 0.0;
            for (const auto &r : instances)
            {
                if (r.planner != name)
                    continue;
                ++row.instances;
                if (!r.trajectory.success)
                    continue;
                ++row.successes;
                times.push_back (r.total_s ());
                checks += static_cast<double> (r.trajectory.collision_checks);
                row.preproc_s += r.preproc_s;
                row.traj_s += r.traj_s;
                row.postproc_s += r.postproc_s;
                const auto it = solved.find (r.pair_index);
                const auto ref = reference.find (r.pair_index);
                if (it != solved.end () && it->second == planners.size () && ref != reference.end () && ref->second > 0.0)
                    norms.push_back (r.trajectory.length / ref->second);
            }
            auto mean_std = [] (const std::vector<double> &v, double &mean, double &sd) {
                mean = sd = 0.0;
                if (v.empty ())
                {
                    mean = sd = std::numeric_limits<double>::quiet_NaN ();
                    return;
                }
                for (double x : v)
                    mean += x;
                mean /= static_cast<double> (v.size ());
                for (double x : v)
                    sd += (x - mean) * (x - mean);
                sd = std::sqrt (sd / static_cast<double> (v.size ()));
            };
            mean_std (times, row.mean_time_s, row.std_time_s);
            mean_std (norms, row.mean_norm_length, row.std_norm_length);
            row.norm_length_count = norms.size ();
            row.success_rate = row.instances ? static_cast<double> (row.successes) / static_cast<double> (row.instances) : 0.0;
            const double ns = static_cast<double> (row.successes);
            if (row.successes)
            {
                row.mean_collision_checks = checks / ns;
                row.preproc_s /= ns;
                row.traj_s /= ns;
                row.postproc_s /= ns;
            }
            rows.push_back (row);
        }
        return rows;
    }

    std::string format_bench_table (std::span<const BenchRow> rows)
    {
        std::string out = "planner,instances,successes,success_rate,mean_time_s,std_time_s,mean_norm_length,std_norm_length,norm_length_count,"
                          "mean_collision_checks,preproc_s,postproc_s\n";
        char line[512];
        for (const auto &r : rows)
        {
            std::snprintf (line, sizeof line, "%s,%zu,%zu,%.6f,%.6g,%.6g,%.6f,%.6f,%zu,%.3f,%.6g,%.6g\n", r.planner.c_str (), r.instances, r.successes,
                           r.success_rate, r.mean_time_s, r.std_time_s, r.mean_norm_length, r.std_norm_length, r.norm_length_count,
                           r.mean_collision_checks, r.preproc_s, r.postproc_s);
            out += line;
        }
        out += "# times, collision checks and preproc/postproc are means over successful instances only\n";
        out += "# normalized lengths use only instances every planner solved\n";
        return out;
    }

    std::string format_breakdown_table (std::span<const BenchRow> rows)
    {
        std::string out = "planner,preproc_s,traj_s,postproc_s,total_s\n";
        char line[256];
        for (const auto &r : rows)
        {
            std::snprintf (line, sizeof line, "%s,%.6g,%.6g,%.6g,%.6g\n", r.planner.c_str (), r.preproc_s, r.traj_s, r.postproc_s,
                           r.preproc_s + r.traj_s + r.postproc_s);
            out += line;
        }
        out += "# means over successful instances only; per-workspace preprocessing is attributed to every instance of that workspace\n";
        return out;
    }

    namespace
    {
        const std::vector<std::string> kBenchPlanners{"c2g-hof", "rrt", "rrt-smooth", "astar", "prm-replan"};

        Config random_free_config (const RobotModel &m, const Workspace &w, Rng &rng, std::size_t attempts)
        {
            for (std::size_t a = 0; a < attempts; ++a)
            {
                Config q (m.dof ());
                for (std::size_t i = 0; i < q.size (); ++i)
                {
                    const Joint &j = m.joints[i];
                    q[i] = j.periodic () ? rng.uniform (-kPi, kPi) : rng.uniform (j.lo, j.hi);
                }
                if (!config_in_collision (m, q, w))
                    return q;
            }
            fail (ErrorCode::Infeasible, "could not sample a free configuration");
        }

        struct BenchWorkspace
        {
            Workspace workspace;
            PointCloud cloud;
            std::optional<GridMap> grid;
            double grid_s = 0.0;
        };
    } // namespace

    BenchReport bench (const BenchConfig &cfg)
    {
        require (cfg.n_workspaces >= 1 && cfg.pairs_per_workspace >= 1, "n_workspaces and pairs_per_workspace must be >= 1");
        require (cfg.repeat >= 1, "repeat must be >= 1");
        require (cfg.validation_step > 0.0, "validation_step must be > 0");
        for (const auto &p : cfg.planners)
            if (std::find (kBenchPlanners.begin (), kBenchPlanners.end (), p) == kBenchPlanners.end ())
                fail (ErrorCode::InvalidArgument, "unknown planner " + p);
        require (!cfg.planners.empty (), "no planners selected");
        cfg.plan.check ();

        const bool want = [&] {
            return std::find (cfg.planners.begin (), cfg.planners.end (), "c2g-hof") != cfg.planners.end ();
        }();
        std::optional<HofCheckpoint> ckpt;
        RobotModel robot = RobotModel::planar2 ();
        if (!cfg.checkpoint.empty ())
        {
            ckpt = load_checkpoint (cfg.checkpoint);
            robot = checkpoint_robot (*ckpt);
        }
        else if (want)
            fail (ErrorCode::InvalidArgument, "the c2g-hof planner needs a checkpoint");

        std::vector<std::string> planners = cfg.planners;
        const bool grid_ok = robot.dof () <= 3;
        if (!grid_ok)
        {
            const auto it = std::find (planners.begin (), planners.end (), "astar");
            if (it != planners.end ())
            {
                spdlog::warn ("bench: A* skipped for dof {}", robot.dof ());
                planners.erase (it);
            }
        }

        // Workspaces.
        std::vector<BenchWorkspace> spaces;
        if (!cfg.dataset_dir.empty ())
        {
            auto shards = load_dataset (cfg.dataset_dir);
            if (shards.front ().dof != robot.dof ())
                fail (ErrorCode::InvalidArgument, "dataset dof does not match the checkpoint robot");
            for (std::size_t i = 0; i < std::min (cfg.n_workspaces, shards.size ()); ++i)
                spaces.push_back ({std::move (shards[i].workspace), std::move (shards[i].cloud), std::nullopt, 0.0});
        }
        else
        {
            WorkspaceSpec spec = cfg.workspace;
            spec.dim = robot.workspace_dim ();
            if (spec.dim == 3 && spec.bounds.hi[2] <= spec.bounds.lo[2])
                spec.bounds.hi[2] = 1.0;
            for (std::size_t i = 0; i < cfg.n_workspaces; ++i)
            {
                const std::uint64_t s = mix_seed (cfg.seed, 0x42454e00 + i);
                Workspace w = generate_random_workspace (spec, s);
                PointCloud pc = sample_point_cloud (w, cfg.cloud_points, mix_seed (s, 1));
                spaces.push_back ({std::move (w), std::move (pc), std::nullopt, 0.0});
            }
        }
        for (auto &sp : spaces)
            if (sp.workspace.dim != robot.workspace_dim ())
                fail (ErrorCode::InvalidArgument, "workspace dim does not match the robot");

        BenchReport rep;
        std::vector<Trajectory> astar_runs; // per pair, from pair selection
        const auto dims = grid_dims (robot, cfg.grid_cells);
        for (std::size_t wi = 0; wi < spaces.size (); ++wi)
        {
            auto &sp = spaces[wi];
            rep.workspaces.push_back (sp.workspace);
            if (grid_ok)
            {
                const auto t0 = Clock::now ();
                sp.grid = build_grid_map (robot, sp.workspace, dims);
                sp.grid_s = seconds_since (t0);
            }
            Rng rng (mix_seed (cfg.seed, 0x50414952 + wi));
            std::size_t made = 0, attempts = 0;
            while (made < cfg.pairs_per_workspace)
            {
                if (attempts++ >= cfg.max_pair_attempts)
                    fail (ErrorCode::Infeasible, "could not find " + std::to_string (cfg.pairs_per_workspace) + " start/goal pairs in workspace " +
                                                     std::to_string (wi));
                BenchPair p;
                p.workspace_index = wi;
                Trajectory a;
                if (sp.grid)
                {
                    const GridMap &g = *sp.grid;
                    const std::size_t cs = sample_free_cell (g, rng), cg = sample_free_cell (g, rng);
                    p.start = g.cell_center (cs);
                    p.goal = g.cell_center (cg);
                    if (config_distance (robot, p.start, p.goal) < cfg.min_separation)
                        continue;
                    a = astar (g, cs, cg);
                    if (!a.success)
                        continue;
                }
                else
                {
                    p.start = random_free_config (robot, sp.workspace, rng, 100000);
                    p.goal = random_free_config (robot, sp.workspace, rng, 100000);
                    if (config_distance (robot, p.start, p.goal) < cfg.min_separation)
                        continue;
                }
                rep.pairs.push_back (std::move (p));
                astar_runs.push_back (std::move (a));
                ++made;
            }
        }

        // Per-workspace preprocessing shared by its instances.
        std::vector<std::optional<C2GParams>> children (spaces.size ());
        std::vector<double> child_s (spaces.size (), 0.0);
        std::optional<Roadmap> base;
        std::vector<PrmReplanner> prms;
        const bool want_prm = std::find (planners.begin (), planners.end (), "prm-replan") != planners.end ();
        if (want_prm)
        {
            PrmOptions po = cfg.prm;
            po.seed = mix_seed (cfg.seed, po.seed + 0x4241);
            po.threads = std::max (1u, cfg.threads);
            base = build_base_roadmap (robot, spaces.front ().workspace, po);
        }
        for (std::size_t wi = 0; wi < spaces.size (); ++wi)
        {
            if (ckpt && want)
            {
                const auto t0 = Clock::now ();
                children[wi] = emit_c2g (*ckpt, spaces[wi].cloud, cfg.pointcloud_subsample, mix_seed (cfg.seed, wi));
                child_s[wi] = seconds_since (t0);
            }
            if (want_prm)
                prms.push_back (prepare_prm (*base, robot, spaces[wi].workspace));
        }

        const std::size_t np = planners.size ();
        rep.instances.resize (rep.pairs.size () * np);
        parallel_for (rep.pairs.size (), std::max (1u, cfg.threads), [&] (std::size_t pi) {
            const BenchPair &pair = rep.pairs[pi];
            const std::size_t wi = pair.workspace_index;
            const Workspace &w = spaces[wi].workspace;
            for (std::size_t k = 0; k < np; ++k)
            {
                const std::string &name = planners[k];
                InstanceResult best;
                for (std::size_t r = 0; r < cfg.repeat; ++r)
                {
                    InstanceResult ir;
                    ir.workspace_index = wi;
                    ir.pair_index = pi;
                    ir.planner = name;
                    const std::uint64_t seed = mix_seed (cfg.seed, pi * 131 + r);
                    if (name == "c2g-hof")
                    {
                        PlanOptions po = cfg.plan;
                        po.seed = mix_seed (cfg.plan.seed, pi);
                        auto t0 = Clock::now ();
                        DescentResult d = plan_gradient_descent (*children[wi], pair.start, pair.goal, po);
                        ir.traj_s = seconds_since (t0);
                        t0 = Clock::now ();
                        PlanResult pr{std::move (d), {}};
                        pr.validation = validate_trajectory (pr.descent.trajectory, robot, w, cfg.validation_step);
                        ir.postproc_s = seconds_since (t0);
                        ir.preproc_s = child_s[wi];
                        ir.trajectory = pr.trajectory ();
                        ir.extra = {{"descent_steps", pr.descent.descent_steps},
                                    {"perturbations_used", pr.descent.perturbations_used},
                                    {"validated", pr.validation.collision_free}};
                    }
                    else if (name == "rrt" || name == "rrt-smooth")
                    {
                        RrtParams rp = cfg.rrt;
                        rp.seed = mix_seed (cfg.rrt.seed, seed);
                        Trajectory t = rrt_plan (robot, w, pair.start, pair.goal, rp);
                        ir.traj_s = t.planning_time_s;
                        if (name == "rrt-smooth" && t.success)
                        {
                            const auto t0 = Clock::now ();
                            t = shortcut_smooth (t, robot, w, cfg.smooth_iters, seed, cfg.rrt.collision_step);
                            ir.postproc_s = seconds_since (t0);
                        }
                        else if (name == "rrt-smooth")
                            t.planner = PlannerTag::RrtSmooth;
                        ir.trajectory = std::move (t);
                    }
                    else if (name == "astar")
                    {
                        const GridMap &g = *spaces[wi].grid;
                        Trajectory t = r == 0 ? astar_runs[pi] : astar (g, g.cell_of (pair.start), g.cell_of (pair.goal));
                        ir.preproc_s = spaces[wi].grid_s;
                        ir.traj_s = t.planning_time_s;
                        ir.trajectory = std::move (t);
                    }
                    else // prm-replan
                    {
                        Trajectory t = prm_replan (prms[wi], robot, w, pair.start, pair.goal, cfg.prm.k, cfg.prm.step);
                        ir.preproc_s = prms[wi].preproc_s;
                        ir.traj_s = t.planning_time_s;
                        ir.extra = {{"preproc_collision_checks", prms[wi].preproc_checks}};
                        ir.trajectory = std::move (t);
                    }
                    ir.trajectory.planning_time_s = ir.total_s ();
                    if (r == 0 || ir.total_s () < best.total_s ())
                        best = std::move (ir);
                }
                rep.instances[pi * np + k] = std::move (best);
            }
        });

        rep.rows = aggregate (rep.instances, rep.pairs, planners, robot.joints);

        if (!cfg.out_dir.empty ())
        {
            ensure_dir (cfg.out_dir);
            write_file ((fs::path (cfg.out_dir) / "bench_table.csv").string (), format_bench_table (rep.rows));
            write_file ((fs::path (cfg.out_dir) / "bench_breakdown.csv").string (), format_breakdown_table (rep.rows));
            std::string lines;
            for (const auto &ir : rep.instances)
            {
                json j = to_json (ir.trajectory);
                j["planner"] = ir.planner;
                j["workspace"] = ir.workspace_index;
                j["pair"] = ir.pair_index;
                j["start"] = rep.pairs[ir.pair_index].start;
                j["goal"] = rep.pairs[ir.pair_index].goal;
                j["preproc_s"] = ir.preproc_s;
                j["traj_s"] = ir.traj_s;
                j["postproc_s"] = ir.postproc_s;
                if (ir.extra.is_object ())
                    j.update (ir.extra);
                lines += j.dump () + "\n";
            }
            write_file ((fs::path (cfg.out_dir) / "instances.jsonl").string (), lines);
            json eff = to_json (cfg);
            eff["planners_run"] = planners;
            eff["robot"] = to_json (robot);
            write_file ((fs::path (cfg.out_dir) / "bench_config.json").string (), eff.dump (2) + "\n");
        }
        return rep;
    }

    // ---------------------------------------------------------------- plan

    namespace
    {
        Workspace workspace_from (const std::optional<Workspace> &given, WorkspaceSpec spec, const RobotModel &m, std::uint64_t seed)
        {
            if (given)
            {
                validate (*given);
                if (given->dim != m.workspace_dim ())
                    fail (ErrorCode::InvalidArgument, "workspace dim does not match the robot");
                return *given;
            }
            spec.dim = m.workspace_dim ();
            if (spec.dim == 3 && spec.bounds.hi[2] <= spec.bounds.lo[2])
                spec.bounds.hi[2] = 1.0;
            return generate_random_workspace (spec, seed);
        }
    } // namespace

    PlanCommandConfig plan_config_from_json (const json &j)
    {
        return parse_guard ("plan config", [&] {
            PlanCommandConfig c;
            read_opt (j, "checkpoint", c.checkpoint);
            if (j.contains ("workspace") && j["workspace"].contains ("obstacles"))
                c.workspace = workspace_from_json (j["workspace"]);
            else if (j.contains ("workspace"))
                c.workspace_spec = workspace_spec_from_json (j["workspace"], c.workspace_spec);
            read_opt (j, "start", c.start);
            read_opt (j, "goal", c.goal);
            if (j.contains ("plan"))
                c.plan = plan_from_json (j["plan"], c.plan);
            read_opt (j, "validation_step", c.validation_step);
            read_opt (j, "cloud_points", c.cloud_points);
            read_opt (j, "pointcloud_subsample", c.pointcloud_subsample);
            read_opt (j, "seed", c.seed);
            return c;
        });
    }

    PlanResult plan_command (const PlanCommandConfig &cfg)
    {
        const HofCheckpoint ckpt = load_checkpoint (cfg.checkpoint);
        const RobotModel m = checkpoint_robot (ckpt);
        require (cfg.start.size () == m.dof () && cfg.goal.size () == m.dof (), "start and goal must have " + std::to_string (m.dof ()) + " joints");
        const Workspace w = workspace_from (cfg.workspace, cfg.workspace_spec, m, cfg.seed);
        const auto t0 = Clock::now ();
        const PointCloud pc = sample_point_cloud (w, cfg.cloud_points, mix_seed (cfg.seed, 1));
        const C2GParams child = emit_c2g (ckpt, pc, cfg.pointcloud_subsample, cfg.seed);
        const double preproc = seconds_since (t0);
        PlanResult r = plan_and_validate (child, m, w, cfg.start, cfg.goal, cfg.plan, cfg.validation_step);
        r.descent.trajectory.planning_time_s += preproc;
        return r;
    }

    // ------------------------------------------------------ export-costmap

    CostmapConfig costmap_config_from_json (const json &j)
    {
        return parse_guard ("costmap config", [&] {
            CostmapConfig c;
            read_opt (j, "checkpoint", c.checkpoint);
            c.robot = robot_field (j, c.robot);
            if (j.contains ("workspace") && j["workspace"].contains ("obstacles"))
                c.workspace = workspace_from_json (j["workspace"]);
            else if (j.contains ("workspace"))
                c.workspace_spec = workspace_spec_from_json (j["workspace"], c.workspace_spec);
            read_opt (j, "goal", c.goal);
            read_opt (j, "resolution", c.resolution);
            read_opt (j, "cloud_points", c.cloud_points);
            read_opt (j, "pointcloud_subsample", c.pointcloud_subsample);
            read_opt (j, "seed", c.seed);
            read_opt (j, "out_prefix", c.out_prefix);
            return c;
        });
    }

    Costmap compute_costmap (const CostmapConfig &cfg)
    {
        std::optional<HofCheckpoint> ckpt;
        RobotModel m = cfg.robot;
        if (!cfg.checkpoint.empty ())
        {
            ckpt = load_checkpoint (cfg.checkpoint);
            m = checkpoint_robot (*ckpt);
        }
        if (m.dof () != 2)
            fail (ErrorCode::InvalidArgument, "cost-map export needs a 2-dof robot (got dof " + std::to_string (m.dof ()) + ")");
        require (cfg.resolution >= 2, "resolution must be >= 2");
        require (cfg.goal.size () == 2, "goal must have 2 joints");
        const Workspace w = workspace_from (cfg.workspace, cfg.workspace_spec, m, cfg.seed);

        Costmap cm;
        cm.resolution = cfg.resolution;
        const std::vector<int> dims{cfg.resolution, cfg.resolution};
        const GridMap g = build_grid_map (m, w, dims);
        cm.goal_cell = g.cell_of (cfg.goal);
        if (g.occupied (cm.goal_cell))
            fail (ErrorCode::Collision, "goal cell is in collision");
        cm.truth = dijkstra_cost_field (g, cm.goal_cell).cost;
        cm.occupancy = g.occupancy;
        if (!ckpt)
            cm.predicted = cm.truth;
        else
        {
            const PointCloud pc = sample_point_cloud (w, cfg.cloud_points, mix_seed (cfg.seed, 1));
            const C2GParams child = emit_c2g (*ckpt, pc, cfg.pointcloud_subsample, cfg.seed);
            const Config goal = g.cell_center (cm.goal_cell);
            cm.predicted.assign (g.size (), kInf);
            for (std::size_t i = 0; i < g.size (); ++i)
                if (!g.occupied (i))
                    cm.predicted[i] = c2g_eval (child, g.cell_center (i), goal) * ckpt->target_scale;
        }
        return cm;
    }

    std::vector<std::uint8_t> to_gray (std::span<const double> v, double vmax, std::uint8_t nonfinite)
    {
        std::vector<std::uint8_t> out (v.size ());
        for (std::size_t i = 0; i < v.size (); ++i)
        {
            if (!std::isfinite (v[i]))
                out[i] = nonfinite;
            else if (vmax <= 0.0)
                out[i] = 0;
            else
                out[i] = static_cast<std::uint8_t> (std::lround (254.0 * std::clamp (v[i] / vmax, 0.0, 1.0)));
        }
        return out;
    }

    std::string encode_pgm (int width, int height, std::span<const std::uint8_t> pixels)
    {
        require (width > 0 && height > 0 && pixels.size () == static_cast<std::size_t> (width) * static_cast<std::size_t> (height),
                 "PGM size does not match pixel count");
        std::string out = "P5\n" + std::to_string (width) + " " + std::to_string (height) + "\n255\n";
        out.append (reinterpret_cast<const char *> (pixels.data ()), pixels.size ());
        return out;
    }

    json export_costmap (const CostmapConfig &cfg)
    {
        require (!cfg.out_prefix.empty (), "out_prefix must be set");
        const Costmap cm = compute_costmap (cfg);
        const std::size_t n = cm.truth.size ();
        double vmax = 0.0, emax = 0.0;
        std::vector<double> err (n, kInf);
        for (std::size_t i = 0; i < n; ++i)
        {
            if (std::isfinite (cm.truth[i]))
                vmax = std::max (vmax, cm.truth[i]);
            if (std::isfinite (cm.predicted[i]))
                vmax = std::max (vmax, cm.predicted[i]);
            if (std::isfinite (cm.truth[i]) && std::isfinite (cm.predicted[i]))
            {
                err[i] = std::abs (cm.predicted[i] - cm.truth[i]);
                emax = std::max (emax, err[i]);
            }
        }
        const fs::path prefix (cfg.out_prefix);
        if (prefix.has_parent_path ())
            ensure_dir (prefix.parent_path ().string ());
        const int r = cm.resolution;
        write_file (cfg.out_prefix + "_predicted.pgm", encode_pgm (r, r, to_gray (cm.predicted, vmax, kReservedIntensity)));
        write_file (cfg.out_prefix + "_truth.pgm", encode_pgm (r, r, to_gray (cm.truth, vmax, kReservedIntensity)));
        write_file (cfg.out_prefix + "_error.pgm", encode_pgm (r, r, to_gray (err, emax, 0)));
        json meta{
            {"resolution", r},
            {"rows", "joint 0, ascending from -pi"},
            {"cols", "joint 1, ascending from -pi"},
            {"vmin", 0.0},
            {"vmax", vmax},
            {"error_vmax", emax},
            {"reserved_intensity", kReservedIntensity},
            {"reserved_meaning", "occupied or unreachable (predicted and truth maps); error map shows such cells as 0"},
            {"goal_cell", cm.goal_cell},
            {"source", cfg.checkpoint.empty () ? "ground truth" : cfg.checkpoint},
        };
        write_file (cfg.out_prefix + "_meta.json", meta.dump (2) + "\n");
        return meta;
    }

} // namespace c2g
