// Command-line front end. Talks to the library only through c2g.h.

#include <c2g/c2g.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using json = nlohmann::json;

namespace
{
    json load_config (const std::string &path)
    {
        if (path.empty ())
            return json::object ();
        std::ifstream in (path);
        if (!in)
            throw std::runtime_error ("cannot open config " + path);
        std::stringstream ss;
        ss << in.rdbuf ();
        return json::parse (ss.str ());
    }

    json load_json_file (const std::string &path)
    {
        std::ifstream in (path);
        if (!in)
            throw std::runtime_error ("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf ();
        return json::parse (ss.str ());
    }

    std::vector<double> parse_config_list (const std::string &s)
    {
        std::vector<double> q;
        std::stringstream ss (s);
        std::string item;
        while (std::getline (ss, item, ','))
            q.push_back (std::stod (item));
        return q;
    }

    using Command = c2g_status (*) (const char *, char **);

    int run (Command cmd, const json &cfg, bool quiet)
    {
        char *report = nullptr;
        const c2g_status st = cmd (cfg.dump ().c_str (), &report);
        if (report)
        {
            if (!quiet)
                std::cout << report << "\n";
            c2g_string_free (report);
        }
        if (st != C2G_OK)
            std::cerr << "c2g: " << c2g_last_error () << "\n";
        return c2g_exit_code (st);
    }
} // namespace

int main (int argc, char **argv)
{
    CLI::App app{"Cost-to-go workbench: dataset generation, training, planning and benchmarks"};
    app.require_subcommand (1);
    app.fallthrough ();
    int log_level = 2;
    bool quiet = false;
    app.add_option ("--log-level", log_level, "0 trace .. 6 off")->capture_default_str ();
    app.add_flag ("-q,--quiet", quiet, "Do not print the JSON report");

    std::string config;
    json overrides = json::object ();

    // gen-data
    auto *gen = app.add_subcommand ("gen-data", "Generate dataset shards and a manifest");
    gen->add_option ("-c,--config", config, "JSON config file");
    gen->add_option_function<std::string> ("-o,--out", [&] (const std::string &v) { overrides["out_dir"] = v; }, "Output directory");
    gen->add_option_function<std::uint64_t> ("--seed", [&] (std::uint64_t v) { overrides["seed"] = v; });
    gen->add_option_function<std::size_t> ("-n,--workspaces", [&] (std::size_t v) { overrides["n_workspaces"] = v; });
    gen->add_option_function<std::string> ("--robot", [&] (const std::string &v) { overrides["robot"] = v; }, "planar2 or yaw_pitch3");
    gen->add_option_function<std::string> ("--oracle", [&] (const std::string &v) { overrides["oracle"] = v; }, "grid or prm");
    gen->add_option_function<int> ("--grid-cells", [&] (int v) { overrides["grid_cells"] = v; });
    gen->add_option_function<std::size_t> ("--goals", [&] (std::size_t v) { overrides["goals"] = v; });
    gen->add_option_function<std::size_t> ("--tuples-per-goal", [&] (std::size_t v) { overrides["tuples_per_goal"] = v; });

    // train
    auto *tr = app.add_subcommand ("train", "Train the hypernetwork on a dataset");
    tr->add_option ("-c,--config", config, "JSON config file");
    tr->add_option_function<std::string> ("-d,--data", [&] (const std::string &v) { overrides["dataset_dir"] = v; }, "Dataset directory");
    tr->add_option_function<std::string> ("-o,--out", [&] (const std::string &v) { overrides["out_dir"] = v; }, "Output directory");
    tr->add_option_function<std::size_t> ("--epochs", [&] (std::size_t v) { overrides["epochs"] = v; });
    tr->add_option_function<double> ("--lr", [&] (double v) { overrides["learning_rate"] = v; });
    tr->add_option_function<std::uint64_t> ("--seed", [&] (std::uint64_t v) { overrides["seed"] = v; });
    tr->add_option_function<std::size_t> ("--tuples-per-iteration", [&] (std::size_t v) { overrides["tuples_per_iteration"] = v; });
    tr->add_option_function<std::size_t> ("--checkpoint-every", [&] (std::size_t v) { overrides["checkpoint_every"] = v; });
    tr->add_flag_function ("--no-wall-time", [&] (std::int64_t) { overrides["log_wall_time"] = false; }, "Write wall_s as 0 so logs compare bitwise");

    // bench
    auto *be = app.add_subcommand ("bench", "Benchmark c2g-HOF against the baselines");
    be->add_option ("-c,--config", config, "JSON config file");
    be->add_option_function<std::string> ("-k,--checkpoint", [&] (const std::string &v) { overrides["checkpoint"] = v; });
    be->add_option_function<std::string> ("-d,--data", [&] (const std::string &v) { overrides["dataset_dir"] = v; }, "Take workspaces from a dataset");
    be->add_option_function<std::string> ("-o,--out", [&] (const std::string &v) { overrides["out_dir"] = v; });
    be->add_option_function<std::size_t> ("-n,--workspaces", [&] (std::size_t v) { overrides["n_workspaces"] = v; });
    be->add_option_function<std::size_t> ("--pairs", [&] (std::size_t v) { overrides["pairs_per_workspace"] = v; });
    be->add_option_function<std::vector<std::string>> ("--planners", [&] (const std::vector<std::string> &v) { overrides["planners"] = v; })
        ->delimiter (',');
    be->add_option_function<std::uint64_t> ("--seed", [&] (std::uint64_t v) { overrides["seed"] = v; });
    be->add_option_function<std::size_t> ("--repeat", [&] (std::size_t v) { overrides["repeat"] = v; });
    be->add_flag_function ("--single-worker", [&] (std::int64_t) { overrides["threads"] = 1; }, "Run instances on one worker for steadier timings");

    // plan
    std::string workspace_file, start, goal;
    auto *pl = app.add_subcommand ("plan", "Plan a single query with a trained checkpoint");
    pl->add_option ("-c,--config", config, "JSON config file");
    pl->add_option_function<std::string> ("-k,--checkpoint", [&] (const std::string &v) { overrides["checkpoint"] = v; });
    pl->add_option ("-w,--workspace", workspace_file, "Workspace JSON file (default: generated from --seed)");
    pl->add_option ("--start", start, "Comma-separated joint angles");
    pl->add_option ("--goal", goal, "Comma-separated joint angles");
    pl->add_option_function<std::uint64_t> ("--seed", [&] (std::uint64_t v) { overrides["seed"] = v; });

    // export-costmap
    auto *ex = app.add_subcommand ("export-costmap", "Write predicted, ground-truth and error cost maps as PGM images");
    ex->add_option ("-c,--config", config, "JSON config file");
    ex->add_option_function<std::string> ("-k,--checkpoint", [&] (const std::string &v) { overrides["checkpoint"] = v; },
                                          "Checkpoint (omit to export the ground truth as the prediction)");
    ex->add_option ("-w,--workspace", workspace_file, "Workspace JSON file (default: generated from --seed)");
    ex->add_option ("--goal", goal, "Comma-separated joint angles");
    ex->add_option_function<int> ("-r,--resolution", [&] (int v) { overrides["resolution"] = v; });
    ex->add_option_function<std::string> ("-o,--out", [&] (const std::string &v) { overrides["out_prefix"] = v; }, "Output path prefix");
    ex->add_option_function<std::uint64_t> ("--seed", [&] (std::uint64_t v) { overrides["seed"] = v; });

    try
    {
        app.parse (argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit (e);
        return rc == 0 ? 0 : 2;
    }
    c2g_set_log_level (log_level);

    try
    {
        json cfg = load_config (config);
        cfg.update (overrides);
        if (!workspace_file.empty ())
            cfg["workspace"] = load_json_file (workspace_file);
        if (!start.empty ())
            cfg["start"] = parse_config_list (start);
        if (!goal.empty ())
            cfg["goal"] = parse_config_list (goal);

        if (gen->parsed ())
            return run (c2g_gen_data, cfg, quiet);
        if (tr->parsed ())
            return run (c2g_train, cfg, quiet);
        if (be->parsed ())
            return run (c2g_bench, cfg, quiet);
        if (pl->parsed ())
            return run (c2g_plan, cfg, quiet);
        if (ex->parsed ())
            return run (c2g_export_costmap, cfg, quiet);
    }
    catch (const std::exception &e)
    {
        std::cerr << "c2g: " << e.what () << "\n";
        return 2;
    }
    return 2;
}
