#include <c2g/c2g.h>

#include <c2g/bench.hpp>

#include <spdlog/spdlog.h>

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <string>

struct c2g_robot
{
    c2g::RobotModel model;
};

struct c2g_workspace
{
    c2g::Workspace workspace;
};

struct c2g_network
{
    c2g::HofCheckpoint checkpoint;
    c2g::RobotModel robot;
};

namespace
{
    thread_local std::string last_error;

    c2g_status status_of (c2g::ErrorCode code)
    {
        switch (code)
        {
        case c2g::ErrorCode::InvalidArgument:
            return C2G_ERR_INVALID_ARGUMENT;
        case c2g::ErrorCode::Infeasible:
            return C2G_ERR_INFEASIBLE;
        case c2g::ErrorCode::Io:
            return C2G_ERR_IO;
        case c2g::ErrorCode::Collision:
            return C2G_ERR_COLLISION;
        case c2g::ErrorCode::Partial:
            return C2G_PARTIAL;
        case c2g::ErrorCode::Internal:
            return C2G_ERR_INTERNAL;
        }
        return C2G_ERR_INTERNAL;
    }

    template <typename Fn> c2g_status guarded (Fn &&fn)
    {
        try
        {
            return fn ();
        }
        catch (const c2g::Error &e)
        {
            last_error = e.what ();
            return status_of (e.code ());
        }
        catch (const nlohmann::json::exception &e)
        {
            last_error = std::string ("json: ") + e.what ();
            return C2G_ERR_INVALID_ARGUMENT;
        }
        catch (const std::bad_alloc &)
        {
            last_error = "out of memory";
            return C2G_ERR_INTERNAL;
        }
        catch (const std::exception &e)
        {
            last_error = e.what ();
            return C2G_ERR_INTERNAL;
        }
    }

    char *dup (const std::string &s)
    {
        char *p = static_cast<char *> (std::malloc (s.size () + 1));
        if (!p)
            throw std::bad_alloc ();
        std::memcpy (p, s.c_str (), s.size () + 1);
        return p;
    }

    nlohmann::json parse (const char *text)
    {
        if (!text)
            c2g::fail (c2g::ErrorCode::InvalidArgument, "null JSON argument");
        return nlohmann::json::parse (text);
    }

    void check_out (const void *p)
    {
        if (!p)
            c2g::fail (c2g::ErrorCode::InvalidArgument, "null output pointer");
    }

    c2g_status partial (const std::string &what)
    {
        last_error = what;
        return C2G_PARTIAL;
    }
} // namespace

extern "C" {

const char *c2g_version (void) { return "0.1.0"; }

const char *c2g_last_error (void) { return last_error.c_str (); }

void c2g_string_free (char *s) { std::free (s); }

int c2g_exit_code (c2g_status s)
{
    switch (s)
    {
    case C2G_OK:
        return 0;
    case C2G_ERR_INVALID_ARGUMENT:
    case C2G_ERR_INFEASIBLE:
    case C2G_ERR_COLLISION:
        return 2;
    default:
        return 1;
    }
}

void c2g_set_log_level (int level)
{
    spdlog::set_level (static_cast<spdlog::level::level_enum> (level < 0 ? 0 : level > 6 ? 6 : level));
}

c2g_status c2g_robot_create (const char *json, c2g_robot **out)
{
    return guarded ([&] {
        check_out (out);
        if (!json)
            c2g::fail (c2g::ErrorCode::InvalidArgument, "null robot description");
        nlohmann::json j;
        const std::string text (json);
        if (!text.empty () && (text[0] == '{' || text[0] == '"' || std::isspace (static_cast<unsigned char> (text[0]))))
            j = nlohmann::json::parse (text);
        else
            j = text; // bare preset name
        *out = new c2g_robot{c2g::robot_from_json (j)};
        return C2G_OK;
    });
}

void c2g_robot_free (c2g_robot *r) { delete r; }

size_t c2g_robot_dof (const c2g_robot *r) { return r ? r->model.dof () : 0; }

c2g_status c2g_workspace_from_json (const char *json, c2g_workspace **out)
{
    return guarded ([&] {
        check_out (out);
        auto w = c2g::workspace_from_json (parse (json));
        c2g::validate (w);
        *out = new c2g_workspace{std::move (w)};
        return C2G_OK;
    });
}

c2g_status c2g_workspace_generate (const char *spec_json, uint64_t seed, c2g_workspace **out)
{
    return guarded ([&] {
        check_out (out);
        const auto spec = spec_json ? c2g::workspace_spec_from_json (parse (spec_json)) : c2g::WorkspaceSpec{};
        *out = new c2g_workspace{c2g::generate_random_workspace (spec, seed)};
        return C2G_OK;
    });
}

c2g_status c2g_workspace_to_json (const c2g_workspace *w, char **out)
{
    return guarded ([&] {
        check_out (out);
        check_out (w);
        *out = dup (c2g::to_json (w->workspace).dump ());
        return C2G_OK;
    });
}

void c2g_workspace_free (c2g_workspace *w) { delete w; }

c2g_status c2g_config_in_collision (const c2g_robot *r, const c2g_workspace *w, const double *q, size_t dof, int *out)
{
    return guarded ([&] {
        check_out (out);
        if (!r || !w || !q)
            c2g::fail (c2g::ErrorCode::InvalidArgument, "null argument");
        if (dof != r->model.dof ())
            c2g::fail (c2g::ErrorCode::InvalidArgument, "configuration has " + std::to_string (dof) + " joints, robot has " + std::to_string (r->model.dof ()));
        *out = c2g::config_in_collision (r->model, std::span<const double> (q, dof), w->workspace) ? 1 : 0;
        return C2G_OK;
    });
}

c2g_status c2g_network_load (const char *path, c2g_network **out)
{
    return guarded ([&] {
        check_out (out);
        if (!path)
            c2g::fail (c2g::ErrorCode::InvalidArgument, "null path");
        auto ckpt = c2g::load_checkpoint (path);
        auto robot = c2g::checkpoint_robot (ckpt);
        *out = new c2g_network{std::move (ckpt), std::move (robot)};
        return C2G_OK;
    });
}

void c2g_network_free (c2g_network *n) { delete n; }

size_t c2g_network_dof (const c2g_network *n) { return n ? n->robot.dof () : 0; }

c2g_status c2g_network_cost (const c2g_network *n, const c2g_workspace *w, const double *q1, const double *q2, size_t dof, uint64_t seed, double *out)
{
    return guarded ([&] {
        check_out (out);
        if (!n || !w || !q1 || !q2)
            c2g::fail (c2g::ErrorCode::InvalidArgument, "null argument");
        if (dof != n->robot.dof ())
            c2g::fail (c2g::ErrorCode::InvalidArgument, "configuration dof does not match the network");
        const auto cloud = c2g::sample_point_cloud (w->workspace, 1024, c2g::mix_seed (seed, 1));
        const auto child = c2g::emit_c2g (n->checkpoint, cloud, 256, seed);
        *out = c2g::c2g_eval (child, std::span<const double> (q1, dof), std::span<const double> (q2, dof)) * n->checkpoint.target_scale;
        return C2G_OK;
    });
}

c2g_status c2g_gen_data (const char *config_json, char **report_json)
{
    return guarded ([&] {
        const auto cfg = c2g::gen_data_config_from_json (parse (config_json));
        const auto rep = c2g::gen_data (cfg);
        if (report_json)
            *report_json = dup (rep.manifest.dump (2));
        if (rep.failed > 0)
            return partial (std::to_string (rep.failed) + " of " + std::to_string (cfg.n_workspaces) + " workspaces failed; see manifest.json");
        return C2G_OK;
    });
}

c2g_status c2g_train (const char *config_json, char **report_json)
{
    return guarded ([&] {
        const auto cfg = c2g::train_config_from_json (parse (config_json));
        const auto rep = c2g::train_command (cfg);
        if (report_json)
        {
            nlohmann::json j{{"checkpoints", rep.checkpoints}, {"log", rep.log_path}, {"epochs", rep.result.log.size ()}};
            if (!rep.result.log.empty ())
            {
                j["initial_loss"] = rep.result.log.front ().loss;
                j["final_loss"] = rep.result.log.back ().loss;
                j["final_holdout_loss"] = rep.result.log.back ().holdout_loss;
            }
            *report_json = dup (j.dump (2));
        }
        return C2G_OK;
    });
}

c2g_status c2g_bench (const char *config_json, char **report_json)
{
    return guarded ([&] {
        const auto cfg = c2g::bench_config_from_json (parse (config_json));
        const auto rep = c2g::bench (cfg);
        if (report_json)
        {
            nlohmann::json rows = nlohmann::json::array ();
            for (const auto &r : rep.rows)
                rows.push_back ({{"planner", r.planner},
                                 {"instances", r.instances},
                                 {"success_rate", r.success_rate},
                                 {"mean_time_s", r.mean_time_s},
                                 {"mean_norm_length", r.mean_norm_length},
                                 {"mean_collision_checks", r.mean_collision_checks}});
            *report_json = dup (nlohmann::json{{"rows", rows}, {"pairs", rep.pairs.size ()}, {"out_dir", cfg.out_dir}}.dump (2));
        }
        return C2G_OK;
    });
}

c2g_status c2g_plan (const char *config_json, char **result_json)
{
    return guarded ([&] {
        const auto cfg = c2g::plan_config_from_json (parse (config_json));
        const auto r = c2g::plan_command (cfg);
        if (result_json)
            *result_json = dup (c2g::to_json (r).dump ());
        if (!r.success ())
            return partial (r.trajectory ().note.empty () ? "no valid trajectory" : r.trajectory ().note);
        return C2G_OK;
    });
}

c2g_status c2g_export_costmap (const char *config_json, char **meta_json)
{
    return guarded ([&] {
        const auto cfg = c2g::costmap_config_from_json (parse (config_json));
        const auto meta = c2g::export_costmap (cfg);
        if (meta_json)
            *meta_json = dup (meta.dump (2));
        return C2G_OK;
    });
}

} // extern "C"
