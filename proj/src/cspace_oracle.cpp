#include <c2g/cspace_oracle.hpp>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <queue>

namespace c2g
{
    std::vector<int> GridMap::unflatten (std::size_t idx) const
    {
        std::vector<int> sub (dof ());
        for (std::size_t k = dof (); k-- > 0;)
        {
            sub[k] = static_cast<int> (idx % static_cast<std::size_t> (cells[k]));
            idx /= static_cast<std::size_t> (cells[k]);
        }
        return sub;
    }

    std::size_t GridMap::flatten (std::span<const int> sub) const
    {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < dof (); ++k)
            flat = flat * static_cast<std::size_t> (cells[k]) + static_cast<std::size_t> (sub[k]);
        return flat;
    }

    Config GridMap::cell_center (std::size_t idx) const
    {
        const auto sub = unflatten (idx);
        Config q (dof ());
        for (std::size_t k = 0; k < dof (); ++k)
            q[k] = joints[k].lo + (sub[k] + 0.5) * spacing (k);
        return q;
    }

    std::size_t GridMap::cell_of (std::span<const double> q) const
    {
        require (q.size () == dof (), "configuration dimension mismatch");
        std::vector<int> sub (dof ());
        for (std::size_t k = 0; k < dof (); ++k)
        {
            double v = joints[k].periodic () ? wrap_angle (q[k]) : q[k];
            int c = static_cast<int> (std::floor ((v - joints[k].lo) / spacing (k)));
            if (joints[k].periodic ())
                c = ((c % cells[k]) + cells[k]) % cells[k];
            else
                c = std::clamp (c, 0, cells[k] - 1);
            sub[k] = c;
        }
        return flatten (sub);
    }

    GridMap GridMap::free_grid (std::vector<int> cells, std::vector<Joint> joints)
    {
        require (!cells.empty () && cells.size () == joints.size (), "grid cells/joints mismatch");
        GridMap g;
        std::size_t total = 1;
        for (int c : cells)
        {
            require (c >= 1, "grid needs at least one cell per dimension");
            total *= static_cast<std::size_t> (c);
        }
        g.cells = std::move (cells);
        g.joints = std::move (joints);
        for (auto &j : g.joints)
            if (j.periodic ())
                j.lo = -kPi, j.hi = kPi;
        g.occupancy.assign (total, 0);
        return g;
    }

    GridMap build_grid_map (const RobotModel &m, const Workspace &w, std::span<const int> cells_per_dim, std::size_t max_cells, unsigned threads)
    {
        validate (m);
        require (m.dof () <= 3, "grid oracles are limited to dof <= 3");
        require (cells_per_dim.size () == m.dof (), "cells_per_dim must have one entry per joint");
        double total = 1.0;
        for (int c : cells_per_dim)
        {
            require (c >= 1, "grid needs at least one cell per dimension");
            total *= c;
        }
        if (total > static_cast<double> (max_cells))
            fail (ErrorCode::Infeasible, "grid of " + std::to_string (static_cast<std::uint64_t> (total)) + " cells exceeds the cap of " +
                                             std::to_string (max_cells));

        GridMap g = GridMap::free_grid (std::vector<int> (cells_per_dim.begin (), cells_per_dim.end ()), m.joints);
        if (w.empty ())
            return g;
        // Rows along the first dimension are independent jobs.
        const std::size_t rows = static_cast<std::size_t> (g.cells[0]);
        const std::size_t per_row = g.size () / rows;
        parallel_for (rows, threads, [&] (std::size_t r) {
            for (std::size_t i = r * per_row; i < (r + 1) * per_row; ++i)
                g.occupancy[i] = config_in_collision (m, g.cell_center (i), w) ? 1 : 0;
        });
        return g;
    }

    std::vector<StencilMove> grid_stencil (const GridMap &g)
    {
        const std::size_t d = g.dof ();
        std::vector<StencilMove> out;
        std::size_t combos = 1;
        for (std::size_t k = 0; k < d; ++k)
            combos *= 3;
        for (std::size_t c = 0; c < combos; ++c)
        {
            StencilMove mv;
            mv.offset.resize (d);
            std::size_t rest = c;
            bool zero = true;
            double w2 = 0.0;
            for (std::size_t k = d; k-- > 0;)
            {
                mv.offset[k] = static_cast<int> (rest % 3) - 1;
                rest /= 3;
                if (mv.offset[k] != 0)
                    zero = false;
                const double step = mv.offset[k] * g.spacing (k);
                w2 += step * step;
            }
            if (zero)
                continue;
            mv.weight = std::sqrt (w2);
            out.push_back (std::move (mv));
        }
        return out;
    }

    GridCostField dijkstra_cost_field (const GridMap &g, std::size_t goal)
    {
        require (goal < g.size (), "goal cell out of range");
        if (g.occupied (goal))
            fail (ErrorCode::Collision, "goal cell is occupied");
        GridCostField f;
        f.goal = goal;
        f.cost.assign (g.size (), kInf);
        f.cost[goal] = 0.0;
        const auto stencil = grid_stencil (g);

        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
        open.emplace (0.0, goal);
        std::vector<std::uint8_t> done (g.size (), 0);
        while (!open.empty ())
        {
            const auto [c, u] = open.top ();
            open.pop ();
            if (done[u])
                continue;
            done[u] = 1;
            for_each_free_neighbor (g, stencil, u, [&] (std::size_t v, double wt) {
                const double nc = c + wt;
                if (nc < f.cost[v])
                {
                    f.cost[v] = nc;
                    open.emplace (nc, v);
                }
            });
        }
        return f;
    }

    std::size_t Roadmap::edge_count () const
    {
        std::size_t n = 0;
        for (const auto &a : adjacency)
            n += a.size ();
        return n / 2;
    }

    void Roadmap::add_edge (std::size_t u, std::size_t v, double w)
    {
        auto insert = [&] (std::size_t a, std::size_t b) {
            auto &list = adjacency[a];
            auto it = std::lower_bound (list.begin (), list.end (), b, [] (const auto &e, std::size_t key) { return e.first < key; });
            if (it == list.end () || it->first != b)
                list.insert (it, {b, w});
        };
        insert (u, v);
        insert (v, u);
    }

    void Roadmap::remove_edge (std::size_t u, std::size_t v)
    {
        auto erase = [&] (std::size_t a, std::size_t b) {
            auto &list = adjacency[a];
            std::erase_if (list, [b] (const auto &e) { return e.first == b; });
        };
        erase (u, v);
        erase (v, u);
    }

    std::vector<std::size_t> nearest_vertices (const RobotModel &m, std::span<const Config> vertices, std::span<const double> q, std::size_t k,
                                               std::size_t exclude)
    {
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve (vertices.size ());
        for (std::size_t j = 0; j < vertices.size (); ++j)
            if (j != exclude)
                d.emplace_back (config_distance (m, q, vertices[j]), j);
        const std::size_t take = std::min (k, d.size ());
        std::partial_sort (d.begin (), d.begin () + static_cast<long> (take), d.end ());
        std::vector<std::size_t> out (take);
        for (std::size_t i = 0; i < take; ++i)
            out[i] = d[i].second;
        return out;
    }

    namespace
    {
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

    Roadmap build_prm (const RobotModel &m, const Workspace &w, const PrmOptions &opts)
    {
        validate (m);
        require (opts.n_vertices >= 2, "roadmap needs at least two vertices");
        require (opts.k >= 1, "k must be >= 1");
        require (opts.step > 0.0, "edge step must be > 0");
        require (opts.min_free_fraction > 0.0 && opts.min_free_fraction <= 1.0, "min_free_fraction must be in (0, 1]");

        Roadmap r;
        r.k = opts.k;
        r.step = opts.step;
        r.seed = opts.seed;
        Rng rng (mix_seed (opts.seed, 0x50524d));
        const auto budget = static_cast<std::uint64_t> (std::ceil (static_cast<double> (opts.n_vertices) / opts.min_free_fraction));
        std::uint64_t draws = 0;
        while (r.vertices.size () < opts.n_vertices)
        {
            if (draws++ >= budget)
                fail (ErrorCode::Infeasible, "roadmap sampling budget exhausted after " + std::to_string (budget) + " draws with " +
                                                 std::to_string (r.vertices.size ()) + " free vertices");
            Config q = random_config (m, rng);
            ++r.collision_checks;
            if (!config_in_collision (m, q, w))
                r.vertices.push_back (std::move (q));
        }

        const std::size_t n = r.vertices.size ();
        std::vector<std::vector<std::size_t>> knn (n);
        parallel_for (n, opts.threads, [&] (std::size_t i) { knn[i] = nearest_vertices (m, r.vertices, r.vertices[i], static_cast<std::size_t> (opts.k), i); });

        std::vector<std::pair<std::size_t, std::size_t>> proposals;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j : knn[i])
                proposals.emplace_back (std::min (i, j), std::max (i, j));
        std::sort (proposals.begin (), proposals.end ());
        proposals.erase (std::unique (proposals.begin (), proposals.end ()), proposals.end ());
        r.proposals = proposals.size ();

        std::vector<std::uint8_t> free (proposals.size (), 0);
        std::vector<std::uint64_t> checks (proposals.size (), 0);
        parallel_for (proposals.size (), opts.threads, [&] (std::size_t e) {
            const auto [u, v] = proposals[e];
            free[e] = edge_in_collision (m, r.vertices[u], r.vertices[v], w, opts.step, &checks[e]) ? 0 : 1;
        });

        r.adjacency.assign (n, {});
        for (std::size_t e = 0; e < proposals.size (); ++e)
        {
            r.collision_checks += checks[e];
            if (!free[e])
                continue;
            const auto [u, v] = proposals[e];
            const double wt = config_distance (m, r.vertices[u], r.vertices[v]);
            r.adjacency[u].emplace_back (v, wt);
            r.adjacency[v].emplace_back (u, wt);
        }
        for (auto &list : r.adjacency)
            std::sort (list.begin (), list.end ());
        return r;
    }

    std::vector<double> roadmap_cost_field (const Roadmap &r, std::size_t goal_vertex)
    {
        require (goal_vertex < r.vertices.size (), "goal vertex out of range");
        std::vector<double> cost (r.vertices.size (), kInf);
        cost[goal_vertex] = 0.0;
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
        open.emplace (0.0, goal_vertex);
        while (!open.empty ())
        {
            const auto [c, u] = open.top ();
            open.pop ();
            if (c > cost[u])
                continue;
            for (const auto &[v, wt] : r.adjacency[u])
            {
                const double nc = c + wt;
                if (nc < cost[v])
                {
                    cost[v] = nc;
                    open.emplace (nc, v);
                }
            }
        }
        return cost;
    }

    std::vector<CostTuple> emit_tuples (std::span<const SupervisionField> fields, const std::function<Config (std::size_t)> &config_of,
                                        std::size_t n_per_goal, std::uint64_t seed)
    {
        require (!fields.empty (), "emit_tuples needs at least one field");
        std::vector<CostTuple> out;
        out.reserve (fields.size () * n_per_goal);
        for (std::size_t f = 0; f < fields.size (); ++f)
        {
            const auto &field = fields[f];
            std::vector<std::size_t> finite;
            for (std::size_t i = 0; i < field.cost.size (); ++i)
                if (std::isfinite (field.cost[i]))
                    finite.push_back (i);
            if (finite.size () <= 1)
            {
                spdlog::warn ("emit_tuples: field {} has no finite entries besides the goal; skipped", f);
                continue;
            }
            Rng rng (mix_seed (seed, f));
            for (std::size_t s = 0; s < n_per_goal; ++s)
            {
                const std::size_t i = finite[rng.below (finite.size ())];
                out.push_back ({config_of (i), field.goal, field.cost[i]});
            }
        }
        return out;
    }

    std::vector<CostTuple> emit_tuples (const GridMap &g, std::span<const GridCostField> fields, std::size_t n_per_goal, std::uint64_t seed)
    {
        std::vector<SupervisionField> sf;
        sf.reserve (fields.size ());
        for (const auto &f : fields)
            sf.push_back ({g.cell_center (f.goal), f.cost});
        return emit_tuples (sf, [&] (std::size_t i) { return g.cell_center (i); }, n_per_goal, seed);
    }

    std::vector<CostTuple> emit_tuples (const Roadmap &r, std::span<const std::pair<std::size_t, std::vector<double>>> fields, std::size_t n_per_goal,
                                        std::uint64_t seed)
    {
        std::vector<SupervisionField> sf;
        sf.reserve (fields.size ());
        for (const auto &[goal, cost] : fields)
            sf.push_back ({r.vertices.at (goal), cost});
        return emit_tuples (sf, [&] (std::size_t i) { return r.vertices[i]; }, n_per_goal, seed);
    }

    std::size_t sample_free_cell (const GridMap &g, Rng &rng)
    {
        const auto free_count = static_cast<std::size_t> (std::count (g.occupancy.begin (), g.occupancy.end (), 0));
        if (free_count == 0)
            fail (ErrorCode::Infeasible, "grid has no free cells");
        std::size_t pick = rng.below (free_count);
        for (std::size_t i = 0; i < g.size (); ++i)
            if (!g.occupied (i) && pick-- == 0)
                return i;
        fail (ErrorCode::Internal, "free cell sampling fell through");
    }

    std::string encode_shard (const DatasetShard &s)
    {
        std::string out;
        bin::put_magic (out, "C2GDSET");
        bin::put_u32 (out, s.version);
        bin::put_u32 (out, s.dof);
        bin::put_u32 (out, s.workspace_id);
        const std::string ws = to_json (s.workspace).dump ();
        bin::put_u32 (out, static_cast<std::uint32_t> (ws.size ()));
        out += ws;
        out += encode_point_cloud (s.cloud);
        bin::put_u32 (out, static_cast<std::uint32_t> (s.tuples.size ()));
        for (const auto &t : s.tuples)
        {
            require (t.q1.size () == s.dof && t.q2.size () == s.dof, "tuple dof does not match shard");
            for (double v : t.q1)
                bin::put_f32 (out, static_cast<float> (v));
            for (double v : t.q2)
                bin::put_f32 (out, static_cast<float> (v));
            bin::put_f32 (out, static_cast<float> (t.cost));
        }
        return out;
    }

    DatasetShard decode_shard (std::string_view bytes)
    {
        bin::Reader r (bytes);
        r.expect_magic ("C2GDSET");
        DatasetShard s;
        s.version = r.u32 ();
        if (s.version != 1)
            fail (ErrorCode::Io, "unsupported shard version " + std::to_string (s.version));
        s.dof = r.u32 ();
        s.workspace_id = r.u32 ();
        const std::uint32_t len = r.u32 ();
        try
        {
            s.workspace = workspace_from_json (nlohmann::json::parse (r.bytes (len)));
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::Io, std::string ("shard workspace json: ") + e.what ());
        }
        s.cloud = decode_point_cloud (r);
        const std::uint32_t count = r.u32 ();
        s.tuples.resize (count);
        for (auto &t : s.tuples)
        {
            t.q1.resize (s.dof);
            t.q2.resize (s.dof);
            for (auto &v : t.q1)
                v = r.f32 ();
            for (auto &v : t.q2)
                v = r.f32 ();
            t.cost = r.f32 ();
        }
        if (r.remaining () != 0)
            fail (ErrorCode::Io, "trailing bytes in shard");
        return s;
    }

} // namespace c2g
