#pragma once
/**
 * @file cspace_oracle.hpp
 * @brief Discrete cost-to-go supervision: occupancy grids with Dijkstra for
 *        low DoF, probabilistic roadmaps with Dijkstra otherwise, and the
 *        (q1, q2, cost) tuples emitted from either.
 *
 * Grid connectivity is the full 3^d - 1 stencil with Euclidean cell-center
 * weights; periodic dimensions wrap. A* in baselines uses the same stencil.
 */

#include <c2g/robot.hpp>
#include <c2g/workspace.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace c2g
{
    struct GridMap
    {
        std::vector<int> cells;         ///< per dimension, last dimension fastest in the flat index
        std::vector<Joint> joints;      ///< range and wrap behaviour per dimension
        std::vector<std::uint8_t> occupancy; ///< 1 = collision

        std::size_t dof () const { return cells.size (); }
        std::size_t size () const { return occupancy.size (); }
        double spacing (std::size_t dim) const { return (joints[dim].hi - joints[dim].lo) / cells[dim]; }
        bool occupied (std::size_t idx) const { return occupancy[idx] != 0; }

        std::vector<int> unflatten (std::size_t idx) const;
        std::size_t flatten (std::span<const int> sub) const;
        Config cell_center (std::size_t idx) const;
        /// Cell containing q (periodic dims wrap, limited dims clamp).
        std::size_t cell_of (std::span<const double> q) const;

        /// Free grid with no collision checks, used by tests and brute-force oracles.
        static GridMap free_grid (std::vector<int> cells, std::vector<Joint> joints);
    };

    inline constexpr std::size_t kDefaultMaxGridCells = std::size_t{1} << 24;

    /// dof must be <= 3; periodic joints span [-pi, pi), limited ones [lo, hi].
    GridMap build_grid_map (const RobotModel &m, const Workspace &w, std::span<const int> cells_per_dim,
                            std::size_t max_cells = kDefaultMaxGridCells, unsigned threads = 1);

    struct GridCostField
    {
        std::size_t goal = 0;
        std::vector<double> cost; ///< +inf for occupied or unreachable cells
    };

    /// Neighbour offsets of the 3^d - 1 stencil with their Euclidean weights.
    struct StencilMove
    {
        std::vector<int> offset;
        double weight = 0.0;
    };
    std::vector<StencilMove> grid_stencil (const GridMap &g);
    /// Calls fn(neighbor_index, weight) for each in-grid, free neighbour of idx.
    template <typename Fn> void for_each_free_neighbor (const GridMap &g, std::span<const StencilMove> stencil, std::size_t idx, Fn &&fn);

    GridCostField dijkstra_cost_field (const GridMap &g, std::size_t goal);

    struct Roadmap
    {
        std::vector<Config> vertices;
        std::vector<std::vector<std::pair<std::size_t, double>>> adjacency; ///< sorted by neighbour index
        int k = 0;
        double step = 0.0;
        std::uint64_t seed = 0;
        std::uint64_t proposals = 0;       ///< distinct edges tested
        std::uint64_t collision_checks = 0;

        std::size_t edge_count () const;
        void add_edge (std::size_t u, std::size_t v, double w);
        void remove_edge (std::size_t u, std::size_t v);
    };

    struct PrmOptions
    {
        std::size_t n_vertices = 2000;
        int k = 10;
        double step = 0.02;               ///< edge check resolution, radians
        std::uint64_t seed = 0;
        double min_free_fraction = 0.01;  ///< sampling budget is n_vertices / min_free_fraction draws
        unsigned threads = 1;
    };

    /// Indices of the k nearest vertices to q under the torus metric (ties by index).
    std::vector<std::size_t> nearest_vertices (const RobotModel &m, std::span<const Config> vertices, std::span<const double> q, std::size_t k,
                                               std::size_t exclude = static_cast<std::size_t> (-1));

    Roadmap build_prm (const RobotModel &m, const Workspace &w, const PrmOptions &opts);
    std::vector<double> roadmap_cost_field (const Roadmap &r, std::size_t goal_vertex);

    struct CostTuple
    {
        Config q1;
        Config q2;
        double cost = 0.0;
    };

    /// Cost field over an indexable set of configurations (grid cells or roadmap vertices).
    struct SupervisionField
    {
        Config goal;
        std::vector<double> cost;
    };

    /**
     * @brief Samples n_per_goal finite-cost sources per field, with replacement.
     *
     * `config_of(i)` maps a field index to its configuration. Fields whose only
     * finite entry is the goal are skipped with a warning.
     */
    std::vector<CostTuple> emit_tuples (std::span<const SupervisionField> fields, const std::function<Config (std::size_t)> &config_of,
                                        std::size_t n_per_goal, std::uint64_t seed);
    std::vector<CostTuple> emit_tuples (const GridMap &g, std::span<const GridCostField> fields, std::size_t n_per_goal, std::uint64_t seed);
    std::vector<CostTuple> emit_tuples (const Roadmap &r, std::span<const std::pair<std::size_t, std::vector<double>>> fields, std::size_t n_per_goal,
                                        std::uint64_t seed);

    /// Uniformly random free cell (the grid must have at least one).
    std::size_t sample_free_cell (const GridMap &g, Rng &rng);

    /// One workspace worth of training data.
    struct DatasetShard
    {
        std::uint32_t version = 1;
        std::uint32_t dof = 0;
        std::uint32_t workspace_id = 0;
        Workspace workspace;
        PointCloud cloud;
        std::vector<CostTuple> tuples;
    };

    /**
     * "C2GDSET" shard: magic, u32 version, u32 dof, u32 workspace id,
     * u32 json length + workspace JSON, point-cloud blob, u32 tuple count,
     * then (2 dof + 1) float32 per tuple.
     */
    std::string encode_shard (const DatasetShard &s);
    DatasetShard decode_shard (std::string_view bytes);

    // ---------------------------------------------------------------------

    template <typename Fn> void for_each_free_neighbor (const GridMap &g, std::span<const StencilMove> stencil, std::size_t idx, Fn &&fn)
    {
        const std::size_t d = g.dof ();
        int sub[3] = {0, 0, 0};
        {
            std::size_t rest = idx;
            for (std::size_t k = d; k-- > 0;)
            {
                sub[k] = static_cast<int> (rest % static_cast<std::size_t> (g.cells[k]));
                rest /= static_cast<std::size_t> (g.cells[k]);
            }
        }
        for (const auto &mv : stencil)
        {
            std::size_t flat = 0;
            bool inside = true;
            for (std::size_t k = 0; k < d; ++k)
            {
                int c = sub[k] + mv.offset[k];
                const int n = g.cells[k];
                if (c < 0 || c >= n)
                {
                    if (!g.joints[k].periodic ())
                    {
                        inside = false;
                        break;
                    }
                    c = (c + n) % n;
                }
                flat = flat * static_cast<std::size_t> (n) + static_cast<std::size_t> (c);
            }
            if (inside && !g.occupied (flat))
                fn (flat, mv.weight);
        }
    }

} // namespace c2g
