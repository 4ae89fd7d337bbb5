#pragma once
/**
 * @file workspace.hpp
 * @brief Random obstacle workspaces and the point clouds that encode them.
 *
 * Planar workspaces hold disks, spatial ones hold axis-aligned boxes. Point
 * clouds are sampled from obstacle interiors; an empty workspace maps to a
 * cloud of copies of a reserved far-away point.
 */

#include <c2g/common.hpp>

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace c2g
{
    enum class ObstacleKind
    {
        Disk2d,
        Box3d,
    };

    struct Obstacle
    {
        ObstacleKind kind = ObstacleKind::Disk2d;
        std::array<double, 3> center{};       ///< only the first `dim` entries are used
        double radius = 0.0;                  ///< disks
        std::array<double, 3> half_extents{}; ///< boxes

        static Obstacle disk (double x, double y, double r);
        static Obstacle box (std::array<double, 3> c, std::array<double, 3> half);

        /// Area (disk) or volume (box).
        double measure () const;
        bool contains (std::span<const double> p) const;
    };

    struct Bounds
    {
        std::array<double, 3> lo{};
        std::array<double, 3> hi{};
    };

    struct Workspace
    {
        int dim = 2;
        Bounds bounds;
        std::vector<Obstacle> obstacles;
        std::uint64_t seed = 0;

        bool empty () const { return obstacles.empty (); }
    };

    /// Generator parameters for generate_random_workspace.
    struct WorkspaceSpec
    {
        int dim = 2;
        Bounds bounds{{-1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}};
        int min_obstacles = 3;
        int max_obstacles = 6;
        double min_size = 0.05; ///< disk radius or box half-extent
        double max_size = 0.15;
        double base_clearance = 0.55;   ///< obstacles stay outside this ball around the origin
        int max_rejections = 1000;      ///< per obstacle
        bool allow_overlap = false;     ///< when false, obstacles are pairwise disjoint
    };

    struct PointCloud
    {
        int dim = 2;
        std::vector<double> points; ///< row-major n x dim

        std::size_t size () const { return dim > 0 ? points.size () / static_cast<std::size_t> (dim) : 0; }
        std::span<const double> point (std::size_t i) const
        {
            return {points.data () + i * static_cast<std::size_t> (dim), static_cast<std::size_t> (dim)};
        }
    };

    /// Coordinate used for every point of an empty workspace's cloud.
    inline constexpr double kSentinelCoordinate = 100.0;

    void validate (const WorkspaceSpec &spec);
    void validate (const Workspace &w);

    Workspace generate_random_workspace (const WorkspaceSpec &spec, std::uint64_t seed);

    /**
     * @brief Uniform interior samples, obstacles weighted by area/volume.
     *
     * For an empty workspace the cloud holds max(n, 1) sentinel points.
     */
    PointCloud sample_point_cloud (const Workspace &w, std::size_t n, std::uint64_t seed);

    /// Boundary inclusive.
    bool point_in_obstacle (const Workspace &w, std::span<const double> p);

    /// Random subset of `n` points without replacement (all points if n >= size).
    PointCloud subsample (const PointCloud &pc, std::size_t n, Rng &rng);

    // Serialization.
    nlohmann::json to_json (const Workspace &w);
    Workspace workspace_from_json (const nlohmann::json &j);
    nlohmann::json to_json (const WorkspaceSpec &s);
    WorkspaceSpec workspace_spec_from_json (const nlohmann::json &j, WorkspaceSpec defaults = {});

    /// "C2GPCLD" blob: 8-byte magic, u32 count, u32 dim, float32 row-major.
    std::string encode_point_cloud (const PointCloud &pc);
    PointCloud decode_point_cloud (std::string_view bytes);
    PointCloud decode_point_cloud (bin::Reader &reader);

} // namespace c2g
