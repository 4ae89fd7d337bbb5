#pragma once
/**
 * @file bench.hpp
 * @brief The workbench commands: dataset generation, training, benchmarking,
 *        single queries and cost-map export. Each command takes a config
 *        struct parsed from JSON and writes its artifacts to a directory.
 */

#include <c2g/baselines.hpp>
#include <c2g/hof.hpp>
#include <c2g/planner.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace c2g
{
    enum class OracleKind
    {
        Grid,
        Prm,
    };

    // ---------------------------------------------------------------- gen-data

    struct GenDataConfig
    {
        RobotModel robot = RobotModel::planar2 ();
        WorkspaceSpec workspace;
        std::size_t n_workspaces = 10;
        std::size_t first_workspace_id = 0;
        OracleKind oracle = OracleKind::Grid;
        int grid_cells = 72;               ///< per dimension
        PrmOptions prm;
        std::size_t goals = 20;            ///< per workspace
        std::size_t tuples_per_goal = 2000;
        std::size_t cloud_points = 1024;
        std::uint64_t seed = 0;
        unsigned threads = 1;
        std::string out_dir;
    };

    GenDataConfig gen_data_config_from_json (const nlohmann::json &j);
    nlohmann::json to_json (const GenDataConfig &c);

    struct GenDataReport
    {
        nlohmann::json manifest;
        std::size_t written = 0;
        std::size_t failed = 0;
    };

    /// Writes shard_NNNNN.c2gd files and manifest.json (with sha256 per shard).
    GenDataReport gen_data (const GenDataConfig &cfg);

    /// Loads every shard listed in dir/manifest.json, verifying checksums.
    std::vector<DatasetShard> load_dataset (const std::string &dir, nlohmann::json *manifest = nullptr);

    // ------------------------------------------------------------------- train

    struct TrainCommandConfig
    {
        std::string dataset_dir;
        std::string out_dir;
        TrainConfig train;
        std::vector<std::size_t> encoder{64, 128, 256};
        std::size_t head_hidden = 512;
        std::size_t n_basis = 64;
        std::size_t hidden1 = 64;
        std::size_t hidden2 = 64;
        Embedding embedding = Embedding::Angle;
        bool log_wall_time = true; ///< false zeroes wall_s so logs compare bitwise
    };

    TrainCommandConfig train_config_from_json (const nlohmann::json &j);
    nlohmann::json to_json (const TrainCommandConfig &c);

    struct TrainCommandReport
    {
        std::vector<std::string> checkpoints;
        std::string log_path;
        TrainResult result;
    };

    /// Writes checkpoint_NNNNNN.c2gh files, train_log.csv and effective_config.json.
    TrainCommandReport train_command (const TrainCommandConfig &cfg);

    HofCheckpoint load_checkpoint (const std::string &path);
    RobotModel checkpoint_robot (const HofCheckpoint &c);

    /// Child network for a workspace: the cloud is subsampled the way training saw it.
    C2GParams emit_c2g (const HofCheckpoint &c, const PointCloud &cloud, std::size_t subsample, std::uint64_t seed);

    // ------------------------------------------------------------------- bench

    struct BenchConfig
    {
        std::string checkpoint;
        std::string dataset_dir;      ///< when set, workspaces come from the dataset shards
        WorkspaceSpec workspace;      ///< otherwise fresh ones are generated
        std::size_t n_workspaces = 20;
        std::size_t pairs_per_workspace = 10;
        double min_separation = kPi;
        int grid_cells = 72;
        std::size_t cloud_points = 1024;
        std::size_t pointcloud_subsample = 256;
        std::vector<std::string> planners{"c2g-hof", "rrt", "rrt-smooth", "astar", "prm-replan"};
        RrtParams rrt;
        std::size_t smooth_iters = 200;
        PrmOptions prm;
        PlanOptions plan;
        double validation_step = 0.02;
        std::size_t repeat = 1;       ///< timing repetitions per planner and instance
        std::size_t max_pair_attempts = 10000;
        std::uint64_t seed = 0;
        unsigned threads = 1;
        std::string out_dir;
    };

    BenchConfig bench_config_from_json (const nlohmann::json &j);
    nlohmann::json to_json (const BenchConfig &c);

    struct InstanceResult
    {
        std::size_t workspace_index = 0;
        std::size_t pair_index = 0;
        std::string planner;
        Trajectory trajectory;
        double preproc_s = 0.0;
        double traj_s = 0.0;
        double postproc_s = 0.0;
        nlohmann::json extra; ///< planner-specific fields
        double total_s () const { return preproc_s + traj_s + postproc_s; }
    };

    struct BenchRow
    {
        std::string planner;
        std::size_t instances = 0;
        std::size_t successes = 0;
        double mean_time_s = 0.0;
        double std_time_s = 0.0;
        double mean_norm_length = 0.0;
        double std_norm_length = 0.0;
        std::size_t norm_length_count = 0;
        double success_rate = 0.0;
        double mean_collision_checks = 0.0;
        double preproc_s = 0.0;
        double traj_s = 0.0;
        double postproc_s = 0.0;
    };

    struct BenchPair
    {
        std::size_t workspace_index = 0;
        Config start;
        Config goal;
    };

    struct BenchReport
    {
        std::vector<Workspace> workspaces;
        std::vector<BenchPair> pairs;
        std::vector<InstanceResult> instances; ///< pair-major, planners in config order
        std::vector<BenchRow> rows;
    };

    BenchReport bench (const BenchConfig &cfg);

    /// Aggregates per-instance results; normalized lengths use the instances
    /// every planner solved, relative to A* when present (else to the torus
    /// distance between start and goal).
    std::vector<BenchRow> aggregate (std::span<const InstanceResult> instances, std::span<const BenchPair> pairs, std::span<const std::string> planners,
                                     std::span<const Joint> joints);

    std::string format_bench_table (std::span<const BenchRow> rows);
    std::string format_breakdown_table (std::span<const BenchRow> rows);

    /// Roadmap with the vertices that collide in one workspace removed.
    struct PrmReplanner
    {
        const Roadmap *base = nullptr;
        std::vector<std::uint8_t> valid;
        double preproc_s = 0.0;
        std::uint64_t preproc_checks = 0;
    };

    /// Roadmap built once in the obstacle-free workspace of the robot.
    Roadmap build_base_roadmap (const RobotModel &m, const Workspace &like, const PrmOptions &opts);
    PrmReplanner prepare_prm (const Roadmap &base, const RobotModel &m, const Workspace &w);

    /**
     * @brief Lazy PRM query: connects start and goal to their k nearest valid
     *        vertices, then repeatedly takes the shortest path, validates it
     *        edge by edge and deletes the first infeasible edge until a path
     *        validates or none is left.
     */
    Trajectory prm_replan (const PrmReplanner &prm, const RobotModel &m, const Workspace &w, const Config &start, const Config &goal, int k, double step);

    // -------------------------------------------------------------------- plan

    struct PlanCommandConfig
    {
        std::string checkpoint;
        std::optional<Workspace> workspace; ///< default: generated from workspace_spec and seed
        WorkspaceSpec workspace_spec;
        Config start;
        Config goal;
        PlanOptions plan;
        double validation_step = 0.02;
        std::size_t cloud_points = 1024;
        std::size_t pointcloud_subsample = 256;
        std::uint64_t seed = 0;
    };

    PlanCommandConfig plan_config_from_json (const nlohmann::json &j);
    PlanResult plan_command (const PlanCommandConfig &cfg);

    // ---------------------------------------------------------- export-costmap

    struct CostmapConfig
    {
        std::string checkpoint; ///< empty: the predicted map is the ground truth itself
        RobotModel robot = RobotModel::planar2 (); ///< replaced by the checkpoint's robot when one is given
        std::optional<Workspace> workspace;
        WorkspaceSpec workspace_spec;
        Config goal;
        int resolution = 72;
        std::size_t cloud_points = 1024;
        std::size_t pointcloud_subsample = 256;
        std::uint64_t seed = 0;
        std::string out_prefix;
    };

    CostmapConfig costmap_config_from_json (const nlohmann::json &j);

    struct Costmap
    {
        int resolution = 0;
        std::vector<double> predicted; ///< row = joint 0 cell, column = joint 1 cell; +inf where occupied
        std::vector<double> truth;     ///< +inf where occupied or unreachable
        std::vector<std::uint8_t> occupancy;
        std::size_t goal_cell = 0;
    };

    /// Reserved intensity for occupied and unreachable cells.
    inline constexpr std::uint8_t kReservedIntensity = 255;

    Costmap compute_costmap (const CostmapConfig &cfg);
    /// Value-to-intensity map 0..254 over [0, vmax]; non-finite values map to `nonfinite`.
    std::vector<std::uint8_t> to_gray (std::span<const double> v, double vmax, std::uint8_t nonfinite);
    std::string encode_pgm (int width, int height, std::span<const std::uint8_t> pixels);
    /// Writes <prefix>_predicted.pgm, _truth.pgm, _error.pgm and _meta.json.
    nlohmann::json export_costmap (const CostmapConfig &cfg);

    /// Process exit code for an error category: 2 for invalid input or infeasible requests, 1 otherwise.
    int exit_code_for (ErrorCode code);

} // namespace c2g
