#pragma once
/**
 * @file hof.hpp
 * @brief Cost-to-go generating hypernetwork.
 *
 * A shared per-point MLP (ReLU after every layer) is max-pooled over the
 * cloud; a dense head with one ReLU hidden layer emits the flat C2GParams
 * vector. Training regresses child-network outputs on oracle tuples with a
 * hand-derived reverse pass through both networks.
 */

#include <c2g/c2g_net.hpp>
#include <c2g/cspace_oracle.hpp>
#include <c2g/workspace.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace c2g
{
    struct HofLayout
    {
        std::size_t point_dim = 2;
        std::vector<std::size_t> encoder{64, 128, 256};
        std::size_t head_hidden = 512;
        C2GLayout child;

        std::size_t output_dim () const { return child.total_params (); }
        std::size_t pooled_dim () const { return encoder.back (); }
        std::size_t total_params () const;

        // Offsets of weight matrix (row-major out x in) and bias per dense layer;
        // encoder layers first, then head hidden, then head output.
        std::size_t layer_count () const { return encoder.size () + 2; }
        std::size_t layer_in (std::size_t l) const;
        std::size_t layer_out (std::size_t l) const;
        std::size_t weight_offset (std::size_t l) const;
        std::size_t bias_offset (std::size_t l) const { return weight_offset (l) + layer_in (l) * layer_out (l); }
    };

    struct HofParams
    {
        HofLayout layout;
        std::vector<double> theta;

        void check () const;
    };

    struct HofInit
    {
        double beta0 = 1.0;       ///< emitted RBF bandwidth at initialization
        double output0 = 0.35;    ///< emitted mid-range normalized cost
        double head_out_scale = 0.1;
    };

    HofParams hof_init (const HofLayout &layout, std::uint64_t seed, const HofInit &init = {});

    /// Permutation and duplication invariant in the cloud's points.
    C2GParams hof_forward (const HofParams &h, const PointCloud &pc);

    struct LossGrad
    {
        double loss = 0.0;
        std::vector<double> grad;
    };

    /**
     * @brief Mean squared error of the emitted network on `tuples` (targets
     *        divided by target_scale) and its exact gradient in h.theta.
     *
     * The batch is reduced in fixed-size chunks in index order, so the result
     * does not depend on `threads`.
     */
    LossGrad loss_and_gradients (const HofParams &h, const PointCloud &pc, std::span<const CostTuple> tuples, double target_scale, unsigned threads = 1);

    /// Loss only (no reverse pass).
    double hof_loss (const HofParams &h, const PointCloud &pc, std::span<const CostTuple> tuples, double target_scale);

    struct AdamConfig
    {
        double learning_rate = 3e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    struct AdamState
    {
        std::vector<double> m;
        std::vector<double> v;
        std::uint64_t step = 0;

        explicit AdamState (std::size_t n = 0) : m (n, 0.0), v (n, 0.0) {}
    };

    void adam_step (AdamState &state, std::span<double> params, std::span<const double> grad, const AdamConfig &cfg);

    struct TrainConfig
    {
        AdamConfig adam;
        std::size_t epochs = 500;
        std::size_t tuples_per_iteration = 2000;
        std::size_t pointcloud_subsample = 256;
        std::size_t workspaces_per_step = 1;
        std::uint64_t seed = 0;
        double target_scale = 0.0;      ///< 0 selects dof * pi
        double holdout_fraction = 0.05; ///< of each shard's tuples, never trained on
        std::size_t holdout_shards = 8;
        std::size_t holdout_tuples = 256;
        std::size_t checkpoint_every = 100; ///< the final epoch is always checkpointed
        unsigned threads = 1;
        HofInit init;
    };

    struct TrainLogRow
    {
        std::size_t epoch = 0;
        double loss = 0.0;
        double holdout_loss = 0.0;
        double wall_s = 0.0;
    };

    struct TrainResult
    {
        HofParams params;
        double target_scale = 1.0;
        std::vector<TrainLogRow> log;
    };

    using CheckpointFn = std::function<void (std::size_t epoch, const HofParams &params)>;
    using ProgressFn = std::function<void (const TrainLogRow &row)>;

    double default_target_scale (std::size_t dof);

    TrainResult train (std::span<const DatasetShard> shards, const HofLayout &layout, const TrainConfig &cfg, const CheckpointFn &on_checkpoint = {},
                       const ProgressFn &on_epoch = {});

    /// Trained hypernetwork plus the cost normalization it was trained with.
    struct HofCheckpoint
    {
        HofParams params;
        double target_scale = 1.0;
        std::size_t epoch = 0;
        nlohmann::json robot;
    };

    nlohmann::json to_json (const HofLayout &l);
    HofLayout hof_layout_from_json (const nlohmann::json &j);

    /// "C2GHOFW": magic, u32 json length, header json, u64 count, float64 theta.
    std::string encode_checkpoint (const HofCheckpoint &c);
    HofCheckpoint decode_checkpoint (std::string_view bytes);

    /// CSV with header epoch,loss,holdout_loss,wall_s.
    std::string format_train_log (std::span<const TrainLogRow> rows, bool include_wall_time = true);

} // namespace c2g
