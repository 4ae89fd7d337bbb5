#pragma once
/**
 * @file c2g_net.hpp
 * @brief Radial-basis cost-to-go network over configuration pairs.
 *
 * Forward pass for a pair (q1, q2):
 *
 *     x    = embed(q1) ++ embed(q2)
 *     phi_b = exp(-beta_b * |x - c_b|^2),   beta_b = softplus(raw_b)
 *     h1   = relu(W1 phi + b1)
 *     h2   = relu(W2 h1 + b2)
 *     y    = softplus(w3 . h2 + b3)   >= 0
 *
 * The embedding maps a periodic joint to (cos q, sin q) and a limited joint
 * to its range normalized to [-1, 1]. Raw mode feeds joint angles unchanged.
 *
 * The flat parameter vector is laid out as: centers (B x in, row-major),
 * raw bandwidths (B), W1 (H1 x B), b1, W2 (H2 x H1), b2, w3 (H2), b3.
 */

#include <c2g/cspace_oracle.hpp>
#include <c2g/robot.hpp>

#include <nlohmann/json_fwd.hpp>

#include <Eigen/Core>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace c2g
{
    enum class Embedding
    {
        Angle,
        Raw,
    };

    struct C2GLayout
    {
        std::vector<Joint> joints;
        Embedding embedding = Embedding::Angle;
        std::size_t n_basis = 64;
        std::size_t hidden1 = 64;
        std::size_t hidden2 = 64;

        std::size_t dof () const { return joints.size (); }
        /// Embedded width of one configuration.
        std::size_t config_width () const;
        std::size_t input_dim () const { return 2 * config_width (); }
        std::size_t total_params () const;

        std::size_t off_centers () const { return 0; }
        std::size_t off_bandwidths () const { return n_basis * input_dim (); }
        std::size_t off_w1 () const { return off_bandwidths () + n_basis; }
        std::size_t off_b1 () const { return off_w1 () + hidden1 * n_basis; }
        std::size_t off_w2 () const { return off_b1 () + hidden1; }
        std::size_t off_b2 () const { return off_w2 () + hidden2 * hidden1; }
        std::size_t off_w3 () const { return off_b2 () + hidden2; }
        std::size_t off_b3 () const { return off_w3 () + hidden2; }

        static C2GLayout for_robot (const RobotModel &m, std::size_t n_basis, std::size_t hidden1, std::size_t hidden2,
                                    Embedding embedding = Embedding::Angle);
    };

    bool operator== (const C2GLayout &a, const C2GLayout &b);

    /// Parameter count with raw-angle inputs (input width 2 dof).
    std::size_t param_count (std::size_t dof, std::size_t n_basis, std::size_t hidden1, std::size_t hidden2);

    struct C2GParams
    {
        C2GLayout layout;
        std::vector<double> theta;

        void check () const;
    };

    double softplus (double z);
    double inverse_softplus (double y);
    double sigmoid (double z);

    /// Embedded input x for a pair.
    Eigen::VectorXd embed_pair (const C2GLayout &l, std::span<const double> q1, std::span<const double> q2);

    double c2g_eval (const C2GParams &p, std::span<const double> q1, std::span<const double> q2);

    struct InputGradient
    {
        std::vector<double> d_q1;
        std::vector<double> d_q2;
    };
    InputGradient c2g_input_gradient (const C2GParams &p, std::span<const double> q1, std::span<const double> q2);

    /**
     * @brief Squared-error regression over a batch of tuples.
     *
     * Returns sum_i (y_i - c_i / target_scale)^2 and accumulates its gradient
     * with respect to theta into `grad_theta` (sized total_params).
     */
    double c2g_batch_sse (const C2GParams &p, std::span<const CostTuple> tuples, double target_scale, std::span<double> grad_theta);

    /// Parameter gradient of a single evaluation.
    std::vector<double> c2g_param_gradient (const C2GParams &p, std::span<const double> q1, std::span<const double> q2);

    /// Child-network initialization used as the hypernetwork's output bias.
    std::vector<double> c2g_initial_theta (const C2GLayout &l, Rng &rng, double beta0 = 1.0, double output0 = 0.35);

    nlohmann::json to_json (const C2GLayout &l);
    C2GLayout c2g_layout_from_json (const nlohmann::json &j);

    /// "C2GNETW": magic, u32 json length, layout json, u64 count, float64 theta.
    std::string encode_c2g_params (const C2GParams &p);
    C2GParams decode_c2g_params (std::string_view bytes);

} // namespace c2g
