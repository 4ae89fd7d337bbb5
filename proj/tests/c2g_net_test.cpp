#include <c2g/c2g_net.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace c2g;

namespace
{
    C2GParams random_params (const C2GLayout &l, Rng &rng, double scale = 0.8)
    {
        C2GParams p{l, std::vector<double> (l.total_params ())};
        for (auto &v : p.theta)
            v = rng.uniform (-scale, scale);
        // keep hidden units mostly active so the finite differences stay off kinks
        for (std::size_t i = 0; i < l.hidden1; ++i)
            p.theta[l.off_b1 () + i] = rng.uniform (0.2, 0.8);
        for (std::size_t i = 0; i < l.hidden2; ++i)
            p.theta[l.off_b2 () + i] = rng.uniform (0.2, 0.8);
        return p;
    }

    Config random_config (const C2GLayout &l, Rng &rng)
    {
        Config q (l.dof ());
        for (std::size_t i = 0; i < l.dof (); ++i)
            q[i] = l.joints[i].periodic () ? rng.uniform (-kPi, kPi) : rng.uniform (l.joints[i].lo + 0.01, l.joints[i].hi - 0.01);
        return q;
    }

    double relative (double analytic, double numeric) { return std::abs (analytic - numeric) / std::max ({std::abs (analytic), std::abs (numeric), 1e-6}); }

    C2GLayout mixed_layout (std::size_t B, std::size_t h1, std::size_t h2, Embedding e = Embedding::Angle)
    {
        C2GLayout l;
        l.joints = {Joint::revolute (), Joint::limited (-kPi / 2, kPi / 2)};
        l.n_basis = B;
        l.hidden1 = h1;
        l.hidden2 = h2;
        l.embedding = e;
        return l;
    }
} // namespace

TEST (C2GNet, ParamCount)
{
    EXPECT_EQ (param_count (2, 64, 64, 64), 8705u);
    EXPECT_EQ (param_count (1, 1, 1, 1), 9u);
    EXPECT_EQ (C2GLayout::for_robot (RobotModel::planar2 (), 64, 64, 64, Embedding::Raw).total_params (), 8705u);
    const auto angle = C2GLayout::for_robot (RobotModel::planar2 (), 64, 64, 64);
    EXPECT_EQ (angle.input_dim (), 8u);
    EXPECT_EQ (angle.total_params (), 64u * 8 + 64 + 64 * 64 + 64 + 64 * 64 + 64 + 65);
    EXPECT_EQ (C2GLayout::for_robot (RobotModel::planar (7), 128, 64, 64, Embedding::Raw).total_params (), param_count (7, 128, 64, 64));
    EXPECT_THROW (param_count (0, 1, 1, 1), Error);
}

TEST (C2GNet, ConstantNetwork)
{
    const auto l = mixed_layout (4, 3, 3);
    C2GParams p{l, std::vector<double> (l.total_params (), 0.0)};
    Rng rng (1);
    for (std::size_t i = 0; i < l.off_w1 (); ++i)
        p.theta[i] = rng.uniform (-1, 1);
    for (int k = 0; k < 20; ++k)
    {
        const auto q1 = random_config (l, rng), q2 = random_config (l, rng);
        EXPECT_NEAR (c2g_eval (p, q1, q2), std::log (2.0), 1e-15);
        const auto g = c2g_input_gradient (p, q1, q2);
        for (double v : g.d_q1)
            EXPECT_EQ (v, 0.0);
        for (double v : g.d_q2)
            EXPECT_EQ (v, 0.0);
    }
}

TEST (C2GNet, KernelPeak)
{
    C2GLayout l;
    l.joints = {Joint::revolute ()};
    l.n_basis = l.hidden1 = l.hidden2 = 1;
    const Config q1{0.3}, q2{-1.1};
    const auto x = embed_pair (l, q1, q2);
    for (double raw : {-3.0, 0.0, 5.0})
    {
        C2GParams p{l, std::vector<double> (l.total_params (), 0.0)};
        for (std::size_t k = 0; k < l.input_dim (); ++k)
            p.theta[l.off_centers () + k] = x[static_cast<Eigen::Index> (k)];
        p.theta[l.off_bandwidths ()] = raw;
        p.theta[l.off_w1 ()] = p.theta[l.off_w2 ()] = p.theta[l.off_w3 ()] = 1.0;
        EXPECT_DOUBLE_EQ (c2g_eval (p, q1, q2), softplus (1.0));
    }
}

TEST (C2GNet, MatchesIndependentImplementation)
{
    Rng rng (42);
    for (auto e : {Embedding::Angle, Embedding::Raw})
        for (int trial = 0; trial < 50; ++trial)
        {
            const auto l = mixed_layout (1 + rng.below (12), 1 + rng.below (9), 1 + rng.below (9), e);
            const auto p = random_params (l, rng);
            const auto q1 = random_config (l, rng), q2 = random_config (l, rng);
            EXPECT_NEAR (c2g_eval (p, q1, q2), oracle::c2g_eval (l, p.theta, q1, q2), 1e-12);
        }
}

TEST (C2GNet, NonNegative)
{
    Rng rng (5);
    const auto l = mixed_layout (8, 6, 6);
    for (int trial = 0; trial < 500; ++trial)
    {
        const auto p = random_params (l, rng, 4.0);
        EXPECT_GE (c2g_eval (p, random_config (l, rng), random_config (l, rng)), 0.0);
    }
}

TEST (C2GNet, InputGradientMatchesFiniteDifferences)
{
    Rng rng (7);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto l = mixed_layout (6, 5, 5, trial % 2 ? Embedding::Raw : Embedding::Angle);
        const auto p = random_params (l, rng);
        const auto q1 = random_config (l, rng), q2 = random_config (l, rng);
        const auto g = c2g_input_gradient (p, q1, q2);
        for (int which = 0; which < 2; ++which)
            for (std::size_t i = 0; i < l.dof (); ++i)
            {
                Config a = which ? q2 : q1, b = a;
                a[i] += h;
                b[i] -= h;
                const double num = which ? (c2g_eval (p, q1, a) - c2g_eval (p, q1, b)) / (2 * h) : (c2g_eval (p, a, q2) - c2g_eval (p, b, q2)) / (2 * h);
                const double ana = which ? g.d_q2[i] : g.d_q1[i];
                EXPECT_LT (relative (ana, num), 1e-4) << "trial " << trial << " which " << which << " joint " << i;
            }
    }
}

TEST (C2GNet, ParamGradientMatchesFiniteDifferences)
{
    Rng rng (9);
    const double h = 1e-5;
    for (int trial = 0; trial < 30; ++trial)
    {
        const auto l = mixed_layout (3, 4, 3);
        auto p = random_params (l, rng);
        const auto q1 = random_config (l, rng), q2 = random_config (l, rng);
        const auto g = c2g_param_gradient (p, q1, q2);
        ASSERT_EQ (g.size (), l.total_params ());
        for (std::size_t k = 0; k < g.size (); ++k)
        {
            const double keep = p.theta[k];
            p.theta[k] = keep + h;
            const double up = c2g_eval (p, q1, q2);
            p.theta[k] = keep - h;
            const double down = c2g_eval (p, q1, q2);
            p.theta[k] = keep;
            EXPECT_LT (relative (g[k], (up - down) / (2 * h)), 1e-4) << "param " << k;
        }
    }
}

TEST (C2GNet, BatchSse)
{
    Rng rng (10);
    const auto l = mixed_layout (5, 4, 4);
    const auto p = random_params (l, rng);
    std::vector<CostTuple> tuples;
    for (int i = 0; i < 7; ++i)
        tuples.push_back ({random_config (l, rng), random_config (l, rng), rng.uniform (0, 6)});
    const double scale = 2 * kPi;
    std::vector<double> grad (l.total_params (), 0.0), expect (l.total_params (), 0.0);
    double sse = 0.0;
    for (const auto &t : tuples)
    {
        const double r = c2g_eval (p, t.q1, t.q2) - t.cost / scale;
        sse += r * r;
        const auto g = c2g_param_gradient (p, t.q1, t.q2);
        for (std::size_t k = 0; k < g.size (); ++k)
            expect[k] += 2 * r * g[k];
    }
    EXPECT_NEAR (c2g_batch_sse (p, tuples, scale, grad), sse, 1e-12);
    for (std::size_t k = 0; k < grad.size (); ++k)
        EXPECT_NEAR (grad[k], expect[k], 1e-10);
}

TEST (C2GNet, PeriodicConsistency)
{
    Rng rng (11);
    const auto l = mixed_layout (6, 5, 5);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto p = random_params (l, rng);
        const auto q1 = random_config (l, rng), q2 = random_config (l, rng);
        auto shifted = q1;
        shifted[0] += kTwoPi;
        EXPECT_NEAR (c2g_eval (p, shifted, q2), c2g_eval (p, q1, q2), 1e-12);
        const auto a = c2g_input_gradient (p, q1, q2), b = c2g_input_gradient (p, shifted, q2);
        for (std::size_t i = 0; i < l.dof (); ++i)
            EXPECT_NEAR (a.d_q1[i], b.d_q1[i], 1e-12);
    }
}

TEST (C2GNet, InitialThetaIsWellConditioned)
{
    Rng rng (3);
    const auto l = C2GLayout::for_robot (RobotModel::planar2 (), 64, 64, 64);
    C2GParams p{l, c2g_initial_theta (l, rng, 1.0, 0.35)};
    for (std::size_t b = 0; b < l.n_basis; ++b)
        EXPECT_NEAR (softplus (p.theta[l.off_bandwidths () + b]), 1.0, 1e-12);
    std::vector<double> ys;
    for (int i = 0; i < 200; ++i)
        ys.push_back (c2g_eval (p, random_config (l, rng), random_config (l, rng)));
    double mean = 0, var = 0;
    for (double y : ys)
        mean += y / ys.size ();
    for (double y : ys)
        var += (y - mean) * (y - mean) / ys.size ();
    EXPECT_GT (var, 0.0);
    EXPECT_GT (mean, 0.05);
    EXPECT_LT (mean, 2.0);
}

TEST (C2GNet, DimensionMismatch)
{
    const auto l = mixed_layout (2, 2, 2);
    C2GParams p{l, std::vector<double> (l.total_params (), 0.0)};
    EXPECT_THROW (c2g_eval (p, Config{0.0}, Config{0.0, 0.0}), Error);
    p.theta.pop_back ();
    EXPECT_THROW (c2g_eval (p, Config{0.0, 0.0}, Config{0.0, 0.0}), Error);
}

TEST (C2GNet, Serialization)
{
    Rng rng (12);
    const auto l = mixed_layout (3, 2, 4, Embedding::Raw);
    const auto p = random_params (l, rng);
    const auto blob = encode_c2g_params (p);
    EXPECT_EQ (blob.substr (0, 7), "C2GNETW");
    const auto back = decode_c2g_params (blob);
    EXPECT_TRUE (back.layout == l);
    EXPECT_EQ (back.theta, p.theta);
    EXPECT_TRUE (c2g_layout_from_json (to_json (l)) == l);
    EXPECT_THROW (decode_c2g_params (blob.substr (0, blob.size () - 1)), Error);
}
