#include <c2g/c2g_net.hpp>

#include <nlohmann/json.hpp>

#include <cmath>

namespace c2g
{
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using ConstRowMap = Eigen::Map<const RowMatrix>;
    using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

    std::size_t C2GLayout::config_width () const
    {
        if (embedding == Embedding::Raw)
            return dof ();
        std::size_t w = 0;
        for (const auto &j : joints)
            w += j.periodic () ? 2 : 1;
        return w;
    }

    std::size_t C2GLayout::total_params () const { return off_b3 () + 1; }

    C2GLayout C2GLayout::for_robot (const RobotModel &m, std::size_t n_basis, std::size_t hidden1, std::size_t hidden2, Embedding embedding)
    {
        require (n_basis >= 1 && hidden1 >= 1 && hidden2 >= 1, "network widths must be positive");
        C2GLayout l;
        l.joints = m.joints;
        l.embedding = embedding;
        l.n_basis = n_basis;
        l.hidden1 = hidden1;
        l.hidden2 = hidden2;
        return l;
    }

    bool operator== (const C2GLayout &a, const C2GLayout &b)
    {
        if (a.embedding != b.embedding || a.n_basis != b.n_basis || a.hidden1 != b.hidden1 || a.hidden2 != b.hidden2 || a.dof () != b.dof ())
            return false;
        for (std::size_t i = 0; i < a.dof (); ++i)
            if (a.joints[i].type != b.joints[i].type || a.joints[i].lo != b.joints[i].lo || a.joints[i].hi != b.joints[i].hi)
                return false;
        return true;
    }

    std::size_t param_count (std::size_t dof, std::size_t n_basis, std::size_t hidden1, std::size_t hidden2)
    {
        require (dof >= 1 && n_basis >= 1 && hidden1 >= 1 && hidden2 >= 1, "param_count arguments must be positive");
        const std::size_t in = 2 * dof;
        return n_basis * in + n_basis + (n_basis * hidden1 + hidden1) + (hidden1 * hidden2 + hidden2) + (hidden2 + 1);
    }

    void C2GParams::check () const
    {
        require (layout.dof () >= 1, "network layout has no joints");
        require (theta.size () == layout.total_params (), "parameter vector length does not match layout");
    }

    double softplus (double z) { return z > 0.0 ? z + std::log1p (std::exp (-z)) : std::log1p (std::exp (z)); }

    double inverse_softplus (double y)
    {
        require (y > 0.0, "inverse_softplus needs y > 0");
        return y > 30.0 ? y : std::log (std::expm1 (y));
    }

    double sigmoid (double z)
    {
        if (z >= 0.0)
            return 1.0 / (1.0 + std::exp (-z));
        const double e = std::exp (z);
        return e / (1.0 + e);
    }

    namespace
    {
        void embed_config (const C2GLayout &l, std::span<const double> q, double *out)
        {
            std::size_t k = 0;
            for (std::size_t i = 0; i < l.dof (); ++i)
            {
                const Joint &j = l.joints[i];
                if (l.embedding == Embedding::Raw)
                    out[k++] = q[i];
                else if (j.periodic ())
                {
                    out[k++] = std::cos (q[i]);
                    out[k++] = std::sin (q[i]);
                }
                else
                    out[k++] = (q[i] - 0.5 * (j.lo + j.hi)) / (0.5 * (j.hi - j.lo));
            }
        }

        // Pulls dL/dx (embedded) back to dL/dq for one configuration.
        void embed_backward (const C2GLayout &l, std::span<const double> q, const double *dx, double *dq)
        {
            std::size_t k = 0;
            for (std::size_t i = 0; i < l.dof (); ++i)
            {
                const Joint &j = l.joints[i];
                if (l.embedding == Embedding::Raw)
                    dq[i] = dx[k++];
                else if (j.periodic ())
                {
                    dq[i] = -std::sin (q[i]) * dx[k] + std::cos (q[i]) * dx[k + 1];
                    k += 2;
                }
                else
                    dq[i] = dx[k++] / (0.5 * (j.hi - j.lo));
            }
        }

        struct Views
        {
            ConstRowMap centers;
            ConstVecMap raw;
            ConstRowMap w1;
            ConstVecMap b1;
            ConstRowMap w2;
            ConstVecMap b2;
            ConstVecMap w3;
            double b3;

            explicit Views (const C2GParams &p)
                : centers (p.theta.data () + p.layout.off_centers (), static_cast<long> (p.layout.n_basis), static_cast<long> (p.layout.input_dim ())),
                  raw (p.theta.data () + p.layout.off_bandwidths (), static_cast<long> (p.layout.n_basis)),
                  w1 (p.theta.data () + p.layout.off_w1 (), static_cast<long> (p.layout.hidden1), static_cast<long> (p.layout.n_basis)),
                  b1 (p.theta.data () + p.layout.off_b1 (), static_cast<long> (p.layout.hidden1)),
                  w2 (p.theta.data () + p.layout.off_w2 (), static_cast<long> (p.layout.hidden2), static_cast<long> (p.layout.hidden1)),
                  b2 (p.theta.data () + p.layout.off_b2 (), static_cast<long> (p.layout.hidden2)),
                  w3 (p.theta.data () + p.layout.off_w3 (), static_cast<long> (p.layout.hidden2)), b3 (p.theta[p.layout.off_b3 ()])
            {
            }
        };

        struct Forward
        {
            Eigen::VectorXd x, beta, d2, phi, a1, h1, a2, h2;
            double z = 0.0;
            double y = 0.0;
        };

        Forward forward (const C2GParams &p, std::span<const double> q1, std::span<const double> q2)
        {
            p.check ();
            require (q1.size () == p.layout.dof () && q2.size () == p.layout.dof (), "configuration dimension does not match network layout");
            const Views v (p);
            Forward f;
            f.x = embed_pair (p.layout, q1, q2);
            const auto B = static_cast<long> (p.layout.n_basis);
            f.beta.resize (B);
            f.d2.resize (B);
            f.phi.resize (B);
            for (long b = 0; b < B; ++b)
            {
                f.beta[b] = softplus (v.raw[b]);
                f.d2[b] = (f.x.transpose () - v.centers.row (b)).squaredNorm ();
                f.phi[b] = std::exp (-f.beta[b] * f.d2[b]);
            }
            f.a1 = v.w1 * f.phi + v.b1;
            f.h1 = f.a1.cwiseMax (0.0);
            f.a2 = v.w2 * f.h1 + v.b2;
            f.h2 = f.a2.cwiseMax (0.0);
            f.z = v.w3.dot (f.h2) + v.b3;
            f.y = softplus (f.z);
            return f;
        }

        struct Backward
        {
            Eigen::VectorXd dx;
            std::vector<double> dtheta;
        };

        // Reverse pass of y with respect to x and (optionally) theta.
        Backward backward (const C2GParams &p, const Forward &f, bool want_theta)
        {
            const Views v (p);
            const C2GLayout &l = p.layout;
            const double dz = sigmoid (f.z);
            const Eigen::VectorXd da2 = (v.w3 * dz).cwiseProduct ((f.a2.array () > 0.0).cast<double> ().matrix ());
            const Eigen::VectorXd dh1 = v.w2.transpose () * da2;
            const Eigen::VectorXd da1 = dh1.cwiseProduct ((f.a1.array () > 0.0).cast<double> ().matrix ());
            const Eigen::VectorXd dphi = v.w1.transpose () * da1;

            Backward out;
            out.dx = Eigen::VectorXd::Zero (f.x.size ());
            const auto B = static_cast<long> (l.n_basis);
            if (want_theta)
                out.dtheta.assign (l.total_params (), 0.0);
            for (long b = 0; b < B; ++b)
            {
                const double g = dphi[b] * f.phi[b];
                // d phi / d x = -2 beta phi (x - c); d phi / d c is the negation
                const Eigen::VectorXd diff = f.x - v.centers.row (b).transpose ();
                out.dx += (-2.0 * f.beta[b] * g) * diff;
                if (want_theta)
                {
                    for (long k = 0; k < diff.size (); ++k)
                        out.dtheta[l.off_centers () + static_cast<std::size_t> (b * diff.size () + k)] = 2.0 * f.beta[b] * g * diff[k];
                    out.dtheta[l.off_bandwidths () + static_cast<std::size_t> (b)] = -g * f.d2[b] * sigmoid (v.raw[b]);
                }
            }
            if (want_theta)
            {
                double *t = out.dtheta.data ();
                Eigen::Map<RowMatrix> (t + l.off_w1 (), static_cast<long> (l.hidden1), B) = da1 * f.phi.transpose ();
                Eigen::Map<Eigen::VectorXd> (t + l.off_b1 (), static_cast<long> (l.hidden1)) = da1;
                Eigen::Map<RowMatrix> (t + l.off_w2 (), static_cast<long> (l.hidden2), static_cast<long> (l.hidden1)) = da2 * f.h1.transpose ();
                Eigen::Map<Eigen::VectorXd> (t + l.off_b2 (), static_cast<long> (l.hidden2)) = da2;
                Eigen::Map<Eigen::VectorXd> (t + l.off_w3 (), static_cast<long> (l.hidden2)) = dz * f.h2;
                t[l.off_b3 ()] = dz;
            }
            return out;
        }
    } // namespace

    Eigen::VectorXd embed_pair (const C2GLayout &l, std::span<const double> q1, std::span<const double> q2)
    {
        Eigen::VectorXd x (static_cast<long> (l.input_dim ()));
        embed_config (l, q1, x.data ());
        embed_config (l, q2, x.data () + l.config_width ());
        return x;
    }

    double c2g_eval (const C2GParams &p, std::span<const double> q1, std::span<const double> q2) { return forward (p, q1, q2).y; }

    InputGradient c2g_input_gradient (const C2GParams &p, std::span<const double> q1, std::span<const double> q2)
    {
        const Forward f = forward (p, q1, q2);
        const Backward b = backward (p, f, false);
        InputGradient g;
        g.d_q1.resize (p.layout.dof ());
        g.d_q2.resize (p.layout.dof ());
        embed_backward (p.layout, q1, b.dx.data (), g.d_q1.data ());
        embed_backward (p.layout, q2, b.dx.data () + p.layout.config_width (), g.d_q2.data ());
        return g;
    }

    std::vector<double> c2g_param_gradient (const C2GParams &p, std::span<const double> q1, std::span<const double> q2)
    {
        return backward (p, forward (p, q1, q2), true).dtheta;
    }

    double c2g_batch_sse (const C2GParams &p, std::span<const CostTuple> tuples, double target_scale, std::span<double> grad_theta)
    {
        p.check ();
        require (target_scale > 0.0, "target_scale must be > 0");
        require (grad_theta.size () == p.theta.size (), "gradient buffer has the wrong size");
        const C2GLayout &l = p.layout;
        const Views v (p);
        const auto N = static_cast<long> (tuples.size ());
        const auto B = static_cast<long> (l.n_basis);
        const auto in = static_cast<long> (l.input_dim ());
        if (N == 0)
            return 0.0;

        RowMatrix X (N, in);
        for (long n = 0; n < N; ++n)
        {
            const auto &t = tuples[static_cast<std::size_t> (n)];
            require (t.q1.size () == l.dof () && t.q2.size () == l.dof (), "tuple dimension does not match network layout");
            embed_config (l, t.q1, X.row (n).data ());
            embed_config (l, t.q2, X.row (n).data () + l.config_width ());
        }
        Eigen::VectorXd beta (B);
        for (long b = 0; b < B; ++b)
            beta[b] = softplus (v.raw[b]);

        RowMatrix D2 (N, B), Phi (N, B);
        for (long n = 0; n < N; ++n)
            for (long b = 0; b < B; ++b)
            {
                double s = 0.0;
                for (long k = 0; k < in; ++k)
                {
                    const double e = X (n, k) - v.centers (b, k);
                    s += e * e;
                }
                D2 (n, b) = s;
                Phi (n, b) = std::exp (-beta[b] * s);
            }

        RowMatrix A1 = Phi * v.w1.transpose ();
        A1.rowwise () += v.b1.transpose ();
        const RowMatrix H1 = A1.cwiseMax (0.0);
        RowMatrix A2 = H1 * v.w2.transpose ();
        A2.rowwise () += v.b2.transpose ();
        const RowMatrix H2 = A2.cwiseMax (0.0);
        const Eigen::VectorXd Z = (H2 * v.w3).array () + v.b3;

        double sse = 0.0;
        Eigen::VectorXd dZ (N);
        for (long n = 0; n < N; ++n)
        {
            const double r = softplus (Z[n]) - tuples[static_cast<std::size_t> (n)].cost / target_scale;
            sse += r * r;
            dZ[n] = 2.0 * r * sigmoid (Z[n]);
        }

        double *g = grad_theta.data ();
        Eigen::Map<Eigen::VectorXd> (g + l.off_w3 (), static_cast<long> (l.hidden2)) += H2.transpose () * dZ;
        g[l.off_b3 ()] += dZ.sum ();
        RowMatrix dA2 = (dZ * v.w3.transpose ()).cwiseProduct ((A2.array () > 0.0).cast<double> ().matrix ());
        Eigen::Map<RowMatrix> (g + l.off_w2 (), static_cast<long> (l.hidden2), static_cast<long> (l.hidden1)) += dA2.transpose () * H1;
        Eigen::Map<Eigen::VectorXd> (g + l.off_b2 (), static_cast<long> (l.hidden2)) += dA2.colwise ().sum ().transpose ();
        RowMatrix dA1 = (dA2 * v.w2).cwiseProduct ((A1.array () > 0.0).cast<double> ().matrix ());
        Eigen::Map<RowMatrix> (g + l.off_w1 (), static_cast<long> (l.hidden1), B) += dA1.transpose () * Phi;
        Eigen::Map<Eigen::VectorXd> (g + l.off_b1 (), static_cast<long> (l.hidden1)) += dA1.colwise ().sum ().transpose ();
        const RowMatrix G = (dA1 * v.w1).cwiseProduct (Phi); // dL/dphi * phi

        Eigen::Map<RowMatrix> dC (g + l.off_centers (), B, in);
        const RowMatrix GtX = G.transpose () * X;
        const Eigen::VectorXd Gsum = G.colwise ().sum ().transpose ();
        for (long b = 0; b < B; ++b)
        {
            dC.row (b) += 2.0 * beta[b] * (GtX.row (b) - Gsum[b] * v.centers.row (b));
            g[l.off_bandwidths () + static_cast<std::size_t> (b)] += -G.col (b).dot (D2.col (b)) * sigmoid (v.raw[b]);
        }
        return sse;
    }

    std::vector<double> c2g_initial_theta (const C2GLayout &l, Rng &rng, double beta0, double output0)
    {
        std::vector<double> t (l.total_params (), 0.0);
        const std::size_t in = l.input_dim ();
        // Centers sit on the embedded configuration manifold.
        Config q1 (l.dof ()), q2 (l.dof ());
        for (std::size_t b = 0; b < l.n_basis; ++b)
        {
            for (std::size_t i = 0; i < l.dof (); ++i)
            {
                const Joint &j = l.joints[i];
                q1[i] = j.periodic () ? rng.uniform (-kPi, kPi) : rng.uniform (j.lo, j.hi);
                q2[i] = j.periodic () ? rng.uniform (-kPi, kPi) : rng.uniform (j.lo, j.hi);
            }
            const auto x = embed_pair (l, q1, q2);
            for (std::size_t k = 0; k < in; ++k)
                t[l.off_centers () + b * in + k] = x[static_cast<long> (k)];
            t[l.off_bandwidths () + b] = inverse_softplus (beta0);
        }
        auto fill_uniform = [&] (std::size_t off, std::size_t count, double bound) {
            for (std::size_t i = 0; i < count; ++i)
                t[off + i] = rng.uniform (-bound, bound);
        };
        fill_uniform (l.off_w1 (), l.hidden1 * l.n_basis, std::sqrt (6.0 / static_cast<double> (l.n_basis)));
        fill_uniform (l.off_w2 (), l.hidden2 * l.hidden1, std::sqrt (6.0 / static_cast<double> (l.hidden1)));
        fill_uniform (l.off_w3 (), l.hidden2, std::sqrt (3.0 / static_cast<double> (l.hidden2)));
        t[l.off_b3 ()] = inverse_softplus (output0);
        return t;
    }

    nlohmann::json to_json (const C2GLayout &l)
    {
        nlohmann::json joints = nlohmann::json::array ();
        for (const auto &j : l.joints)
        {
            if (j.periodic ())
                joints.push_back ({{"type", "periodic"}});
            else
                joints.push_back ({{"type", "limited"}, {"lo", j.lo}, {"hi", j.hi}});
        }
        return {
            {"dof", l.dof ()},
            {"joints", joints},
            {"embedding", l.embedding == Embedding::Angle ? "angle" : "raw"},
            {"n_basis", l.n_basis},
            {"hidden", {l.hidden1, l.hidden2}},
            {"input_dim", l.input_dim ()},
            {"total_params", l.total_params ()},
        };
    }

    C2GLayout c2g_layout_from_json (const nlohmann::json &j)
    {
        try
        {
            C2GLayout l;
            for (const auto &jj : j.at ("joints"))
            {
                if (jj.at ("type").get<std::string> () == "periodic")
                    l.joints.push_back (Joint::revolute ());
                else
                    l.joints.push_back (Joint::limited (jj.at ("lo").get<double> (), jj.at ("hi").get<double> ()));
            }
            require (l.joints.size () == j.at ("dof").get<std::size_t> (), "layout joints do not match dof");
            const auto emb = j.value ("embedding", std::string ("angle"));
            require (emb == "angle" || emb == "raw", "unknown embedding " + emb);
            l.embedding = emb == "angle" ? Embedding::Angle : Embedding::Raw;
            l.n_basis = j.at ("n_basis").get<std::size_t> ();
            const auto hidden = j.at ("hidden").get<std::vector<std::size_t>> ();
            require (hidden.size () == 2, "hidden must list two widths");
            l.hidden1 = hidden[0];
            l.hidden2 = hidden[1];
            require (l.n_basis >= 1 && l.hidden1 >= 1 && l.hidden2 >= 1, "network widths must be positive");
            if (j.contains ("total_params"))
                require (j["total_params"].get<std::size_t> () == l.total_params (), "layout total_params is inconsistent");
            return l;
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::InvalidArgument, std::string ("network layout json: ") + e.what ());
        }
    }

    std::string encode_c2g_params (const C2GParams &p)
    {
        p.check ();
        std::string out;
        bin::put_magic (out, "C2GNETW");
        const std::string header = to_json (p.layout).dump ();
        bin::put_u32 (out, static_cast<std::uint32_t> (header.size ()));
        out += header;
        bin::put_u64 (out, p.theta.size ());
        for (double v : p.theta)
            bin::put_f64 (out, v);
        return out;
    }

    C2GParams decode_c2g_params (std::string_view bytes)
    {
        bin::Reader r (bytes);
        r.expect_magic ("C2GNETW");
        const std::uint32_t len = r.u32 ();
        C2GParams p;
        try
        {
            p.layout = c2g_layout_from_json (nlohmann::json::parse (r.bytes (len)));
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::Io, std::string ("network header: ") + e.what ());
        }
        const std::uint64_t count = r.u64 ();
        if (count != p.layout.total_params ())
            fail (ErrorCode::Io, "network parameter count does not match its layout");
        p.theta.resize (count);
        for (auto &v : p.theta)
            v = r.f64 ();
        return p;
    }

} // namespace c2g
