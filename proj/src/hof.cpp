#include <c2g/hof.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace c2g
{
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    std::size_t HofLayout::layer_in (std::size_t l) const
    {
        if (l == 0)
            return point_dim;
        if (l < encoder.size ())
            return encoder[l - 1];
        if (l == encoder.size ())
            return encoder.back ();
        return head_hidden;
    }

    std::size_t HofLayout::layer_out (std::size_t l) const
    {
        if (l < encoder.size ())
            return encoder[l];
        if (l == encoder.size ())
            return head_hidden;
        return output_dim ();
    }

    std::size_t HofLayout::weight_offset (std::size_t l) const
    {
        std::size_t off = 0;
        for (std::size_t k = 0; k < l; ++k)
            off += layer_in (k) * layer_out (k) + layer_out (k);
        return off;
    }

    std::size_t HofLayout::total_params () const { return weight_offset (layer_count ()); }

    void HofParams::check () const
    {
        require (!layout.encoder.empty (), "encoder needs at least one layer");
        require (theta.size () == layout.total_params (), "hypernetwork parameter vector length does not match layout");
    }

    namespace
    {
        struct Dense
        {
            Eigen::Map<const RowMatrix> w;
            Eigen::Map<const Eigen::VectorXd> b;
        };

        Dense dense (const HofParams &h, std::size_t l)
        {
            const auto &L = h.layout;
            const auto out = static_cast<long> (L.layer_out (l));
            const auto in = static_cast<long> (L.layer_in (l));
            return {Eigen::Map<const RowMatrix> (h.theta.data () + L.weight_offset (l), out, in),
                    Eigen::Map<const Eigen::VectorXd> (h.theta.data () + L.bias_offset (l), out)};
        }

        struct HofForward
        {
            std::vector<RowMatrix> acts;      ///< per encoder layer: points x width (post-ReLU)
            Eigen::VectorXd pooled;
            std::vector<std::size_t> argmax; ///< per pooled feature
            Eigen::VectorXd hidden;          ///< post-ReLU head hidden
            C2GParams child;
        };

        HofForward forward (const HofParams &h, const PointCloud &pc)
        {
            h.check ();
            const auto &L = h.layout;
            require (pc.dim == static_cast<int> (L.point_dim), "point cloud dim does not match the encoder input");
            const std::size_t n = pc.size ();
            require (n >= 1, "empty point cloud (empty workspaces must use the sentinel cloud)");

            HofForward f;
            f.acts.resize (L.encoder.size ());
            for (std::size_t l = 0; l < L.encoder.size (); ++l)
                f.acts[l].resize (static_cast<long> (n), static_cast<long> (L.encoder[l]));

            // Each point goes through identical fixed-size buffers so its
            // features are bitwise independent of its position in the cloud.
            std::vector<Eigen::VectorXd> buf (L.encoder.size () + 1);
            buf[0].resize (static_cast<long> (L.point_dim));
            for (std::size_t l = 0; l < L.encoder.size (); ++l)
                buf[l + 1].resize (static_cast<long> (L.encoder[l]));
            std::vector<Dense> layers;
            for (std::size_t l = 0; l < L.encoder.size (); ++l)
                layers.push_back (dense (h, l));
            for (std::size_t i = 0; i < n; ++i)
            {
                const auto p = pc.point (i);
                for (std::size_t k = 0; k < L.point_dim; ++k)
                    buf[0][static_cast<long> (k)] = p[k];
                for (std::size_t l = 0; l < L.encoder.size (); ++l)
                {
                    buf[l + 1].noalias () = layers[l].w * buf[l];
                    buf[l + 1] += layers[l].b;
                    buf[l + 1] = buf[l + 1].cwiseMax (0.0);
                    f.acts[l].row (static_cast<long> (i)) = buf[l + 1].transpose ();
                }
            }

            const RowMatrix &last = f.acts.back ();
            const auto width = last.cols ();
            f.pooled.resize (width);
            f.argmax.assign (static_cast<std::size_t> (width), 0);
            for (long j = 0; j < width; ++j)
            {
                double best = last (0, j);
                std::size_t arg = 0;
                for (long i = 1; i < last.rows (); ++i)
                    if (last (i, j) > best)
                        best = last (i, j), arg = static_cast<std::size_t> (i);
                f.pooled[j] = best;
                f.argmax[static_cast<std::size_t> (j)] = arg;
            }

            const Dense hid = dense (h, L.encoder.size ());
            f.hidden = (hid.w * f.pooled + hid.b).cwiseMax (0.0);
            const Dense out = dense (h, L.encoder.size () + 1);
            f.child.layout = L.child;
            f.child.theta.resize (L.output_dim ());
            Eigen::Map<Eigen::VectorXd> (f.child.theta.data (), static_cast<long> (L.output_dim ())) = out.w * f.hidden + out.b;
            return f;
        }

        constexpr std::size_t kChunk = 256;

        // Sum of squared errors and its gradient in the child parameters,
        // reduced chunk by chunk in index order.
        double child_sse (const C2GParams &child, std::span<const CostTuple> tuples, double target_scale, unsigned threads, std::vector<double> &grad)
        {
            const std::size_t chunks = (tuples.size () + kChunk - 1) / kChunk;
            std::vector<std::vector<double>> partial (chunks);
            std::vector<double> sse (chunks, 0.0);
            parallel_for (chunks, threads, [&] (std::size_t c) {
                partial[c].assign (child.theta.size (), 0.0);
                const std::size_t lo = c * kChunk;
                const std::size_t hi = std::min (tuples.size (), lo + kChunk);
                sse[c] = c2g_batch_sse (child, tuples.subspan (lo, hi - lo), target_scale, partial[c]);
            });
            grad.assign (child.theta.size (), 0.0);
            double total = 0.0;
            for (std::size_t c = 0; c < chunks; ++c)
            {
                total += sse[c];
                for (std::size_t k = 0; k < grad.size (); ++k)
                    grad[k] += partial[c][k];
            }
            return total;
        }
    } // namespace

    HofParams hof_init (const HofLayout &layout, std::uint64_t seed, const HofInit &init)
    {
        require (!layout.encoder.empty (), "encoder needs at least one layer");
        require (layout.point_dim == 2 || layout.point_dim == 3, "point dim must be 2 or 3");
        HofParams h;
        h.layout = layout;
        h.theta.assign (layout.total_params (), 0.0);
        Rng rng (mix_seed (seed, 0x484f46));
        const std::size_t out_layer = layout.layer_count () - 1;
        for (std::size_t l = 0; l < layout.layer_count (); ++l)
        {
            const std::size_t fan_in = layout.layer_in (l);
            const double bound = l == out_layer ? init.head_out_scale * std::sqrt (3.0 / static_cast<double> (fan_in))
                                                : std::sqrt (6.0 / static_cast<double> (fan_in));
            const std::size_t off = layout.weight_offset (l);
            for (std::size_t k = 0; k < fan_in * layout.layer_out (l); ++k)
                h.theta[off + k] = rng.uniform (-bound, bound);
        }
        // The output bias is a well-formed child network, so an untrained
        // hypernetwork already emits sensible bandwidths and cost levels.
        const auto child = c2g_initial_theta (layout.child, rng, init.beta0, init.output0);
        std::copy (child.begin (), child.end (), h.theta.begin () + static_cast<long> (layout.bias_offset (out_layer)));
        return h;
    }

    C2GParams hof_forward (const HofParams &h, const PointCloud &pc) { return forward (h, pc).child; }

    double hof_loss (const HofParams &h, const PointCloud &pc, std::span<const CostTuple> tuples, double target_scale)
    {
        require (!tuples.empty (), "loss needs at least one tuple");
        const C2GParams child = hof_forward (h, pc);
        std::vector<double> scratch;
        return child_sse (child, tuples, target_scale, 1, scratch) / static_cast<double> (tuples.size ());
    }

    LossGrad loss_and_gradients (const HofParams &h, const PointCloud &pc, std::span<const CostTuple> tuples, double target_scale, unsigned threads)
    {
        require (!tuples.empty (), "loss needs at least one tuple");
        const HofForward f = forward (h, pc);
        const auto &L = h.layout;
        std::vector<double> dchild;
        const double inv_n = 1.0 / static_cast<double> (tuples.size ());
        LossGrad out;
        out.loss = child_sse (f.child, tuples, target_scale, threads, dchild) * inv_n;
        out.grad.assign (L.total_params (), 0.0);
        double *g = out.grad.data ();

        const Eigen::VectorXd dtheta = Eigen::Map<const Eigen::VectorXd> (dchild.data (), static_cast<long> (dchild.size ())) * inv_n;

        // Head output layer.
        const std::size_t lo = L.encoder.size () + 1;
        const Dense out_layer = dense (h, lo);
        Eigen::Map<RowMatrix> (g + L.weight_offset (lo), static_cast<long> (L.layer_out (lo)), static_cast<long> (L.layer_in (lo))).noalias () =
            dtheta * f.hidden.transpose ();
        Eigen::Map<Eigen::VectorXd> (g + L.bias_offset (lo), static_cast<long> (L.layer_out (lo))) = dtheta;
        Eigen::VectorXd dhidden = out_layer.w.transpose () * dtheta;
        dhidden = dhidden.cwiseProduct ((f.hidden.array () > 0.0).cast<double> ().matrix ());

        // Head hidden layer.
        const std::size_t lh = L.encoder.size ();
        const Dense hid = dense (h, lh);
        Eigen::Map<RowMatrix> (g + L.weight_offset (lh), static_cast<long> (L.layer_out (lh)), static_cast<long> (L.layer_in (lh))).noalias () =
            dhidden * f.pooled.transpose ();
        Eigen::Map<Eigen::VectorXd> (g + L.bias_offset (lh), static_cast<long> (L.layer_out (lh))) = dhidden;
        const Eigen::VectorXd dpooled = hid.w.transpose () * dhidden;

        // Max pool routes each feature's gradient to its (first) argmax point.
        std::vector<std::size_t> rows (f.argmax);
        std::sort (rows.begin (), rows.end ());
        rows.erase (std::unique (rows.begin (), rows.end ()), rows.end ());
        std::vector<long> slot (pc.size (), -1);
        for (std::size_t r = 0; r < rows.size (); ++r)
            slot[rows[r]] = static_cast<long> (r);
        const auto M = static_cast<long> (rows.size ());

        RowMatrix delta = RowMatrix::Zero (M, static_cast<long> (L.encoder.back ()));
        for (std::size_t j = 0; j < f.argmax.size (); ++j)
            delta (slot[f.argmax[j]], static_cast<long> (j)) = dpooled[static_cast<long> (j)];

        for (std::size_t l = L.encoder.size (); l-- > 0;)
        {
            RowMatrix act (M, static_cast<long> (L.encoder[l]));
            for (long r = 0; r < M; ++r)
                act.row (r) = f.acts[l].row (static_cast<long> (rows[static_cast<std::size_t> (r)]));
            delta = delta.cwiseProduct ((act.array () > 0.0).cast<double> ().matrix ());

            RowMatrix input (M, static_cast<long> (L.layer_in (l)));
            for (long r = 0; r < M; ++r)
            {
                const std::size_t i = rows[static_cast<std::size_t> (r)];
                if (l == 0)
                {
                    const auto p = pc.point (i);
                    for (std::size_t k = 0; k < L.point_dim; ++k)
                        input (r, static_cast<long> (k)) = p[k];
                }
                else
                    input.row (r) = f.acts[l - 1].row (static_cast<long> (i));
            }
            Eigen::Map<RowMatrix> (g + L.weight_offset (l), static_cast<long> (L.layer_out (l)), static_cast<long> (L.layer_in (l))).noalias () =
                delta.transpose () * input;
            Eigen::Map<Eigen::VectorXd> (g + L.bias_offset (l), static_cast<long> (L.layer_out (l))) = delta.colwise ().sum ().transpose ();
            if (l > 0)
            {
                const Dense layer = dense (h, l);
                RowMatrix next = delta * layer.w;
                delta = std::move (next);
            }
        }
        return out;
    }

    void adam_step (AdamState &s, std::span<double> params, std::span<const double> grad, const AdamConfig &cfg)
    {
        require (params.size () == grad.size () && s.m.size () == params.size () && s.v.size () == params.size (), "Adam shapes do not match");
        require (cfg.learning_rate > 0.0, "learning rate must be > 0");
        ++s.step;
        const double t = static_cast<double> (s.step);
        const double c1 = 1.0 - std::pow (cfg.beta1, t);
        const double c2 = 1.0 - std::pow (cfg.beta2, t);
        const double b1 = cfg.beta1, b2 = cfg.beta2;
        for (std::size_t i = 0; i < params.size (); ++i)
        {
            const double g = grad[i];
            s.m[i] = b1 * s.m[i] + (1.0 - b1) * g;
            s.v[i] = b2 * s.v[i] + (1.0 - b2) * g * g;
            // Moments of parameters whose gradient stays zero decay geometrically
            // into subnormals, where arithmetic is an order of magnitude slower.
            // At this size the update is far below one ulp of any parameter.
            if (std::abs (s.m[i]) < 1e-300)
                s.m[i] = 0.0;
            if (s.v[i] < 1e-300)
                s.v[i] = 0.0;
            const double mhat = s.m[i] / c1;
            const double vhat = s.v[i] / c2;
            params[i] -= cfg.learning_rate * mhat / (std::sqrt (vhat) + cfg.epsilon);
        }
    }

    double default_target_scale (std::size_t dof) { return static_cast<double> (dof) * kPi; }

    TrainResult train (std::span<const DatasetShard> shards, const HofLayout &layout, const TrainConfig &cfg, const CheckpointFn &on_checkpoint,
                       const ProgressFn &on_epoch)
    {
        require (!shards.empty (), "training needs at least one shard");
        require (cfg.epochs >= 1, "epochs must be >= 1");
        require (cfg.adam.learning_rate > 0.0, "learning rate must be > 0");
        require (cfg.tuples_per_iteration >= 1 && cfg.pointcloud_subsample >= 1 && cfg.workspaces_per_step >= 1, "batch sizes must be >= 1");
        require (cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0, "holdout_fraction must be in [0, 1)");
        for (const auto &s : shards)
        {
            if (s.dof != layout.child.dof ())
                fail (ErrorCode::InvalidArgument, "shard " + std::to_string (s.workspace_id) + " has dof " + std::to_string (s.dof) +
                                                      " but the network layout expects " + std::to_string (layout.child.dof ()));
            if (static_cast<std::size_t> (s.cloud.dim) != layout.point_dim)
                fail (ErrorCode::InvalidArgument, "shard point cloud dim does not match the encoder");
        }

        TrainResult result;
        result.target_scale = cfg.target_scale > 0.0 ? cfg.target_scale : default_target_scale (layout.child.dof ());
        result.params = hof_init (layout, cfg.seed, cfg.init);
        AdamState adam (result.params.theta.size ());

        // Per-shard train / held-out split, fixed by the seed.
        std::vector<std::vector<std::size_t>> train_idx (shards.size ()), hold_idx (shards.size ());
        for (std::size_t s = 0; s < shards.size (); ++s)
        {
            const std::size_t n = shards[s].tuples.size ();
            std::vector<std::size_t> perm (n);
            std::iota (perm.begin (), perm.end (), std::size_t{0});
            Rng split (mix_seed (cfg.seed, 0x53504c00 + s));
            for (std::size_t i = n; i > 1; --i)
                std::swap (perm[i - 1], perm[split.below (i)]);
            const auto n_hold = static_cast<std::size_t> (std::floor (cfg.holdout_fraction * static_cast<double> (n)));
            hold_idx[s].assign (perm.begin (), perm.begin () + static_cast<long> (n_hold));
            train_idx[s].assign (perm.begin () + static_cast<long> (n_hold), perm.end ());
            std::sort (hold_idx[s].begin (), hold_idx[s].end ());
            std::sort (train_idx[s].begin (), train_idx[s].end ());
        }

        // Fixed held-out evaluation set.
        struct HoldoutSet
        {
            PointCloud cloud;
            std::vector<CostTuple> tuples;
        };
        std::vector<HoldoutSet> holdout;
        for (std::size_t s = 0; s < shards.size () && holdout.size () < cfg.holdout_shards; ++s)
        {
            if (hold_idx[s].empty ())
                continue;
            Rng hr (mix_seed (cfg.seed, 0x484f4c00 + s));
            HoldoutSet hs;
            hs.cloud = subsample (shards[s].cloud, cfg.pointcloud_subsample, hr);
            for (std::size_t k = 0; k < std::min (cfg.holdout_tuples, hold_idx[s].size ()); ++k)
                hs.tuples.push_back (shards[s].tuples[hold_idx[s][k]]);
            holdout.push_back (std::move (hs));
        }

        std::vector<std::size_t> usable;
        for (std::size_t s = 0; s < shards.size (); ++s)
            if (!train_idx[s].empty ())
                usable.push_back (s);
        require (!usable.empty (), "no shard has training tuples");

        Rng rng (mix_seed (cfg.seed, 0x545241));
        const std::size_t steps_per_epoch = std::max<std::size_t> (1, (usable.size () + cfg.workspaces_per_step - 1) / cfg.workspaces_per_step);
        const auto t0 = std::chrono::steady_clock::now ();
        std::vector<CostTuple> batch;
        std::vector<double> grad (result.params.theta.size ());
        for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch)
        {
            double loss_sum = 0.0;
            std::size_t loss_count = 0;
            for (std::size_t step = 0; step < steps_per_epoch; ++step)
            {
                std::fill (grad.begin (), grad.end (), 0.0);
                for (std::size_t w = 0; w < cfg.workspaces_per_step; ++w)
                {
                    const std::size_t s = usable[rng.below (usable.size ())];
                    const PointCloud cloud = subsample (shards[s].cloud, cfg.pointcloud_subsample, rng);
                    batch.clear ();
                    for (std::size_t k = 0; k < cfg.tuples_per_iteration; ++k)
                        batch.push_back (shards[s].tuples[train_idx[s][rng.below (train_idx[s].size ())]]);
                    const LossGrad lg = loss_and_gradients (result.params, cloud, batch, result.target_scale, cfg.threads);
                    loss_sum += lg.loss;
                    ++loss_count;
                    const double wscale = 1.0 / static_cast<double> (cfg.workspaces_per_step);
                    for (std::size_t k = 0; k < grad.size (); ++k)
                        grad[k] += wscale * lg.grad[k];
                }
                adam_step (adam, result.params.theta, grad, cfg.adam);
            }

            TrainLogRow row;
            row.epoch = epoch;
            row.loss = loss_sum / static_cast<double> (loss_count);
            if (holdout.empty ())
                row.holdout_loss = std::numeric_limits<double>::quiet_NaN ();
            else
            {
                double h = 0.0;
                for (const auto &hs : holdout)
                    h += hof_loss (result.params, hs.cloud, hs.tuples, result.target_scale);
                row.holdout_loss = h / static_cast<double> (holdout.size ());
            }
            row.wall_s = std::chrono::duration<double> (std::chrono::steady_clock::now () - t0).count ();
            result.log.push_back (row);
            if (on_epoch)
                on_epoch (row);
            if (on_checkpoint && ((cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) || epoch == cfg.epochs))
                on_checkpoint (epoch, result.params);
        }
        return result;
    }

    nlohmann::json to_json (const HofLayout &l)
    {
        return {
            {"point_dim", l.point_dim},
            {"encoder", l.encoder},
            {"head_hidden", l.head_hidden},
            {"child", to_json (l.child)},
            {"total_params", l.total_params ()},
        };
    }

    HofLayout hof_layout_from_json (const nlohmann::json &j)
    {
        try
        {
            HofLayout l;
            l.point_dim = j.at ("point_dim").get<std::size_t> ();
            l.encoder = j.at ("encoder").get<std::vector<std::size_t>> ();
            l.head_hidden = j.at ("head_hidden").get<std::size_t> ();
            l.child = c2g_layout_from_json (j.at ("child"));
            require (!l.encoder.empty (), "encoder needs at least one layer");
            if (j.contains ("total_params"))
                require (j["total_params"].get<std::size_t> () == l.total_params (), "hypernetwork total_params is inconsistent");
            return l;
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::InvalidArgument, std::string ("hypernetwork layout json: ") + e.what ());
        }
    }

    std::string encode_checkpoint (const HofCheckpoint &c)
    {
        c.params.check ();
        std::string out;
        bin::put_magic (out, "C2GHOFW");
        nlohmann::json header{{"layout", to_json (c.params.layout)}, {"target_scale", c.target_scale}, {"epoch", c.epoch}};
        if (!c.robot.is_null ())
            header["robot"] = c.robot;
        const std::string hs = header.dump ();
        bin::put_u32 (out, static_cast<std::uint32_t> (hs.size ()));
        out += hs;
        bin::put_u64 (out, c.params.theta.size ());
        for (double v : c.params.theta)
            bin::put_f64 (out, v);
        return out;
    }

    HofCheckpoint decode_checkpoint (std::string_view bytes)
    {
        bin::Reader r (bytes);
        r.expect_magic ("C2GHOFW");
        const std::uint32_t len = r.u32 ();
        HofCheckpoint c;
        try
        {
            const auto header = nlohmann::json::parse (r.bytes (len));
            c.params.layout = hof_layout_from_json (header.at ("layout"));
            c.target_scale = header.at ("target_scale").get<double> ();
            c.epoch = header.value ("epoch", std::size_t{0});
            if (header.contains ("robot"))
                c.robot = header["robot"];
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::Io, std::string ("checkpoint header: ") + e.what ());
        }
        const std::uint64_t count = r.u64 ();
        if (count != c.params.layout.total_params ())
            fail (ErrorCode::Io, "checkpoint parameter count does not match its layout");
        c.params.theta.resize (count);
        for (auto &v : c.params.theta)
            v = r.f64 ();
        return c;
    }

    std::string format_train_log (std::span<const TrainLogRow> rows, bool include_wall_time)
    {
        std::string out = "epoch,loss,holdout_loss,wall_s\n";
        char line[160];
        for (const auto &r : rows)
        {
            std::snprintf (line, sizeof line, "%zu,%.17g,%.17g,%.6f\n", r.epoch, r.loss, r.holdout_loss, include_wall_time ? r.wall_s : 0.0);
            out += line;
        }
        return out;
    }

} // namespace c2g
