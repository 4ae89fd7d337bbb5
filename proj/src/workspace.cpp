#include <c2g/workspace.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace c2g
{
    Obstacle Obstacle::disk (double x, double y, double r)
    {
        Obstacle o;
        o.kind = ObstacleKind::Disk2d;
        o.center = {x, y, 0.0};
        o.radius = r;
        return o;
    }

    Obstacle Obstacle::box (std::array<double, 3> c, std::array<double, 3> half)
    {
        Obstacle o;
        o.kind = ObstacleKind::Box3d;
        o.center = c;
        o.half_extents = half;
        return o;
    }

    double Obstacle::measure () const
    {
        if (kind == ObstacleKind::Disk2d)
            return kPi * radius * radius;
        return 8.0 * half_extents[0] * half_extents[1] * half_extents[2];
    }

    bool Obstacle::contains (std::span<const double> p) const
    {
        if (kind == ObstacleKind::Disk2d)
        {
            const double dx = p[0] - center[0];
            const double dy = p[1] - center[1];
            return dx * dx + dy * dy <= radius * radius;
        }
        for (int a = 0; a < 3; ++a)
            if (std::abs (p[a] - center[a]) > half_extents[a])
                return false;
        return true;
    }

    namespace
    {
        // Distance from the origin to the obstacle (0 if the origin is inside).
        double distance_from_origin (const Obstacle &o, int dim)
        {
            if (o.kind == ObstacleKind::Disk2d)
                return std::max (0.0, std::hypot (o.center[0], o.center[1]) - o.radius);
            double s = 0.0;
            for (int a = 0; a < dim; ++a)
            {
                const double excess = std::max (0.0, std::abs (o.center[a]) - o.half_extents[a]);
                s += excess * excess;
            }
            return std::sqrt (s);
        }

        bool overlaps (const Obstacle &a, const Obstacle &b, int dim)
        {
            if (a.kind == ObstacleKind::Disk2d)
                return std::hypot (a.center[0] - b.center[0], a.center[1] - b.center[1]) <= a.radius + b.radius;
            for (int k = 0; k < dim; ++k)
                if (std::abs (a.center[k] - b.center[k]) > a.half_extents[k] + b.half_extents[k])
                    return false;
            return true;
        }

        bool inside_bounds (const Obstacle &o, const Bounds &b, int dim)
        {
            for (int a = 0; a < dim; ++a)
            {
                const double ext = o.kind == ObstacleKind::Disk2d ? o.radius : o.half_extents[a];
                if (o.center[a] - ext < b.lo[a] || o.center[a] + ext > b.hi[a])
                    return false;
            }
            return true;
        }
    } // namespace

    void validate (const WorkspaceSpec &s)
    {
        require (s.dim == 2 || s.dim == 3, "workspace dim must be 2 or 3");
        require (s.min_obstacles >= 0 && s.max_obstacles >= s.min_obstacles, "bad obstacle count range");
        require (s.min_size > 0.0 && s.max_size >= s.min_size, "bad obstacle size range");
        require (s.base_clearance >= 0.0, "base clearance must be >= 0");
        require (s.max_rejections >= 1, "max_rejections must be >= 1");
        for (int a = 0; a < s.dim; ++a)
            require (s.bounds.lo[a] < s.bounds.hi[a], "empty workspace bounds");
    }

    void validate (const Workspace &w)
    {
        require (w.dim == 2 || w.dim == 3, "workspace dim must be 2 or 3");
        for (const auto &o : w.obstacles)
        {
            if (o.kind == ObstacleKind::Disk2d)
            {
                require (w.dim == 2, "disk obstacles need a 2D workspace");
                require (o.radius > 0.0, "disk radius must be > 0");
            }
            else
            {
                require (w.dim == 3, "box obstacles need a 3D workspace");
                for (double h : o.half_extents)
                    require (h > 0.0, "box half extents must be > 0");
            }
        }
    }

    Workspace generate_random_workspace (const WorkspaceSpec &spec, std::uint64_t seed)
    {
        validate (spec);
        Rng rng (mix_seed (seed, 0x5753));
        Workspace w;
        w.dim = spec.dim;
        w.bounds = spec.bounds;
        w.seed = seed;

        const auto span = static_cast<std::uint64_t> (spec.max_obstacles - spec.min_obstacles + 1);
        const int count = spec.min_obstacles + static_cast<int> (rng.below (span));
        w.obstacles.reserve (static_cast<std::size_t> (count));
        for (int k = 0; k < count; ++k)
        {
            bool placed = false;
            for (int attempt = 0; attempt < spec.max_rejections && !placed; ++attempt)
            {
                Obstacle o;
                if (spec.dim == 2)
                {
                    const double r = rng.uniform (spec.min_size, spec.max_size);
                    const double x = rng.uniform (spec.bounds.lo[0] + r, spec.bounds.hi[0] - r);
                    const double y = rng.uniform (spec.bounds.lo[1] + r, spec.bounds.hi[1] - r);
                    o = Obstacle::disk (x, y, r);
                }
                else
                {
                    std::array<double, 3> half{}, c{};
                    for (int a = 0; a < 3; ++a)
                        half[a] = rng.uniform (spec.min_size, spec.max_size);
                    for (int a = 0; a < 3; ++a)
                        c[a] = rng.uniform (spec.bounds.lo[a] + half[a], spec.bounds.hi[a] - half[a]);
                    o = Obstacle::box (c, half);
                }
                if (!inside_bounds (o, spec.bounds, spec.dim))
                    continue;
                if (distance_from_origin (o, spec.dim) <= spec.base_clearance)
                    continue;
                if (!spec.allow_overlap &&
                    std::any_of (w.obstacles.begin (), w.obstacles.end (), [&] (const Obstacle &other) { return overlaps (o, other, spec.dim); }))
                    continue;
                w.obstacles.push_back (o);
                placed = true;
            }
            if (!placed)
                fail (ErrorCode::Infeasible, "workspace spec infeasible: could not place obstacle " + std::to_string (k + 1) + " of " +
                                                 std::to_string (count) + " within " + std::to_string (spec.max_rejections) + " rejections");
        }
        return w;
    }

    bool point_in_obstacle (const Workspace &w, std::span<const double> p)
    {
        require (p.size () == static_cast<std::size_t> (w.dim), "point dimension mismatch");
        return std::any_of (w.obstacles.begin (), w.obstacles.end (), [&] (const Obstacle &o) { return o.contains (p); });
    }

    PointCloud sample_point_cloud (const Workspace &w, std::size_t n, std::uint64_t seed)
    {
        PointCloud pc;
        pc.dim = w.dim;
        const auto dim = static_cast<std::size_t> (w.dim);
        if (w.empty ())
        {
            pc.points.assign (std::max<std::size_t> (n, 1) * dim, kSentinelCoordinate);
            return pc;
        }
        require (n >= 1, "point cloud size must be >= 1 for a non-empty workspace");

        std::vector<double> cumulative (w.obstacles.size ());
        double total = 0.0;
        for (std::size_t i = 0; i < w.obstacles.size (); ++i)
            cumulative[i] = (total += w.obstacles[i].measure ());

        Rng rng (mix_seed (seed, 0x50434c44));
        pc.points.resize (n * dim);
        for (std::size_t i = 0; i < n; ++i)
        {
            const double pick = rng.uniform () * total;
            auto it = std::upper_bound (cumulative.begin (), cumulative.end (), pick);
            if (it == cumulative.end ())
                --it;
            const Obstacle &o = w.obstacles[static_cast<std::size_t> (it - cumulative.begin ())];
            double *out = pc.points.data () + i * dim;
            if (o.kind == ObstacleKind::Disk2d)
            {
                const double r = o.radius * std::sqrt (rng.uniform ());
                const double t = kTwoPi * rng.uniform ();
                out[0] = o.center[0] + r * std::cos (t);
                out[1] = o.center[1] + r * std::sin (t);
            }
            else
            {
                for (int a = 0; a < 3; ++a)
                    out[a] = o.center[a] + o.half_extents[a] * (2.0 * rng.uniform () - 1.0);
            }
        }
        return pc;
    }

    PointCloud subsample (const PointCloud &pc, std::size_t n, Rng &rng)
    {
        const std::size_t total = pc.size ();
        if (n >= total)
            return pc;
        // partial Fisher-Yates over indices
        std::vector<std::size_t> idx (total);
        std::iota (idx.begin (), idx.end (), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i)
            std::swap (idx[i], idx[i + rng.below (total - i)]);
        PointCloud out;
        out.dim = pc.dim;
        out.points.reserve (n * static_cast<std::size_t> (pc.dim));
        for (std::size_t i = 0; i < n; ++i)
        {
            auto p = pc.point (idx[i]);
            out.points.insert (out.points.end (), p.begin (), p.end ());
        }
        return out;
    }

    nlohmann::json to_json (const Workspace &w)
    {
        using nlohmann::json;
        const auto dim = static_cast<std::size_t> (w.dim);
        json obstacles = json::array ();
        for (const auto &o : w.obstacles)
        {
            json jo;
            jo["center"] = std::vector<double> (o.center.begin (), o.center.begin () + static_cast<long> (dim));
            if (o.kind == ObstacleKind::Disk2d)
            {
                jo["kind"] = "disk2d";
                jo["radius"] = o.radius;
            }
            else
            {
                jo["kind"] = "box3d";
                jo["half_extents"] = o.half_extents;
            }
            obstacles.push_back (std::move (jo));
        }
        return json{
            {"dim", w.dim},
            {"bounds",
             {{"lo", std::vector<double> (w.bounds.lo.begin (), w.bounds.lo.begin () + static_cast<long> (dim))},
              {"hi", std::vector<double> (w.bounds.hi.begin (), w.bounds.hi.begin () + static_cast<long> (dim))}}},
            {"obstacles", std::move (obstacles)},
            {"seed", w.seed},
        };
    }

    namespace
    {
        std::array<double, 3> vec3 (const nlohmann::json &j, std::size_t dim)
        {
            auto v = j.get<std::vector<double>> ();
            require (v.size () == dim, "vector length does not match workspace dim");
            std::array<double, 3> out{};
            std::copy (v.begin (), v.end (), out.begin ());
            return out;
        }
    } // namespace

    Workspace workspace_from_json (const nlohmann::json &j)
    {
        try
        {
            Workspace w;
            w.dim = j.at ("dim").get<int> ();
            require (w.dim == 2 || w.dim == 3, "workspace dim must be 2 or 3");
            const auto dim = static_cast<std::size_t> (w.dim);
            w.bounds.lo = vec3 (j.at ("bounds").at ("lo"), dim);
            w.bounds.hi = vec3 (j.at ("bounds").at ("hi"), dim);
            w.seed = j.value ("seed", std::uint64_t{0});
            for (const auto &jo : j.at ("obstacles"))
            {
                const auto kind = jo.at ("kind").get<std::string> ();
                const auto c = vec3 (jo.at ("center"), dim);
                if (kind == "disk2d")
                    w.obstacles.push_back (Obstacle::disk (c[0], c[1], jo.at ("radius").get<double> ()));
                else if (kind == "box3d")
                    w.obstacles.push_back (Obstacle::box (c, vec3 (jo.at ("half_extents"), 3)));
                else
                    fail (ErrorCode::InvalidArgument, "unknown obstacle kind " + kind);
            }
            validate (w);
            return w;
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::InvalidArgument, std::string ("workspace json: ") + e.what ());
        }
    }

    nlohmann::json to_json (const WorkspaceSpec &s)
    {
        const auto dim = static_cast<long> (s.dim);
        return {
            {"dim", s.dim},
            {"bounds", {{"lo", std::vector<double> (s.bounds.lo.begin (), s.bounds.lo.begin () + dim)}, {"hi", std::vector<double> (s.bounds.hi.begin (), s.bounds.hi.begin () + dim)}}},
            {"min_obstacles", s.min_obstacles},
            {"max_obstacles", s.max_obstacles},
            {"min_size", s.min_size},
            {"max_size", s.max_size},
            {"base_clearance", s.base_clearance},
            {"max_rejections", s.max_rejections},
            {"allow_overlap", s.allow_overlap},
        };
    }

    WorkspaceSpec workspace_spec_from_json (const nlohmann::json &j, WorkspaceSpec s)
    {
        try
        {
            s.dim = j.value ("dim", s.dim);
            if (j.contains ("bounds"))
            {
                s.bounds.lo = vec3 (j["bounds"].at ("lo"), static_cast<std::size_t> (s.dim));
                s.bounds.hi = vec3 (j["bounds"].at ("hi"), static_cast<std::size_t> (s.dim));
            }
            s.min_obstacles = j.value ("min_obstacles", s.min_obstacles);
            s.max_obstacles = j.value ("max_obstacles", s.max_obstacles);
            s.min_size = j.value ("min_size", s.min_size);
            s.max_size = j.value ("max_size", s.max_size);
            s.base_clearance = j.value ("base_clearance", s.base_clearance);
            s.max_rejections = j.value ("max_rejections", s.max_rejections);
            s.allow_overlap = j.value ("allow_overlap", s.allow_overlap);
            validate (s);
            return s;
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::InvalidArgument, std::string ("workspace spec json: ") + e.what ());
        }
    }

    std::string encode_point_cloud (const PointCloud &pc)
    {
        std::string out;
        bin::put_magic (out, "C2GPCLD");
        bin::put_u32 (out, static_cast<std::uint32_t> (pc.size ()));
        bin::put_u32 (out, static_cast<std::uint32_t> (pc.dim));
        for (double v : pc.points)
            bin::put_f32 (out, static_cast<float> (v));
        return out;
    }

    PointCloud decode_point_cloud (bin::Reader &r)
    {
        r.expect_magic ("C2GPCLD");
        const std::uint32_t count = r.u32 ();
        const std::uint32_t dim = r.u32 ();
        if (dim != 2 && dim != 3)
            fail (ErrorCode::Io, "point cloud dim must be 2 or 3");
        PointCloud pc;
        pc.dim = static_cast<int> (dim);
        pc.points.resize (static_cast<std::size_t> (count) * dim);
        for (auto &v : pc.points)
            v = r.f32 ();
        return pc;
    }

    PointCloud decode_point_cloud (std::string_view bytes)
    {
        bin::Reader r (bytes);
        return decode_point_cloud (r);
    }

} // namespace c2g
