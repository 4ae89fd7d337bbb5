#include <c2g/robot.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace c2g
{
    namespace
    {
        std::atomic<std::uint64_t> g_collision_checks{0};
    }

    RobotModel RobotModel::planar2 ()
    {
        RobotModel m;
        m.kinematics = Kinematics::Planar;
        m.link_lengths = {0.5, 0.5};
        m.joints = {Joint::revolute (), Joint::revolute ()};
        return m;
    }

    RobotModel RobotModel::yaw_pitch3 ()
    {
        RobotModel m;
        m.kinematics = Kinematics::YawPitch;
        m.link_lengths = {0.1, 0.5, 0.5};
        m.joints = {Joint::revolute (), Joint::limited (-kPi / 2, kPi / 2), Joint::limited (-kPi / 2, kPi / 2)};
        return m;
    }

    RobotModel RobotModel::planar (std::size_t dof)
    {
        require (dof >= 1, "dof must be >= 1");
        RobotModel m;
        m.kinematics = Kinematics::Planar;
        m.link_lengths.assign (dof, 1.0 / static_cast<double> (dof));
        m.joints.assign (dof, Joint::revolute ());
        return m;
    }

    void validate (const RobotModel &m)
    {
        require (m.dof () >= 1, "robot needs at least one joint");
        require (m.link_lengths.size () == m.dof (), "link_lengths must have one entry per joint");
        for (double l : m.link_lengths)
            require (l > 0.0, "link lengths must be > 0");
        require (m.link_radius >= 0.0, "link radius must be >= 0");
        for (const auto &j : m.joints)
            if (!j.periodic ())
                require (j.lo < j.hi, "limited joint needs lo < hi");
        if (m.kinematics == Kinematics::YawPitch)
            require (m.dof () >= 2, "yaw-pitch arms need at least two joints");
    }

    Config normalize (const RobotModel &m, Config q)
    {
        require (q.size () == m.dof (), "configuration dimension mismatch");
        for (std::size_t i = 0; i < q.size (); ++i)
        {
            const Joint &j = m.joints[i];
            q[i] = j.periodic () ? wrap_angle (q[i]) : std::clamp (q[i], j.lo, j.hi);
        }
        return q;
    }

    bool within_limits (const RobotModel &m, std::span<const double> q)
    {
        if (q.size () != m.dof ())
            return false;
        for (std::size_t i = 0; i < q.size (); ++i)
        {
            const Joint &j = m.joints[i];
            if (!std::isfinite (q[i]))
                return false;
            if (!j.periodic () && (q[i] < j.lo || q[i] > j.hi))
                return false;
        }
        return true;
    }

    std::vector<Segment> forward_kinematics (const RobotModel &m, std::span<const double> q)
    {
        require (q.size () == m.dof (), "configuration dimension mismatch");
        std::vector<Segment> out;
        out.reserve (m.dof ());
        std::array<double, 3> p = m.base;
        if (m.kinematics == Kinematics::Planar)
        {
            double heading = 0.0;
            for (std::size_t i = 0; i < m.dof (); ++i)
            {
                heading += q[i];
                Segment s;
                s.a = p;
                p[0] += m.link_lengths[i] * std::cos (heading);
                p[1] += m.link_lengths[i] * std::sin (heading);
                s.b = p;
                out.push_back (s);
            }
            return out;
        }

        // Yaw-pitch: the post is vertical; pitch is measured from the horizontal plane.
        Segment post;
        post.a = p;
        p[2] += m.link_lengths[0];
        post.b = p;
        out.push_back (post);
        const double cy = std::cos (q[0]);
        const double sy = std::sin (q[0]);
        double pitch = 0.0;
        for (std::size_t i = 1; i < m.dof (); ++i)
        {
            pitch += q[i];
            Segment s;
            s.a = p;
            const double horiz = m.link_lengths[i] * std::cos (pitch);
            p[0] += horiz * cy;
            p[1] += horiz * sy;
            p[2] += m.link_lengths[i] * std::sin (pitch);
            s.b = p;
            out.push_back (s);
        }
        return out;
    }

    std::vector<double> joint_delta (std::span<const Joint> joints, std::span<const double> q1, std::span<const double> q2)
    {
        require (q1.size () == joints.size () && q2.size () == joints.size (), "configuration dimension mismatch");
        std::vector<double> d (joints.size ());
        for (std::size_t i = 0; i < joints.size (); ++i)
            d[i] = joints[i].periodic () ? angle_diff (q1[i], q2[i]) : q2[i] - q1[i];
        return d;
    }

    double config_distance (std::span<const Joint> joints, std::span<const double> q1, std::span<const double> q2)
    {
        require (q1.size () == joints.size () && q2.size () == joints.size (), "configuration dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < joints.size (); ++i)
        {
            const double d = joints[i].periodic () ? angle_diff (q1[i], q2[i]) : q2[i] - q1[i];
            s += d * d;
        }
        return std::sqrt (s);
    }

    double config_distance (const RobotModel &m, std::span<const double> q1, std::span<const double> q2)
    {
        return config_distance (m.joints, q1, q2);
    }

    Config interpolate (const RobotModel &m, std::span<const double> q1, std::span<const double> q2, double t)
    {
        const auto d = joint_delta (m.joints, q1, q2);
        Config q (q1.begin (), q1.end ());
        for (std::size_t i = 0; i < q.size (); ++i)
        {
            q[i] += t * d[i];
            if (m.joints[i].periodic ())
                q[i] = wrap_angle (q[i]);
        }
        return q;
    }

    namespace
    {
        double point_segment_distance2 (const std::array<double, 3> &p, const Segment &s, int dim)
        {
            double ab2 = 0.0, ap_ab = 0.0;
            for (int k = 0; k < dim; ++k)
            {
                const double ab = s.b[k] - s.a[k];
                ab2 += ab * ab;
                ap_ab += (p[k] - s.a[k]) * ab;
            }
            const double t = ab2 > 0.0 ? std::clamp (ap_ab / ab2, 0.0, 1.0) : 0.0;
            double d2 = 0.0;
            for (int k = 0; k < dim; ++k)
            {
                const double e = s.a[k] + t * (s.b[k] - s.a[k]) - p[k];
                d2 += e * e;
            }
            return d2;
        }

        double point_box_distance2 (const std::array<double, 3> &p, const Obstacle &o)
        {
            double d2 = 0.0;
            for (int k = 0; k < 3; ++k)
            {
                const double e = std::max (0.0, std::abs (p[k] - o.center[k]) - o.half_extents[k]);
                d2 += e * e;
            }
            return d2;
        }

        // The squared distance to an AABB along a segment is convex and piecewise
        // quadratic with breaks where a coordinate crosses a face plane, so the
        // exact minimum is found by minimizing each piece in closed form.
        double segment_box_distance2 (const Segment &s, const Obstacle &o)
        {
            std::array<double, 3> d{};
            for (int k = 0; k < 3; ++k)
                d[k] = s.b[k] - s.a[k];

            std::vector<double> breaks{0.0, 1.0};
            for (int k = 0; k < 3; ++k)
            {
                if (d[k] == 0.0)
                    continue;
                for (double face : {o.center[k] - o.half_extents[k], o.center[k] + o.half_extents[k]})
                {
                    const double t = (face - s.a[k]) / d[k];
                    if (t > 0.0 && t < 1.0)
                        breaks.push_back (t);
                }
            }
            std::sort (breaks.begin (), breaks.end ());

            auto at = [&] (double t) {
                std::array<double, 3> p{};
                for (int k = 0; k < 3; ++k)
                    p[k] = s.a[k] + t * d[k];
                return p;
            };

            double best = std::min (point_box_distance2 (s.a, o), point_box_distance2 (s.b, o));
            for (std::size_t i = 0; i + 1 < breaks.size (); ++i)
            {
                const double t0 = breaks[i], t1 = breaks[i + 1];
                const auto mid = at (0.5 * (t0 + t1));
                double num = 0.0, den = 0.0;
                for (int k = 0; k < 3; ++k)
                {
                    const double lo = o.center[k] - o.half_extents[k];
                    const double hi = o.center[k] + o.half_extents[k];
                    double bound;
                    if (mid[k] < lo)
                        bound = lo;
                    else if (mid[k] > hi)
                        bound = hi;
                    else
                        continue;
                    num += d[k] * (bound - s.a[k]);
                    den += d[k] * d[k];
                }
                const double t = den > 0.0 ? std::clamp (num / den, t0, t1) : t0;
                best = std::min (best, point_box_distance2 (at (t), o));
            }
            return best;
        }
    } // namespace

    double segment_obstacle_distance2 (const Segment &s, const Obstacle &o)
    {
        if (o.kind == ObstacleKind::Disk2d)
            return point_segment_distance2 (o.center, s, 2);
        return segment_box_distance2 (s, o);
    }

    bool config_in_collision (const RobotModel &m, std::span<const double> q, const Workspace &w)
    {
        require (q.size () == m.dof (), "configuration dimension mismatch");
        require (w.dim == m.workspace_dim (), "robot and workspace dimensions differ");
        g_collision_checks.fetch_add (1, std::memory_order_relaxed);
        if (w.empty ())
            return false;
        const auto segments = forward_kinematics (m, q);
        for (const auto &o : w.obstacles)
        {
            const double reach = o.kind == ObstacleKind::Disk2d ? m.link_radius + o.radius : m.link_radius;
            const double reach2 = reach * reach;
            for (const auto &s : segments)
                if (segment_obstacle_distance2 (s, o) <= reach2)
                    return true;
        }
        return false;
    }

    bool edge_in_collision (const RobotModel &m, std::span<const double> q1, std::span<const double> q2, const Workspace &w, double step,
                            std::uint64_t *checks)
    {
        require (step > 0.0, "edge step must be > 0");
        const auto d = joint_delta (m.joints, q1, q2);
        double span = 0.0;
        for (double v : d)
            span = std::max (span, std::abs (v));
        const auto n = static_cast<std::size_t> (std::ceil (span / step));
        Config q (q1.size ());
        for (std::size_t i = 0; i <= n; ++i)
        {
            const double t = n == 0 ? 0.0 : static_cast<double> (i) / static_cast<double> (n);
            for (std::size_t k = 0; k < q.size (); ++k)
                q[k] = i == n ? q2[k] : q1[k] + t * d[k];
            if (checks)
                ++*checks;
            if (config_in_collision (m, q, w))
                return true;
        }
        return false;
    }

    std::uint64_t collision_checks_total () { return g_collision_checks.load (std::memory_order_relaxed); }

    nlohmann::json to_json (const RobotModel &m)
    {
        using nlohmann::json;
        json joints = json::array ();
        for (const auto &j : m.joints)
        {
            if (j.periodic ())
                joints.push_back ({{"type", "periodic"}});
            else
                joints.push_back ({{"type", "limited"}, {"lo", j.lo}, {"hi", j.hi}});
        }
        return {
            {"dof", m.dof ()},
            {"kinematics", m.kinematics == Kinematics::Planar ? "planar" : "yaw_pitch"},
            {"link_lengths", m.link_lengths},
            {"link_radius", m.link_radius},
            {"joints", joints},
            {"base", m.base},
        };
    }

    RobotModel robot_from_json (const nlohmann::json &j)
    {
        try
        {
            if (j.is_string ())
            {
                const auto name = j.get<std::string> ();
                if (name == "planar2")
                    return RobotModel::planar2 ();
                if (name == "yaw_pitch3")
                    return RobotModel::yaw_pitch3 ();
                fail (ErrorCode::InvalidArgument, "unknown robot preset " + name);
            }
            RobotModel m;
            const auto kin = j.value ("kinematics", std::string ("planar"));
            if (kin == "planar")
                m.kinematics = Kinematics::Planar;
            else if (kin == "yaw_pitch")
                m.kinematics = Kinematics::YawPitch;
            else
                fail (ErrorCode::InvalidArgument, "unknown kinematics " + kin);
            m.link_lengths = j.at ("link_lengths").get<std::vector<double>> ();
            m.link_radius = j.value ("link_radius", m.link_radius);
            const auto dof = j.at ("dof").get<std::size_t> ();
            if (j.contains ("joints"))
            {
                for (const auto &jj : j.at ("joints"))
                {
                    const auto type = jj.at ("type").get<std::string> ();
                    if (type == "periodic")
                        m.joints.push_back (Joint::revolute ());
                    else if (type == "limited")
                        m.joints.push_back (Joint::limited (jj.at ("lo").get<double> (), jj.at ("hi").get<double> ()));
                    else
                        fail (ErrorCode::InvalidArgument, "unknown joint type " + type);
                }
            }
            else
                m.joints.assign (dof, Joint::revolute ());
            require (m.joints.size () == dof, "joints list does not match dof");
            if (j.contains ("base"))
            {
                const auto b = j["base"].get<std::vector<double>> ();
                std::copy_n (b.begin (), std::min<std::size_t> (3, b.size ()), m.base.begin ());
            }
            validate (m);
            return m;
        }
        catch (const nlohmann::json::exception &e)
        {
            fail (ErrorCode::InvalidArgument, std::string ("robot json: ") + e.what ());
        }
    }

} // namespace c2g
