#include <c2g/robot.hpp>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace c2g;

namespace
{
    RobotModel unit_arm ()
    {
        RobotModel m = RobotModel::planar2 ();
        m.link_lengths = {1.0, 1.0};
        return m;
    }

    Workspace plane (std::vector<Obstacle> obs = {})
    {
        Workspace w;
        w.dim = 2;
        w.bounds = {{-3, -3, 0}, {3, 3, 0}};
        w.obstacles = std::move (obs);
        return w;
    }

    void expect_point (const std::array<double, 3> &p, double x, double y)
    {
        EXPECT_NEAR (p[0], x, 1e-12);
        EXPECT_NEAR (p[1], y, 1e-12);
    }

    // Brute-force distance by dense sampling (to a disk's center, to a box's surface).
    double sampled_distance2 (const Segment &s, const Obstacle &o)
    {
        double best = kInf;
        for (int i = 0; i <= 20000; ++i)
        {
            const double t = i / 20000.0;
            double p[3];
            for (int a = 0; a < 3; ++a)
                p[a] = s.a[a] + t * (s.b[a] - s.a[a]);
            double d2 = 0;
            if (o.kind == ObstacleKind::Disk2d)
            {
                const double d = std::hypot (p[0] - o.center[0], p[1] - o.center[1]);
                d2 = d * d;
            }
            else
                for (int a = 0; a < 3; ++a)
                {
                    const double e = std::max (0.0, std::abs (p[a] - o.center[a]) - o.half_extents[a]);
                    d2 += e * e;
                }
            best = std::min (best, d2);
        }
        return best;
    }
} // namespace

TEST (Robot, ForwardKinematicsPlanar)
{
    const auto m = unit_arm ();
    auto s = forward_kinematics (m, Config{0, 0});
    ASSERT_EQ (s.size (), 2u);
    expect_point (s[0].a, 0, 0);
    expect_point (s[0].b, 1, 0);
    expect_point (s[1].a, 1, 0);
    expect_point (s[1].b, 2, 0);

    s = forward_kinematics (m, Config{kPi / 2, 0});
    expect_point (s[0].b, 0, 1);
    expect_point (s[1].b, 0, 2);

    s = forward_kinematics (m, Config{kPi / 2, -kPi / 2});
    expect_point (s[1].a, 0, 1);
    expect_point (s[1].b, 1, 1);
}

TEST (Robot, ForwardKinematicsYawPitch)
{
    const auto m = RobotModel::yaw_pitch3 ();
    auto s = forward_kinematics (m, Config{0, 0, 0});
    ASSERT_EQ (s.size (), 3u);
    // post, then two horizontal links along +x
    EXPECT_NEAR (s[0].b[2], 0.1, 1e-12);
    EXPECT_NEAR (s[2].b[0], 1.0, 1e-12);
    EXPECT_NEAR (s[2].b[2], 0.1, 1e-12);
    s = forward_kinematics (m, Config{kPi / 2, kPi / 2, 0});
    // yaw to +y, first pitch straight up
    EXPECT_NEAR (s[2].b[0], 0.0, 1e-12);
    EXPECT_NEAR (s[2].b[1], 0.0, 1e-12);
    EXPECT_NEAR (s[2].b[2], 1.1, 1e-12);
    s = forward_kinematics (m, Config{kPi / 2, 0, kPi / 2});
    EXPECT_NEAR (s[2].b[1], 0.5, 1e-12);
    EXPECT_NEAR (s[2].b[2], 0.6, 1e-12);
}

TEST (Robot, CollisionBasics)
{
    const auto m = unit_arm ();
    Rng rng (3);
    for (int i = 0; i < 100; ++i)
        EXPECT_FALSE (config_in_collision (m, Config{rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)}, plane ()));
    EXPECT_TRUE (config_in_collision (m, Config{0, 0}, plane ({Obstacle::disk (0.5, 0, 0.05)})));
    // tangent: disk surface exactly link_radius away from the link axis
    const double r = 0.1;
    EXPECT_TRUE (config_in_collision (m, Config{0, 0}, plane ({Obstacle::disk (0.5, m.link_radius + r, r)})));
    EXPECT_FALSE (config_in_collision (m, Config{0, 0}, plane ({Obstacle::disk (0.5, m.link_radius + r + 1e-9, r)})));
}

TEST (Robot, EdgeCollision)
{
    const auto m = unit_arm ();
    const auto w = plane ({Obstacle::disk (0, 1.5, 0.1)}); // blocks q = (pi/2, 0)
    const Config a{0, 0}, b{kPi, 0};
    ASSERT_FALSE (config_in_collision (m, a, w));
    ASSERT_FALSE (config_in_collision (m, b, w));
    ASSERT_TRUE (config_in_collision (m, Config{kPi / 2, 0}, w));
    EXPECT_TRUE (edge_in_collision (m, a, b, w, kPi / 2));
    EXPECT_TRUE (edge_in_collision (m, a, b, w, 0.02));
    EXPECT_FALSE (edge_in_collision (m, a, a, w, 0.02));
    EXPECT_FALSE (edge_in_collision (m, a, b, plane (), 0.02));
    Rng rng (1);
    for (int i = 0; i < 200; ++i)
    {
        const Config q{rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
        EXPECT_EQ (edge_in_collision (m, q, q, w, 0.05), config_in_collision (m, q, w));
    }
}

TEST (Robot, EdgeCheckCount)
{
    const auto m = unit_arm ();
    std::uint64_t checks = 0;
    // max-norm 1.0 at step 0.3 -> ceil(3.33) = 4 intervals, 5 configurations
    EXPECT_FALSE (edge_in_collision (m, Config{0, 0}, Config{1.0, 0.5}, plane (), 0.3, &checks));
    EXPECT_EQ (checks, 5u);
    const auto before = collision_checks_total ();
    CollisionChecker cc (m, plane ());
    cc.edge (Config{0, 0}, Config{1.0, 0.5}, 0.3);
    cc.config (Config{0, 0});
    EXPECT_EQ (cc.checks (), 6u);
    EXPECT_EQ (collision_checks_total () - before, 6u);
}

TEST (Robot, Distance)
{
    RobotModel one = RobotModel::planar (1);
    EXPECT_NEAR (config_distance (one, Config{-3.0}, Config{3.0}), 2 * kPi - 6, 1e-12);
    EXPECT_EQ (config_distance (one, Config{1.0}, Config{1.0}), 0.0);
    std::vector<Joint> lim{Joint::limited (-10, 10), Joint::limited (-10, 10)};
    EXPECT_NEAR (config_distance (lim, Config{0, 0}, Config{3, 4}), 5.0, 1e-12);
}

TEST (Robot, DistanceIsMetric)
{
    const auto m = RobotModel::yaw_pitch3 ();
    Rng rng (5);
    auto draw = [&] { return Config{rng.uniform (-kPi, kPi), rng.uniform (-kPi / 2, kPi / 2), rng.uniform (-kPi / 2, kPi / 2)}; };
    for (int i = 0; i < 1000; ++i)
    {
        const auto a = draw (), b = draw (), c = draw ();
        const double ab = config_distance (m, a, b), ba = config_distance (m, b, a);
        EXPECT_NEAR (ab, ba, 1e-12);
        EXPECT_LE (config_distance (m, a, c), ab + config_distance (m, b, c) + 1e-12);
        EXPECT_EQ (config_distance (m, a, a), 0.0);
        EXPECT_GT (ab, 0.0);
    }
}

TEST (Robot, AngleDiffRange)
{
    EXPECT_NEAR (angle_diff (0.0, kPi), kPi, 1e-15);
    EXPECT_NEAR (angle_diff (0.0, -kPi), kPi, 1e-15);
    EXPECT_NEAR (angle_diff (3.0, -3.0), 2 * kPi - 6, 1e-12);
    EXPECT_LT (wrap_angle (kPi), kPi);
    EXPECT_GE (wrap_angle (kPi), -kPi);
}

TEST (Robot, InterpolateWraps)
{
    const auto m = RobotModel::planar2 ();
    const auto mid = interpolate (m, Config{3.0, 0.0}, Config{-3.0, 0.0}, 0.5);
    EXPECT_NEAR (std::abs (mid[0]), kPi, 1e-12);
}

TEST (Robot, CollisionMonotonicity)
{
    const auto m = RobotModel::planar2 ();
    const auto small = generate_random_workspace ({}, 9);
    auto big = small;
    for (auto &o : big.obstacles)
        o.radius *= 1.5;
    Rng rng (2);
    for (int i = 0; i < 2000; ++i)
    {
        const Config q{rng.uniform (-kPi, kPi), rng.uniform (-kPi, kPi)};
        if (config_in_collision (m, q, small))
            EXPECT_TRUE (config_in_collision (m, q, big));
    }
}

TEST (Robot, SegmentDistanceExact)
{
    Rng rng (8);
    for (int i = 0; i < 50; ++i)
    {
        Segment s;
        for (int a = 0; a < 3; ++a)
            s.a[a] = rng.uniform (-2, 2), s.b[a] = rng.uniform (-2, 2);
        const auto box = Obstacle::box ({rng.uniform (-1, 1), rng.uniform (-1, 1), rng.uniform (-1, 1)},
                                        {rng.uniform (0.1, 0.6), rng.uniform (0.1, 0.6), rng.uniform (0.1, 0.6)});
        EXPECT_NEAR (segment_obstacle_distance2 (s, box), sampled_distance2 (s, box), 1e-6);
        Segment s2 = s;
        s2.a[2] = s2.b[2] = 0;
        const auto disk = Obstacle::disk (rng.uniform (-1, 1), rng.uniform (-1, 1), rng.uniform (0.1, 0.6));
        EXPECT_NEAR (segment_obstacle_distance2 (s2, disk), sampled_distance2 (s2, disk), 1e-6);
    }
}

TEST (Robot, NormalizeAndLimits)
{
    const auto m = RobotModel::yaw_pitch3 ();
    const auto q = normalize (m, Config{4.0, 2.0, -2.0});
    EXPECT_NEAR (q[0], 4.0 - 2 * kPi, 1e-12);
    EXPECT_EQ (q[1], kPi / 2);
    EXPECT_EQ (q[2], -kPi / 2);
    EXPECT_TRUE (within_limits (m, q));
    EXPECT_FALSE (within_limits (m, Config{0, 2.0, 0}));
}

TEST (Robot, JsonRoundTrip)
{
    for (const auto &m : {RobotModel::planar2 (), RobotModel::yaw_pitch3 (), RobotModel::planar (7)})
    {
        const auto back = robot_from_json (to_json (m));
        EXPECT_EQ (to_json (back).dump (), to_json (m).dump ());
    }
    EXPECT_EQ (robot_from_json (nlohmann::json ("yaw_pitch3")).dof (), 3u);
    EXPECT_THROW (robot_from_json (nlohmann::json ("hexapod")), Error);
}

TEST (Robot, DimensionMismatch)
{
    const auto m = RobotModel::planar2 ();
    EXPECT_THROW (config_in_collision (m, Config{0, 0, 0}, plane ()), Error);
}
