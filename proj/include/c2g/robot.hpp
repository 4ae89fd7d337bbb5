#pragma once
/**
 * @file robot.hpp
 * @brief Serial revolute arms: kinematics, joint-space metric and capsule
 *        collision predicates against a Workspace.
 *
 * Two kinematic families are supported:
 *  - Planar: every joint rotates about +z and is followed by its link.
 *  - YawPitch: joint 0 is a base yaw carrying a vertical post of length
 *    link_lengths[0]; every later joint pitches the following link.
 */

#include <c2g/workspace.hpp>

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

namespace c2g
{
    /// Joint angles in radians.
    using Config = std::vector<double>;

    enum class JointType
    {
        Periodic,
        Limited,
    };

    struct Joint
    {
        JointType type = JointType::Periodic;
        double lo = -kPi;
        double hi = kPi;

        bool periodic () const { return type == JointType::Periodic; }
        static Joint revolute () { return {}; }
        static Joint limited (double lo, double hi) { return {JointType::Limited, lo, hi}; }
    };

    enum class Kinematics
    {
        Planar,
        YawPitch,
    };

    struct RobotModel
    {
        Kinematics kinematics = Kinematics::Planar;
        std::vector<double> link_lengths;
        double link_radius = 0.02;
        std::vector<Joint> joints;
        std::array<double, 3> base{};

        std::size_t dof () const { return joints.size (); }
        int workspace_dim () const { return kinematics == Kinematics::Planar ? 2 : 3; }

        /// Two periodic joints, links (0.5, 0.5).
        static RobotModel planar2 ();
        /// Base yaw (periodic) over a 0.1 m post, two pitch links (0.5, 0.5) limited to [-pi/2, pi/2].
        static RobotModel yaw_pitch3 ();
        /// d-link planar chain, all joints periodic, total reach 1 m.
        static RobotModel planar (std::size_t dof);
    };

    void validate (const RobotModel &m);

    struct Segment
    {
        std::array<double, 3> a{};
        std::array<double, 3> b{};
    };

    /// Wraps periodic joints into [-pi, pi) and clamps limited joints.
    Config normalize (const RobotModel &m, Config q);
    bool within_limits (const RobotModel &m, std::span<const double> q);

    std::vector<Segment> forward_kinematics (const RobotModel &m, std::span<const double> q);

    /// Per-joint shortest difference q2 - q1 (wrapped for periodic joints).
    std::vector<double> joint_delta (std::span<const Joint> joints, std::span<const double> q1, std::span<const double> q2);
    double config_distance (const RobotModel &m, std::span<const double> q1, std::span<const double> q2);
    /// Distance under an explicit joint topology (grids carry their own).
    double config_distance (std::span<const Joint> joints, std::span<const double> q1, std::span<const double> q2);
    /// Point at fraction t along the geodesic from q1 to q2 (periodic joints wrapped).
    Config interpolate (const RobotModel &m, std::span<const double> q1, std::span<const double> q2, double t);

    /// Capsule-vs-obstacle test, boundary inclusive. Counts toward collision_checks_total().
    bool config_in_collision (const RobotModel &m, std::span<const double> q, const Workspace &w);

    /**
     * @brief Samples the geodesic q1 -> q2 at max-norm spacing <= step,
     *        endpoints included, and reports whether any sample collides.
     * @param checks incremented once per configuration tested (may be null).
     */
    bool edge_in_collision (const RobotModel &m, std::span<const double> q1, std::span<const double> q2, const Workspace &w, double step,
                            std::uint64_t *checks = nullptr);

    /// Process-wide count of config_in_collision calls.
    std::uint64_t collision_checks_total ();

    /// Squared distance from segment [a,b] to a box (0 on contact), or to a disk's center.
    double segment_obstacle_distance2 (const Segment &s, const Obstacle &o);

    /// Binds a model and workspace and counts every configuration test.
    class CollisionChecker
    {
      public:
        CollisionChecker (const RobotModel &m, const Workspace &w) : model_ (&m), workspace_ (&w) {}

        bool config (std::span<const double> q)
        {
            ++checks_;
            return config_in_collision (*model_, q, *workspace_);
        }
        bool edge (std::span<const double> q1, std::span<const double> q2, double step)
        {
            return edge_in_collision (*model_, q1, q2, *workspace_, step, &checks_);
        }

        std::uint64_t checks () const { return checks_; }
        const RobotModel &model () const { return *model_; }
        const Workspace &workspace () const { return *workspace_; }

      private:
        const RobotModel *model_;
        const Workspace *workspace_;
        std::uint64_t checks_ = 0;
    };

    nlohmann::json to_json (const RobotModel &m);
    RobotModel robot_from_json (const nlohmann::json &j);

} // namespace c2g
