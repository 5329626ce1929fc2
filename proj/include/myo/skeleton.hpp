#pragma once

#include <string>
#include <vector>

#include "myo/math.hpp"
#include "myo/model.hpp"

namespace myo {

struct DynamicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// World pose per link.
struct Fk {
    std::vector<Mat3> R;  // link -> world
    std::vector<Vec3> p;  // link origin (= COM) in world
};

// Pose plus world-frame link velocities.
struct Kin {
    Fk fk;
    std::vector<Vec3> w;  // angular velocity, world
    std::vector<Vec3> v;  // linear velocity of link origin, world
};

// Compiled kinematic tree. Joint i connects parent_link[i] (-1 = world) to
// child link i; links are re-indexed so that index i is the child of joint i
// and parents always precede children.
class Skeleton {
public:
    explicit Skeleton(const ModelDesc& model);

    const ModelDesc& model() const { return *model_; }
    int n_links() const { return static_cast<int>(joints_.size()); }
    int n_dof() const { return n_dof_; }

    int link_index(const std::string& name) const;  // compiled index
    int root_link() const { return 0; }

    // per-joint layout
    int joint_of_link(int link) const { return link; }
    int parent_link(int joint) const { return joints_[joint].parent; }
    JointType joint_type(int joint) const { return joints_[joint].type; }
    int q_offset(int joint) const { return joints_[joint].q_off; }
    int dof_of(int joint) const { return joints_[joint].nq; }
    const std::string& joint_name(int joint) const { return joints_[joint].name; }
    int joint_by_name(const std::string& name) const;  // -1 if absent
    // [lo, hi] per DOF; +-inf when unlimited
    std::pair<double, double> dof_limits(int dof) const { return limits_[dof]; }
    int joint_of_dof(int dof) const { return dof_joint_[dof]; }

    double link_mass(int link) const { return links_[link].mass; }
    double total_mass() const { return total_mass_; }
    const std::string& link_name(int link) const { return links_[link].name; }

    VecX zero_q() const { return VecX::Zero(n_dof_); }

    Fk forward_kinematics(const VecX& q) const;
    Kin kinematics(const VecX& q, const VecX& qd) const;

    // Tangent-space position update: q' = q (+) qd*dt. Rotational coordinates
    // advance along the rotation group, translations in the conventions of
    // each joint type.
    VecX integrate_positions(const VecX& q, const VecX& qd, double dt) const;

    // Composite-rigid-body mass matrix, symmetric positive definite.
    MatX mass_matrix(const VecX& q) const;

    // Recursive Newton-Euler: generalized force producing qdd at (q, qd)
    // under gravity (no contacts or muscles).
    VecX inverse_dynamics(const VecX& q, const VecX& qd, const VecX& qdd,
                          const Vec3& gravity) const;

    // Coriolis/centrifugal plus gravity load: tau_hold = bias(q, 0).
    VecX bias_forces(const VecX& q, const VecX& qd, const Vec3& gravity) const;

    // 3 x n_dof jacobian of a world point attached to `link`.
    MatX point_jacobian(const Fk& fk, int link, const Vec3& p_world) const;

    // World velocity of a point attached to `link`.
    Vec3 point_velocity(const Kin& kin, int link, const Vec3& p_world) const;

    Vec3 com(const Fk& fk) const;
    Vec3 com_velocity(const Kin& kin) const;

private:
    struct Joint {
        std::string name;
        JointType type;
        int parent;  // compiled link index, -1 = world
        int q_off;
        int nq;
        Vec3 axis;
        Vec3 parent_offset;
        Vec3 child_offset;
    };
    struct Link {
        std::string name;
        double mass;
        Mat3 inertia;
    };

    // joint transform: child-local placement relative to the parent anchor
    void joint_pose(int joint, const VecX& q, Mat3& R, Vec3& p) const;
    // motion subspace in child coordinates, 6 x nq, rows [angular; linear]
    const Eigen::Matrix<double, 6, Eigen::Dynamic>& motion_subspace(int joint) const {
        return subspaces_[joint];
    }
    Eigen::Matrix<double, 6, Eigen::Dynamic> build_subspace(int joint) const;

    const ModelDesc* model_;
    std::vector<Joint> joints_;
    std::vector<Link> links_;
    std::vector<Eigen::Matrix<double, 6, Eigen::Dynamic>> subspaces_;
    std::vector<std::pair<double, double>> limits_;
    std::vector<int> dof_joint_;
    int n_dof_ = 0;
    double total_mass_ = 0.0;
};

}  // namespace myo
