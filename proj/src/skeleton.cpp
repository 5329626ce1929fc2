#include "myo/skeleton.hpp"

#include <limits>
#include <map>

namespace myo {

Skeleton::Skeleton(const ModelDesc& model) : model_(&model) {
    // order joints so parents precede children
    std::map<std::string, int> compiled;  // model link name -> compiled index
    compiled["world"] = -1;
    std::vector<bool> used(model.joints.size(), false);
    while (joints_.size() < model.joints.size()) {
        bool grew = false;
        for (size_t i = 0; i < model.joints.size(); ++i) {
            if (used[i]) continue;
            const JointDesc& jd = model.joints[i];
            auto it = compiled.find(jd.parent);
            if (it == compiled.end()) continue;
            used[i] = true;
            grew = true;
            Joint j;
            j.name = jd.name;
            j.type = jd.type;
            j.parent = it->second;
            j.q_off = n_dof_;
            j.nq = joint_dof(jd.type);
            j.axis = jd.axis.normalized();
            j.parent_offset = jd.parent_offset;
            j.child_offset = jd.child_offset;

            const LinkDesc& ld = model.link(jd.child);
            Link l;
            l.name = ld.name;
            l.mass = ld.mass;
            l.inertia = ld.inertia;
            compiled[ld.name] = static_cast<int>(joints_.size());

            const double inf = std::numeric_limits<double>::infinity();
            for (int k = 0; k < j.nq; ++k) {
                if (!jd.limits.empty())
                    limits_.push_back(jd.limits[static_cast<size_t>(k)]);
                else
                    limits_.push_back({-inf, inf});
                dof_joint_.push_back(static_cast<int>(joints_.size()));
            }
            n_dof_ += j.nq;
            joints_.push_back(std::move(j));
            links_.push_back(std::move(l));
            total_mass_ += ld.mass;
        }
        if (!grew) throw DynamicsError("joint graph is not a rooted tree");
    }
    subspaces_.reserve(joints_.size());
    for (size_t i = 0; i < joints_.size(); ++i)
        subspaces_.push_back(build_subspace(static_cast<int>(i)));
}

int Skeleton::link_index(const std::string& name) const {
    for (size_t i = 0; i < links_.size(); ++i)
        if (links_[i].name == name) return static_cast<int>(i);
    if (name == "world") return -1;
    throw DynamicsError("unknown link '" + name + "'");
}

int Skeleton::joint_by_name(const std::string& name) const {
    for (size_t i = 0; i < joints_.size(); ++i)
        if (joints_[i].name == name) return static_cast<int>(i);
    return -1;
}

void Skeleton::joint_pose(int joint, const VecX& q, Mat3& R, Vec3& p) const {
    const Joint& j = joints_[joint];
    const int o = j.q_off;
    switch (j.type) {
        case JointType::Revolute1:
            R = Eigen::AngleAxisd(q[o], j.axis).toRotationMatrix();
            p = Vec3::Zero();
            break;
        case JointType::Ball3:
            R = exp_rotvec(q.segment<3>(o));
            p = Vec3::Zero();
            break;
        case JointType::Planar3:
            R = Eigen::AngleAxisd(q[o + 2], Vec3::UnitZ()).toRotationMatrix();
            p = Vec3(q[o], q[o + 1], 0);
            break;
        case JointType::Free6:
            R = exp_rotvec(q.segment<3>(o + 3));
            p = q.segment<3>(o);
            break;
    }
}

Eigen::Matrix<double, 6, Eigen::Dynamic> Skeleton::build_subspace(int joint) const {
    const Joint& j = joints_[joint];
    Eigen::Matrix<double, 6, Eigen::Dynamic> S(6, j.nq);
    S.setZero();
    switch (j.type) {
        case JointType::Revolute1:
            S.block<3, 1>(0, 0) = j.axis;
            S.block<3, 1>(3, 0) = j.child_offset.cross(j.axis);
            break;
        case JointType::Ball3:
            for (int k = 0; k < 3; ++k) {
                Vec3 e = Vec3::Unit(k);
                S.block<3, 1>(0, k) = e;
                S.block<3, 1>(3, k) = j.child_offset.cross(e);
            }
            break;
        case JointType::Planar3:
            // [vx_local, vy_local, omega_z]; translation rates live in the
            // rotated (child) frame so the subspace is constant
            S.block<3, 1>(3, 0) = Vec3::UnitX();
            S.block<3, 1>(3, 1) = Vec3::UnitY();
            S.block<3, 1>(0, 2) = Vec3::UnitZ();
            break;
        case JointType::Free6:
            // [v_body(3); w_body(3)]
            for (int k = 0; k < 3; ++k) {
                S.block<3, 1>(3, k) = Vec3::Unit(k);
                S.block<3, 1>(0, 3 + k) = Vec3::Unit(k);
            }
            break;
    }
    return S;
}

Fk Skeleton::forward_kinematics(const VecX& q) const {
    if (q.size() != n_dof_) throw DynamicsError("q has wrong dimension");
    Fk fk;
    const int n = n_links();
    fk.R.resize(n);
    fk.p.resize(n);
    for (int i = 0; i < n; ++i) {
        const Joint& j = joints_[i];
        Mat3 Rj;
        Vec3 pj;
        joint_pose(i, q, Rj, pj);
        // parent -> child placement: anchor offset, joint motion, child offset
        Mat3 R_pc = Rj;
        Vec3 p_pc = j.parent_offset + pj - Rj * j.child_offset;
        if (j.parent < 0) {
            fk.R[i] = R_pc;
            fk.p[i] = p_pc;
        } else {
            fk.R[i] = fk.R[j.parent] * R_pc;
            fk.p[i] = fk.p[j.parent] + fk.R[j.parent] * p_pc;
        }
    }
    return fk;
}

Kin Skeleton::kinematics(const VecX& q, const VecX& qd) const {
    if (qd.size() != n_dof_) throw DynamicsError("qd has wrong dimension");
    Kin kin;
    kin.fk = forward_kinematics(q);
    const int n = n_links();
    kin.w.resize(n);
    kin.v.resize(n);
    // propagate world-frame velocities down the tree
    for (int i = 0; i < n; ++i) {
        const Joint& j = joints_[i];
        Vec3 w_p = Vec3::Zero(), v_p = Vec3::Zero(), p_p = Vec3::Zero();
        if (j.parent >= 0) {
            w_p = kin.w[j.parent];
            v_p = kin.v[j.parent];
            p_p = kin.fk.p[j.parent];
        }
        // velocity of the point of the parent coincident with the child origin
        Vec3 v = v_p + w_p.cross(kin.fk.p[i] - p_p);
        Vec3 w = w_p;
        // joint contribution: S qd expressed in child coordinates -> world
        const auto& S = motion_subspace(i);
        Vec6 vj6 = S * qd.segment(j.q_off, j.nq);
        w += kin.fk.R[i] * vj6.head<3>();
        v += kin.fk.R[i] * vj6.tail<3>();
        kin.w[i] = w;
        kin.v[i] = v;
    }
    return kin;
}

VecX Skeleton::integrate_positions(const VecX& q, const VecX& qd, double dt) const {
    VecX out = q;
    for (int i = 0; i < n_links(); ++i) {
        const Joint& j = joints_[i];
        const int o = j.q_off;
        switch (j.type) {
            case JointType::Revolute1:
                out[o] = q[o] + qd[o] * dt;
                break;
            case JointType::Ball3: {
                Mat3 R = exp_rotvec(q.segment<3>(o)) * exp_rotvec(qd.segment<3>(o) * dt);
                out.segment<3>(o) = log_rotation(R);
                break;
            }
            case JointType::Planar3: {
                const double th = q[o + 2];
                const double c = std::cos(th), s = std::sin(th);
                // translation rates are in the rotated frame
                out[o] = q[o] + (c * qd[o] - s * qd[o + 1]) * dt;
                out[o + 1] = q[o + 1] + (s * qd[o] + c * qd[o + 1]) * dt;
                out[o + 2] = th + qd[o + 2] * dt;
                break;
            }
            case JointType::Free6: {
                Mat3 R = exp_rotvec(q.segment<3>(o + 3));
                out.segment<3>(o) = q.segment<3>(o) + R * qd.segment<3>(o) * dt;
                Mat3 Rn = R * exp_rotvec(qd.segment<3>(o + 3) * dt);
                out.segment<3>(o + 3) = log_rotation(Rn);
                break;
            }
        }
    }
    return out;
}

MatX Skeleton::mass_matrix(const VecX& q) const {
    const int n = n_links();
    std::vector<Xform> X_up(n);
    std::vector<Mat6> Ic(n);
    for (int i = 0; i < n; ++i) {
        const Joint& j = joints_[i];
        Mat3 Rj;
        Vec3 pj;
        joint_pose(i, q, Rj, pj);
        Mat3 R_pc = Rj;
        Vec3 p_pc = j.parent_offset + pj - Rj * j.child_offset;
        X_up[i].E = R_pc.transpose();
        X_up[i].r = p_pc;
        Ic[i].setZero();
        Ic[i].topLeftCorner<3, 3>() = links_[i].inertia;
        Ic[i].bottomRightCorner<3, 3>() = links_[i].mass * Mat3::Identity();
    }

    // composite inertias, leaves to root
    for (int i = n - 1; i >= 0; --i) {
        const int p = joints_[i].parent;
        if (p >= 0) {
            Mat6 X = X_up[i].as_matrix();
            Ic[p] += X.transpose() * Ic[i] * X;
        }
    }

    MatX H = MatX::Zero(n_dof_, n_dof_);
    for (int i = 0; i < n; ++i) {
        const Joint& ji = joints_[i];
        const auto& Si = motion_subspace(i);
        Eigen::Matrix<double, 6, Eigen::Dynamic> F = Ic[i] * Si;
        H.block(ji.q_off, ji.q_off, ji.nq, ji.nq) = Si.transpose() * F;
        int jnt = i;
        while (joints_[jnt].parent >= 0) {
            F = X_up[jnt].as_matrix().transpose() * F;
            jnt = joints_[jnt].parent;
            const Joint& jj = joints_[jnt];
            const auto& Sj = motion_subspace(jnt);
            MatX blk = F.transpose() * Sj;
            H.block(ji.q_off, jj.q_off, ji.nq, jj.nq) = blk;
            H.block(jj.q_off, ji.q_off, jj.nq, ji.nq) = blk.transpose();
        }
    }
    return H;
}

VecX Skeleton::inverse_dynamics(const VecX& q, const VecX& qd, const VecX& qdd,
                                const Vec3& gravity) const {
    // recursive Newton-Euler; base acceleration -g stands in for the
    // gravity field
    const int n = n_links();
    std::vector<Xform> X_up(n);
    std::vector<Vec6> v(n), a(n), f(n);
    for (int i = 0; i < n; ++i) {
        const Joint& j = joints_[i];
        Mat3 Rj;
        Vec3 pj;
        joint_pose(i, q, Rj, pj);
        X_up[i].E = Rj.transpose();
        X_up[i].r = j.parent_offset + pj - Rj * j.child_offset;

        const auto& S = motion_subspace(i);
        Vec6 vj = S * qd.segment(j.q_off, j.nq);
        Vec6 aj = S * qdd.segment(j.q_off, j.nq);
        Vec6 a0;
        a0.head<3>().setZero();
        a0.tail<3>() = -gravity;
        if (j.parent < 0) {
            v[i] = vj;
            a[i] = X_up[i].apply_motion(a0) + aj + cross_motion(v[i], vj);
        } else {
            v[i] = X_up[i].apply_motion(v[j.parent]) + vj;
            a[i] = X_up[i].apply_motion(a[j.parent]) + aj + cross_motion(v[i], vj);
        }
        Vec6 Iv;
        Iv.head<3>() = links_[i].inertia * v[i].head<3>();
        Iv.tail<3>() = links_[i].mass * v[i].tail<3>();
        Vec6 Ia;
        Ia.head<3>() = links_[i].inertia * a[i].head<3>();
        Ia.tail<3>() = links_[i].mass * a[i].tail<3>();
        f[i] = Ia + cross_force(v[i], Iv);
    }

    VecX tau = VecX::Zero(n_dof_);
    for (int i = n - 1; i >= 0; --i) {
        const Joint& j = joints_[i];
        const auto& S = motion_subspace(i);
        tau.segment(j.q_off, j.nq) = S.transpose() * f[i];
        if (j.parent >= 0) f[j.parent] += X_up[i].apply_force_transpose(f[i]);
    }
    return tau;
}

VecX Skeleton::bias_forces(const VecX& q, const VecX& qd, const Vec3& gravity) const {
    return inverse_dynamics(q, qd, VecX::Zero(n_dof_), gravity);
}

MatX Skeleton::point_jacobian(const Fk& fk, int link, const Vec3& p_world) const {
    MatX J = MatX::Zero(3, n_dof_);
    int i = link;
    while (i >= 0) {
        const Joint& j = joints_[i];
        const auto& S = motion_subspace(i);
        for (int k = 0; k < j.nq; ++k) {
            const Vec3 w_world = fk.R[i] * S.block<3, 1>(0, k);
            const Vec3 v_world = fk.R[i] * S.block<3, 1>(3, k);
            J.col(j.q_off + k) = v_world + w_world.cross(p_world - fk.p[i]);
        }
        i = j.parent;
    }
    return J;
}

Vec3 Skeleton::point_velocity(const Kin& kin, int link, const Vec3& p_world) const {
    return kin.v[link] + kin.w[link].cross(p_world - kin.fk.p[link]);
}

Vec3 Skeleton::com(const Fk& fk) const {
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < n_links(); ++i) c += links_[i].mass * fk.p[i];
    return c / total_mass_;
}

Vec3 Skeleton::com_velocity(const Kin& kin) const {
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < n_links(); ++i) c += links_[i].mass * kin.v[i];
    return c / total_mass_;
}

}  // namespace myo
