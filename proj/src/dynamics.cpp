#include "myo/dynamics.hpp"

#include <cmath>

namespace myo {

Simulation::Simulation(const ModelDesc& model)
    : model_(&model), skel_(model), muscles_(model, skel_) {
    for (const auto& cp : model.contact_points)
        contact_links_.push_back(skel_.link_index(cp.link));
}

SimState Simulation::make_state(const VecX& q, const VecX& qd) const {
    SimState s;
    s.q = q;
    s.qd = qd;
    s.t = 0.0;
    s.contact.resize(model_->contact_points.size());
    refresh_caches(s);
    return s;
}

void Simulation::refresh_caches(SimState& s) const {
    const int nm = muscles_.count();
    s.fiber.resize(static_cast<size_t>(nm));
    s.moment_arms.resize(skel_.n_dof(), nm);
    const Fk fk = skel_.forward_kinematics(s.q);
    for (int i = 0; i < nm; ++i) {
        const MuscleDesc& d = muscles_.desc(i);
        MuscleState& ms = s.fiber[static_cast<size_t>(i)];
        const double a_prev = ms.a;
        const VecX r = muscles_.moment_arms(i, s.q);
        s.moment_arms.col(i) = r;
        ms.l_mt = muscles_.path_length(i, fk);
        ms.a = a_prev;
        if (ms.l_mt <= d.l_slack) {
            ms.slack = true;
            ms.l_m = 1e-3 * d.l_opt;
            ms.l_m_dot = 0.0;
        } else {
            const double cos_a = std::cos(d.alpha);
            ms.slack = false;
            ms.l_m = (ms.l_mt - d.l_slack) / cos_a;
            ms.l_m_dot = -r.dot(s.qd) / cos_a;
        }
    }
}

VecX Simulation::contact_forces(const Kin& kin, std::vector<ContactRecord>* records) const {
    const ContactParams& cp = model_->contact;
    VecX tau = VecX::Zero(skel_.n_dof());
    if (records) records->assign(model_->contact_points.size(), ContactRecord{});
    for (size_t k = 0; k < model_->contact_points.size(); ++k) {
        const ContactPointDesc& desc = model_->contact_points[k];
        const int link = contact_links_[k];
        const Vec3 c = kin.fk.p[link] + kin.fk.R[link] * desc.offset;
        const double depth = cp.ground_height + desc.radius - c.y();
        if (depth <= 0.0) continue;
        const Vec3 v = skel_.point_velocity(kin, link, c);
        const double v_sep = v.y();  // positive while separating
        const double normal = std::max(0.0, cp.k_p * depth - cp.k_d * v_sep);
        Vec3 f = Vec3(0, normal, 0);
        double tangent = 0.0;
        Vec3 vt(v.x(), 0, v.z());
        const double vt_norm = vt.norm();
        if (vt_norm > 1e-12) {
            tangent = std::min(cp.mu * normal, cp.k_d * vt_norm);
            f -= tangent * vt / vt_norm;
        }
        if (normal > 0.0 || tangent > 0.0) {
            tau += skel_.point_jacobian(kin.fk, link, c).transpose() * f;
            if (records) {
                ContactRecord& r = (*records)[k];
                r.active = true;
                r.force = f;
                r.normal = normal;
                r.tangent = tangent;
            }
        }
    }
    return tau;
}

VecX Simulation::limit_torques(const VecX& q, const VecX& qd) const {
    VecX tau = VecX::Zero(skel_.n_dof());
    for (int d = 0; d < skel_.n_dof(); ++d) {
        const auto [lo, hi] = skel_.dof_limits(d);
        if (q[d] > hi)
            tau[d] = -limit_stiffness * (q[d] - hi) - limit_damping * qd[d];
        else if (q[d] < lo)
            tau[d] = -limit_stiffness * (q[d] - lo) - limit_damping * qd[d];
    }
    return tau;
}

void Simulation::step(SimState& state, const VecX& activations, double dt,
                      std::vector<MuscleState>* pre_step_fiber,
                      std::vector<double>* pre_step_forces) const {
    if (!(dt > 0)) throw DynamicsError("step: dt must be > 0");
    const int nm = muscles_.count();
    if (activations.size() != nm)
        throw DynamicsError("step: got " + std::to_string(activations.size()) +
                            " activations for " + std::to_string(nm) + " muscles");

    // muscle torques from the cached fiber kinematics at the current pose
    VecX tau = VecX::Zero(skel_.n_dof());
    if (pre_step_fiber) pre_step_fiber->resize(static_cast<size_t>(nm));
    if (pre_step_forces) pre_step_forces->resize(static_cast<size_t>(nm));
    for (int i = 0; i < nm; ++i) {
        MuscleState ms = state.fiber[static_cast<size_t>(i)];
        ms.a = activations[i];
        const double f = mtu_force(ms, muscles_.desc(i), model_->curves);
        if (f != 0.0) tau += state.moment_arms.col(i) * f;
        if (pre_step_fiber) (*pre_step_fiber)[static_cast<size_t>(i)] = ms;
        if (pre_step_forces) (*pre_step_forces)[static_cast<size_t>(i)] = f;
    }

    const Kin kin = skel_.kinematics(state.q, state.qd);
    tau += contact_forces(kin, &state.contact);
    tau += limit_torques(state.q, state.qd);
    tau -= skel_.bias_forces(state.q, state.qd, gravity);

    const MatX M = skel_.mass_matrix(state.q);
    Eigen::LLT<MatX> llt(M);
    if (llt.info() != Eigen::Success)
        throw DynamicsError("step: mass matrix not positive definite (degenerate inertia)");
    const VecX qdd = llt.solve(tau);

    state.qd += qdd * dt;
    state.q = skel_.integrate_positions(state.q, state.qd, dt);
    state.t += dt;

    if (!state.q.allFinite() || !state.qd.allFinite())
        throw SimBlowup("step: non-finite state at t = " + std::to_string(state.t));

    for (int i = 0; i < nm; ++i) state.fiber[static_cast<size_t>(i)].a = activations[i];
    refresh_caches(state);
}

double Simulation::total_energy(const SimState& s) const {
    const MatX M = skel_.mass_matrix(s.q);
    const double ke = 0.5 * s.qd.dot(M * s.qd);
    const Fk fk = skel_.forward_kinematics(s.q);
    double pe = 0.0;
    for (int i = 0; i < skel_.n_links(); ++i) pe -= skel_.link_mass(i) * gravity.dot(fk.p[i]);
    return ke + pe;
}

}  // namespace myo
