#include "myo/muscle.hpp"

#include <cmath>
#include <set>

namespace myo {

double g_al(double l_tilde, const CurveParams& c) {
    if (!(l_tilde > 0)) throw MuscleError("g_al: l_tilde must be > 0");
    const double d = l_tilde - 1.0;
    return std::exp(-d * d / c.gamma);
}

double g_v(double v_tilde, const CurveParams& c) {
    if (v_tilde <= -1.0) return 0.0;
    if (v_tilde <= 0.0) return (1.0 + v_tilde) / (1.0 - v_tilde / c.k_curv);
    // eccentric curvature chosen so the slope matches the concentric branch
    // at v = 0: (n_ecc - 1)/k_ecc = 1 + 1/k_curv
    const double k_ecc = (c.n_ecc - 1.0) * c.k_curv / (c.k_curv + 1.0);
    return c.n_ecc - (c.n_ecc - 1.0) / (1.0 + v_tilde / k_ecc);
}

double g_p(double l_tilde, const CurveParams& c) {
    if (!(l_tilde > 0)) throw MuscleError("g_p: l_tilde must be > 0");
    if (l_tilde <= 1.0) return 0.0;
    return std::expm1(c.k_pe * (l_tilde - 1.0) / c.eps0) / std::expm1(c.k_pe);
}

double fiber_from_path(double l_mt, const MuscleDesc& desc) {
    if (l_mt <= desc.l_slack)
        throw MuscleError("fiber_from_path: path length " + std::to_string(l_mt) +
                          " <= tendon slack " + std::to_string(desc.l_slack) + " for muscle '" +
                          desc.name + "'");
    return (l_mt - desc.l_slack) / std::cos(desc.alpha);
}

double mtu_force(const MuscleState& state, const MuscleDesc& desc, const CurveParams& curves) {
    if (state.slack) return 0.0;
    const double lt = state.l_m / desc.l_opt;
    const double vt = state.l_m_dot / (desc.l_opt * curves.v_max);
    const double f = desc.f_max * std::cos(desc.alpha) *
                     (state.a * g_al(lt, curves) * g_v(vt, curves) + g_p(lt, curves));
    return f > 0.0 ? f : 0.0;
}

double active_fiber_force(const MuscleState& state, const MuscleDesc& desc,
                          const CurveParams& curves) {
    if (state.slack) return 0.0;
    const double lt = state.l_m / desc.l_opt;
    const double vt = state.l_m_dot / (desc.l_opt * curves.v_max);
    return desc.f_max * state.a * g_al(lt, curves) * g_v(vt, curves);
}

double path_length(const MuscleDesc& desc, const Skeleton& skel, const Fk& fk) {
    double len = 0.0;
    Vec3 prev;
    for (size_t k = 0; k < desc.path.size(); ++k) {
        const int li = skel.link_index(desc.path[k].link);
        const Vec3 p = li < 0 ? desc.path[k].offset
                              : Vec3(fk.p[li] + fk.R[li] * desc.path[k].offset);
        if (k > 0) len += (p - prev).norm();
        prev = p;
    }
    return len;
}

MuscleRuntime::MuscleRuntime(const ModelDesc& model, const Skeleton& skel)
    : skel_(&skel), curves_(&model.curves) {
    entries_.reserve(model.muscles.size());
    for (const auto& md : model.muscles) {
        Entry e;
        e.desc = &md;
        std::set<int> vlinks;
        for (const auto& vp : md.path) {
            e.via_links.push_back(skel.link_index(vp.link));
            vlinks.insert(e.via_links.back());
        }
        // a joint moves the path iff its subtree holds some via links but
        // not all of them (and at least one lies outside)
        for (int j = 0; j < skel.n_links(); ++j) {
            int inside = 0, outside = 0;
            for (int vl : vlinks) {
                bool in_subtree = false;
                int w = vl;
                while (w >= 0) {
                    if (w == j) {
                        in_subtree = true;
                        break;
                    }
                    w = skel.parent_link(w);
                }
                (in_subtree ? inside : outside)++;
            }
            if (inside > 0 && outside > 0)
                for (int k = 0; k < skel.dof_of(j); ++k)
                    e.dofs.push_back(skel.q_offset(j) + k);
        }
        entries_.push_back(std::move(e));
    }
}

const MuscleDesc& MuscleRuntime::desc(int i) const { return *entries_[static_cast<size_t>(i)].desc; }

double MuscleRuntime::path_length(int i, const Fk& fk) const {
    const Entry& e = entries_[static_cast<size_t>(i)];
    double len = 0.0;
    Vec3 prev;
    for (size_t k = 0; k < e.desc->path.size(); ++k) {
        const int li = e.via_links[k];
        const Vec3 p = li < 0 ? e.desc->path[k].offset
                              : Vec3(fk.p[li] + fk.R[li] * e.desc->path[k].offset);
        if (k > 0) len += (p - prev).norm();
        prev = p;
    }
    return len;
}

VecX MuscleRuntime::moment_arms(int i, const VecX& q) const {
    const Entry& e = entries_[static_cast<size_t>(i)];
    VecX r = VecX::Zero(skel_->n_dof());
    const double h = 1e-6;
    VecX dir = VecX::Zero(skel_->n_dof());
    for (int d : e.dofs) {
        dir[d] = 1.0;
        const VecX qp = skel_->integrate_positions(q, dir, h);
        const VecX qm = skel_->integrate_positions(q, dir, -h);
        dir[d] = 0.0;
        const double lp = path_length(i, skel_->forward_kinematics(qp));
        const double lm = path_length(i, skel_->forward_kinematics(qm));
        r[d] = -(lp - lm) / (2.0 * h);
    }
    return r;
}

MuscleState MuscleRuntime::fiber_state(int i, const VecX& q, const VecX& qd,
                                       double activation) const {
    const MuscleDesc& d = desc(i);
    MuscleState s;
    s.a = activation;
    s.l_mt = path_length(i, skel_->forward_kinematics(q));
    const VecX r = moment_arms(i, q);
    const double l_mt_dot = -r.dot(qd);
    if (s.l_mt <= d.l_slack) {
        // slack MTU: no tension; keep the fiber at a small floor so
        // normalized observations stay finite
        s.slack = true;
        s.l_m = 1e-3 * d.l_opt;
        s.l_m_dot = 0.0;
        return s;
    }
    s.l_m = (s.l_mt - d.l_slack) / std::cos(d.alpha);
    s.l_m_dot = l_mt_dot / std::cos(d.alpha);
    return s;
}

VecX MuscleRuntime::muscle_torques(const VecX& activations, const VecX& q, const VecX& qd,
                                   std::vector<MuscleState>* states,
                                   std::vector<double>* forces) const {
    if (activations.size() != count())
        throw MuscleError("muscle_torques: got " + std::to_string(activations.size()) +
                          " activations for " + std::to_string(count()) + " muscles");
    VecX tau = VecX::Zero(skel_->n_dof());
    if (states) states->resize(static_cast<size_t>(count()));
    if (forces) forces->resize(static_cast<size_t>(count()));
    const Fk fk = skel_->forward_kinematics(q);
    for (int i = 0; i < count(); ++i) {
        const MuscleDesc& d = desc(i);
        MuscleState s;
        s.a = activations[i];
        s.l_mt = path_length(i, fk);
        const VecX r = moment_arms(i, q);
        double f = 0.0;
        if (s.l_mt <= d.l_slack) {
            s.slack = true;
            s.l_m = 1e-3 * d.l_opt;
            s.l_m_dot = 0.0;
        } else {
            const double cos_a = std::cos(d.alpha);
            s.l_m = (s.l_mt - d.l_slack) / cos_a;
            s.l_m_dot = -r.dot(qd) / cos_a;
            f = mtu_force(s, d, *curves_);
            tau += r * f;
        }
        if (states) (*states)[static_cast<size_t>(i)] = s;
        if (forces) (*forces)[static_cast<size_t>(i)] = f;
    }
    return tau;
}

}  // namespace myo
