#pragma once

#include <vector>

#include "myo/model.hpp"
#include "myo/skeleton.hpp"

namespace myo {

struct MuscleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Normalized Hill curves. Lengths are l_m / l_opt, velocities
// l_m_dot / (l_opt * v_max), shortening negative.

// Active force-length, gaussian about the optimum.
double g_al(double l_tilde, const CurveParams& c);

// Force-velocity: rational concentric branch, saturating eccentric branch,
// C1 at v = 0, monotone non-decreasing.
double g_v(double v_tilde, const CurveParams& c);

// Passive force-length: zero at or below optimum, exponential above,
// normalized to 1 at strain eps0.
double g_p(double l_tilde, const CurveParams& c);

struct MuscleState {
    double l_m = 0;      // fiber length, m
    double l_m_dot = 0;  // fiber lengthening rate, m/s (positive = lengthening)
    double a = 0;        // activation in [0, 1]
    double l_mt = 0;     // musculotendon path length, m
    bool slack = false;  // path shorter than tendon; force held at zero
};

// Rigid-tendon fiber length from path length. Throws on l_mt <= l_slack.
double fiber_from_path(double l_mt, const MuscleDesc& desc);

// Eq-style musculotendon force: f_max * cos(alpha) * (a*g_al*g_v + g_p),
// tensile only.
double mtu_force(const MuscleState& state, const MuscleDesc& desc, const CurveParams& curves);

// Active-element force along the fiber axis (no pennation projection);
// feeds the metabolic shortening/work terms.
double active_fiber_force(const MuscleState& state, const MuscleDesc& desc,
                          const CurveParams& curves);

// Polyline length over world-space via points.
double path_length(const MuscleDesc& desc, const Skeleton& skel, const Fk& fk);

// Per-muscle runtime: compiled via-point links and the set of DOF whose
// motion changes the path length.
class MuscleRuntime {
public:
    MuscleRuntime(const ModelDesc& model, const Skeleton& skel);

    int count() const { return static_cast<int>(entries_.size()); }
    const MuscleDesc& desc(int i) const;
    const std::vector<int>& dependent_dofs(int i) const { return entries_[i].dofs; }

    double path_length(int i, const Fk& fk) const;

    // r_j = -d l_mt / d q_j, central differences with h = 1e-6, tangent-space
    // perturbation; zero for DOF the path does not cross.
    VecX moment_arms(int i, const VecX& q) const;

    // Generalized torques for one activation vector. Fills per-muscle state
    // (fiber kinematics, force) as a side product.
    VecX muscle_torques(const VecX& activations, const VecX& q, const VecX& qd,
                        std::vector<MuscleState>* states = nullptr,
                        std::vector<double>* forces = nullptr) const;

    // Fiber kinematics at a pose; l_mt_dot derived from moment arms so joint
    // power and fiber power stay consistent.
    MuscleState fiber_state(int i, const VecX& q, const VecX& qd, double activation) const;

private:
    struct Entry {
        const MuscleDesc* desc;
        std::vector<int> via_links;  // compiled link index, -1 = world
        std::vector<int> dofs;
    };

    const Skeleton* skel_;
    const CurveParams* curves_;
    std::vector<Entry> entries_;
};

}  // namespace myo
