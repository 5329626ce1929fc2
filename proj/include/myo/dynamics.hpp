#pragma once

#include <vector>

#include "myo/muscle.hpp"
#include "myo/skeleton.hpp"

namespace myo {

// Episode-ending numerical blow-up; callers abort the episode, not the process.
struct SimBlowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContactRecord {
    bool active = false;
    Vec3 force = Vec3::Zero();  // world, on the body
    double normal = 0.0;        // N, >= 0
    double tangent = 0.0;       // N
};

struct SimState {
    VecX q;
    VecX qd;
    double t = 0.0;
    std::vector<MuscleState> fiber;     // refreshed from the pose each step
    MatX moment_arms;                   // n_dof x n_muscles, same freshness
    std::vector<ContactRecord> contact; // from the most recent step
};

// Owns the compiled skeleton and muscle runtime for one model. Logically
// const after construction; a (Simulation, SimState) pair is confined to one
// worker, the Simulation itself may be shared read-only.
class Simulation {
public:
    explicit Simulation(const ModelDesc& model);

    const ModelDesc& model() const { return *model_; }
    const Skeleton& skeleton() const { return skel_; }
    const MuscleRuntime& muscles() const { return muscles_; }
    int n_muscles() const { return muscles_.count(); }

    Vec3 gravity = Vec3(0, -9.81, 0);
    double limit_stiffness = 200.0;  // N*m/rad beyond a joint limit
    double limit_damping = 5.0;

    // State with a fresh fiber cache at (q, qd).
    SimState make_state(const VecX& q, const VecX& qd) const;

    // Per penetrating point: normal = max(0, k_p*d - k_d*v_sep) along +y,
    // tangent = viscous, Coulomb-capped. Returns generalized projection and
    // fills per-point records.
    VecX contact_forces(const Kin& kin, std::vector<ContactRecord>* records = nullptr) const;

    // One semi-implicit Euler substep. Uses the state's fiber cache for
    // muscle forces, then refreshes it from the new pose.
    // Throws SimBlowup on non-finite state, DynamicsError on solver failure.
    void step(SimState& state, const VecX& activations, double dt,
              std::vector<MuscleState>* pre_step_fiber = nullptr,
              std::vector<double>* pre_step_forces = nullptr) const;

    Vec3 com(const SimState& s) const { return skel_.com(skel_.forward_kinematics(s.q)); }
    Vec3 com_velocity(const SimState& s) const {
        return skel_.com_velocity(skel_.kinematics(s.q, s.qd));
    }

    double total_energy(const SimState& s) const;  // kinetic + gravitational

    void refresh_caches(SimState& state) const;

private:
    VecX limit_torques(const VecX& q, const VecX& qd) const;

    const ModelDesc* model_;
    Skeleton skel_;
    MuscleRuntime muscles_;
    std::vector<int> contact_links_;
};

}  // namespace myo
