#include "myo/metabolics.hpp"

#include <cmath>
#include <stdexcept>

namespace myo {

double muscle_mass(const MuscleDesc& desc, const EnergyParams& params) {
    return params.rho * (desc.f_max / params.sigma) * desc.l_opt;
}

double metabolic_power(const std::vector<MuscleState>& states,
                       const std::vector<const MuscleDesc*>& descs,
                       const CurveParams& curves, const EnergyParams& params,
                       double body_mass) {
    if (states.size() != descs.size())
        throw std::invalid_argument("metabolic_power: states/descs length mismatch");
    double p = params.basal * body_mass;
    for (size_t i = 0; i < states.size(); ++i) {
        const MuscleState& s = states[i];
        const MuscleDesc& d = *descs[i];
        const double m = muscle_mass(d, params);
        const double lt = s.slack ? 1e-3 : s.l_m / d.l_opt;
        p += m * (params.c_act * s.a * s.a + params.c_maint * s.a * g_al(lt, curves));
        // shortening heat and positive mechanical work of the active element
        const double f_ce = active_fiber_force(s, d, curves);
        p += params.c_short * std::max(0.0, -s.l_m_dot) * f_ce;
        p += std::max(0.0, -f_ce * s.l_m_dot);
    }
    return p;
}

double met_rate(double power_w, double body_mass) {
    if (!(body_mass > 0)) throw std::invalid_argument("met_rate: body_mass must be > 0");
    return power_w / body_mass;
}

CotResult episode_cot(const EnergyAccount& account, double body_mass, double g) {
    CotResult r;
    const double d_raw = account.x_now - account.x_start;
    r.capped = d_raw < kCotDistanceFloor;
    const double d = r.capped ? kCotDistanceFloor : d_raw;
    r.cot = account.e_total / (body_mass * g * d);
    return r;
}

void accumulate(EnergyAccount& account, double power_w, double dt, double com_x) {
    if (dt < 0) throw std::invalid_argument("accumulate: dt must be >= 0");
    if (dt == 0) return;
    account.e_total += power_w * dt;
    account.x_now = com_x;
    account.met_now = power_w / account.body_mass;
}

}  // namespace myo
