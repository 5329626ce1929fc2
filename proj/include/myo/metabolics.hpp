#pragma once

#include <vector>

#include "myo/model.hpp"
#include "myo/muscle.hpp"

namespace myo {

// Running episode energy integral plus the COM bookkeeping CoT needs.
struct EnergyAccount {
    double e_total = 0.0;   // J
    double x_start = 0.0;   // COM forward position at reset, m
    double x_now = 0.0;     // m
    double met_now = 0.0;   // W/kg
    double body_mass = 1.0; // kg
};

struct CotResult {
    double cot = 0.0;
    bool capped = false;  // displacement below the floor; d_min used instead
};

// m = rho * (f_max / sigma) * l_opt
double muscle_mass(const MuscleDesc& desc, const EnergyParams& params);

// Whole-body metabolic rate: basal + activation heat + maintenance heat +
// shortening heat + positive mechanical work of the active element.
// Never below basal * body_mass.
double metabolic_power(const std::vector<MuscleState>& states,
                       const std::vector<const MuscleDesc*>& descs,
                       const CurveParams& curves, const EnergyParams& params,
                       double body_mass);

double met_rate(double power_w, double body_mass);

// CoT = e_total / (m g d), d floored at d_min = 0.1 m so immobile episodes
// stay finite.
CotResult episode_cot(const EnergyAccount& account, double body_mass, double g);

constexpr double kCotDistanceFloor = 0.1;  // m

void accumulate(EnergyAccount& account, double power_w, double dt, double com_x);

}  // namespace myo
