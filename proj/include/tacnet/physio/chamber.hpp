#pragma once

/**
 * @file chamber.hpp
 * @brief Well-mixed mass balance of the skin-side vapor collection chamber.
 *
 * Ethanol enters with evaporating perspiration and leaves through venting
 * and fuel-cell consumption. Concentration is capped by the Henry's-law
 * equilibrium with the current sweat concentration (the chamber can never
 * be more saturated than the liquid it samples).
 */

#include <algorithm>
#include <cmath>

#include "tacnet/physio/pk_model.hpp"
#include "tacnet/physio/types.hpp"

namespace tacnet::physio {

struct ChamberParams {
    // ppm/s contributed per (mL/hr perspiration x mg/dL sweat) at the
    // nominal 1% skin excretion fraction
    double emission_gain = 1.5e-6;
    double vent_rate_per_s = 7.0e-4;
    double cell_consumption_per_s = 3.0e-4;

    // chamber climate dynamics
    double rh_gain_pct_per_ml_hr = 0.05; // perspiration -> humidity uplift over ambient
    double rh_time_const_s = 300.0;
    double temp_time_const_s = 600.0;
};

/// Closed-form steady state of the gas balance (before the Henry cap).
inline double chamber_steady_state_ppm(double sweat_mg_dl, const SubjectParams& subject,
                                       const ChamberParams& p = {}) {
    const double influx = p.emission_gain * (subject.skin_excretion_fraction / 0.01) *
                          subject.perspiration_ml_hr * sweat_mg_dl;
    return influx / (p.vent_rate_per_s + p.cell_consumption_per_s);
}

/// One explicit-Euler step of the worn chamber. dt_s is 1 s in the pipeline.
inline ChamberState chamber_step(const ChamberState& state, double sweat_mg_dl,
                                 const SubjectParams& subject, const EnvState& env, double dt_s,
                                 const ChamberParams& p = {}, const HenryModel& henry = {}) {
    if (dt_s <= 0.0) throw std::invalid_argument("chamber_step: dt_s must be > 0");
    if (sweat_mg_dl < 0.0) throw std::invalid_argument("chamber_step: negative sweat concentration");

    ChamberState next = state;

    const double influx = p.emission_gain * (subject.skin_excretion_fraction / 0.01) *
                          subject.perspiration_ml_hr * sweat_mg_dl;
    const double exchange = p.vent_rate_per_s * (env.ambient_ethanol_ppm - state.gas_ppm) -
                            p.cell_consumption_per_s * state.gas_ppm;
    const double cap = henry_gas_ppm(sweat_mg_dl, state.chamber_temp_c, henry);
    next.gas_ppm = std::clamp(state.gas_ppm + dt_s * (influx + exchange), 0.0, cap);

    const double rh_target = std::min(
        100.0, env.ambient_rh_pct + p.rh_gain_pct_per_ml_hr * subject.perspiration_ml_hr);
    next.chamber_rh_pct += (rh_target - state.chamber_rh_pct) * dt_s / p.rh_time_const_s;
    next.chamber_temp_c += (env.skin_temp_c - state.chamber_temp_c) * dt_s / p.temp_time_const_s;
    return next;
}

/**
 * One step of a sealed calibration jar: the headspace relaxes toward the
 * Henry equilibrium of the liquid. The default time constant puts the
 * plateau at 25-30 minutes.
 */
inline ChamberState jar_step(const ChamberState& state, double liquid_mg_dl, double dt_s,
                             double time_const_s = 300.0, const HenryModel& henry = {}) {
    ChamberState next = state;
    const double eq = henry_gas_ppm(liquid_mg_dl, state.chamber_temp_c, henry);
    next.gas_ppm += (eq - state.gas_ppm) * dt_s / time_const_s;
    return next;
}

} // namespace tacnet::physio
