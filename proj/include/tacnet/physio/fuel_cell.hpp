#pragma once

/**
 * @file fuel_cell.hpp
 * @brief Fuel-cell transducer: ethanol ppm to output current, plus the two
 *        non-ideal terms observed on-body (thermal baseline drift and the
 *        transient response to sudden humidity changes).
 */

#include <cmath>
#include <limits>

#include "tacnet/physio/types.hpp"

namespace tacnet::physio {

struct FuelCellParams {
    // chosen so the reference TIA gain (120 kOhm into a 3 V 12-bit ADC)
    // yields 185.0 counts/ppm
    double sensitivity_na_per_ppm = 185.0 * 3.0 / (4095.0 * 120e3) * 1e9;
    DriftParams drift{};
    double rh_rate_threshold_pct_per_s = 0.2;
};

/// Thermal baseline drift in ppm-equivalent. Zero at don time, approaches
/// sign(gradient) * plateau with the configured time constant.
inline double baseline_drift_ppm(double temp_gradient_c, double t_since_donned_s,
                                 const DriftParams& drift = {}) {
    if (t_since_donned_s < 0.0) return 0.0;
    const double plateau = drift.plateau_ppm_per_deg_c * temp_gradient_c;
    return plateau * (1.0 - std::exp(-t_since_donned_s / drift.time_const_s));
}

/**
 * Stateful sensor front: tracks the humidity-transient pulse, which fires
 * when |dRH/dt| crosses the threshold and follows a raised cosine over the
 * configured duration (peak at mid-pulse, zero at both ends).
 */
class FuelCellSensor {
public:
    explicit FuelCellSensor(FuelCellParams params = {}) : p_(params) { p_.drift.validate(); }

    const FuelCellParams& params() const { return p_; }

    double transient_ppm() const { return last_transient_ppm_; }

    /// Output current for one 1 Hz evaluation; advances the transient state by dt_s.
    double current_na(double ppm, double temp_gradient_c, double rh_rate_pct_per_s,
                      double t_since_donned_s, double dt_s = 1.0) {
        if (ppm < 0.0) throw std::invalid_argument("fuel_cell: negative gas concentration");

        const bool pulse_active = pulse_t_s_ < p_.drift.humid_spike_duration_s;
        if (!pulse_active && std::abs(rh_rate_pct_per_s) > p_.rh_rate_threshold_pct_per_s)
            pulse_t_s_ = 0.0;

        double transient = 0.0;
        if (pulse_t_s_ < p_.drift.humid_spike_duration_s) {
            const double phase = pulse_t_s_ / p_.drift.humid_spike_duration_s;
            transient = 0.5 * p_.drift.humid_spike_max_ppm * (1.0 - std::cos(2.0 * M_PI * phase));
            pulse_t_s_ += dt_s;
        }
        last_transient_ppm_ = transient;

        const double drift = baseline_drift_ppm(temp_gradient_c, t_since_donned_s, p_.drift);
        return p_.sensitivity_na_per_ppm * (ppm + drift + transient);
    }

    void reset() {
        pulse_t_s_ = std::numeric_limits<double>::infinity();
        last_transient_ppm_ = 0.0;
    }

private:
    FuelCellParams p_;
    double pulse_t_s_ = std::numeric_limits<double>::infinity();
    double last_transient_ppm_ = 0.0;
};

} // namespace tacnet::physio
