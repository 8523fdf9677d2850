#pragma once

#include <stdexcept>
#include <string>

namespace tacnet::physio {

/**
 * Pharmacokinetic and perspiration parameters for one simulated subject.
 *
 * BAC follows a single-compartment model: first-order gut absorption into
 * a Widmark volume of distribution, zero-order elimination clamped at 0.
 */
struct SubjectParams {
    double body_mass_kg = 70.0;
    double widmark_r = 0.68;              // volume-of-distribution ratio, dimensionless
    double absorption_rate_per_hr = 6.0;  // first-order gut absorption constant
    double elimination_mg_dl_hr = 15.0;   // zero-order elimination rate
    double perspiration_ml_hr = 100.0;    // local perspiration rate
    double skin_excretion_fraction = 0.01;

    void validate() const {
        require(body_mass_kg > 0.0, "body_mass_kg must be > 0");
        require(widmark_r > 0.0, "widmark_r must be > 0");
        require(absorption_rate_per_hr > 0.0, "absorption_rate_per_hr must be > 0");
        require(elimination_mg_dl_hr > 0.0, "elimination_mg_dl_hr must be > 0");
        require(perspiration_ml_hr >= 20.8 && perspiration_ml_hr <= 1800.0,
                "perspiration_ml_hr outside [20.8, 1800]");
        require(skin_excretion_fraction > 0.0 && skin_excretion_fraction <= 0.05,
                "skin_excretion_fraction outside (0, 0.05]");
    }

private:
    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(std::string("SubjectParams: ") + msg);
    }
};

/// One ingestion event; dose is spread uniformly over duration_s.
struct DrinkEvent {
    double t_start_s = 0.0; // seconds since session start
    double volume_ml = 118.0;
    double abv_fraction = 0.15;
    double duration_s = 300.0;

    /// Grams of ethanol in the drink (density 0.789 g/mL).
    double dose_g() const { return volume_ml * abv_fraction * 0.789; }

    void validate() const {
        if (duration_s <= 0.0) throw std::invalid_argument("DrinkEvent: duration_s must be > 0");
        if (abv_fraction < 0.0 || abv_fraction > 1.0)
            throw std::invalid_argument("DrinkEvent: abv_fraction outside [0,1]");
        if (volume_ml < 0.0) throw std::invalid_argument("DrinkEvent: volume_ml must be >= 0");
    }
};

/// Ambient and skin-side boundary conditions.
struct EnvState {
    double ambient_temp_c = 25.0;
    double skin_temp_c = 33.0;
    double ambient_rh_pct = 40.0;
    double ambient_ethanol_ppm = 0.0;

    void validate() const {
        if (ambient_rh_pct < 0.0 || ambient_rh_pct > 100.0)
            throw std::invalid_argument("EnvState: ambient_rh_pct outside [0,100]");
        if (ambient_ethanol_ppm < 0.0)
            throw std::invalid_argument("EnvState: ambient_ethanol_ppm must be >= 0");
    }
};

/// Gas and climate state of the skin-side collection chamber.
struct ChamberState {
    double gas_ppm = 0.0;
    double chamber_rh_pct = 40.0;
    double chamber_temp_c = 25.0;
};

/**
 * Thermal baseline drift and humidity-transient parameters of the fuel cell.
 * Drift follows plateau * (1 - exp(-t/tau)) with plateau proportional to the
 * temperature gradient across the sensor.
 */
struct DriftParams {
    double plateau_ppm_per_deg_c = 0.72625; // 5.81 ppm at the default 8 degC on-body gradient
    double time_const_s = 900.0;
    double humid_spike_max_ppm = 3.0;
    double humid_spike_duration_s = 450.0;

    void validate() const {
        if (time_const_s <= 0.0) throw std::invalid_argument("DriftParams: time_const_s must be > 0");
        if (humid_spike_max_ppm < 0.0 || humid_spike_max_ppm > 3.0)
            throw std::invalid_argument("DriftParams: humid_spike_max_ppm outside [0,3]");
        if (humid_spike_duration_s < 300.0 || humid_spike_duration_s > 600.0)
            throw std::invalid_argument("DriftParams: humid_spike_duration_s outside [300,600]");
    }
};

} // namespace tacnet::physio
