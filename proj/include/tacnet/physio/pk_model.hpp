#pragma once

/**
 * @file pk_model.hpp
 * @brief Blood-alcohol kinetics and the liquid->vapor conversion chain.
 *
 * bac_profile integrates a single-compartment model; sweat_alcohol and
 * henry_gas_ppm are the algebraic links from blood concentration to the
 * ethanol vapor concentration the sensor ultimately sees.
 */

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "tacnet/physio/types.hpp"

namespace tacnet::physio {

/// Blood -> sweat partition. Sweat is mostly water, so the default is 1.
inline double sweat_alcohol_mg_dl(double bac_mg_dl, double partition_coefficient = 1.0) {
    if (bac_mg_dl < 0.0) throw std::invalid_argument("sweat_alcohol_mg_dl: negative concentration");
    return partition_coefficient * bac_mg_dl;
}

/**
 * Henry's-law liquid/vapor equilibrium. Anchored at 1.0 ppm per mg/dL at
 * 25 degC; the per-degree multiplier is a hook that defaults to identity.
 */
struct HenryModel {
    double ppm_per_mg_dl_25c = 1.0;
    double per_deg_c_multiplier = 0.0; // fractional slope per degC away from 25

    double factor(double temp_c) const {
        return ppm_per_mg_dl_25c * (1.0 + per_deg_c_multiplier * (temp_c - 25.0));
    }
};

inline double henry_gas_ppm(double liquid_mg_dl, double temp_c = 25.0, const HenryModel& model = {}) {
    if (liquid_mg_dl < 0.0) throw std::invalid_argument("henry_gas_ppm: negative concentration");
    return model.factor(temp_c) * liquid_mg_dl;
}

/**
 * Incremental integrator for the BAC model. State is the unabsorbed gut
 * mass and the blood concentration; stepping is exact for the gut
 * (exponential update) and trapezoidal for the compartment, clamped at 0.
 */
class WidmarkIntegrator {
public:
    WidmarkIntegrator(const SubjectParams& subject, std::vector<DrinkEvent> drinks)
        : drinks_(std::move(drinks)),
          ka_per_s_(subject.absorption_rate_per_hr / 3600.0),
          beta_mg_dl_s_(subject.elimination_mg_dl_hr / 3600.0),
          mg_dl_per_g_(100.0 / (subject.widmark_r * subject.body_mass_kg)) {
        subject.validate();
        for (const auto& d : drinks_) d.validate();
    }

    double bac_mg_dl() const { return bac_; }
    double time_s() const { return t_; }

    /// Advance by dt_s (split internally so drink edges land on substep boundaries).
    void step(double dt_s) {
        double remaining = dt_s;
        while (remaining > 1e-12) {
            double h = std::min(remaining, 1.0);
            // do not integrate across a drink start/end inside a substep
            for (const auto& d : drinks_) {
                for (double edge : {d.t_start_s, d.t_start_s + d.duration_s}) {
                    if (edge > t_ + 1e-12 && edge < t_ + h - 1e-12) h = edge - t_;
                }
            }
            substep(h);
            remaining -= h;
        }
    }

private:
    void substep(double h) {
        const double u = infusion_g_per_s(t_ + 0.5 * h);
        const double gut_next = gut_g_ * std::exp(-ka_per_s_ * h) +
                                (u / ka_per_s_) * (1.0 - std::exp(-ka_per_s_ * h));
        const double absorbed_g = u * h - (gut_next - gut_g_);
        gut_g_ = gut_next;
        bac_ = std::max(0.0, bac_ + absorbed_g * mg_dl_per_g_ - beta_mg_dl_s_ * h);
        t_ += h;
    }

    double infusion_g_per_s(double t) const {
        double u = 0.0;
        for (const auto& d : drinks_)
            if (t >= d.t_start_s && t < d.t_start_s + d.duration_s) u += d.dose_g() / d.duration_s;
        return u;
    }

    std::vector<DrinkEvent> drinks_;
    double ka_per_s_;
    double beta_mg_dl_s_;
    double mg_dl_per_g_;
    double t_ = 0.0;
    double gut_g_ = 0.0;
    double bac_ = 0.0;
};

/**
 * BAC series on an arbitrary strictly increasing time grid (seconds).
 * Integration starts from zero state at the first grid point.
 */
inline std::vector<double> bac_profile(const SubjectParams& subject,
                                       const std::vector<DrinkEvent>& drinks,
                                       std::span<const double> t_grid_s) {
    if (t_grid_s.empty()) throw std::invalid_argument("bac_profile: empty time grid");
    for (size_t i = 1; i < t_grid_s.size(); ++i)
        if (!(t_grid_s[i] > t_grid_s[i - 1]))
            throw std::invalid_argument("bac_profile: time grid must be strictly increasing");

    WidmarkIntegrator integ(subject, drinks);
    if (t_grid_s.front() > 0.0) integ.step(t_grid_s.front());

    std::vector<double> out;
    out.reserve(t_grid_s.size());
    out.push_back(integ.bac_mg_dl());
    for (size_t i = 1; i < t_grid_s.size(); ++i) {
        integ.step(t_grid_s[i] - t_grid_s[i - 1]);
        out.push_back(integ.bac_mg_dl());
    }
    return out;
}

} // namespace tacnet::physio
