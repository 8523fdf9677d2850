#pragma once

/**
 * @file session_sim.hpp
 * @brief Ground-truth generator for one wear session on a 1 s virtual clock.
 *
 * Chains the BAC model, sweat partition, chamber balance and fuel-cell
 * transducer. Output is the per-second truth the device emulator samples.
 */

#include <filesystem>
#include <limits>
#include <utility>
#include <vector>

#include "tacnet/physio/chamber.hpp"
#include "tacnet/physio/fuel_cell.hpp"
#include "tacnet/physio/pk_model.hpp"
#include "tacnet/physio/types.hpp"

namespace tacnet::physio {

struct PhysioConfig {
    SubjectParams subject{};
    std::vector<DrinkEvent> drinks;
    EnvState env{};
    /// Step changes applied when session time reaches the given second.
    std::vector<std::pair<double, EnvState>> env_schedule;
    ChamberParams chamber{};
    FuelCellParams fuel_cell{};
    HenryModel henry{};
    double partition_coefficient = 1.0;
    double don_time_s = 0.0;
    double doff_time_s = std::numeric_limits<double>::infinity();
    /// Sudden chamber-humidity jumps (t_s, delta %RH): sweat bursts that
    /// exercise the fuel cell's transient response.
    std::vector<std::pair<double, double>> rh_jumps;
};

struct TruthSample {
    double t_s = 0.0;
    double bac_mg_dl = 0.0;
    double sweat_mg_dl = 0.0;
    ChamberState chamber{};
    double current_na = 0.0;
    bool on_body = false;
    double rh_rate_pct_per_s = 0.0;
};

class PhysioSim {
public:
    explicit PhysioSim(PhysioConfig config);

    /// Advance one second and return the truth at the new time.
    TruthSample step();

    double time_s() const { return t_s_; }
    const PhysioConfig& config() const { return cfg_; }

private:
    bool worn_at(double t) const { return t >= cfg_.don_time_s && t < cfg_.doff_time_s; }

    PhysioConfig cfg_;
    WidmarkIntegrator bac_;
    FuelCellSensor cell_;
    ChamberState chamber_;
    EnvState env_;
    size_t next_env_change_ = 0;
    double t_s_ = 0.0;
    double prev_rh_pct_;
    bool was_worn_ = false;
};

/// `t_s,bac_mg_dL,sweat_mg_dL,chamber_ppm,rh_pct,temp_C`
void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthSample>& samples);

} // namespace tacnet::physio
