#include "tacnet/physio/session_sim.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "tacnet/util/strfmt.hpp"

namespace tacnet::physio {

PhysioSim::PhysioSim(PhysioConfig config)
    : cfg_(std::move(config)),
      bac_(cfg_.subject, cfg_.drinks),
      cell_(cfg_.fuel_cell),
      env_(cfg_.env) {
    cfg_.env.validate();
    for (const auto& [t, env] : cfg_.env_schedule) {
        (void)t;
        env.validate();
    }
    chamber_.chamber_rh_pct = env_.ambient_rh_pct;
    chamber_.chamber_temp_c = env_.ambient_temp_c;
    chamber_.gas_ppm = env_.ambient_ethanol_ppm;
    prev_rh_pct_ = chamber_.chamber_rh_pct;
}

TruthSample PhysioSim::step() {
    constexpr double dt = 1.0;

    while (next_env_change_ < cfg_.env_schedule.size() &&
           cfg_.env_schedule[next_env_change_].first <= t_s_) {
        env_ = cfg_.env_schedule[next_env_change_].second;
        ++next_env_change_;
    }

    bac_.step(dt);
    t_s_ += dt;

    const bool worn = worn_at(t_s_);
    const double sweat = sweat_alcohol_mg_dl(bac_.bac_mg_dl(), cfg_.partition_coefficient);

    if (worn && !was_worn_) {
        // donning seals the chamber against ambient conditions
        chamber_.gas_ppm = env_.ambient_ethanol_ppm;
        chamber_.chamber_rh_pct = env_.ambient_rh_pct;
        chamber_.chamber_temp_c = env_.ambient_temp_c;
        cell_.reset();
    }

    if (worn) {
        chamber_ = chamber_step(chamber_, sweat, cfg_.subject, env_, dt, cfg_.chamber, cfg_.henry);
        for (const auto& [t_jump, delta] : cfg_.rh_jumps) {
            if (t_jump > t_s_ - dt && t_jump <= t_s_)
                chamber_.chamber_rh_pct =
                    std::clamp(chamber_.chamber_rh_pct + delta, 0.0, 100.0);
        }
    } else {
        chamber_.gas_ppm = env_.ambient_ethanol_ppm;
        chamber_.chamber_rh_pct = env_.ambient_rh_pct;
        chamber_.chamber_temp_c = env_.ambient_temp_c;
    }
    was_worn_ = worn;

    TruthSample s;
    s.t_s = t_s_;
    s.bac_mg_dl = bac_.bac_mg_dl();
    s.sweat_mg_dl = sweat;
    s.chamber = chamber_;
    s.on_body = worn;
    s.rh_rate_pct_per_s = (chamber_.chamber_rh_pct - prev_rh_pct_) / dt;
    prev_rh_pct_ = chamber_.chamber_rh_pct;

    const double gradient = worn ? chamber_.chamber_temp_c - env_.ambient_temp_c : 0.0;
    const double t_donned = worn ? t_s_ - cfg_.don_time_s : -1.0;
    s.current_na = cell_.current_na(chamber_.gas_ppm, gradient, s.rh_rate_pct_per_s, t_donned, dt);
    return s;
}

void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthSample>& samples) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_truth_csv: cannot open " + path.string());
    out << "t_s,bac_mg_dL,sweat_mg_dL,chamber_ppm,rh_pct,temp_C\n";
    for (const auto& s : samples) {
        out << fmt_g(s.t_s) << ',' << fmt_g(s.bac_mg_dl) << ',' << fmt_g(s.sweat_mg_dl) << ','
            << fmt_g(s.chamber.gas_ppm) << ',' << fmt_g(s.chamber.chamber_rh_pct) << ','
            << fmt_g(s.chamber.chamber_temp_c) << '\n';
    }
}

} // namespace tacnet::physio
