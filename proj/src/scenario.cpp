#include "tacnet/harness/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tacnet/analytics/metrics.hpp"
#include "tacnet/gateway/gateway.hpp"
#include "tacnet/harness/plots.hpp"
#include "tacnet/transport/frame_link.hpp"
#include "tacnet/tsdb/service.hpp"
#include "tacnet/util/rng.hpp"
#include "tacnet/util/strfmt.hpp"

namespace tacnet::harness {

using nlohmann::json;

ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "calibration_routine") return ScenarioKind::calibration_routine;
    if (s == "baseline_characterization") return ScenarioKind::baseline_characterization;
    if (s == "one_drink") return ScenarioKind::one_drink;
    if (s == "two_drink") return ScenarioKind::two_drink;
    if (s == "clothing_comparison") return ScenarioKind::clothing_comparison;
    if (s == "interpersonal_comparison") return ScenarioKind::interpersonal_comparison;
    if (s == "custom") return ScenarioKind::custom;
    throw std::invalid_argument("unknown scenario: " + s);
}

const char* to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::calibration_routine: return "calibration_routine";
    case ScenarioKind::baseline_characterization: return "baseline_characterization";
    case ScenarioKind::one_drink: return "one_drink";
    case ScenarioKind::two_drink: return "two_drink";
    case ScenarioKind::clothing_comparison: return "clothing_comparison";
    case ScenarioKind::interpersonal_comparison: return "interpersonal_comparison";
    case ScenarioKind::custom: return "custom";
    }
    return "?";
}

void ScenarioConfig::validate() const {
    physio.subject.validate();
    physio.env.validate();
    physio.fuel_cell.drift.validate();
    device.gains.validate();
    for (const auto& d : physio.drinks) d.validate();

    const bool comparison = scenario == ScenarioKind::clothing_comparison ||
                            scenario == ScenarioKind::interpersonal_comparison;
    if (comparison && !physio_b)
        throw std::invalid_argument("comparison scenario requires a second arm (subject_b)");
    if (physio_b) {
        physio_b->subject.validate();
        physio_b->env.validate();
    }

    if (scenario != ScenarioKind::calibration_routine) {
        const double len = scenario == ScenarioKind::baseline_characterization
                               ? bench_wait_s + wear_duration_s
                               : baseline_wait_s + wear_after_drink_s;
        if (std::fmod(len, 60.0) != 0.0)
            throw std::invalid_argument("session length must be whole minutes");
        for (const auto& d : physio.drinks)
            if (d.t_start_s + d.duration_s > len)
                throw std::invalid_argument("drink extends past session end");
    }
    if (scenario == ScenarioKind::calibration_routine) {
        if (jars_pct_wv.size() < 2)
            throw std::invalid_argument("calibration routine needs at least two jars");
        if (jar_window_start_s >= jar_duration_s)
            throw std::invalid_argument("jar window must start before the jar run ends");
    }
}

namespace {

double session_length_s(const ScenarioConfig& cfg) {
    return cfg.scenario == ScenarioKind::baseline_characterization
               ? cfg.bench_wait_s + cfg.wear_duration_s
               : cfg.baseline_wait_s + cfg.wear_after_drink_s;
}

std::vector<analytics::TimeRange> default_fit_windows(const ScenarioConfig& cfg) {
    const double len = session_length_s(cfg);
    if (cfg.scenario == ScenarioKind::baseline_characterization)
        return {{0.0, len}}; // entire recording is alcohol-free
    // last quarter-hour of the baseline wait plus the alcohol-free tail
    return {{cfg.baseline_wait_s - 900.0, cfg.baseline_wait_s}, {len - 3600.0, len}};
}

analytics::CalibrationCurve ground_truth_curve(const ScenarioConfig& cfg) {
    analytics::CalibrationCurve c;
    c.ref_gain_index = cfg.device.ref_gain_index;
    c.slope_counts_per_ppm = cfg.physio.fuel_cell.sensitivity_na_per_ppm * 1e-9 *
                             cfg.device.gains.resistance(cfg.device.ref_gain_index) /
                             cfg.device.gains.v_fullscale * 4095.0;
    c.intercept_counts = cfg.device.gains.offset_counts();
    c.fit_r2 = 1.0;
    return c;
}

/// Upload sink that fails inside configured virtual-time windows.
class OutageSink : public gateway::WriteSink {
public:
    OutageSink(gateway::WriteSink& inner, Clock& clock, int64_t start_ns,
               std::vector<std::pair<double, double>> windows)
        : inner_(inner), clock_(clock), start_ns_(start_ns), windows_(std::move(windows)) {}

    Result write(const std::string& device, std::span<const tsdb::SeriesPoint> points) override {
        const double t = static_cast<double>(clock_.now_ns() - start_ns_) / 1e9;
        for (const auto& [t0, t1] : windows_)
            if (t >= t0 && t < t1) return {};
        return inner_.write(device, points);
    }

private:
    gateway::WriteSink& inner_;
    Clock& clock_;
    int64_t start_ns_;
    std::vector<std::pair<double, double>> windows_;
};

void write_series_csv(const std::filesystem::path& path, const analytics::Series& s,
                      const std::string& value_header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "t_s," << value_header << '\n';
    for (size_t i = 0; i < s.size(); ++i) out << fmt_g(s.t_s[i]) << ',' << fmt_g(s.v[i]) << '\n';
}

} // namespace

CalibrationReport run_calibration_routine(const ScenarioConfig& cfg) {
    cfg.validate();
    CalibrationReport report;
    report.ground_truth_counts_per_ppm = ground_truth_curve(cfg).slope_counts_per_ppm;

    const auto flash_dir = cfg.output_dir.empty() ? std::filesystem::temp_directory_path()
                                                  : cfg.output_dir;
    std::filesystem::create_directories(flash_dir);

    std::vector<analytics::CalPoint> points;
    int jar_no = 0;
    for (double pct : cfg.jars_pct_wv) {
        JarResult jar;
        jar.liquid_pct_wv = pct;
        jar.liquid_mg_dl = pct * 1000.0; // % w/v -> mg/dL
        jar.expected_ppm = physio::henry_gas_ppm(jar.liquid_mg_dl, 25.0, cfg.physio.henry);

        device::DeviceConfig dev = cfg.device;
        dev.noise_seed = cfg.device.noise_seed + static_cast<uint64_t>(101 + jar_no);
        const auto flash = flash_dir / ("jar" + std::to_string(jar_no) + ".flash");
        std::filesystem::remove(flash);
        device::DeviceEmulator emu(dev, flash);
        physio::FuelCellSensor cell(cfg.physio.fuel_cell);
        physio::ChamberState state;
        state.chamber_temp_c = 25.0;
        state.chamber_rh_pct = cfg.physio.env.ambient_rh_pct;

        double run_s = cfg.jar_duration_s;
        bool extended = false;
        for (double t = 1.0; t <= run_s; t += 1.0) {
            state = physio::jar_step(state, jar.liquid_mg_dl, 1.0, 300.0, cfg.physio.henry);
            device::AnalogInputs in;
            in.current_na = cell.current_na(state.gas_ppm, 0.0, 0.0, -1.0);
            in.temp_c = state.chamber_temp_c;
            in.rh_pct = state.chamber_rh_pct;
            in.on_body = false;
            emu.tick(in);

            // plateau check at the nominal end: if the window is still
            // sloping, run another ten minutes once
            if (t == run_s && !extended && emu.latest_rec_id() >= 2) {
                const auto recs = emu.fifo().read_range(1, emu.latest_rec_id());
                const size_t n = recs.size();
                if (n >= 2 && std::abs(recs[n - 1].v1 - recs[n - 2].v1) >
                                  std::max(0.02 * std::abs(recs[n - 1].v1 -
                                                           cfg.device.gains.offset_counts()),
                                           3.0 * cfg.device.noise_sigma_counts_clean)) {
                    std::cerr << "calibration: jar " << jar_no
                              << " not plateaued, extending run\n";
                    run_s += 600.0;
                    extended = true;
                }
            }
        }
        jar.plateaued = !extended;
        jar.measured_ppm = state.gas_ppm;

        // minute records covering the equilibrium extraction window
        const auto recs = emu.fifo().read_range(1, emu.latest_rec_id());
        const double w0 = extended ? run_s - (cfg.jar_duration_s - cfg.jar_window_start_s)
                                   : cfg.jar_window_start_s;
        double sum = 0.0;
        size_t n = 0;
        for (const auto& rec : recs) {
            const double t_end = 60.0 * rec.rec_id;
            if (t_end > w0 && t_end <= run_s) {
                sum += rec.v1;
                ++n;
            }
        }
        if (n == 0) throw std::runtime_error("calibration: empty extraction window");
        jar.mean_counts = sum / static_cast<double>(n);

        points.push_back({jar.expected_ppm, jar.mean_counts});
        report.jars.push_back(jar);
        ++jar_no;
    }

    report.curve = analytics::fit_calibration(points, cfg.device.ref_gain_index);
    if (!cfg.output_dir.empty())
        write_calibration_report(cfg.output_dir / "calibration.json", report);
    return report;
}

SessionResult run_session(const ScenarioConfig& cfg, const physio::PhysioConfig& physio_cfg,
                          uint64_t arm_seed, const std::string& arm) {
    const double len = session_length_s(cfg);
    const double drink_t =
        physio_cfg.drinks.empty() ? 0.0 : physio_cfg.drinks.front().t_start_s;

    const auto out = arm.empty() ? cfg.output_dir : cfg.output_dir / arm;
    std::filesystem::create_directories(out);

    SessionResult r;
    r.device_name = cfg.device.name;
    r.drink_t_s = drink_t;
    r.session_len_s = len;

    // calibration parameters for the conversion stage
    if (cfg.calibrate_first) {
        ScenarioConfig cal_cfg = cfg;
        cal_cfg.scenario = ScenarioKind::calibration_routine;
        cal_cfg.output_dir = out / "calibration";
        r.curve = run_calibration_routine(cal_cfg).curve;
    } else {
        r.curve = ground_truth_curve(cfg);
    }

    // the full desk-scale stack on one virtual clock
    VirtualClock clock;
    const int64_t start_ns = clock.now_ns();

    tsdb::SeriesStore store(out / "service");
    tsdb::Service service(store);
    const int port = service.start(0);

    gateway::HttpWriteSink http("http://127.0.0.1:" + std::to_string(port));
    OutageSink sink(http, clock, start_ns, cfg.service_outages_s);

    device::DeviceConfig dev = cfg.device;
    dev.noise_seed = cfg.device.noise_seed ^ arm_seed;
    const auto flash = out / "flash.bin";
    std::filesystem::remove(flash);
    device::DeviceEmulator emu(dev, flash);

    transport::InProcessHub hub;
    hub.add_device(emu);

    gateway::GatewayConfig gw_cfg;
    gw_cfg.filter_prefix = cfg.device.name.substr(0, 3);
    gw_cfg.spool_dir = out / "spool";
    gw_cfg.csv_dir = out / "gateway";
    gateway::Gateway gw(gw_cfg, hub, sink, clock);

    const auto found = gw.scan();
    if (found.empty()) throw std::runtime_error("run_session: device did not appear in scan");
    if (!gw.connect(found.front()) || !gw.subscribe())
        throw std::runtime_error("run_session: could not open device session");

    physio::PhysioSim sim(physio_cfg);
    Rng breath_rng(arm_seed * 2 + 1);
    bool breath_active = !physio_cfg.drinks.empty();
    std::vector<physio::TruthSample> truth;
    truth.reserve(static_cast<size_t>(len));

    for (int64_t t = 1; t <= static_cast<int64_t>(len); ++t) {
        const auto s = sim.step();
        truth.push_back(s);

        device::AnalogInputs in;
        in.current_na = s.current_na;
        in.temp_c = s.chamber.chamber_temp_c;
        in.rh_pct = s.chamber.chamber_rh_pct;
        in.on_body = s.on_body;
        emu.tick(in);

        clock.advance_s(1);
        hub.pump();
        gw.poll();

        r.truth_bac.push(static_cast<double>(t), s.bac_mg_dl);
        r.truth_chamber.push(static_cast<double>(t), s.chamber.gas_ppm);

        if (breath_active && t > static_cast<int64_t>(drink_t) &&
            std::fmod(static_cast<double>(t) - drink_t, cfg.breathalyzer_interval_s) == 0.0) {
            const double noise =
                breath_rng.uniform(-cfg.breathalyzer_noise_mg_dl, cfg.breathalyzer_noise_mg_dl);
            const double reading = std::max(0.0, s.bac_mg_dl + noise);
            r.breathalyzer.push(static_cast<double>(t), reading);
            if (reading == 0.0) breath_active = false; // protocol: stop at the first zero
        }
    }

    gw.flush();
    const auto backfill = gw.backfill();
    gw.flush();
    r.backfill_retries = backfill.retries_used;

    // pull everything back from the service
    const auto points = store.query(cfg.device.name, start_ns,
                                    start_ns + (static_cast<int64_t>(len) + 60) * 1'000'000'000LL);
    for (const auto& p : points) {
        const double t_s = static_cast<double>(p.t_ns - start_ns) / 1e9;
        if (p.source == tsdb::Source::backfill) {
            r.minute_counts.push(t_s, p.alcohol_raw);
            r.temp_c.push(t_s, p.temp_c);
            r.rh_pct.push(t_s, p.rh_pct);
        } else {
            ++r.realtime_points_at_service;
        }
    }
    for (size_t i = 0; i < r.minute_counts.size(); ++i)
        r.tac_raw_ppm.push(r.minute_counts.t_s[i],
                           analytics::adc_to_ppm(r.minute_counts.v[i], r.curve.ref_gain_index,
                                                 r.curve, cfg.device.gains));

    auto windows = cfg.baseline_fit_windows.empty() ? default_fit_windows(cfg)
                                                    : cfg.baseline_fit_windows;
    r.tac_corrected_ppm = analytics::remove_baseline(r.tac_raw_ppm, windows);

    // reconciliation counters
    r.wear_minutes = static_cast<uint64_t>(len) / 60;
    r.flash_records = emu.fifo().size();
    r.backfill_points_at_service = r.minute_counts.size();
    r.realtime_pushes = emu.push_count();

    // scalar metrics (drink sessions only)
    if (r.breathalyzer.size() >= 2) {
        r.bac_auc_mg_dl_min =
            analytics::auc(r.breathalyzer, r.breathalyzer.t_s.front(), r.breathalyzer.t_s.back());
        r.bac_peak_mg_dl = analytics::peak_value(r.breathalyzer);
        r.bac_peak_time_s = analytics::peak_time_s(r.breathalyzer);
        r.tac_raw_auc_ppm_min = analytics::auc(r.tac_raw_ppm, drink_t, len);
        r.tac_corrected_auc_ppm_min = analytics::auc(r.tac_corrected_ppm, drink_t, len);
        r.tac_peak_ppm = analytics::peak_value(r.tac_corrected_ppm);
        r.tac_peak_time_s = analytics::peak_time_s(r.tac_corrected_ppm);
        r.peak_delay_s = r.tac_peak_time_s - r.bac_peak_time_s;
    }

    // artifacts
    physio::write_truth_csv(out / "truth.csv", truth);
    write_series_csv(out / "breathalyzer.csv", r.breathalyzer, "bac_mg_dL");
    write_series_csv(out / "tac_raw.csv", r.tac_raw_ppm, "tac_ppm");
    write_series_csv(out / "tac_corrected.csv", r.tac_corrected_ppm, "tac_ppm");
    {
        std::ofstream exp(out / "export.csv", std::ios::binary);
        exp << tsdb::points_to_csv(points);
    }
    write_session_metrics(out / "metrics.json", r);
    if (cfg.emit_plots) {
        std::filesystem::create_directories(out / "plots");
        write_svg_chart(out / "plots" / "bac_tac.svg", "BAC vs corrected TACg", "session time (s)",
                        "mg/dL | ppm",
                        {{"BAC (breathalyzer)", &r.breathalyzer, "#d62728"},
                         {"TACg corrected", &r.tac_corrected_ppm, "#1f77b4"}});
        write_svg_chart(out / "plots" / "alcohol_temp_rh.svg", "Minute averages", "session time (s)",
                        "mixed units",
                        {{"alcohol (ppm, raw)", &r.tac_raw_ppm, "#1f77b4"},
                         {"temperature (degC)", &r.temp_c, "#d62728"},
                         {"humidity (%RH)", &r.rh_pct, "#2ca02c"}});
    }

    service.stop();
    return r;
}

SessionResult run_single(const ScenarioConfig& cfg) {
    cfg.validate();
    return run_session(cfg, cfg.physio, cfg.seed, "");
}

ComparisonResult run_comparison(const ScenarioConfig& cfg) {
    cfg.validate();
    ComparisonResult res;
    if (cfg.scenario == ScenarioKind::clothing_comparison ||
        cfg.scenario == ScenarioKind::interpersonal_comparison) {
        res.a = run_session(cfg, cfg.physio, cfg.seed * 2 + 1, "arm_a");
        res.b = run_session(cfg, *cfg.physio_b, cfg.seed * 2 + 2, "arm_b");
        res.bac_auc_ratio = analytics::auc_ratio(res.a.bac_auc_mg_dl_min, res.b.bac_auc_mg_dl_min);
        res.tac_raw_auc_ratio =
            analytics::auc_ratio(res.a.tac_raw_auc_ppm_min, res.b.tac_raw_auc_ppm_min);
        res.tac_corrected_auc_ratio = analytics::auc_ratio(res.a.tac_corrected_auc_ppm_min,
                                                           res.b.tac_corrected_auc_ppm_min);
        write_comparison_metrics(cfg.output_dir / "comparison.json", res);
    } else {
        res.a = run_session(cfg, cfg.physio, cfg.seed, "");
    }
    return res;
}

void write_session_metrics(const std::filesystem::path& path, const SessionResult& r) {
    nlohmann::ordered_json j;
    j["device"] = r.device_name;
    j["session"]["drink_t_s"] = r.drink_t_s;
    j["session"]["length_s"] = r.session_len_s;
    j["calibration"]["slope_counts_per_ppm"] = r.curve.slope_counts_per_ppm;
    j["calibration"]["intercept_counts"] = r.curve.intercept_counts;
    j["calibration"]["r2"] = r.curve.fit_r2;
    j["bac"]["auc_mg_dl_min"] = r.bac_auc_mg_dl_min;
    j["bac"]["peak_mg_dl"] = r.bac_peak_mg_dl;
    j["bac"]["peak_time_s"] = r.bac_peak_time_s;
    j["tac_raw"]["auc_ppm_min"] = r.tac_raw_auc_ppm_min;
    j["tac_corrected"]["auc_ppm_min"] = r.tac_corrected_auc_ppm_min;
    j["tac_corrected"]["peak_ppm"] = r.tac_peak_ppm;
    j["tac_corrected"]["peak_time_s"] = r.tac_peak_time_s;
    j["peak_delay_s"] = r.peak_delay_s;
    j["pipeline"]["wear_minutes"] = r.wear_minutes;
    j["pipeline"]["flash_records"] = r.flash_records;
    j["pipeline"]["backfill_points"] = r.backfill_points_at_service;
    j["pipeline"]["realtime_pushes"] = r.realtime_pushes;
    j["pipeline"]["realtime_points"] = r.realtime_points_at_service;
    j["pipeline"]["backfill_retries"] = r.backfill_retries;
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
}

void write_comparison_metrics(const std::filesystem::path& path, const ComparisonResult& r) {
    nlohmann::ordered_json j;
    j["ratios"]["bac_auc"] = r.bac_auc_ratio;
    j["ratios"]["tac_raw_auc"] = r.tac_raw_auc_ratio;
    j["ratios"]["tac_corrected_auc"] = r.tac_corrected_auc_ratio;
    j["arm_a"]["bac_auc_mg_dl_min"] = r.a.bac_auc_mg_dl_min;
    j["arm_a"]["tac_corrected_auc_ppm_min"] = r.a.tac_corrected_auc_ppm_min;
    j["arm_b"]["bac_auc_mg_dl_min"] = r.b.bac_auc_mg_dl_min;
    j["arm_b"]["tac_corrected_auc_ppm_min"] = r.b.tac_corrected_auc_ppm_min;
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
}

void write_calibration_report(const std::filesystem::path& path, const CalibrationReport& r) {
    std::filesystem::create_directories(path.parent_path());
    nlohmann::ordered_json j;
    j["slope_counts_per_ppm"] = r.curve.slope_counts_per_ppm;
    j["intercept_counts"] = r.curve.intercept_counts;
    j["r2"] = r.curve.fit_r2;
    j["ref_gain_index"] = r.curve.ref_gain_index;
    j["ground_truth_counts_per_ppm"] = r.ground_truth_counts_per_ppm;
    j["jars"] = nlohmann::ordered_json::array();
    for (const auto& jar : r.jars) {
        nlohmann::ordered_json jj;
        jj["liquid_pct_wv"] = jar.liquid_pct_wv;
        jj["liquid_mg_dl"] = jar.liquid_mg_dl;
        jj["expected_ppm"] = jar.expected_ppm;
        jj["equilibrium_ppm"] = jar.measured_ppm;
        jj["mean_counts"] = jar.mean_counts;
        jj["plateaued"] = jar.plateaued;
        j["jars"].push_back(std::move(jj));
    }
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
}

AnalyzeResult analyze_export_csv(const std::filesystem::path& csv_file,
                                 const analytics::CalibrationCurve& curve,
                                 const device::GainTable& gains,
                                 std::vector<analytics::TimeRange> fit_windows) {
    std::ifstream in(csv_file);
    if (!in) throw std::runtime_error("analyze: cannot open " + csv_file.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("analyze: empty file");

    AnalyzeResult res;
    std::optional<int64_t> t0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t_ns_s, device, alcohol_s, temp_s, rh_s, source;
        std::getline(ss, t_ns_s, ',');
        std::getline(ss, device, ',');
        std::getline(ss, alcohol_s, ',');
        std::getline(ss, temp_s, ',');
        std::getline(ss, rh_s, ',');
        std::getline(ss, source, ',');
        if (source != "backfill") continue; // minute records carry the session
        const int64_t t_ns = std::stoll(t_ns_s);
        if (!t0) t0 = t_ns;
        const double t_s = static_cast<double>(t_ns - *t0) / 1e9;
        res.raw_ppm.push(t_s, analytics::adc_to_ppm(std::stod(alcohol_s), curve.ref_gain_index,
                                                    curve, gains));
    }
    if (res.raw_ppm.size() == 0) throw std::runtime_error("analyze: no backfill points in export");

    if (fit_windows.empty())
        fit_windows.push_back({res.raw_ppm.t_s.front(), res.raw_ppm.t_s.back()});
    res.corrected_ppm = analytics::remove_baseline(res.raw_ppm, fit_windows);
    res.raw_auc_ppm_min =
        analytics::auc(res.raw_ppm, res.raw_ppm.t_s.front(), res.raw_ppm.t_s.back());
    res.corrected_auc_ppm_min =
        analytics::auc(res.corrected_ppm, res.corrected_ppm.t_s.front(), res.corrected_ppm.t_s.back());
    return res;
}

ScenarioConfig default_scenario(ScenarioKind kind) {
    ScenarioConfig cfg;
    cfg.scenario = kind;
    cfg.seed = 7;

    const auto standard_drink = [](double t) {
        physio::DrinkEvent d;
        d.t_start_s = t;
        d.volume_ml = 118.0;
        d.abv_fraction = 0.15;
        d.duration_s = 300.0;
        return d;
    };

    switch (kind) {
    case ScenarioKind::calibration_routine:
        break;
    case ScenarioKind::baseline_characterization:
        cfg.physio.don_time_s = cfg.bench_wait_s;
        break;
    case ScenarioKind::one_drink:
        cfg.physio.drinks = {standard_drink(cfg.baseline_wait_s)};
        break;
    case ScenarioKind::two_drink:
        // two standard drinks within the same five minutes; doses sum
        cfg.physio.drinks = {standard_drink(cfg.baseline_wait_s),
                             standard_drink(cfg.baseline_wait_s)};
        break;
    case ScenarioKind::clothing_comparison: {
        cfg.physio.drinks = {standard_drink(cfg.baseline_wait_s)};
        cfg.physio.subject.perspiration_ml_hr = 20.8; // t-shirt arm
        physio::PhysioConfig b = cfg.physio;
        b.subject.perspiration_ml_hr = 500.0; // jacket arm, sweating induced
        b.rh_jumps = {{7200.0, 12.0}, {9600.0, 10.0}};
        cfg.physio_b = b;
        break;
    }
    case ScenarioKind::interpersonal_comparison: {
        cfg.physio.drinks = {standard_drink(cfg.baseline_wait_s)};
        cfg.physio.subject.body_mass_kg = 82.0; // subject 1: lower BAC,
        cfg.physio.subject.perspiration_ml_hr = 300.0; // more perspiration
        physio::PhysioConfig b = cfg.physio;
        b.subject.body_mass_kg = 68.0;
        b.subject.perspiration_ml_hr = 80.0;
        cfg.physio_b = b;
        break;
    }
    case ScenarioKind::custom:
        break;
    }
    return cfg;
}

namespace {

void load_subject(const json& j, physio::SubjectParams& s) {
    s.body_mass_kg = j.value("body_mass_kg", s.body_mass_kg);
    s.widmark_r = j.value("widmark_r", s.widmark_r);
    s.absorption_rate_per_hr = j.value("absorption_rate_per_hr", s.absorption_rate_per_hr);
    s.elimination_mg_dl_hr = j.value("elimination_mg_dl_hr", s.elimination_mg_dl_hr);
    s.perspiration_ml_hr = j.value("perspiration_ml_hr", s.perspiration_ml_hr);
    s.skin_excretion_fraction = j.value("skin_excretion_fraction", s.skin_excretion_fraction);
}

void load_physio(const json& j, physio::PhysioConfig& p) {
    if (j.contains("subject")) load_subject(j["subject"], p.subject);
    if (j.contains("env")) {
        const auto& e = j["env"];
        p.env.ambient_temp_c = e.value("ambient_temp_c", p.env.ambient_temp_c);
        p.env.skin_temp_c = e.value("skin_temp_c", p.env.skin_temp_c);
        p.env.ambient_rh_pct = e.value("ambient_rh_pct", p.env.ambient_rh_pct);
        p.env.ambient_ethanol_ppm = e.value("ambient_ethanol_ppm", p.env.ambient_ethanol_ppm);
    }
    if (j.contains("drift")) {
        const auto& d = j["drift"];
        p.fuel_cell.drift.plateau_ppm_per_deg_c =
            d.value("plateau_ppm_per_deg_c", p.fuel_cell.drift.plateau_ppm_per_deg_c);
        p.fuel_cell.drift.time_const_s = d.value("time_const_s", p.fuel_cell.drift.time_const_s);
        p.fuel_cell.drift.humid_spike_max_ppm =
            d.value("humid_spike_max_ppm", p.fuel_cell.drift.humid_spike_max_ppm);
        p.fuel_cell.drift.humid_spike_duration_s =
            d.value("humid_spike_duration_s", p.fuel_cell.drift.humid_spike_duration_s);
    }
    if (j.contains("drinks")) {
        p.drinks.clear();
        for (const auto& dj : j["drinks"]) {
            physio::DrinkEvent d;
            d.t_start_s = dj.value("t_start_s", 3600.0);
            d.volume_ml = dj.value("volume_ml", 118.0);
            d.abv_fraction = dj.value("abv_fraction", 0.15);
            d.duration_s = dj.value("duration_s", 300.0);
            p.drinks.push_back(d);
        }
    }
    if (j.contains("rh_jumps")) {
        p.rh_jumps.clear();
        for (const auto& rj : j["rh_jumps"])
            p.rh_jumps.emplace_back(rj.at(0).get<double>(), rj.at(1).get<double>());
    }
    p.partition_coefficient = j.value("partition_coefficient", p.partition_coefficient);
}

} // namespace

ScenarioConfig load_scenario(const std::filesystem::path& json_file) {
    std::ifstream in(json_file);
    if (!in) throw std::invalid_argument("cannot open scenario config: " + json_file.string());
    json j;
    in >> j;

    ScenarioConfig cfg = default_scenario(scenario_kind_from_string(j.at("scenario")));
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

    load_physio(j, cfg.physio);
    if (j.contains("subject_b")) {
        if (!cfg.physio_b) cfg.physio_b = cfg.physio;
        load_subject(j["subject_b"], cfg.physio_b->subject);
    }
    if (cfg.physio_b) {
        // arm B inherits everything but the subject unless overridden
        auto saved_subject = cfg.physio_b->subject;
        auto saved_jumps = cfg.physio_b->rh_jumps;
        cfg.physio_b = cfg.physio;
        cfg.physio_b->subject = saved_subject;
        cfg.physio_b->rh_jumps = saved_jumps;
        if (j.contains("rh_jumps_b")) {
            cfg.physio_b->rh_jumps.clear();
            for (const auto& rj : j["rh_jumps_b"])
                cfg.physio_b->rh_jumps.emplace_back(rj.at(0).get<double>(), rj.at(1).get<double>());
        }
    }

    if (j.contains("device")) {
        const auto& d = j["device"];
        cfg.device.name = d.value("name", cfg.device.name);
        cfg.device.noise_seed = d.value("noise_seed", cfg.device.noise_seed);
        cfg.device.noise_sigma_counts_clean =
            d.value("noise_sigma_counts_clean", cfg.device.noise_sigma_counts_clean);
        cfg.device.noise_sigma_counts_onbody =
            d.value("noise_sigma_counts_onbody", cfg.device.noise_sigma_counts_onbody);
    }

    cfg.baseline_wait_s = j.value("baseline_wait_s", cfg.baseline_wait_s);
    cfg.wear_after_drink_s = j.value("wear_after_drink_s", cfg.wear_after_drink_s);
    cfg.bench_wait_s = j.value("bench_wait_s", cfg.bench_wait_s);
    cfg.wear_duration_s = j.value("wear_duration_s", cfg.wear_duration_s);
    if (j.contains("jars_pct_wv")) cfg.jars_pct_wv = j["jars_pct_wv"].get<std::vector<double>>();
    cfg.jar_duration_s = j.value("jar_duration_s", cfg.jar_duration_s);
    cfg.jar_window_start_s = j.value("jar_window_start_s", cfg.jar_window_start_s);
    cfg.emit_plots = j.value("emit_plots", cfg.emit_plots);
    cfg.calibrate_first = j.value("calibrate_first", cfg.calibrate_first);

    if (j.contains("baseline_fit_windows")) {
        cfg.baseline_fit_windows.clear();
        for (const auto& w : j["baseline_fit_windows"])
            cfg.baseline_fit_windows.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
    }
    if (j.contains("service_outages_s")) {
        for (const auto& w : j["service_outages_s"])
            cfg.service_outages_s.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
    }

    // scenario-specific defaults depend on possibly overridden timing
    if (cfg.scenario == ScenarioKind::baseline_characterization)
        cfg.physio.don_time_s = cfg.bench_wait_s;

    cfg.validate();
    return cfg;
}

} // namespace tacnet::harness
