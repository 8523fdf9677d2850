#pragma once

/**
 * @file scenario.hpp
 * @brief Desk-scale reproductions: spins up emulator + gateway + service on
 *        one virtual clock and runs the calibration routine or a drinking
 *        protocol end to end.
 */

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tacnet/analytics/baseline.hpp"
#include "tacnet/analytics/calibration.hpp"
#include "tacnet/device/emulator.hpp"
#include "tacnet/physio/session_sim.hpp"

namespace tacnet::harness {

enum class ScenarioKind {
    calibration_routine,
    baseline_characterization,
    one_drink,
    two_drink,
    clothing_comparison,
    interpersonal_comparison,
    custom,
};

ScenarioKind scenario_kind_from_string(const std::string& s);
const char* to_string(ScenarioKind k);

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::one_drink;
    uint64_t seed = 1;
    std::filesystem::path output_dir;

    physio::PhysioConfig physio{};
    /// Second arm of a comparison scenario (clothing / interpersonal).
    std::optional<physio::PhysioConfig> physio_b;

    device::DeviceConfig device{};

    // protocol timing
    double baseline_wait_s = 3600.0;
    double wear_after_drink_s = 21600.0;
    double breathalyzer_interval_s = 300.0;
    double breathalyzer_noise_mg_dl = 2.0; // uniform +/- bound

    // calibration routine
    std::vector<double> jars_pct_wv{0.0, 0.10, 0.20, 0.30, 0.45, 0.60};
    double jar_duration_s = 1800.0;
    double jar_window_start_s = 1500.0; // the 25-30 min equilibrium window

    // baseline characterization
    double bench_wait_s = 1800.0;
    double wear_duration_s = 10800.0;

    /// Alcohol-free spans used for the quadratic baseline fit, in session
    /// seconds. Empty selects the defaults for the scenario.
    std::vector<analytics::TimeRange> baseline_fit_windows;

    /// Service outages injected on the virtual timeline (upload attempts
    /// inside a window fail and are retried from the spool).
    std::vector<std::pair<double, double>> service_outages_s;

    bool emit_plots = true;
    bool calibrate_first = true;

    void validate() const;
};

/// Reads a scenario JSON file; unspecified fields keep the defaults the
/// scenario kind implies.
ScenarioConfig load_scenario(const std::filesystem::path& json_file);

/// Built-in fixture for a scenario kind.
ScenarioConfig default_scenario(ScenarioKind kind);

struct JarResult {
    double liquid_pct_wv = 0.0;
    double liquid_mg_dl = 0.0;
    double expected_ppm = 0.0;   // Henry equilibrium of the liquid
    double measured_ppm = 0.0;   // chamber ppm mean over the window (truth)
    double mean_counts = 0.0;    // gain-normalized window mean
    bool plateaued = true;
};

struct CalibrationReport {
    analytics::CalibrationCurve curve;
    std::vector<JarResult> jars;
    double ground_truth_counts_per_ppm = 0.0;
};

/// Six-jar routine against the emulator; fits the calibration line from the
/// 25-30 min equilibrium windows.
CalibrationReport run_calibration_routine(const ScenarioConfig& cfg);

struct SessionResult {
    std::string device_name;

    // series (session seconds)
    analytics::Series truth_bac;       // 1 s grid, mg/dL
    analytics::Series truth_chamber;   // 1 s grid, ppm
    analytics::Series breathalyzer;    // 5 min grid, mg/dL
    analytics::Series minute_counts;   // minute grid, normalized counts
    analytics::Series tac_raw_ppm;     // minute grid
    analytics::Series tac_corrected_ppm;
    analytics::Series temp_c;
    analytics::Series rh_pct;

    analytics::CalibrationCurve curve;

    // metrics
    double drink_t_s = 0.0;
    double session_len_s = 0.0;
    double bac_auc_mg_dl_min = 0.0;
    double tac_raw_auc_ppm_min = 0.0;
    double tac_corrected_auc_ppm_min = 0.0;
    double bac_peak_mg_dl = 0.0;
    double bac_peak_time_s = 0.0;
    double tac_peak_ppm = 0.0;
    double tac_peak_time_s = 0.0;
    double peak_delay_s = 0.0;

    // pipeline reconciliation
    uint64_t wear_minutes = 0;
    uint64_t flash_records = 0;
    uint64_t backfill_points_at_service = 0;
    uint64_t realtime_pushes = 0;
    uint64_t realtime_points_at_service = 0;
    uint64_t duplicates_dropped = 0;
    int backfill_retries = 0;
};

/// One full wear-drink-wear protocol through the whole pipeline.
/// `arm` names the output subdirectory when part of a comparison.
SessionResult run_session(const ScenarioConfig& cfg, const physio::PhysioConfig& physio,
                          uint64_t arm_seed, const std::string& arm = "");

struct ComparisonResult {
    SessionResult a;
    SessionResult b;
    double bac_auc_ratio = 0.0;           // a / b, from breathalyzer series
    double tac_raw_auc_ratio = 0.0;       // a / b
    double tac_corrected_auc_ratio = 0.0; // a / b
};

/// Dispatches on cfg.scenario; comparison kinds run two arms.
ComparisonResult run_comparison(const ScenarioConfig& cfg);

/// Single-arm convenience wrapper around run_session for cfg.physio.
SessionResult run_single(const ScenarioConfig& cfg);

/// metrics.json / calibration.json writers (schema documented in README).
void write_session_metrics(const std::filesystem::path& path, const SessionResult& r);
void write_comparison_metrics(const std::filesystem::path& path, const ComparisonResult& r);
void write_calibration_report(const std::filesystem::path& path, const CalibrationReport& r);

/// Offline analysis of a service CSV export: convert, correct, summarize.
struct AnalyzeResult {
    analytics::Series raw_ppm;
    analytics::Series corrected_ppm;
    double raw_auc_ppm_min = 0.0;
    double corrected_auc_ppm_min = 0.0;
};
AnalyzeResult analyze_export_csv(const std::filesystem::path& csv_file,
                                 const analytics::CalibrationCurve& curve,
                                 const device::GainTable& gains,
                                 std::vector<analytics::TimeRange> fit_windows);

} // namespace tacnet::harness
