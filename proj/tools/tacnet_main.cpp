// tacnet: desk-scale orchestration of the sensor/gateway/service stack.
//   tacnet calibrate --config cfg.json --out dir
//   tacnet session   --config cfg.json --out dir
//   tacnet analyze   --csv export.csv --cal calibration.json --out dir [--fit-window a:b ...]
//   tacnet plot      --csv series.csv --out dir [--title ...]
// Exit codes: 0 success, 2 validation error, 3 runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "tacnet/analytics/metrics.hpp"
#include "tacnet/harness/plots.hpp"
#include "tacnet/harness/scenario.hpp"
#include "tacnet/util/strfmt.hpp"

using namespace tacnet;

namespace {

harness::ScenarioConfig load_config(const std::string& config, const std::string& out_dir,
                                    const std::string& scenario_name) {
    harness::ScenarioConfig cfg;
    if (!config.empty()) {
        cfg = harness::load_scenario(config);
    } else if (!scenario_name.empty()) {
        cfg = harness::default_scenario(harness::scenario_kind_from_string(scenario_name));
    } else {
        throw std::invalid_argument("either --config or --scenario is required");
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (cfg.output_dir.empty()) throw std::invalid_argument("--out directory is required");
    cfg.validate();
    return cfg;
}

analytics::Series load_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    analytics::Series s;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        s.push(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transdermal alcohol sensing pipeline, desk scale"};
    app.require_subcommand(1);

    std::string config, out_dir, scenario_name, csv_file, cal_file, title = "series";
    std::vector<std::string> fit_windows;

    auto* calibrate = app.add_subcommand("calibrate", "run the six-jar calibration routine");
    calibrate->add_option("--config", config, "scenario JSON");
    calibrate->add_option("--out", out_dir, "output directory");

    auto* session = app.add_subcommand("session", "run a drinking-protocol session end to end");
    session->add_option("--config", config, "scenario JSON");
    session->add_option("--scenario", scenario_name,
                        "built-in scenario name (one_drink, two_drink, ...)");
    session->add_option("--out", out_dir, "output directory");

    auto* analyze = app.add_subcommand("analyze", "convert + baseline-correct a service export");
    analyze->add_option("--csv", csv_file, "service export.csv")->required();
    analyze->add_option("--cal", cal_file, "calibration.json from a calibrate run")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();
    analyze->add_option("--fit-window", fit_windows, "alcohol-free span seconds, as a:b");

    auto* plot = app.add_subcommand("plot", "render a t_s,value CSV to SVG");
    plot->add_option("--csv", csv_file, "input series CSV")->required();
    plot->add_option("--out", out_dir, "output directory")->required();
    plot->add_option("--title", title, "chart title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (calibrate->parsed()) {
            const auto cfg = load_config(config, out_dir, "calibration_routine");
            const auto report = harness::run_calibration_routine(cfg);
            std::cout << "slope " << fmt_g(report.curve.slope_counts_per_ppm) << " counts/ppm, R^2 "
                      << fmt_g(report.curve.fit_r2) << " (truth "
                      << fmt_g(report.ground_truth_counts_per_ppm) << ")\n";
        } else if (session->parsed()) {
            const auto cfg = load_config(config, out_dir, scenario_name);
            const auto res = harness::run_comparison(cfg);
            std::cout << "session complete: metrics under " << cfg.output_dir.string() << '\n';
            if (cfg.physio_b)
                std::cout << "BAC AUC ratio " << fmt_g(res.bac_auc_ratio) << ", TACg AUC ratio "
                          << fmt_g(res.tac_corrected_auc_ratio) << '\n';
            else
                std::cout << "peak delay " << fmt_g(res.a.peak_delay_s) << " s, TACg AUC "
                          << fmt_g(res.a.tac_corrected_auc_ppm_min) << " ppm*min\n";
        } else if (analyze->parsed()) {
            std::ifstream cal_in(cal_file);
            if (!cal_in) throw std::invalid_argument("cannot open " + cal_file);
            nlohmann::json cal_json;
            cal_in >> cal_json;
            analytics::CalibrationCurve curve;
            curve.slope_counts_per_ppm = cal_json.at("slope_counts_per_ppm").get<double>();
            curve.intercept_counts = cal_json.at("intercept_counts").get<double>();
            curve.ref_gain_index = cal_json.value("ref_gain_index", 5);
            curve.fit_r2 = cal_json.value("r2", 1.0);

            std::vector<analytics::TimeRange> windows;
            for (const auto& w : fit_windows) {
                const auto colon = w.find(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("--fit-window expects a:b seconds");
                windows.push_back({std::stod(w.substr(0, colon)), std::stod(w.substr(colon + 1))});
            }

            std::filesystem::create_directories(out_dir);
            const auto res =
                harness::analyze_export_csv(csv_file, curve, device::GainTable{}, windows);
            std::ofstream raw(std::filesystem::path(out_dir) / "tac_raw.csv");
            raw << "t_s,tac_ppm\n";
            for (size_t i = 0; i < res.raw_ppm.size(); ++i)
                raw << fmt_g(res.raw_ppm.t_s[i]) << ',' << fmt_g(res.raw_ppm.v[i]) << '\n';
            std::ofstream corr(std::filesystem::path(out_dir) / "tac_corrected.csv");
            corr << "t_s,tac_ppm\n";
            for (size_t i = 0; i < res.corrected_ppm.size(); ++i)
                corr << fmt_g(res.corrected_ppm.t_s[i]) << ',' << fmt_g(res.corrected_ppm.v[i])
                     << '\n';
            nlohmann::ordered_json mj;
            mj["raw_auc_ppm_min"] = res.raw_auc_ppm_min;
            mj["corrected_auc_ppm_min"] = res.corrected_auc_ppm_min;
            std::ofstream mout(std::filesystem::path(out_dir) / "analyze_metrics.json");
            mout << mj.dump(2) << '\n';
            std::cout << "corrected AUC " << fmt_g(res.corrected_auc_ppm_min) << " ppm*min\n";
        } else if (plot->parsed()) {
            const auto series = load_series_csv(csv_file);
            std::filesystem::create_directories(out_dir);
            const auto out = std::filesystem::path(out_dir) /
                             (std::filesystem::path(csv_file).stem().string() + ".svg");
            harness::write_svg_chart(out, title, "t (s)", "value", {{title, &series, "#1f77b4"}});
            std::cout << "wrote " << out.string() << '\n';
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
