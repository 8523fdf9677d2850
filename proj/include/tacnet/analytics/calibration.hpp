#pragma once

/**
 * @file calibration.hpp
 * @brief Linear sensor calibration: least-squares fit of counts vs ppm and
 *        the inverse conversion with gain normalization.
 */

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "tacnet/device/analog_frontend.hpp"
#include "tacnet/device/gain_table.hpp"

namespace tacnet::analytics {

struct CalibrationCurve {
    double slope_counts_per_ppm = 0.0;
    double intercept_counts = 0.0;
    int ref_gain_index = 5;
    double fit_r2 = 0.0;
};

struct CalPoint {
    double known_ppm = 0.0;
    double mean_counts = 0.0; // gain-normalized to the reference gain
};

/// Ordinary least squares of counts = slope * ppm + intercept.
/// Needs at least two distinct concentrations.
inline CalibrationCurve fit_calibration(std::span<const CalPoint> points, int ref_gain_index = 5) {
    size_t distinct = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        bool seen = false;
        for (size_t j = 0; j < i; ++j)
            if (points[j].known_ppm == points[i].known_ppm) seen = true;
        if (!seen) ++distinct;
    }
    if (distinct < 2)
        throw std::invalid_argument("fit_calibration: need at least 2 distinct concentrations");

    const double n = static_cast<double>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : points) {
        sx += p.known_ppm;
        sy += p.mean_counts;
        sxx += p.known_ppm * p.known_ppm;
        sxy += p.known_ppm * p.mean_counts;
    }
    const double denom = n * sxx - sx * sx;
    CalibrationCurve c;
    c.ref_gain_index = ref_gain_index;
    c.slope_counts_per_ppm = (n * sxy - sx * sy) / denom;
    c.intercept_counts = (sy - c.slope_counts_per_ppm * sx) / n;

    const double mean_y = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (const auto& p : points) {
        const double fit = c.slope_counts_per_ppm * p.known_ppm + c.intercept_counts;
        ss_res += (p.mean_counts - fit) * (p.mean_counts - fit);
        ss_tot += (p.mean_counts - mean_y) * (p.mean_counts - mean_y);
    }
    c.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return c;
}

/// Raw counts at any gain -> ppm: normalize onto the curve's reference gain,
/// then invert the line.
inline double adc_to_ppm(double counts, int gain_index, const CalibrationCurve& cal,
                         const device::GainTable& table) {
    if (cal.slope_counts_per_ppm <= 0.0)
        throw std::invalid_argument("adc_to_ppm: calibration slope must be > 0");
    const double norm = device::normalize_counts(counts, gain_index, cal.ref_gain_index, table);
    return (norm - cal.intercept_counts) / cal.slope_counts_per_ppm;
}

} // namespace tacnet::analytics
