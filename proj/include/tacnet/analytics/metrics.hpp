#pragma once

/**
 * @file metrics.hpp
 * @brief Scalar session metrics: trapezoidal AUC, AUC ratios and the
 *        BAC-to-TAC peak delay.
 */

#include <cmath>
#include <stdexcept>

#include "tacnet/analytics/baseline.hpp"

namespace tacnet::analytics {

/**
 * Trapezoidal area over samples with t in [t0_s, t1_s], returned in
 * value-minutes (the native grid is 1 minute; no resampling).
 */
inline double auc(const Series& series, double t0_s, double t1_s) {
    if (series.size() < 2) throw std::invalid_argument("auc: need at least 2 samples");
    double area_s = 0.0;
    bool any = false;
    for (size_t i = 1; i < series.size(); ++i) {
        const double ta = series.t_s[i - 1], tb = series.t_s[i];
        if (tb < ta) throw std::invalid_argument("auc: series not sorted");
        if (ta < t0_s || tb > t1_s) continue;
        area_s += 0.5 * (series.v[i - 1] + series.v[i]) * (tb - ta);
        any = true;
    }
    if (!any) throw std::invalid_argument("auc: window does not overlap series");
    return area_s / 60.0;
}

inline double auc_ratio(double auc_a, double auc_b) {
    if (auc_b == 0.0) throw std::domain_error("auc_ratio: undefined for zero denominator");
    return auc_a / auc_b;
}

/// Time of the series maximum; ties break toward the earliest sample.
/// A flat series has no peak.
inline double peak_time_s(const Series& series) {
    if (series.size() == 0) throw std::invalid_argument("peak_time_s: empty series");
    size_t best = 0;
    double vmin = series.v[0];
    for (size_t i = 1; i < series.size(); ++i) {
        if (series.v[i] > series.v[best]) best = i;
        vmin = std::min(vmin, series.v[i]);
    }
    if (series.v[best] == vmin) throw std::domain_error("peak_time_s: series has no peak");
    return series.t_s[best];
}

inline double peak_value(const Series& series) {
    if (series.size() == 0) throw std::invalid_argument("peak_value: empty series");
    double best = series.v[0];
    for (double x : series.v) best = std::max(best, x);
    return best;
}

/// argmax(tac) - argmax(bac) in seconds; positive when TAC lags.
inline double peak_delay_s(const Series& bac, const Series& tac) {
    return peak_time_s(tac) - peak_time_s(bac);
}

struct SessionMetrics {
    double auc_ppm_min = 0.0;
    double peak_value = 0.0;
    double peak_time_s = 0.0;
};

inline SessionMetrics session_metrics(const Series& series, double t0_s, double t1_s) {
    SessionMetrics m;
    m.auc_ppm_min = auc(series, t0_s, t1_s);
    m.peak_value = peak_value(series);
    m.peak_time_s = peak_time_s(series);
    return m;
}

} // namespace tacnet::analytics
