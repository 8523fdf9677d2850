#pragma once

/**
 * @file baseline.hpp
 * @brief Thermal baseline removal: a second-order polynomial is fit over
 *        known alcohol-free window(s) and subtracted from the whole series.
 */

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace tacnet::analytics {

/// Uniformly shaped time series: t_s[i] carries v[i].
struct Series {
    std::vector<double> t_s;
    std::vector<double> v;

    size_t size() const { return t_s.size(); }
    void push(double t, double value) {
        t_s.push_back(t);
        v.push_back(value);
    }
};

struct TimeRange {
    double t0_s = 0.0;
    double t1_s = 0.0; // inclusive
    bool contains(double t) const { return t >= t0_s && t <= t1_s; }
};

struct Quadratic {
    // coefficients over the scaled time u = (t - t_center) / t_scale
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double t_center = 0.0, t_scale = 1.0;

    double eval(double t) const {
        const double u = (t - t_center) / t_scale;
        return c0 + c1 * u + c2 * u * u;
    }
};

/// Least-squares quadratic over the samples inside the fit windows.
/// Time is centered and scaled before solving, so a multi-hour series in
/// seconds stays well conditioned.
inline Quadratic fit_quadratic(const Series& series, std::span<const TimeRange> windows) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < series.size(); ++i)
        for (const auto& w : windows)
            if (w.contains(series.t_s[i])) {
                idx.push_back(i);
                break;
            }
    if (idx.size() < 3)
        throw std::invalid_argument("fit_quadratic: fit window has fewer than 3 points");

    Quadratic q;
    double tmin = series.t_s[idx.front()], tmax = series.t_s[idx.front()];
    for (size_t i : idx) {
        tmin = std::min(tmin, series.t_s[i]);
        tmax = std::max(tmax, series.t_s[i]);
    }
    q.t_center = 0.5 * (tmin + tmax);
    q.t_scale = tmax > tmin ? 0.5 * (tmax - tmin) : 1.0;

    // normal equations for the 3-term basis {1, u, u^2}
    std::array<double, 5> s{}; // sums of u^0..u^4
    std::array<double, 3> b{}; // sums of v*u^0..u^2
    for (size_t i : idx) {
        const double u = (series.t_s[i] - q.t_center) / q.t_scale;
        double up = 1.0;
        for (int k = 0; k < 5; ++k) {
            s[static_cast<size_t>(k)] += up;
            if (k < 3) b[static_cast<size_t>(k)] += series.v[i] * up;
            up *= u;
        }
    }
    double m[3][4] = {{s[0], s[1], s[2], b[0]}, {s[1], s[2], s[3], b[1]}, {s[2], s[3], s[4], b[2]}};
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        if (std::abs(m[col][col]) < 1e-12)
            throw std::runtime_error("fit_quadratic: singular normal equations");
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    q.c0 = m[0][3] / m[0][0];
    q.c1 = m[1][3] / m[1][1];
    q.c2 = m[2][3] / m[2][2];
    return q;
}

/// Fit over the alcohol-free window(s), subtract over the entire series.
inline Series remove_baseline(const Series& series, std::span<const TimeRange> fit_windows) {
    const Quadratic q = fit_quadratic(series, fit_windows);
    Series out;
    out.t_s = series.t_s;
    out.v.reserve(series.size());
    for (size_t i = 0; i < series.size(); ++i) out.v.push_back(series.v[i] - q.eval(series.t_s[i]));
    return out;
}

inline Series remove_baseline(const Series& series, const TimeRange& fit_window) {
    const std::array<TimeRange, 1> w{fit_window};
    return remove_baseline(series, w);
}

/// Mean/sd summary of one window, in counts and (optionally converted) ppm.
struct BaselineStats {
    double mean_counts = 0.0;
    double sd_counts = 0.0;
    double mean_ppm = 0.0;
    double sd_ppm = 0.0;
    TimeRange window{};
};

inline BaselineStats baseline_stats(const Series& counts_series, const TimeRange& window,
                                    double slope_counts_per_ppm, double intercept_counts) {
    double sum = 0.0, sum2 = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < counts_series.size(); ++i) {
        if (!window.contains(counts_series.t_s[i])) continue;
        sum += counts_series.v[i];
        sum2 += counts_series.v[i] * counts_series.v[i];
        ++n;
    }
    if (n == 0) throw std::invalid_argument("baseline_stats: window contains no samples");
    BaselineStats st;
    st.window = window;
    st.mean_counts = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum2 / static_cast<double>(n) - st.mean_counts * st.mean_counts);
    st.sd_counts = std::sqrt(var);
    st.mean_ppm = (st.mean_counts - intercept_counts) / slope_counts_per_ppm;
    st.sd_ppm = st.sd_counts / slope_counts_per_ppm;
    return st;
}

} // namespace tacnet::analytics
