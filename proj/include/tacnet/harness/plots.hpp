#pragma once

/**
 * @file plots.hpp
 * @brief Deterministic SVG line charts for session datasets (stands in for
 *        the dashboard).
 */

#include <filesystem>
#include <string>
#include <vector>

#include "tacnet/analytics/baseline.hpp"

namespace tacnet::harness {

struct PlotSeries {
    std::string label;
    const analytics::Series* data = nullptr;
    std::string color = "#1f77b4";
};

/// Writes one chart; output bytes depend only on the inputs. An empty or
/// all-empty series list produces an axes-only chart.
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

} // namespace tacnet::harness
