#pragma once

/**
 * @file analog_frontend.hpp
 * @brief TIA + ADC conversion chain, gain auto-ranging, and gain
 *        normalization of raw counts.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tacnet/device/gain_table.hpp"

namespace tacnet::device {

/// One 1 Hz acquisition: raw ADC counts plus the gain used to take them.
struct SensorSample {
    uint16_t adc_counts = 0; // [0, 4095]
    uint8_t gain_index = 0;  // [0, 7]
    double temp_c = 0.0;
    double rh_pct = 0.0;
};

// auto-ranging hysteresis band: 10% / 90% of full scale
inline constexpr uint16_t kAdcMax = 4095;
inline constexpr uint16_t kGainDownCounts = 3686; // above: step gain down
inline constexpr uint16_t kGainUpCounts = 410;    // below: step gain up

/// Sensor current through the TIA into the 12-bit ADC, clamped to range.
inline uint16_t adc_counts(double current_na, double r_ohm, const GainTable& table) {
    const double v = current_na * 1e-9 * r_ohm + table.v_ref;
    const double counts = std::round(v / table.v_fullscale * kAdcMax);
    return static_cast<uint16_t>(std::clamp(counts, 0.0, static_cast<double>(kAdcMax)));
}

/**
 * Gain selection for the next tick: one step at most, moving down when the
 * reading saturates the top 10% of the range and up when it falls below the
 * bottom 10%.
 */
inline uint8_t auto_gain(const SensorSample& sample, const GainTable& table) {
    const int last = static_cast<int>(table.resistances_ohm.size()) - 1;
    if (sample.adc_counts > kGainDownCounts && sample.gain_index > 0)
        return static_cast<uint8_t>(sample.gain_index - 1);
    if (sample.adc_counts < kGainUpCounts && sample.gain_index < last)
        return static_cast<uint8_t>(sample.gain_index + 1);
    return sample.gain_index;
}

/// Map raw counts taken at gain_index onto the reference gain. The offset
/// term does not scale with the TIA resistance, so it is removed first.
inline double normalize_counts(double raw_counts, int gain_index, int ref_gain_index,
                               const GainTable& table) {
    const double off = table.offset_counts();
    const double ratio = table.resistance(ref_gain_index) / table.resistance(gain_index);
    return (raw_counts - off) * ratio + off;
}

/// HTU21D-style quantization: 0.01 degC and 0.04 %RH steps.
inline double quantize_temp_c(double temp_c) { return std::round(temp_c / 0.01) * 0.01; }
inline double quantize_rh_pct(double rh_pct) {
    return std::clamp(std::round(rh_pct / 0.04) * 0.04, 0.0, 100.0);
}

} // namespace tacnet::device
