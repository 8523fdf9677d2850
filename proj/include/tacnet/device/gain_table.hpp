#pragma once

#include <array>
#include <stdexcept>

namespace tacnet::device {

/**
 * Transimpedance amplifier gain ladder feeding the 12-bit ADC.
 * Seven internal potentiostat gains plus one external resistor, ascending.
 */
struct GainTable {
    std::array<double, 8> resistances_ohm{2750.0,   3500.0,   7000.0,   14000.0,
                                          35000.0,  120000.0, 350000.0, 1000000.0};
    double v_ref = 0.2;       // TIA output at zero sensor current
    double v_fullscale = 3.0; // ADC full-scale input

    void validate() const {
        double prev = 0.0;
        for (double r : resistances_ohm) {
            if (!(r > prev)) throw std::invalid_argument("GainTable: resistances must be strictly ascending and > 0");
            prev = r;
        }
        if (v_fullscale <= 0.0) throw std::invalid_argument("GainTable: v_fullscale must be > 0");
        if (v_ref < 0.0 || v_ref >= v_fullscale)
            throw std::invalid_argument("GainTable: v_ref outside [0, v_fullscale)");
    }

    double resistance(int gain_index) const {
        if (gain_index < 0 || gain_index >= static_cast<int>(resistances_ohm.size()))
            throw std::out_of_range("GainTable: gain index outside [0,7]");
        return resistances_ohm[static_cast<size_t>(gain_index)];
    }

    /// ADC counts contributed by the zero-current offset voltage.
    double offset_counts() const { return v_ref / v_fullscale * 4095.0; }
};

} // namespace tacnet::device
