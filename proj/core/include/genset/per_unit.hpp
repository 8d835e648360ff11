#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "genset/errors.hpp"

namespace genset {

// Channel kinds used for unit conversion and objective bookkeeping.
enum class Channel { active_power, reactive_power, voltage, frequency, current, fuel };

std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);

// Per-unit bases for a three-phase machine. Voltages are line-neutral RMS,
// powers are three-phase totals.
struct PerUnitBase {
    double s_base = 400e3;    // VA, three-phase
    double v_base = 480.0 / std::numbers::sqrt3; // V line-neutral RMS
    double f_base = 60.0;     // Hz
    double fuel_base = 1.0;   // L/h at maximum flow

    double w_base() const { return 2.0 * std::numbers::pi * f_base; } // rad/s
    double i_base() const { return s_base / (3.0 * v_base); }         // A RMS per phase
    double v_peak() const { return std::numbers::sqrt2 * v_base; }    // V phase peak
    double i_peak() const { return std::numbers::sqrt2 * i_base(); }  // A phase peak

    void validate() const {
        if (!(s_base > 0 && v_base > 0 && f_base > 0 && fuel_base > 0))
            throw ValidationError("per-unit bases must be strictly positive");
    }

    double base_for(Channel kind) const;
    double to_per_unit(double value, Channel kind) const { return value / base_for(kind); }
    double from_per_unit(double value, Channel kind) const { return value * base_for(kind); }
};

} // namespace genset
