#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "genset/errors.hpp"

namespace genset {

// Uniformly sampled, multi-channel series. Time is stored as (t0, dt, n) so
// fixed-step output and resampling stay exact.
class TimeSeries {
  public:
    TimeSeries() = default;
    TimeSeries(double t0, double dt) : t0_(t0), dt_(dt) {
        if (!(dt > 0)) throw ValidationError("TimeSeries dt must be > 0");
    }

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t length() const { return n_; }
    double time_at(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
    double t_end() const { return n_ == 0 ? t0_ : time_at(n_ - 1); }

    const std::vector<std::string>& channel_names() const { return names_; }
    bool has_channel(const std::string& name) const;
    const std::vector<double>& channel(const std::string& name) const;

    void add_channel(const std::string& name, std::vector<double> samples);
    void append_row(const std::vector<double>& values); // one sample per channel, in order

    // Linear interpolation inside the support; clamped at the ends.
    double interp(const std::string& name, double t) const;

    // Resamples every channel onto (t0, dt, n) by linear interpolation.
    TimeSeries resample(double t0, double dt, std::size_t n) const;

    // Rows with time_at(i) in [t_begin, t_end], as a new series.
    TimeSeries window(double t_begin, double t_end) const;

  private:
    std::size_t index_of(const std::string& name) const;

    double t0_ = 0.0;
    double dt_ = 1.0;
    std::size_t n_ = 0;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> data_;
};

} // namespace genset
