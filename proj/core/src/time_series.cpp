#include "genset/time_series.hpp"

#include <algorithm>
#include <cmath>

namespace genset {

std::size_t TimeSeries::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw ValidationError("unknown channel: " + name);
}

bool TimeSeries::has_channel(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
    return data_[index_of(name)];
}

void TimeSeries::add_channel(const std::string& name, std::vector<double> samples) {
    if (has_channel(name)) throw ValidationError("duplicate channel: " + name);
    if (!names_.empty() && samples.size() != n_)
        throw ValidationError("channel " + name + " length mismatch");
    n_ = samples.size();
    names_.push_back(name);
    data_.push_back(std::move(samples));
}

void TimeSeries::append_row(const std::vector<double>& values) {
    if (values.size() != names_.size())
        throw ValidationError("row width does not match channel count");
    for (std::size_t i = 0; i < values.size(); ++i) data_[i].push_back(values[i]);
    ++n_;
}

double TimeSeries::interp(const std::string& name, double t) const {
    const auto& y = channel(name);
    if (y.empty()) throw ValidationError("empty channel: " + name);
    const double pos = (t - t0_) / dt_;
    if (pos <= 0.0) return y.front();
    if (pos >= static_cast<double>(n_ - 1)) return y.back();
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return y[i] * (1.0 - f) + y[i + 1] * f;
}

TimeSeries TimeSeries::resample(double t0, double dt, std::size_t n) const {
    TimeSeries out(t0, dt);
    for (const auto& name : names_) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = interp(name, t0 + dt * static_cast<double>(i));
        out.add_channel(name, std::move(y));
    }
    return out;
}

TimeSeries TimeSeries::window(double t_begin, double t_end) const {
    if (n_ == 0) throw ValidationError("window of empty series");
    // first index with time >= t_begin, last with time <= t_end (half-ulp slack)
    const double eps = dt_ * 1e-9;
    auto lo = static_cast<std::ptrdiff_t>(std::ceil((t_begin - t0_ - eps) / dt_));
    auto hi = static_cast<std::ptrdiff_t>(std::floor((t_end - t0_ + eps) / dt_));
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n_) - 1);
    if (hi < lo) throw ValidationError("empty window");
    TimeSeries out(time_at(static_cast<std::size_t>(lo)), dt_);
    for (std::size_t c = 0; c < names_.size(); ++c) {
        std::vector<double> y(data_[c].begin() + lo, data_[c].begin() + hi + 1);
        out.add_channel(names_[c], std::move(y));
    }
    return out;
}

} // namespace genset
