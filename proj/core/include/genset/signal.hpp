#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "genset/per_unit.hpp"
#include "genset/time_series.hpp"

namespace genset {

struct SimTrace; // simengine.hpp

// ------------------------------------------------------------------ PLL

struct PllParams {
    double f_nominal = 60.0;       // Hz
    double natural_freq_hz = 20.0; // loop natural frequency
    double damping = 0.707;
    double lock_band = 0.5; // flag loss of lock outside [1∓band]*f_nominal
};

struct PllResult {
    std::vector<double> f_hz;   // instantaneous frequency estimate
    std::vector<double> theta;  // tracked angle (monotone increasing)
    bool lock_lost = false;
    double lock_lost_at = 0.0;  // s relative to first sample
};

// Synchronous-reference-frame PLL on balanced-dominant phase voltages: the
// q-axis projection is driven to zero by a PI loop.
PllResult pll_frequency(const std::vector<double>& van, const std::vector<double>& vbn,
                        const std::vector<double>& vcn, double dt, const PllParams& p = {});

// ------------------------------------------------------- sliding windows

// RMS over a sliding window of exactly one estimated fundamental period.
// Samples before the first full window hold the first complete value;
// `warmup` reports how many were backfilled.
struct RmsResult {
    std::vector<double> rms;
    std::size_t warmup = 0;
};
RmsResult rms_voltage(const std::vector<double>& x, double dt,
                      const std::vector<double>& freq_hz);

// Fundamental phasor of each input over one tracked cycle ending at each
// sample (peak-amplitude convention, angle relative to the PLL frame).
std::vector<std::complex<double>> fundamental_phasors(const std::vector<double>& x,
                                                      const std::vector<double>& theta,
                                                      double dt);

// Positive-sequence combination of per-phase fundamental phasors.
std::complex<double> combine_positive_sequence(const std::complex<double>& a,
                                               const std::complex<double>& b,
                                               const std::complex<double>& c);

// One-shot window form: extracts per-phase fundamentals over the final full
// cycle of the window and combines them. Throws if the window is shorter
// than one cycle of f_hz.
struct PositiveSequence {
    std::complex<double> v1, i1; // peak convention
};
PositiveSequence positive_sequence(const std::vector<double>& van, const std::vector<double>& vbn,
                                   const std::vector<double>& vcn, const std::vector<double>& ia,
                                   const std::vector<double>& ib, const std::vector<double>& ic,
                                   double dt, double f_hz);

// P = 3 (|V1|/sqrt2)(|I1|/sqrt2) cos(phi), Q with sin(phi); phasors in peak
// convention, result in W / VAR.
std::pair<double, double> compute_pq(const std::complex<double>& v1,
                                     const std::complex<double>& i1);

// ----------------------------------------------------- measurement chain

// Instantaneous phase waveforms (V and A) synthesized from a dq trajectory.
// Channels: van, vbn, vcn, ia, ib, ic.
TimeSeries synthesize_waveforms(const SimTrace& trace);

struct DeriveOptions {
    PllParams pll{};
    double output_dt = 1e-3; // s, cadence of the derived channels
};

// Full measurement chain: PLL -> positive-sequence P/Q -> sliding RMS.
// Output channels: P (kW), Q (kVAR), V (V line-neutral RMS), f (Hz).
TimeSeries derive_channels(const TimeSeries& waveforms, const DeriveOptions& opts = {});

// ------------------------------------------------------------- metrics

double nrmse(const std::vector<double>& meas, const std::vector<double>& sim, double norm);

struct MapeResult {
    double percent;
    std::size_t excluded; // zero-measurement samples skipped
};
MapeResult mape(const std::vector<double>& meas, const std::vector<double>& sim);

enum class NormKind { pre_step_mean, range, max_abs };
NormKind norm_kind_from_string(const std::string& s);

struct ObjectiveOptions {
    double w_p = 1.0, w_q = 1.0, w_v = 1.0, w_f = 1.0;
    NormKind norm = NormKind::pre_step_mean;
    double window_start = 0.0; // defaults to t_step when used via commands
    double window_length = 4.0;
};

struct ChannelMetric {
    std::string name;
    double norm;
    double nrmse;
};

struct ObjectiveResult {
    double value = 0.0;
    std::vector<ChannelMetric> channels;
};

// Cumulative weighted nRMSE of the four derived channels over the window.
// `sim` is linearly resampled onto the measurement grid. Norms come from the
// measurement: pre-step mean (fallback to range when the mean vanishes),
// range, or max |value|.
ObjectiveResult objective(const TimeSeries& meas, const TimeSeries& sim, double t_step,
                          const ObjectiveOptions& opts);

// nRMSE + MAPE restricted to [t_begin, t_end] on one channel.
struct WindowMetrics {
    double nrmse;
    double mape_percent;
};
WindowMetrics window_metrics(const TimeSeries& meas, const TimeSeries& sim,
                             const std::string& channel, double t_begin, double t_end,
                             double norm);

} // namespace genset
