#include "genset/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "genset/errors.hpp"
#include "genset/simengine.hpp"

namespace genset {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw ValidationError(std::string(what) + ": length mismatch");
}

// Prefix trapezoid integral of g over a uniform grid; out[0] = 0.
std::vector<double> prefix_integral(const std::vector<double>& g, double dt) {
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (g[i - 1] + g[i]) * dt;
    return out;
}

} // namespace

// ------------------------------------------------------------------ PLL

PllResult pll_frequency(const std::vector<double>& van, const std::vector<double>& vbn,
                        const std::vector<double>& vcn, double dt, const PllParams& p) {
    require_same_size(van.size(), vbn.size(), "pll_frequency");
    require_same_size(van.size(), vcn.size(), "pll_frequency");
    if (van.empty()) throw ValidationError("pll_frequency: empty input");
    if (!(dt > 0)) throw ValidationError("pll_frequency: dt must be > 0");
    if (!(p.f_nominal > 0) || !(p.natural_freq_hz > 0) || !(p.damping > 0) ||
        !(p.lock_band > 0))
        throw ValidationError("pll_frequency: parameters must be positive");

    const double wn = kTwoPi * p.natural_freq_hz;
    const double kp = 2.0 * p.damping * wn;
    const double ki = wn * wn;
    const double f_lo = p.f_nominal * (1.0 - p.lock_band);
    const double f_hi = p.f_nominal * (1.0 + p.lock_band);

    const std::size_t n = van.size();
    PllResult res;
    res.f_hz.resize(n);
    res.theta.resize(n);

    auto clarke = [&](std::size_t k, double& alpha, double& beta) {
        alpha = (2.0 * van[k] - vbn[k] - vcn[k]) / 3.0;
        beta = (vbn[k] - vcn[k]) / std::numbers::sqrt3;
    };

    double alpha = 0.0, beta = 0.0;
    clarke(0, alpha, beta);
    double theta = std::atan2(beta, alpha); // start aligned with the voltage vector
    double w_int = kTwoPi * p.f_nominal;

    for (std::size_t k = 0; k < n; ++k) {
        clarke(k, alpha, beta);
        const double amp = std::hypot(alpha, beta);
        const double err = amp > 1e-12 ? (beta * std::cos(theta) - alpha * std::sin(theta)) / amp
                                       : 0.0;
        w_int += ki * err * dt;
        const double w = w_int + kp * err;
        res.f_hz[k] = w / kTwoPi;
        res.theta[k] = theta;
        theta += w * dt;
        if (!res.lock_lost && (res.f_hz[k] < f_lo || res.f_hz[k] > f_hi)) {
            res.lock_lost = true;
            res.lock_lost_at = static_cast<double>(k) * dt;
        }
    }
    return res;
}

// ------------------------------------------------------- sliding windows

RmsResult rms_voltage(const std::vector<double>& x, double dt,
                      const std::vector<double>& freq_hz) {
    require_same_size(x.size(), freq_hz.size(), "rms_voltage");
    if (x.size() < 2) throw ValidationError("rms_voltage: input too short");
    if (!(dt > 0)) throw ValidationError("rms_voltage: dt must be > 0");

    const std::size_t n = x.size();
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = x[i] * x[i];
    const std::vector<double> acc = prefix_integral(sq, dt);

    RmsResult res;
    res.rms.resize(n);
    std::size_t first = n;
    for (std::size_t k = 0; k < n; ++k) {
        if (!(freq_hz[k] > 0)) throw ValidationError("rms_voltage: frequency must be positive");
        const double period = 1.0 / freq_hz[k];
        const double t_begin = static_cast<double>(k) * dt - period;
        if (t_begin < 0.0) continue; // warm-up
        const double pos = t_begin / dt;
        const auto j = std::min(static_cast<std::size_t>(pos), n - 2);
        const double frac = pos - static_cast<double>(j);
        const double acc_begin = acc[j] + frac * (acc[j + 1] - acc[j]);
        res.rms[k] = std::sqrt(std::max((acc[k] - acc_begin) / period, 0.0));
        if (first == n) first = k;
    }
    if (first == n) throw ValidationError("rms_voltage: input shorter than one period");
    for (std::size_t k = 0; k < first; ++k) res.rms[k] = res.rms[first];
    res.warmup = first;
    return res;
}

std::vector<std::complex<double>> fundamental_phasors(const std::vector<double>& x,
                                                      const std::vector<double>& theta,
                                                      double dt) {
    require_same_size(x.size(), theta.size(), "fundamental_phasors");
    if (x.size() < 2) throw ValidationError("fundamental_phasors: input too short");
    if (!(dt > 0)) throw ValidationError("fundamental_phasors: dt must be > 0");

    const std::size_t n = x.size();
    std::vector<double> gc(n), gs(n);
    for (std::size_t i = 0; i < n; ++i) {
        gc[i] = x[i] * std::cos(theta[i]);
        gs[i] = x[i] * std::sin(theta[i]);
    }
    const std::vector<double> acc_c = prefix_integral(gc, dt);
    const std::vector<double> acc_s = prefix_integral(gs, dt);

    std::vector<std::complex<double>> out(n);
    std::size_t m = 0;
    std::size_t first = n;
    for (std::size_t k = 0; k < n; ++k) {
        const double target = theta[k] - kTwoPi; // window spans one tracked cycle
        if (target < theta[0]) continue;
        while (m + 1 < k && theta[m + 1] <= target) ++m;
        const double span = theta[m + 1] - theta[m];
        const double frac = span > 0 ? (target - theta[m]) / span : 0.0;
        const double c_begin = acc_c[m] + frac * (acc_c[m + 1] - acc_c[m]);
        const double s_begin = acc_s[m] + frac * (acc_s[m + 1] - acc_s[m]);
        const double t_window =
            (static_cast<double>(k) - static_cast<double>(m) - frac) * dt;
        out[k] = std::complex<double>(acc_c[k] - c_begin, -(acc_s[k] - s_begin)) *
                 (2.0 / t_window);
        if (first == n) first = k;
    }
    if (first == n)
        throw ValidationError("fundamental_phasors: input shorter than one cycle");
    for (std::size_t k = 0; k < first; ++k) out[k] = out[first];
    return out;
}

std::complex<double> combine_positive_sequence(const std::complex<double>& a,
                                               const std::complex<double>& b,
                                               const std::complex<double>& c) {
    const std::complex<double> rot = std::polar(1.0, kTwoPi / 3.0);
    return (a + rot * b + rot * rot * c) / 3.0;
}

PositiveSequence positive_sequence(const std::vector<double>& van, const std::vector<double>& vbn,
                                   const std::vector<double>& vcn, const std::vector<double>& ia,
                                   const std::vector<double>& ib, const std::vector<double>& ic,
                                   double dt, double f_hz) {
    if (!(f_hz > 0)) throw ValidationError("positive_sequence: frequency must be positive");
    const std::size_t n = van.size();
    for (const auto* w : {&vbn, &vcn, &ia, &ib, &ic})
        require_same_size(n, w->size(), "positive_sequence");
    if (n < 2 || static_cast<double>(n - 1) * dt < 1.0 / f_hz - 1e-12)
        throw ValidationError("positive_sequence: window shorter than one cycle");

    std::vector<double> theta(n);
    for (std::size_t k = 0; k < n; ++k)
        theta[k] = kTwoPi * f_hz * static_cast<double>(k) * dt;

    auto last_phasor = [&](const std::vector<double>& x) {
        return fundamental_phasors(x, theta, dt).back();
    };
    PositiveSequence res;
    res.v1 = combine_positive_sequence(last_phasor(van), last_phasor(vbn), last_phasor(vcn));
    res.i1 = combine_positive_sequence(last_phasor(ia), last_phasor(ib), last_phasor(ic));
    return res;
}

std::pair<double, double> compute_pq(const std::complex<double>& v1,
                                     const std::complex<double>& i1) {
    const std::complex<double> s = 1.5 * v1 * std::conj(i1); // peak -> 3-phase RMS power
    return {s.real(), s.imag()};
}

// ----------------------------------------------------- measurement chain

TimeSeries synthesize_waveforms(const SimTrace& trace) {
    const TimeSeries& s = trace.series;
    const auto& vd = s.channel("v_d");
    const auto& vq = s.channel("v_q");
    const auto& id = s.channel("i_d");
    const auto& iq = s.channel("i_q");
    const auto& delta = s.channel("delta");

    const double w_base = kTwoPi * trace.base.f_base;
    const double v_pk = trace.base.v_peak();
    const double i_pk = trace.base.i_peak();

    const std::size_t n = s.length();
    std::vector<double> van(n), vbn(n), vcn(n), ia(n), ib(n), ic(n);
    constexpr double shift = kTwoPi / 3.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = w_base * s.time_at(k) + delta[k];
        auto phase = [&](double off, double d, double q) {
            return d * std::sin(th + off) + q * std::cos(th + off);
        };
        van[k] = v_pk * phase(0.0, vd[k], vq[k]);
        vbn[k] = v_pk * phase(-shift, vd[k], vq[k]);
        vcn[k] = v_pk * phase(shift, vd[k], vq[k]);
        ia[k] = i_pk * phase(0.0, id[k], iq[k]);
        ib[k] = i_pk * phase(-shift, id[k], iq[k]);
        ic[k] = i_pk * phase(shift, id[k], iq[k]);
    }

    TimeSeries out(s.t0(), s.dt());
    out.add_channel("van", std::move(van));
    out.add_channel("vbn", std::move(vbn));
    out.add_channel("vcn", std::move(vcn));
    out.add_channel("ia", std::move(ia));
    out.add_channel("ib", std::move(ib));
    out.add_channel("ic", std::move(ic));
    return out;
}

TimeSeries derive_channels(const TimeSeries& waveforms, const DeriveOptions& opts) {
    if (!(opts.output_dt > 0)) throw ValidationError("derive_channels: output_dt must be > 0");
    const double dt = waveforms.dt();
    const auto& van = waveforms.channel("van");
    const auto& vbn = waveforms.channel("vbn");
    const auto& vcn = waveforms.channel("vcn");
    const auto& ia = waveforms.channel("ia");
    const auto& ib = waveforms.channel("ib");
    const auto& ic = waveforms.channel("ic");

    const PllResult pll = pll_frequency(van, vbn, vcn, dt, opts.pll);
    const auto pa = fundamental_phasors(van, pll.theta, dt);
    const auto pb = fundamental_phasors(vbn, pll.theta, dt);
    const auto pc = fundamental_phasors(vcn, pll.theta, dt);
    const auto qa = fundamental_phasors(ia, pll.theta, dt);
    const auto qb = fundamental_phasors(ib, pll.theta, dt);
    const auto qc = fundamental_phasors(ic, pll.theta, dt);
    const RmsResult rms = rms_voltage(van, dt, pll.f_hz);

    const std::size_t n = waveforms.length();
    std::vector<double> p_kw(n), q_kvar(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto v1 = combine_positive_sequence(pa[k], pb[k], pc[k]);
        const auto i1 = combine_positive_sequence(qa[k], qb[k], qc[k]);
        const auto [p_w, q_var] = compute_pq(v1, i1);
        p_kw[k] = p_w / 1e3;
        q_kvar[k] = q_var / 1e3;
    }

    TimeSeries fine(waveforms.t0(), dt);
    fine.add_channel("P", std::move(p_kw));
    fine.add_channel("Q", std::move(q_kvar));
    fine.add_channel("V", rms.rms);
    fine.add_channel("f", pll.f_hz);

    const double span = fine.t_end() - fine.t0();
    const auto n_out = static_cast<std::size_t>(std::floor(span / opts.output_dt + 1e-9)) + 1;
    return fine.resample(fine.t0(), opts.output_dt, n_out);
}

// ------------------------------------------------------------- metrics

double nrmse(const std::vector<double>& meas, const std::vector<double>& sim, double norm) {
    require_same_size(meas.size(), sim.size(), "nrmse");
    if (meas.empty()) throw ValidationError("nrmse: empty series");
    if (!(norm > 0)) throw ValidationError("nrmse: norm must be positive");
    double acc = 0.0;
    for (std::size_t i = 0; i < meas.size(); ++i) {
        const double d = meas[i] - sim[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(meas.size())) / norm;
}

MapeResult mape(const std::vector<double>& meas, const std::vector<double>& sim) {
    require_same_size(meas.size(), sim.size(), "mape");
    if (meas.empty()) throw ValidationError("mape: empty series");
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < meas.size(); ++i) {
        if (meas[i] == 0.0) continue;
        acc += std::abs(meas[i] - sim[i]) / std::abs(meas[i]);
        ++used;
    }
    return {used > 0 ? 100.0 * acc / static_cast<double>(used) : 0.0, meas.size() - used};
}

NormKind norm_kind_from_string(const std::string& s) {
    if (s == "pre_step_mean") return NormKind::pre_step_mean;
    if (s == "range") return NormKind::range;
    if (s == "max_abs") return NormKind::max_abs;
    throw ValidationError("unknown norm kind: " + s);
}

namespace {

double channel_norm(const TimeSeries& meas, const std::string& name, double t_step,
                    NormKind kind) {
    const auto& v = meas.channel(name);
    if (v.empty()) throw ValidationError("objective: empty channel " + name);
    auto range_of = [&] {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi - *lo;
    };
    switch (kind) {
    case NormKind::max_abs: {
        double m = 0.0;
        for (double s : v) m = std::max(m, std::abs(s));
        return m > 0 ? m : 1.0;
    }
    case NormKind::range: {
        const double r = range_of();
        return r > 0 ? r : 1.0;
    }
    case NormKind::pre_step_mean:
        break;
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < meas.length() && meas.time_at(i) < t_step; ++i) {
        sum += v[i];
        ++count;
    }
    const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
    if (std::abs(mean) > 1e-9) return std::abs(mean);
    const double r = range_of(); // e.g. a channel idling at zero before the step
    return r > 0 ? r : 1.0;
}

} // namespace

ObjectiveResult objective(const TimeSeries& meas, const TimeSeries& sim, double t_step,
                          const ObjectiveOptions& opts) {
    if (!(opts.window_length > 0))
        throw ValidationError("objective: window_length must be > 0");
    const double begin = opts.window_start > 0 ? opts.window_start : t_step;
    const TimeSeries win = meas.window(begin, begin + opts.window_length);
    if (win.length() == 0) throw ValidationError("objective: empty window");

    const std::pair<const char*, double> channels[] = {
        {"P", opts.w_p}, {"Q", opts.w_q}, {"V", opts.w_v}, {"f", opts.w_f}};

    ObjectiveResult res;
    std::vector<double> sim_vals(win.length());
    for (const auto& [name, weight] : channels) {
        if (weight < 0) throw ValidationError("objective: negative weight");
        const auto& meas_vals = win.channel(name);
        for (std::size_t i = 0; i < win.length(); ++i)
            sim_vals[i] = sim.interp(name, win.time_at(i));
        const double norm = channel_norm(meas, name, t_step, opts.norm);
        const double err = nrmse(meas_vals, sim_vals, norm);
        res.value += weight * err;
        res.channels.push_back({name, norm, err});
    }
    return res;
}

WindowMetrics window_metrics(const TimeSeries& meas, const TimeSeries& sim,
                             const std::string& channel, double t_begin, double t_end,
                             double norm) {
    const TimeSeries win = meas.window(t_begin, t_end);
    if (win.length() == 0) throw ValidationError("window_metrics: empty window");
    const auto& meas_vals = win.channel(channel);
    std::vector<double> sim_vals(win.length());
    for (std::size_t i = 0; i < win.length(); ++i)
        sim_vals[i] = sim.interp(channel, win.time_at(i));
    return {nrmse(meas_vals, sim_vals, norm), mape(meas_vals, sim_vals).percent};
}

} // namespace genset
