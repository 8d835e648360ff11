#include "genset/exciter.hpp"

#include <algorithm>
#include <cmath>

namespace genset {

FeedbackMode feedback_mode_from_string(const std::string& s) {
    if (s == "auto") return FeedbackMode::automatic;
    if (s == "on") return FeedbackMode::on;
    if (s == "off") return FeedbackMode::off;
    throw ValidationError("exciter feedback mode must be auto|on|off, got: " + s);
}

std::string to_string(FeedbackMode m) {
    switch (m) {
    case FeedbackMode::automatic: return "auto";
    case FeedbackMode::on: return "on";
    case FeedbackMode::off: return "off";
    }
    return "auto";
}

std::vector<Dc4bViolation> validate_dc4b(const Dc4bParams& p) {
    std::vector<Dc4bViolation> out;
    if (p.t_f == 0.0 && p.k_f != 0.0)
        out.push_back({1, true, "rate feedback time constant t_f may be zero only when k_f is zero"});
    if (p.k_d != 0.0 && p.feedback_active())
        out.push_back({2, false,
                       "rate feedback and PID derivative action are both active; the reference "
                       "topology enables the feedback path only when k_d = 0"});
    if (!(p.efd_1 > p.efd_2) || !(p.se_efd_1 > p.se_efd_2))
        out.push_back({3, true,
                       "saturation anchors must satisfy efd_1 > efd_2 and se_efd_1 > se_efd_2"});
    if (!(p.se_efd_2 > 0.0))
        out.push_back({3, true, "saturation anchor values must be positive for an exponential fit"});
    if (!(p.k_g >= 0.0 && p.k_g <= 1.0))
        out.push_back({2, true, "loop gain k_g must lie in [0, 1]"});
    if (!(p.t_r > 0) || !(p.t_a > 0) || !(p.t_e > 0) || !(p.k_a > 0))
        out.push_back({1, true, "t_r, t_a, t_e, k_a must be positive"});
    if (!(p.vr_min < p.vr_max))
        out.push_back({1, true, "regulator limits must satisfy vr_min < vr_max"});
    if (p.t_f < 0 || p.k_f < 0)
        out.push_back({1, true, "k_f and t_f must be non-negative"});
    return out;
}

void require_valid_dc4b(const Dc4bParams& p) {
    for (const auto& v : validate_dc4b(p))
        if (v.fatal) throw ValidationError("exciter: " + v.message);
}

namespace {

struct SatFit {
    double a, b;
};

SatFit saturation_fit(const Dc4bParams& p) {
    const double b = std::log(p.se_efd_1 / p.se_efd_2) / (p.efd_1 - p.efd_2);
    const double a = p.se_efd_1 * std::exp(-b * p.efd_1);
    return {a, b};
}

} // namespace

double exciter_saturation(double efd, const Dc4bParams& p) {
    if (!(p.efd_1 > p.efd_2)) throw ValidationError("exciter saturation anchors: efd_1 <= efd_2");
    if (!(p.se_efd_1 > 0) || !(p.se_efd_2 > 0))
        throw ValidationError("exciter saturation anchors must be positive");
    const SatFit f = saturation_fit(p);
    return f.a * std::exp(f.b * efd);
}

Dc4bState dc4b_equilibrium(double efd, double v_terminal, const Dc4bParams& p) {
    Dc4bState s;
    s.v_meas = v_terminal;
    s.efd = efd;
    s.v_regulator = (p.k_e + exciter_saturation(efd, p)) * efd;
    s.pid_integrator = s.v_regulator / p.k_a;
    s.pid_derivative_filter = 0.0;
    s.feedback_state = efd;
    return s;
}

std::array<double, Dc4bState::size>
dc4b_derivatives(const Dc4bState& s, double v_ref, double v_terminal, double vhz_signal,
                 const Dc4bParams& p) {
    std::array<double, Dc4bState::size> dx{};

    dx[0] = (v_terminal - s.v_meas) / p.t_r;

    const double v_fb =
        p.feedback_active() ? (p.k_f / p.t_f) * (s.efd - s.feedback_state) : 0.0;
    const double err = p.k_g * (v_ref + vhz_signal - s.v_meas) - v_fb;

    double d_int = p.k_i * err;
    const double d_filt = p.n_d * (err - s.pid_derivative_filter);
    const double pid = p.k_p * err + s.pid_integrator + p.k_d * d_filt;

    double d_reg = (p.k_a * pid - s.v_regulator) / p.t_a;
    const bool at_max = s.v_regulator >= p.vr_max;
    const bool at_min = s.v_regulator <= p.vr_min;
    if ((at_max && d_reg > 0) || (at_min && d_reg < 0)) d_reg = 0.0;
    if ((at_max && err > 0) || (at_min && err < 0)) d_int = 0.0;

    const double se = exciter_saturation(s.efd, p);
    dx[1] = d_int;
    dx[2] = d_filt;
    dx[3] = d_reg;
    dx[4] = (s.v_regulator - (p.k_e + se) * s.efd) / p.t_e;
    dx[5] = p.t_f > 0 ? (s.efd - s.feedback_state) / p.t_f : 0.0;
    return dx;
}

void clamp_regulator(Dc4bState& s, const Dc4bParams& p) {
    s.v_regulator = std::clamp(s.v_regulator, p.vr_min, p.vr_max);
}

std::pair<VhzState, double> vhz_step(const VhzState& s, double v_terminal, double freq,
                                     double dt, const VhzParams& p) {
    if (!(freq > 0)) throw ValidationError("volts-per-hertz limiter: frequency must be > 0");
    if (!p.enabled) return {VhzState{0.0}, 0.0};
    const double err = v_terminal / freq - p.setpoint;
    VhzState next;
    if (err > 0) {
        next.integrator = s.integrator + p.gain * err * dt;
        return {next, -next.integrator};
    }
    next.integrator = 0.0;
    return {next, 0.0};
}

} // namespace genset
