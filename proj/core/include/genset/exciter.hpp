#pragma once

#include <array>
#include <string>
#include <vector>

#include "genset/errors.hpp"

namespace genset {

// Governs whether the rate-feedback path (K_f, T_f) is in the loop.
//  - automatic: active only while the PID derivative gain is zero
//  - on / off: explicit override
enum class FeedbackMode { automatic, on, off };

FeedbackMode feedback_mode_from_string(const std::string& s);
std::string to_string(FeedbackMode m);

// Field-controlled DC commutator exciter with PID regulator, loop gain k_g,
// rate feedback, and exponential saturation through two anchor points.
struct Dc4bParams {
    double t_r = 0.062;   // s, terminal-voltage filter
    double k_a = 335.85;  // regulator gain
    double t_a = 0.0175;  // s, regulator lag
    double vr_min = -10.45;
    double vr_max = 14.34;
    double k_p = 434.48;
    double k_i = 441.2;
    double k_d = 221.19;
    double n_d = 36.42;   // derivative filter coefficient
    double k_f = 0.014;   // rate feedback gain
    double t_f = 1.56;    // s, rate feedback washout
    double k_e = 0.61;    // exciter field constant
    double t_e = 0.042;   // s, exciter integrator
    double k_g = 0.97;    // loop gain on the voltage error, in [0,1]
    double efd_1 = 3.0;   // saturation anchors: Se(efd_1) = se_efd_1, ...
    double se_efd_1 = 0.66;
    double efd_2 = 2.25;
    double se_efd_2 = 0.13;
    FeedbackMode feedback = FeedbackMode::on;

    bool feedback_active() const {
        switch (feedback) {
        case FeedbackMode::on: return k_f != 0.0 && t_f > 0.0;
        case FeedbackMode::off: return false;
        case FeedbackMode::automatic: return k_d == 0.0 && k_f != 0.0 && t_f > 0.0;
        }
        return false;
    }
};

// Parameter-consistency findings. Restrictions 1 and 3 are hard errors;
// restriction 2 is advisory (the shipped defaults run the rate feedback
// alongside the derivative term because the published gain set is unstable
// without it).
struct Dc4bViolation {
    int restriction; // 1..3
    bool fatal;
    std::string message;
};

std::vector<Dc4bViolation> validate_dc4b(const Dc4bParams& p);
// Throws ValidationError on any fatal finding.
void require_valid_dc4b(const Dc4bParams& p);

// Se(efd) = a*exp(b*efd) fitted through the two anchors.
double exciter_saturation(double efd, const Dc4bParams& p);

struct Dc4bState {
    double v_meas = 1.0;               // filtered terminal voltage
    double pid_integrator = 0.0;
    double pid_derivative_filter = 0.0;
    double v_regulator = 0.0;
    double efd = 0.0;
    double feedback_state = 0.0;

    static constexpr std::size_t size = 6;
    std::array<double, size> to_array() const {
        return {v_meas, pid_integrator, pid_derivative_filter, v_regulator, efd, feedback_state};
    }
    static Dc4bState from_array(const std::array<double, size>& x) {
        return {x[0], x[1], x[2], x[3], x[4], x[5]};
    }
};

// Steady state holding a given field voltage at a given terminal voltage;
// the regulator reference that sustains it equals the terminal voltage.
Dc4bState dc4b_equilibrium(double efd, double v_terminal, const Dc4bParams& p);

// Continuous dynamics. Anti-windup: the regulator derivative is zeroed when
// pushing past a limit and the PID integrator freezes only while the error
// drives the regulator deeper into that limit. Callers clamp v_regulator to
// [vr_min, vr_max] at accepted steps (see clamp_regulator).
std::array<double, Dc4bState::size>
dc4b_derivatives(const Dc4bState& s, double v_ref, double v_terminal, double vhz_signal,
                 const Dc4bParams& p);

void clamp_regulator(Dc4bState& s, const Dc4bParams& p);

// Volts-per-hertz limiter: integrates positive (v/f - setpoint) error into a
// non-positive trim on the voltage reference; resets on non-positive error.
struct VhzParams {
    double gain = 1.0;
    double setpoint = 1.0; // pu V / pu f
    bool enabled = true;
};

struct VhzState {
    double integrator = 0.0;
};

// Returns the updated state and the (<= 0) limit signal.
std::pair<VhzState, double> vhz_step(const VhzState& s, double v_terminal, double freq,
                                     double dt, const VhzParams& p);

} // namespace genset
