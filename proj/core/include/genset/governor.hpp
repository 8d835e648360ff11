#pragma once

#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "genset/errors.hpp"
#include "genset/per_unit.hpp"

namespace genset {

enum class GovernorKind { simple, degov, ggov1, ggov1d };

GovernorKind governor_kind_from_string(const std::string& s);
std::string to_string(GovernorKind k);

// Pure time delay: linear interpolation over a (timestamp, value) ring.
// Exact for fixed-step integration; tau = 0 is the identity.
class DelayBuffer {
  public:
    explicit DelayBuffer(double tau) : tau_(tau) {
        if (tau < 0) throw ValidationError("delay must be >= 0");
    }
    double tau() const { return tau_; }

    void prime(double t0, double value); // constant history up to t0
    void push(double t, double value);
    double delayed(double t) const; // value at t - tau

  private:
    double tau_;
    std::deque<std::pair<double, double>> buf_;
};

// PI speed controller -> first-order actuator -> engine delay -> engine
// power map p_m = c_2 * w * (c * m_delayed - c_3 * w).
struct SimpleGovParams {
    double k_p = 13.8;
    double k_i = 30.9;
    double t_sm = 0.059;  // s, actuator lag
    double c = 0.97;      // fuel-to-power coefficient (combined gain)
    double c_2 = 1.04;
    double c_3 = 1.79;    // speed-proportional engine losses
    double k_1 = 1.0;     // actuator gain
    double tau_d = 0.024; // s, engine dead time
    void validate() const;
};

// Speed error -> 1/((1+T1 s)(1+T2 s)) * (1+T3 s) -> K(1+T4 s)/(s(1+T5 s)(1+T6 s))
// -> dead time -> torque; p_m = torque * w.
struct DegovParams {
    double t_1 = 0.058, t_2 = 0.021, t_3 = 0.49;
    double t_4 = 0.056, t_5 = 0.0058, t_6 = 0.017;
    double k = 27.2;
    double t_d = 0.024; // s, engine dead time
    void validate() const;
};

// Clamped speed error -> PID -> first-order actuator with valve rate and
// position limits -> engine gain k_turb*(fuel - w_fnl) -> lead-lag.
struct Ggov1Params {
    double maxerr = 0.4, minerr = -0.48;
    double k_p = 40.0, k_i = 40.0, k_d = 0.0, n_d = 50.0;
    double t_act = 0.05;
    double valve_open = 68.39, valve_close = -13.02; // pu/s
    double pos_min = 0.0, pos_max = 3.0;             // pu valve travel
    double k_turb = 0.35;
    double t_b = 0.1, t_c = 0.1;
    double w_fnl = 0.11;
    void validate() const;
};

// Clamped speed error -> 1/((1+T1 s)(1+T2 s)) shaping -> third-order actuator
// K(1+T3 s)(1+T4 s)/(s(1+T5 s)(1+T6 s)) with valve limits -> same engine block.
struct Ggov1dParams {
    double maxerr = 0.069, minerr = -0.09;
    double t_1 = 0.028, t_2 = 0.055, t_3 = 0.54;
    double t_4 = 0.052, t_5 = 0.01, t_6 = 0.042;
    double k = 90.42;
    double valve_open = 92.86, valve_close = -105.75;
    double pos_min = 0.0, pos_max = 3.0;
    double k_turb = 0.357;
    double t_b = 0.86, t_c = 0.69;
    double w_fnl = 0.11;
    void validate() const;
};

// Continuous-time governor realization with explicit state vector. The
// simulation engine owns integration; the governor supplies derivatives, the
// mechanical power map, initialization, and the delayed-signal plumbing.
class Governor {
  public:
    virtual ~Governor() = default;
    virtual GovernorKind kind() const = 0;
    virtual std::size_t n_states() const = 0;

    // Steady state sustaining mechanical power p_m0 at speed w = w_ref.
    virtual std::vector<double> equilibrium(double p_m0) const = 0;

    virtual void derivatives(const double* s, double t, double w, double w_ref,
                             double* ds) const = 0;
    virtual double mechanical_power(const double* s, double t, double w) const = 0;

    // Hard state projection applied after each accepted step (valve travel).
    virtual void clamp_states(double* s) const {}

    // Dead-time support: which state feeds the delay line (or none).
    virtual bool has_delay() const { return false; }
    virtual double delay_source(const double* s) const { return 0.0; }
    virtual DelayBuffer* delay_buffer() { return nullptr; }

    virtual std::unique_ptr<Governor> clone() const = 0;
};

std::unique_ptr<Governor> make_simple_governor(const SimpleGovParams& p);
std::unique_ptr<Governor> make_degov_governor(const DegovParams& p);
std::unique_ptr<Governor> make_ggov1_governor(const Ggov1Params& p);
std::unique_ptr<Governor> make_ggov1d_governor(const Ggov1dParams& p);

// Least-squares line fuel_pu = w_fnl + p_pu / k_turb through measured
// (power kW, fuel L/h) points; returns (k_turb, w_fnl).
struct FuelCurveFit {
    double k_turb;
    double w_fnl;
    double rms_residual; // pu fuel
};
FuelCurveFit estimate_fuel_curve(const std::vector<std::pair<double, double>>& points_kw_lph,
                                 const PerUnitBase& base);

} // namespace genset
