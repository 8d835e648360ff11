#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "genset/exciter.hpp"
#include "genset/governor.hpp"
#include "genset/machine.hpp"
#include "genset/per_unit.hpp"
#include "genset/time_series.hpp"

namespace genset {

// Load step experiment: hold (p0,q0), switch to (p1,q1) at t_step.
struct Scenario {
    double p0_kw = 80.0, q0_kvar = 0.0;
    double p1_kw = 240.0, q1_kvar = 160.0;
    double t_step = 1.0; // s
    double t_end = 5.0;  // s
    double dt = 1e-4;    // s
    double v_nominal = 480.0; // V line-line RMS
    double f_nominal = 60.0;  // Hz

    void validate() const;
};

// Parallel-branch load admittance y = g - j*b at a given voltage.
struct LoadAdmittance {
    double g = 0.0; // pu conductance
    double b = 0.0; // pu inductive susceptance
    bool open_circuit = false;
};

LoadAdmittance load_to_admittance(double p_kw, double q_kvar, double v_pu,
                                  const PerUnitBase& base);
// Series (r, x) equivalent of the same branch.
std::pair<double, double> load_to_impedance(double p_kw, double q_kvar, double v_pu,
                                            const PerUnitBase& base);

// Everything the coupled model needs besides the scenario.
struct SystemParams {
    PerUnitBase base{};
    MachineParams machine{};
    Dc4bParams exciter{};
    VhzParams vhz{};
    GovernorKind kind = GovernorKind::ggov1d;
    SimpleGovParams simple{};
    DegovParams degov{};
    Ggov1Params ggov1{};
    Ggov1dParams ggov1d{};
    double b_snubber = 0.05;  // pu terminal capacitance (numerical bus stiffness)
    double v_setpoint = 1.0;  // pu regulator setpoint
};

// Raw per-unit trajectory on the integration grid (decimated by
// record_stride), plus bookkeeping for waveform synthesis.
struct SimTrace {
    TimeSeries series; // channels: p, q, v_mag, f_pu, delta, v_d, v_q, i_d, i_q,
                       //           efd, v_regulator, vhz_signal
    double t_step = 0.0;
    PerUnitBase base{};
};

class SimEngine {
  public:
    explicit SimEngine(const SystemParams& params);

    // Steady state at (p_kw, q_kvar); throws if the regulator or valve cannot
    // hold it. Residual polished below 1e-9 by damped Newton from the
    // analytic seed.
    void initialize(double p_kw, double q_kvar);

    // Runs the scenario from the matching equilibrium. record_stride
    // decimates the stored trajectory (1 = every step).
    SimTrace run(const Scenario& scenario, int record_stride = 1);

    // State-vector access for diagnostics and tests.
    const std::vector<double>& state() const { return x_; }
    std::vector<double> derivatives_at(const std::vector<double>& x, double t,
                                       const LoadAdmittance& load) const;
    double equilibrium_residual() const { return residual_; }
    std::size_t n_states() const { return x_.size(); }

    // Linearization at the current state (finite differences), for analysis.
    std::vector<std::vector<double>> jacobian(const LoadAdmittance& load) const;

    const SystemParams& params() const { return params_; }

  private:
    friend struct SimEngineTestAccess;
    void rhs(const double* x, double t, const LoadAdmittance& load, double vhz_signal,
             double* dx) const;
    LoadAdmittance snubbed(const LoadAdmittance& load) const;

    SystemParams params_;
    Machine machine_;
    std::unique_ptr<Governor> governor_;
    std::vector<double> x_;
    double v_ref_ = 1.0;
    double residual_ = 0.0;
    bool initialized_ = false;

    static constexpr std::size_t kMach = 0;   // 8 states
    static constexpr std::size_t kExc = 8;    // 6 states
    static constexpr std::size_t kBusVd = 14;
    static constexpr std::size_t kBusVq = 15;
    static constexpr std::size_t kLoadId = 16;
    static constexpr std::size_t kLoadIq = 17;
    static constexpr std::size_t kGov = 18;
};

} // namespace genset
