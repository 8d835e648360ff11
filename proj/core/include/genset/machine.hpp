#pragma once

#include <array>

#include <Eigen/Dense>

#include "genset/errors.hpp"

namespace genset {

inline constexpr double kOmegaBase = 2.0 * 3.141592653589793238462643383279502884 * 60.0;

// Round-rotor circuit constants, per-unit. Two rotor circuits per axis:
// field + one damper on d, two dampers on q.
struct MachineParams {
    double l_md = 2.2;    // d-axis magnetizing inductance
    double l_mq = 1.1;    // q-axis magnetizing inductance
    double l_l = 0.08;    // stator leakage
    double l_lfd = 0.127; // field leakage
    double l_lkd = 0.12;  // d-damper leakage
    double l_f1d = 0.0;   // field/damper differential mutual
    double l_kq1 = 0.3;   // q-damper 1 leakage
    double l_kq2 = 0.1;   // q-damper 2 leakage
    double r_s = 0.012;
    double r_fd = 0.00343;
    double r_kd = 0.0212;
    double r_kq1 = 0.0149;
    double r_kq2 = 0.0637;
    double h = 0.7359; // s, inertia constant
    double d = 0.0;    // pu damping torque coefficient

    void validate() const;
};

struct MachineState {
    double psi_d = 0, psi_q = 0, psi_fd = 0, psi_kd = 0, psi_kq1 = 0, psi_kq2 = 0;
    double omega = 1.0; // pu
    double delta = 0.0; // rad

    static constexpr std::size_t size = 8;
    std::array<double, size> to_array() const {
        return {psi_d, psi_q, psi_fd, psi_kd, psi_kq1, psi_kq2, omega, delta};
    }
    static MachineState from_array(const std::array<double, size>& x) {
        return {x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]};
    }
};

struct MachineCurrents {
    double i_d = 0, i_q = 0, i_fd = 0, i_kd = 0, i_kq1 = 0, i_kq2 = 0;
};

// Precomputes the axis inductance matrices and their inverses once per
// parameter set; all per-step operations are matrix-free after that.
class Machine {
  public:
    explicit Machine(const MachineParams& p);

    const MachineParams& params() const { return p_; }

    MachineCurrents flux_to_currents(const MachineState& s) const;
    // Inverse mapping, for round-trip checks and equilibrium construction.
    MachineState currents_to_flux(const MachineCurrents& c) const;

    static double electrical_torque(const MachineState& s, const MachineCurrents& c) {
        return s.psi_d * c.i_q - s.psi_q * c.i_d;
    }

    // d/dt of the 8 machine states given terminal dq voltage, field voltage
    // (circuit pu), and mechanical torque. Damper windings are shorted.
    std::array<double, MachineState::size>
    derivatives(const MachineState& s, double v_d, double v_q, double v_fd, double t_m) const;

    // Analytic Jacobian of `derivatives` w.r.t. the 8 states, inputs fixed.
    Eigen::Matrix<double, 8, 8>
    jacobian(const MachineState& s, double v_d, double v_q, double v_fd, double t_m) const;

    // Field voltage (circuit pu) equivalent to an air-gap-line efd in pu.
    double field_voltage_from_efd(double efd) const { return p_.r_fd * efd / p_.l_md; }
    // Air-gap-line efd that sustains a given field current at steady state.
    double efd_from_field_current(double i_fd) const { return p_.l_md * i_fd; }

    const Eigen::Matrix3d& d_axis_inductance() const { return md_; }
    const Eigen::Matrix3d& q_axis_inductance() const { return mq_; }

  private:
    MachineParams p_;
    Eigen::Matrix3d md_, mq_;   // [psi_axis] = M * [-i_stator, i_rotor1, i_rotor2]
    Eigen::Matrix3d mdi_, mqi_; // inverses
};

} // namespace genset
