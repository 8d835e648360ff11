#include "genset/machine.hpp"

#include <cmath>

namespace genset {

void MachineParams::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0)) throw ValidationError(std::string("machine parameter must be > 0: ") + name);
    };
    pos(l_md, "l_md");
    pos(l_mq, "l_mq");
    pos(l_l, "l_l");
    pos(l_lfd, "l_lfd");
    pos(l_lkd, "l_lkd");
    pos(l_kq1, "l_kq1");
    pos(l_kq2, "l_kq2");
    pos(r_s, "r_s");
    pos(r_fd, "r_fd");
    pos(r_kd, "r_kd");
    pos(r_kq1, "r_kq1");
    pos(r_kq2, "r_kq2");
    if (l_f1d < 0) throw ValidationError("machine parameter must be >= 0: l_f1d");
    if (!(h >= 0.3 && h <= 0.8))
        throw ValidationError("machine inertia H outside supported range [0.3, 0.8]");
    if (d < 0) throw ValidationError("machine damping D must be >= 0");
}

namespace {

Eigen::Matrix3d d_axis_matrix(const MachineParams& p) {
    Eigen::Matrix3d m;
    m << p.l_md + p.l_l, p.l_md, p.l_md,
         p.l_md, p.l_lkd + p.l_f1d + p.l_md, p.l_f1d + p.l_md,
         p.l_md, p.l_f1d + p.l_md, p.l_lfd + p.l_f1d + p.l_md;
    return m;
}

Eigen::Matrix3d q_axis_matrix(const MachineParams& p) {
    Eigen::Matrix3d m;
    m << p.l_mq + p.l_l, p.l_mq, p.l_mq,
         p.l_mq, p.l_mq + p.l_kq1, p.l_mq,
         p.l_mq, p.l_mq, p.l_mq + p.l_kq2;
    return m;
}

void check_spd(const Eigen::Matrix3d& m, const char* axis) {
    Eigen::LLT<Eigen::Matrix3d> llt(m);
    if (llt.info() != Eigen::Success)
        throw ValidationError(std::string("degenerate machine parameters: ") + axis +
                              "-axis inductance matrix is not positive definite");
}

} // namespace

Machine::Machine(const MachineParams& p) : p_(p) {
    p_.validate();
    md_ = d_axis_matrix(p_);
    mq_ = q_axis_matrix(p_);
    check_spd(md_, "d");
    check_spd(mq_, "q");
    mdi_ = md_.inverse();
    mqi_ = mq_.inverse();
}

MachineCurrents Machine::flux_to_currents(const MachineState& s) const {
    const Eigen::Vector3d cd = mdi_ * Eigen::Vector3d(s.psi_d, s.psi_kd, s.psi_fd);
    const Eigen::Vector3d cq = mqi_ * Eigen::Vector3d(s.psi_q, s.psi_kq1, s.psi_kq2);
    MachineCurrents out;
    out.i_d = -cd(0);
    out.i_kd = cd(1);
    out.i_fd = cd(2);
    out.i_q = -cq(0);
    out.i_kq1 = cq(1);
    out.i_kq2 = cq(2);
    return out;
}

MachineState Machine::currents_to_flux(const MachineCurrents& c) const {
    const Eigen::Vector3d pd = md_ * Eigen::Vector3d(-c.i_d, c.i_kd, c.i_fd);
    const Eigen::Vector3d pq = mq_ * Eigen::Vector3d(-c.i_q, c.i_kq1, c.i_kq2);
    MachineState s;
    s.psi_d = pd(0);
    s.psi_kd = pd(1);
    s.psi_fd = pd(2);
    s.psi_q = pq(0);
    s.psi_kq1 = pq(1);
    s.psi_kq2 = pq(2);
    return s;
}

std::array<double, MachineState::size>
Machine::derivatives(const MachineState& s, double v_d, double v_q, double v_fd,
                     double t_m) const {
    const MachineCurrents c = flux_to_currents(s);
    const double t_e = electrical_torque(s, c);
    std::array<double, MachineState::size> dx{};
    dx[0] = kOmegaBase * (v_d + p_.r_s * c.i_d + s.omega * s.psi_q);
    dx[1] = kOmegaBase * (v_q + p_.r_s * c.i_q - s.omega * s.psi_d);
    dx[2] = kOmegaBase * (v_fd - p_.r_fd * c.i_fd);
    dx[3] = -kOmegaBase * p_.r_kd * c.i_kd;
    dx[4] = -kOmegaBase * p_.r_kq1 * c.i_kq1;
    dx[5] = -kOmegaBase * p_.r_kq2 * c.i_kq2;
    dx[6] = (t_m - t_e - p_.d * (s.omega - 1.0)) / (2.0 * p_.h);
    dx[7] = kOmegaBase * (s.omega - 1.0);
    return dx;
}

Eigen::Matrix<double, 8, 8>
Machine::jacobian(const MachineState& s, double /*v_d*/, double /*v_q*/, double /*v_fd*/,
                  double /*t_m*/) const {
    // State order: psi_d, psi_q, psi_fd, psi_kd, psi_kq1, psi_kq2, omega, delta.
    // Current sensitivities (columns of the inverse inductance matrices; the
    // internal axis vectors are ordered (psi_d, psi_kd, psi_fd)).
    const MachineCurrents c = flux_to_currents(s);
    Eigen::Matrix<double, 8, 8> j = Eigen::Matrix<double, 8, 8>::Zero();

    // d-axis: solve order (psi_d, psi_kd, psi_fd) -> (-i_d, i_kd, i_fd);
    // map internal column k to state index: 0->psi_d(0), 1->psi_kd(3), 2->psi_fd(2)
    const int dcol[3] = {0, 3, 2};
    const int qcol[3] = {1, 4, 5};

    for (int k = 0; k < 3; ++k) {
        const double did = -mdi_(0, k);  // di_d / dpsi
        const double dikd = mdi_(1, k);  // di_kd / dpsi
        const double difd = mdi_(2, k);  // di_fd / dpsi
        const int sc = dcol[k];
        j(0, sc) += kOmegaBase * p_.r_s * did;
        j(2, sc) += -kOmegaBase * p_.r_fd * difd;
        j(3, sc) += -kOmegaBase * p_.r_kd * dikd;
        // dT_e/dpsi via -psi_q * di_d
        j(6, sc) += -(-s.psi_q * did) / (2.0 * p_.h);
    }
    for (int k = 0; k < 3; ++k) {
        const double diq = -mqi_(0, k);
        const double dikq1 = mqi_(1, k);
        const double dikq2 = mqi_(2, k);
        const int sc = qcol[k];
        j(1, sc) += kOmegaBase * p_.r_s * diq;
        j(4, sc) += -kOmegaBase * p_.r_kq1 * dikq1;
        j(5, sc) += -kOmegaBase * p_.r_kq2 * dikq2;
        // dT_e/dpsi via psi_d * di_q
        j(6, sc) += -(s.psi_d * diq) / (2.0 * p_.h);
    }

    // Speed-voltage coupling and the direct T_e flux terms.
    j(0, 1) += kOmegaBase * s.omega;  // d(dpsi_d)/dpsi_q
    j(0, 6) += kOmegaBase * s.psi_q;  // d(dpsi_d)/domega
    j(1, 0) += -kOmegaBase * s.omega; // d(dpsi_q)/dpsi_d
    j(1, 6) += -kOmegaBase * s.psi_d; // d(dpsi_q)/domega
    // T_e = psi_d i_q - psi_q i_d: explicit psi_d, psi_q appearances
    j(6, 0) += -(c.i_q) / (2.0 * p_.h);
    j(6, 1) += -(-c.i_d) / (2.0 * p_.h);
    j(6, 6) += -p_.d / (2.0 * p_.h);
    j(7, 6) = kOmegaBase;
    return j;
}

} // namespace genset
