#include "genset/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Dense>

namespace genset {

void Scenario::validate() const {
    if (!(dt > 0 && dt <= 1e-3))
        throw ValidationError("scenario: dt must satisfy 0 < dt <= 1e-3 s");
    if (!(t_step < t_end)) throw ValidationError("scenario: t_step must precede t_end");
    if (t_step < 0) throw ValidationError("scenario: t_step must be >= 0");
    if (p0_kw < 0 || p1_kw < 0 || q0_kvar < 0 || q1_kvar < 0)
        throw ValidationError("scenario: loads must be non-negative");
    if (!(v_nominal > 0) || !(f_nominal > 0))
        throw ValidationError("scenario: nominal voltage and frequency must be positive");
}

LoadAdmittance load_to_admittance(double p_kw, double q_kvar, double v_pu,
                                  const PerUnitBase& base) {
    if (!(v_pu > 0)) throw ValidationError("load conversion needs v > 0");
    const double p = base.to_per_unit(p_kw * 1e3, Channel::active_power);
    const double q = base.to_per_unit(q_kvar * 1e3, Channel::reactive_power);
    if (p == 0.0 && q == 0.0) return {0.0, 0.0, true};
    return {p / (v_pu * v_pu), q / (v_pu * v_pu), false};
}

std::pair<double, double> load_to_impedance(double p_kw, double q_kvar, double v_pu,
                                            const PerUnitBase& base) {
    const LoadAdmittance y = load_to_admittance(p_kw, q_kvar, v_pu, base);
    if (y.open_circuit) throw ValidationError("zero load has no series impedance (open circuit)");
    const double mag2 = y.g * y.g + y.b * y.b;
    return {y.g / mag2, y.b / mag2};
}

SimEngine::SimEngine(const SystemParams& params)
    : params_(params), machine_(params.machine) {
    params_.base.validate();
    require_valid_dc4b(params_.exciter);
    switch (params_.kind) {
    case GovernorKind::simple: governor_ = make_simple_governor(params_.simple); break;
    case GovernorKind::degov: governor_ = make_degov_governor(params_.degov); break;
    case GovernorKind::ggov1: governor_ = make_ggov1_governor(params_.ggov1); break;
    case GovernorKind::ggov1d: governor_ = make_ggov1d_governor(params_.ggov1d); break;
    }
    if (!(params_.b_snubber > 0)) throw ValidationError("b_snubber must be > 0");
    x_.assign(kGov + governor_->n_states(), 0.0);
}

LoadAdmittance SimEngine::snubbed(const LoadAdmittance& load) const {
    // The inductive branch absorbs the snubber's charging current so the
    // machine-side P and Q land exactly on the requested load.
    LoadAdmittance out = load;
    out.b += params_.b_snubber;
    out.open_circuit = false;
    return out;
}

void SimEngine::rhs(const double* x, double t, const LoadAdmittance& load, double vhz_signal,
                    double* dx) const {
    const auto& m = params_.machine;
    MachineState ms{x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]};
    Dc4bState es{x[8], x[9], x[10], x[11], x[12], x[13]};
    const double v_d = x[kBusVd], v_q = x[kBusVq];
    const double i_ld = x[kLoadId], i_lq = x[kLoadIq];
    const double w = ms.omega;

    const double p_m = governor_->mechanical_power(x + kGov, t, w);
    const double t_m = p_m / w;
    const double v_fd = machine_.field_voltage_from_efd(es.efd);
    const auto dm = machine_.derivatives(ms, v_d, v_q, v_fd, t_m);
    std::copy(dm.begin(), dm.end(), dx);

    const double v_t = std::hypot(v_d, v_q);
    const auto de = dc4b_derivatives(es, v_ref_, v_t, vhz_signal, params_.exciter);
    std::copy(de.begin(), de.end(), dx + kExc);

    const MachineCurrents c = machine_.flux_to_currents(ms);
    const double wb = params_.base.w_base();
    const double bc = params_.b_snubber;
    dx[kBusVd] = (wb / bc) * (c.i_d - load.g * v_d - i_ld) + wb * w * v_q;
    dx[kBusVq] = (wb / bc) * (c.i_q - load.g * v_q - i_lq) - wb * w * v_d;
    dx[kLoadId] = wb * (load.b * v_d + w * i_lq);
    dx[kLoadIq] = wb * (load.b * v_q - w * i_ld);

    governor_->derivatives(x + kGov, t, w, 1.0, dx + kGov);

    // omega appears as 1/w in the torque conversion; machine derivatives used
    // t_m directly so nothing further here.
    (void)m;
}

std::vector<double> SimEngine::derivatives_at(const std::vector<double>& x, double t,
                                              const LoadAdmittance& load) const {
    if (x.size() != x_.size()) throw ValidationError("state size mismatch");
    std::vector<double> dx(x.size());
    rhs(x.data(), t, snubbed(load), 0.0, dx.data());
    return dx;
}

void SimEngine::initialize(double p_kw, double q_kvar) {
    const auto& m = params_.machine;
    const double v_t0 = params_.v_setpoint;
    const LoadAdmittance raw = load_to_admittance(p_kw, q_kvar, v_t0, params_.base);
    const LoadAdmittance load = snubbed(raw);

    // Phasor solution: machine current feeds the load branches; the rotor
    // angle comes from the q-axis internal voltage.
    const std::complex<double> v_ph(v_t0, 0.0);
    const std::complex<double> y_machine(raw.g, -raw.b);
    const std::complex<double> i_ph = v_ph * y_machine;
    const double x_q = m.l_mq + m.l_l;
    const std::complex<double> eq = v_ph + std::complex<double>(m.r_s, x_q) * i_ph;
    const double delta = std::arg(eq);
    const std::complex<double> rot = std::complex<double>(0, 1) * std::exp(std::complex<double>(0, -delta));
    const std::complex<double> vdq = rot * v_ph;
    const std::complex<double> idq = rot * i_ph;
    const double v_d = vdq.real(), v_q = vdq.imag();
    const double i_d = idq.real(), i_q = idq.imag();

    const double psi_d = v_q + m.r_s * i_q;
    const double psi_q = -(v_d + m.r_s * i_d);
    const double i_fd = (psi_d + (m.l_md + m.l_l) * i_d) / m.l_md;
    const double psi_fd = -m.l_md * i_d + (m.l_lfd + m.l_f1d + m.l_md) * i_fd;
    const double psi_kd = -m.l_md * i_d + (m.l_f1d + m.l_md) * i_fd;
    const double psi_kq = -m.l_mq * i_q;
    const double efd = machine_.efd_from_field_current(i_fd);
    const double t_e = psi_d * i_q - psi_q * i_d;

    const Dc4bState es = dc4b_equilibrium(efd, v_t0, params_.exciter);
    if (es.v_regulator > params_.exciter.vr_max || es.v_regulator < params_.exciter.vr_min)
        throw ValidationError("initial load exceeds excitation capability: regulator "
                              "equilibrium outside its limits");

    x_.assign(x_.size(), 0.0);
    x_[0] = psi_d;
    x_[1] = psi_q;
    x_[2] = psi_fd;
    x_[3] = psi_kd;
    x_[4] = psi_kq;
    x_[5] = psi_kq;
    x_[6] = 1.0;
    x_[7] = delta;
    const auto ea = es.to_array();
    std::copy(ea.begin(), ea.end(), x_.begin() + kExc);
    x_[kBusVd] = v_d;
    x_[kBusVq] = v_q;
    x_[kLoadId] = load.b * v_q;
    x_[kLoadIq] = -load.b * v_d;
    const auto gs = governor_->equilibrium(t_e);
    std::copy(gs.begin(), gs.end(), x_.begin() + kGov);
    v_ref_ = v_t0;

    if (governor_->has_delay()) governor_->delay_buffer()->prime(0.0, governor_->delay_source(gs.data()));

    // Damped Newton polish on the full derivative vector.
    const auto n = x_.size();
    Eigen::VectorXd f(n);
    auto eval = [&](const std::vector<double>& x, Eigen::VectorXd& out) {
        std::vector<double> dx(n);
        rhs(x.data(), 0.0, load, 0.0, dx.data());
        for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = dx[i];
        // the angle equation d(delta)/dt pins omega; keep as-is
    };
    eval(x_, f);
    double res = f.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 8 && res > 1e-10; ++it) {
        Eigen::MatrixXd j(n, n);
        std::vector<double> xp = x_, xm = x_;
        Eigen::VectorXd fp(n), fm(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double h = std::max(1e-8, 1e-7 * std::abs(x_[k]));
            xp[k] += h;
            xm[k] -= h;
            eval(xp, fp);
            eval(xm, fm);
            j.col(static_cast<Eigen::Index>(k)) = (fp - fm) / (2 * h);
            xp[k] = x_[k];
            xm[k] = x_[k];
        }
        const Eigen::VectorXd step = j.fullPivLu().solve(f);
        std::vector<double> x_new = x_;
        double damp = 1.0;
        for (int half = 0; half < 4; ++half) {
            for (std::size_t i = 0; i < n; ++i)
                x_new[i] = x_[i] - damp * step(static_cast<Eigen::Index>(i));
            Eigen::VectorXd f_new(n);
            eval(x_new, f_new);
            const double res_new = f_new.lpNorm<Eigen::Infinity>();
            if (res_new < res) {
                x_ = x_new;
                f = f_new;
                res = res_new;
                break;
            }
            damp *= 0.5;
        }
    }
    residual_ = res;
    if (!(res < 1e-8)) {
        std::ostringstream msg;
        msg << "equilibrium solver did not converge: residual " << res;
        throw NumericalError(msg.str());
    }
    initialized_ = true;
}

SimTrace SimEngine::run(const Scenario& scenario, int record_stride) {
    scenario.validate();
    if (record_stride < 1) throw ValidationError("record_stride must be >= 1");
    initialize(scenario.p0_kw, scenario.q0_kvar); // pure function of the scenario

    const LoadAdmittance pre = snubbed(
        load_to_admittance(scenario.p0_kw, scenario.q0_kvar, params_.v_setpoint, params_.base));
    const LoadAdmittance post = snubbed(
        load_to_admittance(scenario.p1_kw, scenario.q1_kvar, params_.v_setpoint, params_.base));

    const double dt = scenario.dt;
    const auto n_steps = static_cast<std::size_t>(std::llround(scenario.t_end / dt));
    const auto n = x_.size();

    SimTrace trace;
    trace.t_step = scenario.t_step;
    trace.base = params_.base;
    trace.series = TimeSeries(0.0, dt * record_stride);
    for (const char* name : {"p", "q", "v_mag", "f_pu", "delta", "v_d", "v_q", "i_d", "i_q",
                             "efd", "v_regulator", "vhz_signal"})
        trace.series.add_channel(name, {});

    VhzState vhz;
    double vhz_signal = 0.0;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), xt(n);

    auto record = [&](double /*t*/) {
        MachineState ms{x_[0], x_[1], x_[2], x_[3], x_[4], x_[5], x_[6], x_[7]};
        const MachineCurrents c = machine_.flux_to_currents(ms);
        const double v_d = x_[kBusVd], v_q = x_[kBusVq];
        trace.series.append_row({v_d * c.i_d + v_q * c.i_q, v_q * c.i_d - v_d * c.i_q,
                                 std::hypot(v_d, v_q), x_[6], x_[7], v_d, v_q, c.i_d, c.i_q,
                                 x_[12], x_[11], vhz_signal});
    };

    record(0.0);
    const Dc4bParams& ep = params_.exciter;
    double t = 0.0;
    for (std::size_t step = 0; step < n_steps; ++step) {
        t = dt * static_cast<double>(step);
        const LoadAdmittance& load = (t >= scenario.t_step) ? post : pre;

        // A speed that left the physical range means the integration blew up
        // between the periodic finite-state checks; report it as divergence
        // rather than letting downstream blocks reject their inputs.
        if (!std::isfinite(x_[6]) || x_[6] <= 0.0) {
            std::ostringstream msg;
            msg << "simulation diverged: non-physical speed at t = " << t
                << " s; reduce the time step (last valid output " << trace.series.t_end()
                << " s)";
            throw NumericalError(msg.str());
        }

        if (params_.vhz.enabled) {
            const double v_t = std::hypot(x_[kBusVd], x_[kBusVq]);
            auto [vs, sig] = vhz_step(vhz, v_t, x_[6], dt, params_.vhz);
            vhz = vs;
            vhz_signal = sig;
        }

        rhs(x_.data(), t, load, vhz_signal, k1.data());
        for (std::size_t i = 0; i < n; ++i) xt[i] = x_[i] + 0.5 * dt * k1[i];
        rhs(xt.data(), t + 0.5 * dt, load, vhz_signal, k2.data());
        for (std::size_t i = 0; i < n; ++i) xt[i] = x_[i] + 0.5 * dt * k2[i];
        rhs(xt.data(), t + 0.5 * dt, load, vhz_signal, k3.data());
        for (std::size_t i = 0; i < n; ++i) xt[i] = x_[i] + dt * k3[i];
        rhs(xt.data(), t + dt, load, vhz_signal, k4.data());
        for (std::size_t i = 0; i < n; ++i)
            x_[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);

        x_[11] = std::clamp(x_[11], ep.vr_min, ep.vr_max);
        governor_->clamp_states(x_.data() + kGov);
        if (governor_->has_delay())
            governor_->delay_buffer()->push(t + dt, governor_->delay_source(x_.data() + kGov));

        if (step % 64 == 0 || step + 1 == n_steps) {
            for (double v : x_)
                if (!std::isfinite(v)) {
                    std::ostringstream msg;
                    msg << "simulation diverged: non-finite state at t = " << t + dt
                        << " s (last valid output " << trace.series.t_end() << " s)";
                    throw NumericalError(msg.str());
                }
        }
        if ((step + 1) % static_cast<std::size_t>(record_stride) == 0) record(t + dt);
    }
    return trace;
}

std::vector<std::vector<double>> SimEngine::jacobian(const LoadAdmittance& load) const {
    const auto n = x_.size();
    const LoadAdmittance l = snubbed(load);
    std::vector<std::vector<double>> j(n, std::vector<double>(n, 0.0));
    std::vector<double> xp = x_, xm = x_, fp(n), fm(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = std::max(1e-8, 1e-7 * std::abs(x_[k]));
        xp[k] += h;
        xm[k] -= h;
        rhs(xp.data(), 0.0, l, 0.0, fp.data());
        rhs(xm.data(), 0.0, l, 0.0, fm.data());
        for (std::size_t i = 0; i < n; ++i) j[i][k] = (fp[i] - fm[i]) / (2 * h);
        xp[k] = x_[k];
        xm[k] = x_[k];
    }
    return j;
}

} // namespace genset
