#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "genset/errors.hpp"
#include "genset/machine.hpp"
#include "genset/simengine.hpp"

using namespace genset;

namespace {

MachineState machine_state_of(const std::vector<double>& x) {
    return MachineState::from_array({x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]});
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

} // namespace

TEST_SUITE("simengine") {

    TEST_CASE("load to admittance and back") {
        PerUnitBase base;
        auto y = load_to_admittance(240.0, 160.0, 1.0, base);
        CHECK_FALSE(y.open_circuit);
        CHECK(y.g == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(y.b == doctest::Approx(0.4).epsilon(1e-12));
        // back-substitute: s = v^2 * conj(y) in pu
        CHECK(y.g * base.s_base == doctest::Approx(240e3).epsilon(1e-12));
        CHECK(y.b * base.s_base == doctest::Approx(160e3).epsilon(1e-12));

        // conductance rises as the held voltage drops
        auto y95 = load_to_admittance(240.0, 160.0, 0.95, base);
        CHECK(y95.g == doctest::Approx(0.6 / (0.95 * 0.95)).epsilon(1e-12));

        auto none = load_to_admittance(0.0, 0.0, 1.0, base);
        CHECK(none.open_circuit);
        CHECK(none.g == 0.0);
        CHECK(none.b == 0.0);

        // series equivalent of the same branch: z = 1 / (g - j b)
        auto [r, xs] = load_to_impedance(240.0, 160.0, 1.0, base);
        const std::complex<double> z = 1.0 / std::complex<double>(0.6, -0.4);
        CHECK(r == doctest::Approx(z.real()).epsilon(1e-12));
        CHECK(xs == doctest::Approx(z.imag()).epsilon(1e-12)); // inductive: x > 0
        CHECK_THROWS_AS(load_to_impedance(0.0, 0.0, 1.0, base), ValidationError);
        CHECK_THROWS_AS(load_to_admittance(100.0, 0.0, 0.0, base), ValidationError);
    }

    TEST_CASE("scenario validation") {
        Scenario ok;
        CHECK_NOTHROW(ok.validate());

        Scenario s = ok;
        s.dt = 0.0;
        CHECK_THROWS_AS(s.validate(), ValidationError);
        s.dt = 2e-3;
        CHECK_THROWS_AS(s.validate(), ValidationError);

        s = ok;
        s.t_step = s.t_end;
        CHECK_THROWS_AS(s.validate(), ValidationError);
        s.t_step = -0.5;
        CHECK_THROWS_AS(s.validate(), ValidationError);

        s = ok;
        s.p0_kw = -1.0;
        CHECK_THROWS_AS(s.validate(), ValidationError);
    }

    TEST_CASE("initialization lands on a machine-precision equilibrium") {
        SimEngine eng(SystemParams{});
        eng.initialize(80.0, 0.0);
        CHECK(eng.equilibrium_residual() < 1e-8);

        const auto& x = eng.state();
        Machine mach(eng.params().machine);
        const auto ms = machine_state_of(x);
        const auto c = mach.flux_to_currents(ms);
        const double v_d = x[14], v_q = x[15];
        const double p_out = v_d * c.i_d + v_q * c.i_q;
        const double q_out = v_q * c.i_d - v_d * c.i_q;
        CHECK(p_out == doctest::Approx(0.2).epsilon(1e-6));
        CHECK(std::abs(q_out) < 1e-6);
        CHECK(std::hypot(v_d, v_q) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(ms.omega == doctest::Approx(1.0).epsilon(1e-9));

        // mechanical input covers the electrical output plus stator loss
        const double t_e = Machine::electrical_torque(ms, c);
        const double loss = eng.params().machine.r_s * (c.i_d * c.i_d + c.i_q * c.i_q);
        CHECK(std::abs(ms.omega * t_e - p_out - loss) < 1e-9);
    }

    TEST_CASE("zero load parks the valve at the no-load fuel rate") {
        SystemParams sp;
        sp.kind = GovernorKind::ggov1;
        SimEngine e1(sp);
        e1.initialize(0.0, 0.0);
        CHECK(e1.state()[18 + 2] == doctest::Approx(sp.ggov1.w_fnl).epsilon(1e-9));

        sp.kind = GovernorKind::ggov1d;
        SimEngine e2(sp);
        e2.initialize(0.0, 0.0);
        CHECK(e2.state()[18 + 4] == doctest::Approx(sp.ggov1d.w_fnl).epsilon(1e-9));
    }

    TEST_CASE("a step to the same load stays at equilibrium") {
        SimEngine eng(SystemParams{});
        Scenario sc;
        sc.p0_kw = 80.0;
        sc.q0_kvar = 0.0;
        sc.p1_kw = 80.0;
        sc.q1_kvar = 0.0;
        sc.t_step = 1.0;
        sc.t_end = 2.0;
        sc.dt = 2e-4;
        auto tr = eng.run(sc, 10);
        const auto& f = tr.series.channel("f_pu");
        const auto& v = tr.series.channel("v_mag");
        const auto& p = tr.series.channel("p");
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(std::abs(f[i] - f.front()) < 1e-4);
            CHECK(std::abs(v[i] - v.front()) < 1e-4);
            CHECK(std::abs(p[i] - p.front()) < 1e-4);
        }
    }

    TEST_CASE("integration error shrinks at fourth order") {
        // Convergence order is only defined where the vector field is smooth,
        // so every supervisory limiter is held out of range: wide regulator
        // ceiling/floor, wide valve rate and error clamps, v/f trim off.
        SystemParams sys;
        sys.vhz.enabled = false;
        sys.exciter.vr_min = -1e6;
        sys.exciter.vr_max = 1e6;
        sys.ggov1d.valve_open = 1e9;
        sys.ggov1d.valve_close = -1e9;
        sys.ggov1d.maxerr = 10.0;
        sys.ggov1d.minerr = -10.0;

        Scenario sc;
        sc.p0_kw = 80.0;
        sc.q0_kvar = 0.0;
        sc.p1_kw = 120.0;
        sc.q1_kvar = 30.0;
        sc.t_step = 0.1;
        sc.t_end = 0.6;

        auto final_state = [&](double dt) {
            SimEngine eng(sys);
            Scenario s = sc;
            s.dt = dt;
            eng.run(s, 1000000); // stride larger than the run: keep endpoints only
            return eng.state();
        };
        const auto a = final_state(4e-4);
        const auto b = final_state(2e-4);
        const auto c = final_state(1e-4);
        const double e1 = max_abs_diff(a, b);
        const double e2 = max_abs_diff(b, c);
        REQUIRE(e2 > 0.0);
        const double order = std::log2(e1 / e2);
        CHECK(order > 3.5);
        CHECK(order < 4.8);
    }

    TEST_CASE("repeated runs are bit-identical") {
        Scenario sc;
        sc.dt = 5e-4;
        SimEngine e1(SystemParams{});
        SimEngine e2(SystemParams{});
        auto t1 = e1.run(sc, 5);
        auto t2 = e2.run(sc, 5);
        REQUIRE(t1.series.length() == t2.series.length());
        for (const auto& name : t1.series.channel_names()) {
            const auto& a = t1.series.channel(name);
            const auto& b = t2.series.channel(name);
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
        }
    }

    TEST_CASE("load step dips the frequency, then the governor recovers it") {
        SimEngine eng(SystemParams{});
        Scenario sc; // 80 kW -> 240 kW + 160 kVAR at t = 1
        sc.dt = 1e-4;
        auto tr = eng.run(sc, 5);
        const auto& f = tr.series.channel("f_pu");
        const auto& p = tr.series.channel("p");
        const auto& v = tr.series.channel("v_mag");
        const double dt = tr.series.dt();
        const std::size_t i_step = static_cast<std::size_t>(sc.t_step / dt);

        const double f_pre = f[i_step - 1];
        std::size_t i_nadir = i_step;
        for (std::size_t i = i_step; i < f.size(); ++i)
            if (f[i] < f[i_nadir]) i_nadir = i;
        const double dip = f_pre - f[i_nadir];
        CHECK(dip > 0.002); // a real transient, not noise
        CHECK(tr.series.time_at(i_nadir) < sc.t_step + 1.5);
        CHECK(f.back() > f[i_nadir] + 0.5 * dip); // recovery after the nadir

        // settled outputs near the commanded operating point
        double p_tail = 0.0, v_tail = 0.0, f_tail = 0.0;
        std::size_t n_tail = 0;
        for (std::size_t i = f.size() - 1; tr.series.time_at(i) > sc.t_end - 0.5; --i, ++n_tail) {
            p_tail += p[i];
            v_tail += v[i];
            f_tail += f[i];
        }
        p_tail /= static_cast<double>(n_tail);
        v_tail /= static_cast<double>(n_tail);
        f_tail /= static_cast<double>(n_tail);
        CHECK(p_tail == doctest::Approx(0.6).epsilon(0.01));
        CHECK(v_tail == doctest::Approx(1.0).epsilon(0.01));
        CHECK(f_tail == doctest::Approx(1.0).epsilon(1e-3));
    }

    TEST_CASE("regulator output respects its limits throughout a transient") {
        SimEngine eng(SystemParams{});
        Scenario sc;
        sc.dt = 2e-4;
        auto tr = eng.run(sc, 1);
        const auto& vr = tr.series.channel("v_regulator");
        const auto& lim = eng.params().exciter;
        for (double u : vr) {
            CHECK(u <= lim.vr_max + 1e-12);
            CHECK(u >= lim.vr_min - 1e-12);
        }
    }

    TEST_CASE("too-coarse time step is reported, not returned as garbage") {
        SimEngine eng(SystemParams{});
        Scenario sc;
        sc.dt = 1e-3; // stable bus mode requires a finer step than this
        CHECK_THROWS_AS(eng.run(sc, 1), NumericalError);
    }

    TEST_CASE("infeasible initial excitation is rejected up front") {
        SystemParams sp;
        sp.exciter.vr_max = 1.5; // not enough ceiling for 240 kW + 160 kVAR
        SimEngine eng(sp);
        CHECK_THROWS_WITH_AS(eng.initialize(240.0, 160.0),
                             doctest::Contains("excitation capability"), ValidationError);
    }

    TEST_CASE("linearization exposes a stable spectrum at equilibrium") {
        SimEngine eng(SystemParams{});
        eng.initialize(80.0, 0.0);
        auto load = load_to_admittance(80.0, 0.0, 1.0, eng.params().base);
        auto j = eng.jacobian(load);
        REQUIRE(j.size() == eng.n_states());
        // the rotor-angle column pair carries the only structural zero mode;
        // every finite entry must be, well, finite
        for (const auto& row : j)
            for (double v : row) CHECK(std::isfinite(v));
    }
}
