#include "genset/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "genset/csv.hpp"
#include "genset/dataset.hpp"
#include "genset/errors.hpp"
#include "genset/signal.hpp"
#include "genset/simengine.hpp"

namespace genset {

namespace {

std::filesystem::path output_file(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return std::filesystem::path(cfg.out_dir) / name;
}

TimeSeries load_dataset(const RunConfig& cfg, const char* command) {
    if (cfg.data_path.empty())
        throw ValidationError(std::string(command) + ": no [data] path configured");
    return ingest(cfg.data_path, dataset_kind_from_string(cfg.data_kind), cfg.derive);
}

double tail_mean(const TimeSeries& s, const std::string& name, double span) {
    const auto& v = s.channel(name);
    if (v.empty()) throw ValidationError("tail_mean: empty channel");
    const double t_from = s.t_end() - span;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.length(); ++i) {
        if (s.time_at(i) < t_from) continue;
        sum += v[i];
        ++count;
    }
    return sum / static_cast<double>(count);
}

// First time after which |f - nominal| stays within the band.
std::optional<double> settle_time(const TimeSeries& s, double f_nominal, double band) {
    const auto& f = s.channel("f");
    std::size_t last_outside = s.length();
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f[i] - f_nominal) > band) last_outside = i;
    if (last_outside == s.length()) return s.t0();          // never left the band
    if (last_outside + 1 >= s.length()) return std::nullopt; // still outside at the end
    return s.time_at(last_outside + 1);
}

// Recovery end for the arresting + rebound window: first upward crossing of
// 99.9% nominal frequency after the post-step nadir.
double rebound_end_from_data(const TimeSeries& meas, double t_step, double f_nominal) {
    const auto& f = meas.channel("f");
    std::size_t nadir = meas.length();
    double f_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (meas.time_at(i) <= t_step) continue;
        if (f[i] < f_min) {
            f_min = f[i];
            nadir = i;
        }
    }
    if (nadir == meas.length()) return meas.t_end();
    const double threshold = 0.999 * f_nominal;
    for (std::size_t i = nadir; i < f.size(); ++i)
        if (f[i] >= threshold) return meas.time_at(i);
    return meas.t_end();
}

void write_series(const RunConfig& cfg, const std::string& name, const TimeSeries& s) {
    write_csv(output_file(cfg, name).string(), time_series_to_csv(s));
}

} // namespace

TimeSeries simulate_derived(const RunConfig& cfg, GovernorKind kind) {
    SystemParams sys = cfg.system;
    sys.kind = kind;
    SimEngine engine(sys);
    const SimTrace trace = engine.run(cfg.scenario);
    DeriveOptions derive = cfg.derive;
    derive.pll.f_nominal = cfg.scenario.f_nominal;
    return derive_channels(synthesize_waveforms(trace), derive);
}

// ------------------------------------------------------------- simulate

SimulateSummary cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    const GovernorKind kind = cfg.system.kind;
    const TimeSeries derived = simulate_derived(cfg, kind);
    write_series(cfg, "sim_" + to_string(kind) + ".csv", derived);

    SimulateSummary sum;
    sum.kind = kind;
    const double tail = std::min(0.5, 0.2 * (derived.t_end() - derived.t0()));
    sum.p_ss_kw = tail_mean(derived, "P", tail);
    sum.q_ss_kvar = tail_mean(derived, "Q", tail);
    sum.v_ss = tail_mean(derived, "V", tail);
    sum.f_ss_hz = tail_mean(derived, "f", tail);
    sum.has_step = cfg.scenario.t_step < cfg.scenario.t_end &&
                   (cfg.scenario.p1_kw != cfg.scenario.p0_kw ||
                    cfg.scenario.q1_kvar != cfg.scenario.q0_kvar);
    if (sum.has_step) {
        const auto& f = derived.channel("f");
        double f_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (derived.time_at(i) <= cfg.scenario.t_step) continue;
            if (f[i] < f_min) {
                f_min = f[i];
                sum.t_nadir = derived.time_at(i);
            }
        }
        sum.f_nadir_hz = f_min;
    }
    sum.settle_time = settle_time(derived, cfg.scenario.f_nominal, 0.05);

    std::ofstream out(output_file(cfg, "sim_" + to_string(kind) + "_summary.csv"));
    out.precision(17);
    out << "key,value\n";
    out << "governor," << to_string(kind) << "\n";
    out << "p_ss_kw," << sum.p_ss_kw << "\n";
    out << "q_ss_kvar," << sum.q_ss_kvar << "\n";
    out << "v_ss," << sum.v_ss << "\n";
    out << "f_ss_hz," << sum.f_ss_hz << "\n";
    out << "f_nadir_hz,";
    if (sum.has_step) out << sum.f_nadir_hz;
    out << "\nt_nadir,";
    if (sum.has_step) out << sum.t_nadir;
    out << "\nsettle_time,";
    if (sum.settle_time) out << *sum.settle_time;
    out << "\n";

    log << "simulate " << to_string(kind) << ": P=" << sum.p_ss_kw
        << " kW, Q=" << sum.q_ss_kvar << " kVAR, V=" << sum.v_ss
        << " V, f=" << sum.f_ss_hz << " Hz";
    if (sum.has_step) log << ", nadir " << sum.f_nadir_hz << " Hz @ " << sum.t_nadir << " s";
    if (sum.settle_time) log << ", settled at " << *sum.settle_time << " s";
    log << "\n";
    return sum;
}

// ------------------------------------------------------------- identify

IdentifyResult cmd_identify(const RunConfig& cfg, std::ostream& log) {
    const TimeSeries meas = load_dataset(cfg, "identify");
    ParameterVector params = identification_vector(cfg);
    // Point bounds cannot move: treat them as frozen.
    for (const auto& p : params.entries())
        if (!p.frozen && p.lower >= p.upper) params = params.with_frozen(p.name, true);

    const std::string kind = to_string(cfg.system.kind);
    const auto names = params.free_names();

    auto evaluate = [&](const std::vector<double>& x) {
        const ParameterVector point = params.with_free_values(x);
        try {
            RunConfig local = cfg;
            local.system = apply_parameters(cfg.system, point);
            const TimeSeries sim = simulate_derived(local, local.system.kind);
            return objective(meas, sim, cfg.scenario.t_step, cfg.objective).value;
        } catch (const ValidationError&) {
            return std::numeric_limits<double>::infinity(); // infeasible sample
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity(); // diverged sample
        }
    };

    IdentifyResult res;
    if (names.empty()) {
        // Fully pinned: score the single admissible point.
        res.best = params;
        res.objective = evaluate({});
        res.history.push_back({1, {}, res.objective, res.objective});
        log << "identify " << kind << ": all parameters pinned, objective="
            << res.objective << "\n";
    } else {
        OptimizeOptions opts = cfg.optimizer;
        std::size_t improved = 0;
        double best_seen = std::numeric_limits<double>::infinity();
        opts.on_evaluation = [&](std::size_t it, const std::vector<double>&, double g) {
            if (g < best_seen) {
                best_seen = g;
                ++improved;
                log << "identify " << kind << ": eval " << it << " improved to " << g
                    << "\n";
            }
        };
        const OptimizeResult opt =
            optimize(evaluate, params.free_lower(), params.free_upper(), opts);
        res.best = params.with_free_values(opt.x_best);
        res.objective = opt.g_best;
        res.history = opt.history;
        log << "identify " << kind << ": " << opt.history.size() << " evaluations, "
            << improved << " improvements, best objective " << opt.g_best << "\n";
    }

    {
        CsvTable hist;
        hist.header = {"iteration"};
        for (const auto& n : names) hist.header.push_back(n);
        hist.header.push_back("objective");
        hist.header.push_back("best");
        for (const auto& h : res.history) {
            std::vector<double> row;
            row.push_back(static_cast<double>(h.iteration));
            row.insert(row.end(), h.x.begin(), h.x.end());
            row.push_back(h.value);
            row.push_back(h.best);
            hist.rows.push_back(std::move(row));
        }
        write_csv(output_file(cfg, "identify_" + kind + "_history.csv").string(), hist);
    }
    {
        std::ofstream out(output_file(cfg, "identify_" + kind + "_best.csv"));
        out.precision(17);
        out << "name,value,lower,upper,frozen\n";
        for (const auto& p : res.best.entries())
            out << p.name << "," << p.value << "," << p.lower << "," << p.upper << ","
                << (p.frozen ? 1 : 0) << "\n";
    }
    {
        RunConfig local = cfg;
        local.system = apply_parameters(cfg.system, res.best);
        const TimeSeries sim = simulate_derived(local, local.system.kind);
        TimeSeries cmpseries(meas.t0(), meas.dt());
        for (const char* name : {"P", "Q", "V", "f"})
            cmpseries.add_channel(std::string(name) + "_meas", meas.channel(name));
        for (const char* name : {"P", "Q", "V", "f"}) {
            std::vector<double> v(meas.length());
            for (std::size_t i = 0; i < meas.length(); ++i)
                v[i] = sim.interp(name, meas.time_at(i));
            cmpseries.add_channel(std::string(name) + "_sim", std::move(v));
        }
        write_series(cfg, "identify_" + kind + "_comparison.csv", cmpseries);
    }
    return res;
}

// -------------------------------------------------------------- compare

std::vector<CompareRow> cmd_compare(const RunConfig& cfg, std::ostream& log) {
    const TimeSeries meas = load_dataset(cfg, "compare");
    const double t_step = cfg.scenario.t_step;
    const double rebound_end =
        cfg.rebound_end > 0 ? cfg.rebound_end
                            : rebound_end_from_data(meas, t_step, cfg.scenario.f_nominal);

    std::vector<CompareRow> rows;
    for (const GovernorKind kind : cfg.compare_kinds) {
        const TimeSeries sim = simulate_derived(cfg, kind);
        const ObjectiveResult obj = objective(meas, sim, t_step, cfg.objective);
        CompareRow row{};
        row.kind = kind;
        row.objective = obj.value;
        double norm_f = 1.0;
        for (const auto& c : obj.channels) {
            if (c.name == "P") row.nrmse_p = c.nrmse;
            if (c.name == "Q") row.nrmse_q = c.nrmse;
            if (c.name == "V") row.nrmse_v = c.nrmse;
            if (c.name == "f") {
                row.nrmse_f = c.nrmse;
                norm_f = c.norm;
            }
        }
        const WindowMetrics wm = window_metrics(meas, sim, "f", t_step, rebound_end, norm_f);
        row.rebound_nrmse_f = wm.nrmse;
        row.rebound_mape_f = wm.mape_percent;
        rows.push_back(row);
        log << "compare " << to_string(kind) << ": objective " << row.objective
            << ", rebound f nRMSE " << row.rebound_nrmse_f << ", MAPE "
            << row.rebound_mape_f << "%\n";
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CompareRow& a, const CompareRow& b) {
                         return a.objective < b.objective;
                     });

    std::ofstream out(output_file(cfg, "compare.csv"));
    out.precision(17);
    out << "governor,objective,nrmse_P,nrmse_Q,nrmse_V,nrmse_f,rebound_nrmse_f,"
           "rebound_mape_f\n";
    for (const auto& r : rows)
        out << to_string(r.kind) << "," << r.objective << "," << r.nrmse_p << ","
            << r.nrmse_q << "," << r.nrmse_v << "," << r.nrmse_f << ","
            << r.rebound_nrmse_f << "," << r.rebound_mape_f << "\n";
    return rows;
}

// ------------------------------------------------------- fit-fuel-curve

FuelCurveFit cmd_fit_fuel_curve(const RunConfig& cfg, std::ostream& log) {
    if (cfg.data_path.empty())
        throw ValidationError("fit-fuel-curve: no [data] path configured");
    const CsvTable table = read_csv(cfg.data_path);
    const auto p_kw = table.column("p_kw");
    const auto fuel = table.column("fuel_lph");
    std::vector<std::pair<double, double>> points(p_kw.size());
    for (std::size_t i = 0; i < p_kw.size(); ++i) points[i] = {p_kw[i], fuel[i]};

    const FuelCurveFit fit = estimate_fuel_curve(points, cfg.system.base);
    log << "fuel curve: k_turb=" << fit.k_turb << ", w_fnl=" << fit.w_fnl
        << ", rms residual " << fit.rms_residual << " pu\n";

    CsvTable out;
    out.header = {"p_kw", "fuel_lph", "fuel_pu", "fitted_pu", "residual_pu"};
    for (const auto& [p, lph] : points) {
        const double p_pu = p * 1e3 / cfg.system.base.s_base;
        const double f_pu = lph / cfg.system.base.fuel_base;
        const double fitted = fit.w_fnl + p_pu / fit.k_turb;
        out.rows.push_back({p, lph, f_pu, fitted, f_pu - fitted});
    }
    write_csv(output_file(cfg, "fuel_fit.csv").string(), out);
    return fit;
}

// -------------------------------------------------------------- analyze

AnalyzeResult cmd_analyze(const RunConfig& cfg, std::ostream& log) {
    // A finite-difference Jacobian cannot see through a dead-time buffer (the
    // stored history is constant), which would sever the governor loop, so
    // the linearization treats dead times as pass-through. At these delays
    // (tens of ms) the phase error at governor frequencies is negligible.
    SystemParams sys = cfg.system;
    sys.simple.tau_d = 0.0;
    sys.degov.t_d = 0.0;
    SimEngine engine(sys);
    engine.initialize(cfg.scenario.p0_kw, cfg.scenario.q0_kvar);
    const LoadAdmittance load =
        load_to_admittance(cfg.scenario.p0_kw, cfg.scenario.q0_kvar, 1.0, cfg.system.base);

    const auto j = engine.jacobian(load);
    const auto n = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = j[r][c];
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(m);

    AnalyzeResult res;
    res.residual = engine.equilibrium_residual();
    for (Eigen::Index i = 0; i < n; ++i) res.eigenvalues.push_back(solver.eigenvalues()[i]);
    std::sort(res.eigenvalues.begin(), res.eigenvalues.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
              });
    // The rotor angle is a pure integrator that feeds nothing downstream, so
    // one structural zero mode is always present; it is not an instability.
    res.stable = res.eigenvalues.front().real() < 1e-6;

    CsvTable out;
    out.header = {"re", "im"};
    for (const auto& e : res.eigenvalues) out.rows.push_back({e.real(), e.imag()});
    write_csv(
        output_file(cfg, "analyze_" + to_string(cfg.system.kind) + "_eigenvalues.csv")
            .string(),
        out);

    // Report the slowest genuine dynamic mode, skipping the angle integrator.
    std::complex<double> dominant = res.eigenvalues.front();
    for (const auto& e : res.eigenvalues) {
        if (std::abs(e) < 1e-6) continue;
        dominant = e;
        break;
    }
    log << "analyze " << to_string(cfg.system.kind) << ": residual " << res.residual
        << ", dominant mode " << dominant.real();
    if (dominant.imag() != 0.0) log << (dominant.imag() > 0 ? "+" : "") << dominant.imag() << "j";
    log << ", " << (res.stable ? "stable" : "UNSTABLE") << "\n";
    return res;
}

} // namespace genset
