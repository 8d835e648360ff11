#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "genset/config.hpp"
#include "genset/governor.hpp"
#include "genset/param.hpp"
#include "genset/surropt.hpp"
#include "genset/time_series.hpp"

namespace genset {

// Shared helper: runs the configured system through the scenario and the
// measurement chain, returning derived (P, Q, V, f) channels.
TimeSeries simulate_derived(const RunConfig& cfg, GovernorKind kind);

struct SimulateSummary {
    GovernorKind kind;
    double p_ss_kw, q_ss_kvar, v_ss, f_ss_hz; // tail means
    bool has_step = false;
    double f_nadir_hz = 0.0, t_nadir = 0.0;   // only when has_step
    std::optional<double> settle_time;        // |f - nominal| <= 0.05 Hz from here on
};

// Writes sim_<kind>.csv and sim_<kind>_summary.csv under cfg.out_dir.
SimulateSummary cmd_simulate(const RunConfig& cfg, std::ostream& log);

struct IdentifyResult {
    ParameterVector best;
    double objective = 0.0;
    std::vector<HistoryEntry> history;
};

// Minimizes the measurement-vs-simulation objective over the configured
// free parameters. Writes identify_<kind>_history.csv, _best.csv and
// _comparison.csv under cfg.out_dir.
IdentifyResult cmd_identify(const RunConfig& cfg, std::ostream& log);

struct CompareRow {
    GovernorKind kind;
    double objective;                      // cumulative weighted nRMSE
    double nrmse_p, nrmse_q, nrmse_v, nrmse_f;
    double rebound_nrmse_f, rebound_mape_f; // arresting + rebound window
};

// Scores each requested governor kind against the dataset; writes
// compare.csv. Rows are sorted by ascending objective.
std::vector<CompareRow> cmd_compare(const RunConfig& cfg, std::ostream& log);

// Fits the engine fuel line to (p_kw, fuel_lph) points from [data] path;
// writes fuel_fit.csv with per-point residuals.
FuelCurveFit cmd_fit_fuel_curve(const RunConfig& cfg, std::ostream& log);

struct AnalyzeResult {
    double residual;                              // equilibrium residual norm
    std::vector<std::complex<double>> eigenvalues; // sorted by real part, descending
    bool stable;                                   // max real part < 0
};

// Linearizes the coupled system at the pre-step operating point; writes
// analyze_<kind>_eigenvalues.csv.
AnalyzeResult cmd_analyze(const RunConfig& cfg, std::ostream& log);

} // namespace genset
