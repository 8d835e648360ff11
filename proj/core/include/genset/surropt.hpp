#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace genset {

// ---------------------------------------------------------- surrogate

// One evaluated point, coordinates scaled to the unit box.
struct SamplePoint {
    std::vector<double> x;
    double g = 0.0;
};

// Cubic RBF interpolant with a linear polynomial tail.
struct SurrogateModel {
    std::vector<std::vector<double>> centers;
    std::vector<double> lambdas;      // one weight per center
    std::vector<double> alpha;        // tail: alpha[0] + alpha[1+j]*x[j]
    std::size_t dim() const { return centers.empty() ? 0 : centers.front().size(); }
};

double rbf_kernel(double r); // r^3

// Solves the augmented interpolation system (kernel matrix + linear tail with
// orthogonality side conditions). Needs at least d+1 points in general
// position; throws on a degenerate sample set.
SurrogateModel fit_surrogate(const std::vector<SamplePoint>& points);

double eval_surrogate(const SurrogateModel& model, const std::vector<double>& x);

// --------------------------------------------------- candidate selection

// Min-max scaling of surrogate values; constant input maps to all zeros.
std::vector<double> scaled_surrogate(const std::vector<double>& values);

// Nearest-evaluated-point distance per candidate, scaled so the most
// isolated candidate scores 0 and the most crowded scores 1.
std::vector<double> scaled_distance(const std::vector<std::vector<double>>& candidates,
                                    const std::vector<std::vector<double>>& evaluated);

// Convex combination w*S + (1-w)*D; w must lie strictly inside (0,1).
double merit(double w, double s_scaled, double d_scaled);

struct ProposalOptions {
    double w = 0.5;
    std::size_t n_candidates = 0; // 0 -> 500*d
    double min_separation = 1e-3; // unit-box distance to evaluated points
    double perturb_sigma = 0.1;   // Gaussian spread around the incumbent best
    int max_retries = 8;          // spread doubles on each retry
};

// Draws uniform candidates plus Gaussian perturbations of the incumbent
// best, rejects anything within min_separation of an evaluated point, and
// returns the merit minimizer (unit-box coordinates).
std::vector<double> propose_candidate(const SurrogateModel& model,
                                      const std::vector<SamplePoint>& evaluated,
                                      const ProposalOptions& opts, std::mt19937_64& rng);

// ------------------------------------------------------------ optimizer

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

struct OptimizeOptions {
    std::size_t max_evaluations = 200; // total budget, initial design included
    std::uint64_t seed = 1;
    std::size_t initial_design = 0;    // 0 -> max(2*(d+1), 20) Latin hypercube
    std::size_t n_candidates = 0;      // 0 -> 500*d per iteration
    double min_separation = 1e-3;
    double perturb_sigma = 0.1;
    double penalty = 1e6;              // recorded when the objective is non-finite
    std::vector<double> merit_weights = {0.3, 0.5, 0.8, 0.95};
    // Called after every evaluation: (evaluation index, physical x, value).
    std::function<void(std::size_t, const std::vector<double>&, double)> on_evaluation;
};

struct HistoryEntry {
    std::size_t iteration = 0;  // 1-based evaluation index
    std::vector<double> x;      // physical coordinates
    double value = 0.0;         // recorded objective (penalty if non-finite)
    double best = 0.0;          // best-so-far, non-increasing
};

struct OptimizeResult {
    std::vector<double> x_best; // physical coordinates
    double g_best = 0.0;
    std::vector<HistoryEntry> history;
};

// Box-constrained minimization: Latin-hypercube initial design, then
// refit-propose-evaluate with the merit weight cycling per iteration.
// Deterministic for a fixed seed.
OptimizeResult optimize(const ObjectiveFn& objective, const std::vector<double>& lower,
                        const std::vector<double>& upper, const OptimizeOptions& opts = {});

} // namespace genset
