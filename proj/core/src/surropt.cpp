#include "genset/surropt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "genset/errors.hpp"

namespace genset {

namespace {

// Hand-rolled draws so a fixed seed reproduces bit-identically across
// standard libraries (std distributions are implementation-defined).
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform01(rng); // keep log() off zero
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<std::vector<double>> latin_hypercube(std::size_t m, std::size_t d,
                                                 std::mt19937_64& rng) {
    std::vector<std::vector<double>> pts(m, std::vector<double>(d));
    std::vector<std::size_t> strata(m);
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        for (std::size_t i = m; i > 1; --i) { // Fisher-Yates on the strata
            const auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
            std::swap(strata[i - 1], strata[std::min(k, i - 1)]);
        }
        for (std::size_t i = 0; i < m; ++i)
            pts[i][j] = (static_cast<double>(strata[i]) + uniform01(rng)) /
                        static_cast<double>(m);
    }
    return pts;
}

} // namespace

// ---------------------------------------------------------- surrogate

double rbf_kernel(double r) {
    if (r < 0) throw ValidationError("rbf_kernel: radius must be >= 0");
    return r * r * r;
}

SurrogateModel fit_surrogate(const std::vector<SamplePoint>& points) {
    if (points.empty()) throw ValidationError("fit_surrogate: no points");
    const std::size_t n = points.size();
    const std::size_t d = points.front().x.size();
    // d+1 distinct points in general position make the linear tail
    // unisolvent (the kernel weights then vanish); fewer cannot.
    if (n < d + 1)
        throw ValidationError("fit_surrogate: need at least d+1 points, got " +
                              std::to_string(n));
    for (const auto& p : points)
        if (p.x.size() != d) throw ValidationError("fit_surrogate: dimension mismatch");

    const auto size = static_cast<Eigen::Index>(n + d + 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rbf_kernel(distance(points[i].x, points[j].x));
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = 1.0;
        a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + 1 + j)) =
                points[i].x[j];
            a(static_cast<Eigen::Index>(n + 1 + j), static_cast<Eigen::Index>(i)) =
                points[i].x[j];
        }
        rhs(static_cast<Eigen::Index>(i)) = points[i].g;
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        throw NumericalError("fit_surrogate: degenerate sample set");
    const Eigen::VectorXd sol = lu.solve(rhs);

    SurrogateModel model;
    model.centers.reserve(n);
    for (const auto& p : points) model.centers.push_back(p.x);
    model.lambdas.assign(sol.data(), sol.data() + n);
    model.alpha.assign(sol.data() + n, sol.data() + n + d + 1);
    return model;
}

double eval_surrogate(const SurrogateModel& model, const std::vector<double>& x) {
    if (x.size() != model.dim())
        throw ValidationError("eval_surrogate: dimension mismatch");
    double value = model.alpha[0];
    for (std::size_t j = 0; j < x.size(); ++j) value += model.alpha[1 + j] * x[j];
    for (std::size_t i = 0; i < model.centers.size(); ++i)
        value += model.lambdas[i] * rbf_kernel(distance(model.centers[i], x));
    return value;
}

// --------------------------------------------------- candidate selection

std::vector<double> scaled_surrogate(const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("scaled_surrogate: no candidates");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double span = *hi - *lo;
    std::vector<double> out(values.size(), 0.0);
    if (span <= 0) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / span;
    return out;
}

std::vector<double> scaled_distance(const std::vector<std::vector<double>>& candidates,
                                    const std::vector<std::vector<double>>& evaluated) {
    if (candidates.empty()) throw ValidationError("scaled_distance: no candidates");
    if (evaluated.empty()) throw ValidationError("scaled_distance: no evaluated points");
    std::vector<double> nearest(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& e : evaluated) best = std::min(best, distance(candidates[i], e));
        nearest[i] = best;
    }
    const auto [lo, hi] = std::minmax_element(nearest.begin(), nearest.end());
    const double span = *hi - *lo;
    std::vector<double> out(candidates.size(), 0.0);
    if (span <= 0) return out;
    for (std::size_t i = 0; i < nearest.size(); ++i) out[i] = (*hi - nearest[i]) / span;
    return out;
}

double merit(double w, double s_scaled, double d_scaled) {
    if (!(w > 0.0 && w < 1.0))
        throw ValidationError("merit: weight must lie strictly inside (0, 1)");
    return w * s_scaled + (1.0 - w) * d_scaled;
}

std::vector<double> propose_candidate(const SurrogateModel& model,
                                      const std::vector<SamplePoint>& evaluated,
                                      const ProposalOptions& opts, std::mt19937_64& rng) {
    if (evaluated.empty()) throw ValidationError("propose_candidate: no evaluated points");
    const std::size_t d = model.dim();
    const std::size_t n_cand = opts.n_candidates > 0 ? opts.n_candidates : 500 * d;

    std::vector<std::vector<double>> eval_x;
    eval_x.reserve(evaluated.size());
    const SamplePoint* incumbent = &evaluated.front();
    for (const auto& p : evaluated) {
        eval_x.push_back(p.x);
        if (p.g < incumbent->g) incumbent = &p;
    }

    double sigma = opts.perturb_sigma;
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt, sigma *= 2.0) {
        std::vector<std::vector<double>> candidates;
        candidates.reserve(n_cand);
        for (std::size_t c = 0; c < n_cand; ++c) {
            std::vector<double> x(d);
            if (c % 2 == 0) {
                for (auto& v : x) v = uniform01(rng);
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    x[j] = std::clamp(incumbent->x[j] + sigma * standard_normal(rng), 0.0,
                                      1.0);
            }
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& e : eval_x) nearest = std::min(nearest, distance(x, e));
            if (nearest >= opts.min_separation) candidates.push_back(std::move(x));
        }
        if (candidates.empty()) continue; // crowd got too dense: widen and retry

        std::vector<double> s_values(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i)
            s_values[i] = eval_surrogate(model, candidates[i]);
        const std::vector<double> s_scaled = scaled_surrogate(s_values);
        const std::vector<double> d_scaled = scaled_distance(candidates, eval_x);

        std::size_t best = 0;
        double best_merit = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const double f = merit(opts.w, s_scaled[i], d_scaled[i]);
            if (f < best_merit) {
                best_merit = f;
                best = i;
            }
        }
        return candidates[best];
    }
    throw NumericalError("propose_candidate: no candidate clears the separation radius");
}

// ------------------------------------------------------------ optimizer

OptimizeResult optimize(const ObjectiveFn& objective, const std::vector<double>& lower,
                        const std::vector<double>& upper, const OptimizeOptions& opts) {
    const std::size_t d = lower.size();
    if (d == 0) throw ValidationError("optimize: empty bounds");
    if (upper.size() != d) throw ValidationError("optimize: bound size mismatch");
    for (std::size_t j = 0; j < d; ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !(lower[j] < upper[j]))
            throw ValidationError("optimize: bounds must be finite with lower < upper");
    }
    const std::size_t m0 =
        opts.initial_design > 0 ? opts.initial_design : std::max(2 * (d + 1), std::size_t{20});
    if (opts.max_evaluations <= m0)
        throw ValidationError("optimize: evaluation budget must exceed the initial design");
    if (opts.merit_weights.empty())
        throw ValidationError("optimize: no merit weights");

    std::mt19937_64 rng(opts.seed);
    auto to_physical = [&](const std::vector<double>& u) {
        std::vector<double> x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = lower[j] + u[j] * (upper[j] - lower[j]);
        return x;
    };

    OptimizeResult res;
    res.g_best = std::numeric_limits<double>::infinity();
    std::vector<SamplePoint> samples;
    samples.reserve(opts.max_evaluations);

    auto evaluate = [&](std::vector<double> u) {
        const std::vector<double> x = to_physical(u);
        double g = objective(x);
        if (!std::isfinite(g)) g = opts.penalty;
        samples.push_back({std::move(u), g});
        if (g < res.g_best) {
            res.g_best = g;
            res.x_best = x;
        }
        HistoryEntry entry;
        entry.iteration = samples.size();
        entry.x = x;
        entry.value = g;
        entry.best = res.g_best;
        res.history.push_back(std::move(entry));
        if (opts.on_evaluation) opts.on_evaluation(samples.size(), x, g);
    };

    for (auto& u : latin_hypercube(m0, d, rng)) evaluate(std::move(u));

    ProposalOptions prop;
    prop.n_candidates = opts.n_candidates;
    prop.min_separation = opts.min_separation;
    prop.perturb_sigma = opts.perturb_sigma;
    std::size_t iteration = 0;
    while (samples.size() < opts.max_evaluations) {
        const SurrogateModel model = fit_surrogate(samples);
        double scale = 1.0;
        for (const auto& p : samples) scale = std::max(scale, std::abs(p.g));
        for (const auto& p : samples) {
            if (std::abs(eval_surrogate(model, p.x) - p.g) > 1e-6 * scale)
                throw NumericalError("optimize: surrogate failed to interpolate a sample");
        }
        prop.w = opts.merit_weights[iteration % opts.merit_weights.size()];
        evaluate(propose_candidate(model, samples, prop, rng));
        ++iteration;
    }
    return res;
}

} // namespace genset
