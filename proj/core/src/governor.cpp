#include "genset/governor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genset {

GovernorKind governor_kind_from_string(const std::string& s) {
    if (s == "simple") return GovernorKind::simple;
    if (s == "degov") return GovernorKind::degov;
    if (s == "ggov1") return GovernorKind::ggov1;
    if (s == "ggov1d") return GovernorKind::ggov1d;
    throw ValidationError("governor kind must be simple|degov|ggov1|ggov1d, got: " + s);
}

std::string to_string(GovernorKind k) {
    switch (k) {
    case GovernorKind::simple: return "simple";
    case GovernorKind::degov: return "degov";
    case GovernorKind::ggov1: return "ggov1";
    case GovernorKind::ggov1d: return "ggov1d";
    }
    return "simple";
}

// ------------------------------------------------------------- DelayBuffer

void DelayBuffer::prime(double t0, double value) {
    buf_.clear();
    // Anchor the constant pre-history at t0 so the first interpolation after
    // startup bridges (t0, value) -> first sample instead of the far-past
    // sentinel, which would otherwise collapse the blend weight to 1.
    buf_.emplace_back(-1e300, value);
    buf_.emplace_back(t0, value);
}

void DelayBuffer::push(double t, double value) {
    if (!buf_.empty() && t <= buf_.back().first)
        throw ValidationError("delay buffer timestamps must increase");
    buf_.emplace_back(t, value);
    // keep a little history beyond the delay horizon
    const double horizon = buf_.back().first - tau_ - 1.0;
    while (buf_.size() > 2 && buf_[1].first < horizon) buf_.pop_front();
}

double DelayBuffer::delayed(double t) const {
    if (buf_.empty()) throw ValidationError("delay buffer queried before priming");
    const double tq = t - tau_;
    if (tq <= buf_.front().first) return buf_.front().second;
    if (tq >= buf_.back().first) return buf_.back().second;
    auto it = std::lower_bound(buf_.begin(), buf_.end(), tq,
                               [](const auto& e, double v) { return e.first < v; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *std::prev(it);
    const double f = (tq - t0) / (t1 - t0);
    return v0 * (1.0 - f) + v1 * f;
}

// ------------------------------------------------------------- validation

void SimpleGovParams::validate() const {
    if (!(t_sm > 0)) throw ValidationError("governor: t_sm must be > 0");
    if (tau_d < 0) throw ValidationError("governor: tau_d must be >= 0");
    if (!(c_2 > 0) || !(c > 0)) throw ValidationError("governor: c and c_2 must be > 0");
}

void DegovParams::validate() const {
    for (double t : {t_1, t_2, t_5, t_6})
        if (!(t > 0)) throw ValidationError("governor: actuator time constants must be > 0");
    if (t_3 < 0 || t_4 < 0) throw ValidationError("governor: t_3 and t_4 must be >= 0");
    if (t_d < 0) throw ValidationError("governor: t_d must be >= 0");
}

namespace {
void validate_engine_block(double k_turb, double w_fnl, double valve_open, double valve_close,
                           double pos_min, double pos_max, double t_b) {
    if (!(k_turb > 0)) throw ValidationError("governor: k_turb must be > 0");
    if (w_fnl < 0) throw ValidationError("governor: w_fnl must be >= 0");
    if (!(valve_close < 0 && 0 < valve_open))
        throw ValidationError("governor: need valve_close < 0 < valve_open");
    if (!(pos_min < pos_max)) throw ValidationError("governor: need pos_min < pos_max");
    if (!(t_b > 0)) throw ValidationError("governor: t_b must be > 0");
}
} // namespace

void Ggov1Params::validate() const {
    if (!(minerr < 0 && 0 < maxerr))
        throw ValidationError("governor: need minerr < 0 < maxerr");
    if (!(t_act > 0)) throw ValidationError("governor: t_act must be > 0");
    validate_engine_block(k_turb, w_fnl, valve_open, valve_close, pos_min, pos_max, t_b);
}

void Ggov1dParams::validate() const {
    if (!(minerr < 0 && 0 < maxerr))
        throw ValidationError("governor: need minerr < 0 < maxerr");
    for (double t : {t_1, t_2, t_5, t_6})
        if (!(t > 0)) throw ValidationError("governor: actuator time constants must be > 0");
    if (t_3 < 0 || t_4 < 0) throw ValidationError("governor: t_3 and t_4 must be >= 0");
    validate_engine_block(k_turb, w_fnl, valve_open, valve_close, pos_min, pos_max, t_b);
}

// ----------------------------------------------------------------- simple

class SimpleGovernor final : public Governor {
  public:
    explicit SimpleGovernor(const SimpleGovParams& p) : p_(p), buf_(p.tau_d) { p_.validate(); }

    GovernorKind kind() const override { return GovernorKind::simple; }
    std::size_t n_states() const override { return 2; }

    std::vector<double> equilibrium(double p_m0) const override {
        // p_m = c_2*(c*m_b - c_3) at w = 1
        const double m_b = (p_m0 / p_.c_2 + p_.c_3) / p_.c;
        return {-m_b / p_.k_1, m_b};
    }

    void derivatives(const double* s, double /*t*/, double w, double w_ref,
                     double* ds) const override {
        const double dw = w - w_ref;
        ds[0] = (p_.k_i / w_ref) * dw;
        ds[1] = (-p_.k_1 * s[0] - p_.k_1 * (p_.k_p / w_ref) * dw - s[1]) / p_.t_sm;
    }

    double mechanical_power(const double* s, double t, double w) const override {
        const double m_delayed = p_.tau_d == 0 ? s[1] : buf_.delayed(t);
        return p_.c_2 * w * (p_.c * m_delayed - p_.c_3 * w);
    }

    bool has_delay() const override { return p_.tau_d > 0; }
    double delay_source(const double* s) const override { return s[1]; }
    DelayBuffer* delay_buffer() override { return &buf_; }

    std::unique_ptr<Governor> clone() const override {
        return std::make_unique<SimpleGovernor>(*this);
    }

  private:
    SimpleGovParams p_;
    DelayBuffer buf_;
};

// ------------------------------------------------------------------ degov

class DegovGovernor final : public Governor {
  public:
    explicit DegovGovernor(const DegovParams& p) : p_(p), buf_(p.t_d) { p_.validate(); }

    GovernorKind kind() const override { return GovernorKind::degov; }
    std::size_t n_states() const override { return 5; }

    std::vector<double> equilibrium(double p_m0) const override {
        // zero speed error: both filter blocks at rest, integrator holds torque
        return {0.0, 0.0, 0.0, 0.0, p_m0};
    }

    void derivatives(const double* s, double /*t*/, double w, double w_ref,
                     double* ds) const override {
        const double e = w_ref - w;
        const double b1 = s[0], b2 = s[1], a1 = s[2], a2 = s[3];
        // (1 + T3 s) / ((1 + T1 s)(1 + T2 s))
        ds[0] = b2;
        ds[1] = (e - b1 - (p_.t_1 + p_.t_2) * b2) / (p_.t_1 * p_.t_2);
        const double y_box = b1 + p_.t_3 * b2;
        // K (1 + T4 s) / ((1 + T5 s)(1 + T6 s)), then a pure integrator
        ds[2] = a2;
        ds[3] = (y_box - a1 - (p_.t_5 + p_.t_6) * a2) / (p_.t_5 * p_.t_6);
        ds[4] = p_.k * (a1 + p_.t_4 * a2);
    }

    double mechanical_power(const double* s, double t, double w) const override {
        const double torque = p_.t_d == 0 ? s[4] : buf_.delayed(t);
        return torque * w;
    }

    bool has_delay() const override { return p_.t_d > 0; }
    double delay_source(const double* s) const override { return s[4]; }
    DelayBuffer* delay_buffer() override { return &buf_; }

    std::unique_ptr<Governor> clone() const override {
        return std::make_unique<DegovGovernor>(*this);
    }

  private:
    DegovParams p_;
    DelayBuffer buf_;
};

// ------------------------------------------------------------------ ggov1

namespace {
double lead_lag_output(double u, double x_ll, double t_c, double t_b) {
    return (t_c / t_b) * u + (1.0 - t_c / t_b) * x_ll;
}
} // namespace

class Ggov1Governor final : public Governor {
  public:
    explicit Ggov1Governor(const Ggov1Params& p) : p_(p) { p_.validate(); }

    GovernorKind kind() const override { return GovernorKind::ggov1; }
    std::size_t n_states() const override { return 4; }

    std::vector<double> equilibrium(double p_m0) const override {
        const double fuel = p_.w_fnl + p_m0 / p_.k_turb;
        return {fuel, 0.0, fuel, p_m0};
    }

    void derivatives(const double* s, double /*t*/, double w, double w_ref,
                     double* ds) const override {
        const double e = std::clamp(w_ref - w, p_.minerr, p_.maxerr);
        const double xi = s[0], zd = s[1], fuel = s[2], x_ll = s[3];
        ds[0] = p_.k_i * e;
        ds[1] = p_.n_d * (e - zd);
        const double pid = p_.k_p * e + xi + p_.k_d * p_.n_d * (e - zd);
        double d_fuel = std::clamp((pid - fuel) / p_.t_act, p_.valve_close, p_.valve_open);
        if ((fuel >= p_.pos_max && d_fuel > 0) || (fuel <= p_.pos_min && d_fuel < 0))
            d_fuel = 0.0;
        ds[2] = d_fuel;
        ds[3] = (p_.k_turb * (fuel - p_.w_fnl) - x_ll) / p_.t_b;
    }

    double mechanical_power(const double* s, double /*t*/, double /*w*/) const override {
        return lead_lag_output(p_.k_turb * (s[2] - p_.w_fnl), s[3], p_.t_c, p_.t_b);
    }

    void clamp_states(double* s) const override {
        s[2] = std::clamp(s[2], p_.pos_min, p_.pos_max);
    }

    std::unique_ptr<Governor> clone() const override {
        return std::make_unique<Ggov1Governor>(*this);
    }

  private:
    Ggov1Params p_;
};

// ----------------------------------------------------------------- ggov1d

class Ggov1dGovernor final : public Governor {
  public:
    explicit Ggov1dGovernor(const Ggov1dParams& p) : p_(p) { p_.validate(); }

    GovernorKind kind() const override { return GovernorKind::ggov1d; }
    std::size_t n_states() const override { return 6; }

    std::vector<double> equilibrium(double p_m0) const override {
        const double valve = p_.w_fnl + p_m0 / p_.k_turb;
        return {0.0, 0.0, 0.0, 0.0, valve, p_m0};
    }

    void derivatives(const double* s, double /*t*/, double w, double w_ref,
                     double* ds) const override {
        const double e = std::clamp(w_ref - w, p_.minerr, p_.maxerr);
        const double b1 = s[0], b2 = s[1], a1 = s[2], a2 = s[3], valve = s[4], x_ll = s[5];
        // error shaping 1/((1+T1 s)(1+T2 s))
        ds[0] = b2;
        ds[1] = (e - b1 - (p_.t_1 + p_.t_2) * b2) / (p_.t_1 * p_.t_2);
        // biproper K(1+T3 s)(1+T4 s)/((1+T5 s)(1+T6 s)); the valve integrates
        // its output, so rate and position limits act on a true state
        ds[2] = a2;
        const double da2 = (b1 - a1 - (p_.t_5 + p_.t_6) * a2) / (p_.t_5 * p_.t_6);
        ds[3] = da2;
        const double y = p_.k * (a1 + (p_.t_3 + p_.t_4) * a2 + p_.t_3 * p_.t_4 * da2);
        double d_valve = std::clamp(y, p_.valve_close, p_.valve_open);
        if ((valve >= p_.pos_max && d_valve > 0) || (valve <= p_.pos_min && d_valve < 0))
            d_valve = 0.0;
        ds[4] = d_valve;
        ds[5] = (p_.k_turb * (valve - p_.w_fnl) - x_ll) / p_.t_b;
    }

    double mechanical_power(const double* s, double /*t*/, double /*w*/) const override {
        return lead_lag_output(p_.k_turb * (s[4] - p_.w_fnl), s[5], p_.t_c, p_.t_b);
    }

    void clamp_states(double* s) const override {
        s[4] = std::clamp(s[4], p_.pos_min, p_.pos_max);
    }

    std::unique_ptr<Governor> clone() const override {
        return std::make_unique<Ggov1dGovernor>(*this);
    }

  private:
    Ggov1dParams p_;
};

std::unique_ptr<Governor> make_simple_governor(const SimpleGovParams& p) {
    return std::make_unique<SimpleGovernor>(p);
}
std::unique_ptr<Governor> make_degov_governor(const DegovParams& p) {
    return std::make_unique<DegovGovernor>(p);
}
std::unique_ptr<Governor> make_ggov1_governor(const Ggov1Params& p) {
    return std::make_unique<Ggov1Governor>(p);
}
std::unique_ptr<Governor> make_ggov1d_governor(const Ggov1dParams& p) {
    return std::make_unique<Ggov1dGovernor>(p);
}

// ------------------------------------------------------------- fuel curve

FuelCurveFit estimate_fuel_curve(const std::vector<std::pair<double, double>>& points_kw_lph,
                                 const PerUnitBase& base) {
    if (points_kw_lph.size() < 2)
        throw ValidationError("fuel-curve fit needs at least two points");
    const std::size_t n = points_kw_lph.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [p_kw, fuel_lph] : points_kw_lph) {
        const double x = base.to_per_unit(p_kw * 1e3, Channel::active_power);
        const double y = fuel_lph / base.fuel_base;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nn = static_cast<double>(n);
    const double det = nn * sxx - sx * sx;
    if (!(det > 1e-12 * nn * std::max(sxx, 1.0)))
        throw ValidationError("fuel-curve fit is singular: all points at the same power");
    const double slope = (nn * sxy - sx * sy) / det;
    const double intercept = (sy * sxx - sx * sxy) / det;
    if (!(slope > 0)) throw ValidationError("fuel-curve fit: fuel must increase with power");

    double ss = 0;
    for (const auto& [p_kw, fuel_lph] : points_kw_lph) {
        const double x = base.to_per_unit(p_kw * 1e3, Channel::active_power);
        const double y = fuel_lph / base.fuel_base;
        const double r = y - (intercept + slope * x);
        ss += r * r;
    }
    return {1.0 / slope, intercept, std::sqrt(ss / nn)};
}

} // namespace genset
