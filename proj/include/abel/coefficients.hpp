#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "abel/errors.hpp"

namespace abel {

/// Finite Fourier series on a fixed period:
///   f(t) = mean + sum_k cos_coeffs[k-1] cos(2 pi k t / T)
///               + sum_k sin_coeffs[k-1] sin(2 pi k t / T).
/// The truncated series is the coefficient representation everywhere; closed
/// under differentiation, so derivatives are exact.
struct PeriodicCoefficient {
    double period = 2.0 * std::numbers::pi;
    double mean = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    PeriodicCoefficient() = default;
    PeriodicCoefficient(double period_, double mean_, std::vector<double> cos_,
                        std::vector<double> sin_)
        : period(period_), mean(mean_), cos_coeffs(std::move(cos_)), sin_coeffs(std::move(sin_)) {
        if (!(period > 0.0) || !std::isfinite(period))
            throw SchemaError("period must be positive and finite");
    }

    static PeriodicCoefficient constant(double value, double period_) {
        return PeriodicCoefficient(period_, value, {}, {});
    }

    std::size_t harmonics() const {
        return cos_coeffs.size() > sin_coeffs.size() ? cos_coeffs.size() : sin_coeffs.size();
    }

    // Argument reduction keeps evaluation exactly periodic for |t| >> T.
    double reduced(double t) const {
        double r = t - period * std::floor(t / period);
        if (r >= period) r -= period;  // floor rounding at the seam
        return r;
    }

    double operator()(double t) const {
        const double tau = reduced(t);
        const double w = 2.0 * std::numbers::pi / period;
        double acc = mean;
        for (std::size_t k = 0; k < cos_coeffs.size(); ++k)
            if (cos_coeffs[k] != 0.0) acc += cos_coeffs[k] * std::cos(w * double(k + 1) * tau);
        for (std::size_t k = 0; k < sin_coeffs.size(); ++k)
            if (sin_coeffs[k] != 0.0) acc += sin_coeffs[k] * std::sin(w * double(k + 1) * tau);
        return acc;
    }

    /// Termwise derivative, exact for the series.
    PeriodicCoefficient derivative() const {
        const double w = 2.0 * std::numbers::pi / period;
        const std::size_t n = harmonics();
        std::vector<double> dc(n, 0.0), ds(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double a = k < cos_coeffs.size() ? cos_coeffs[k] : 0.0;
            const double b = k < sin_coeffs.size() ? sin_coeffs[k] : 0.0;
            dc[k] = w * double(k + 1) * b;
            ds[k] = -w * double(k + 1) * a;
        }
        return PeriodicCoefficient(period, 0.0, std::move(dc), std::move(ds));
    }

    double derivative_at(double t) const {
        const double tau = reduced(t);
        const double w = 2.0 * std::numbers::pi / period;
        double acc = 0.0;
        for (std::size_t k = 0; k < cos_coeffs.size(); ++k)
            if (cos_coeffs[k] != 0.0)
                acc -= cos_coeffs[k] * w * double(k + 1) * std::sin(w * double(k + 1) * tau);
        for (std::size_t k = 0; k < sin_coeffs.size(); ++k)
            if (sin_coeffs[k] != 0.0)
                acc += sin_coeffs[k] * w * double(k + 1) * std::cos(w * double(k + 1) * tau);
        return acc;
    }

    /// Integral over one period; all harmonics integrate to zero.
    double period_integral() const { return mean * period; }

    bool is_zero(double tol = 0.0) const {
        if (std::abs(mean) > tol) return false;
        for (double c : cos_coeffs)
            if (std::abs(c) > tol) return false;
        for (double s : sin_coeffs)
            if (std::abs(s) > tol) return false;
        return true;
    }

    PeriodicCoefficient negated() const {
        PeriodicCoefficient r = *this;
        r.mean = -r.mean;
        for (double& c : r.cos_coeffs) c = -c;
        for (double& s : r.sin_coeffs) s = -s;
        return r;
    }

    /// f(-t): even harmonics keep sign, odd (sine) harmonics flip.
    PeriodicCoefficient reflected() const {
        PeriodicCoefficient r = *this;
        for (double& s : r.sin_coeffs) s = -s;
        return r;
    }
};

struct Extremum {
    double t = 0.0;
    double value = 0.0;
};

enum class ExtremumKind { Minimum, Maximum };

namespace detail {

// Golden-section minimization on [lo, hi]; assumes a minimum in the bracket.
template <class F>
inline Extremum golden_min(const F& f, double lo, double hi, double t_tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > t_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    const double tm = 0.5 * (a + b);
    return {tm, f(tm)};
}

}  // namespace detail

/// Global extremum over one period: dense scan, then golden-section refinement
/// of every local basin.  Grid resolves features of the stored harmonics; the
/// refined value is accurate to ~1e-10 for the coefficient sizes used here.
inline Extremum global_extremum(const PeriodicCoefficient& f, ExtremumKind kind, int grid = 4096) {
    if (grid < 8) grid = 8;
    const double sgn = kind == ExtremumKind::Minimum ? 1.0 : -1.0;
    auto g = [&](double t) { return sgn * f(t); };
    const double T = f.period;
    const int n = grid;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = g(T * double(j) / double(n));

    Extremum best{0.0, v[0]};
    const double t_tol = 1e-13 * T;
    for (int j = 0; j < n; ++j) {
        const double vj = v[static_cast<std::size_t>(j)];
        const double vp = v[static_cast<std::size_t>((j + n - 1) % n)];
        const double vn = v[static_cast<std::size_t>((j + 1) % n)];
        if (vj <= vp && vj <= vn) {
            const double tj = T * double(j) / double(n);
            Extremum e = detail::golden_min(g, tj - T / double(n), tj + T / double(n), t_tol);
            if (e.value < best.value) best = e;
        }
    }
    best.value *= sgn;
    best.t = f.reduced(best.t);
    return best;
}

inline double max_abs(const PeriodicCoefficient& f, int grid = 4096) {
    const double lo = global_extremum(f, ExtremumKind::Minimum, grid).value;
    const double hi = global_extremum(f, ExtremumKind::Maximum, grid).value;
    return std::max(std::abs(lo), std::abs(hi));
}

/// min |f| over the period: zero whenever f changes sign (or touches zero).
inline double min_abs(const PeriodicCoefficient& f, int grid = 4096) {
    const double lo = global_extremum(f, ExtremumKind::Minimum, grid).value;
    const double hi = global_extremum(f, ExtremumKind::Maximum, grid).value;
    if (lo > 0.0) return lo;
    if (hi < 0.0) return -hi;
    return 0.0;
}

/// Leading-normal form x x' = A + B x + C x^2 with T-periodic coefficients.
struct AbelSystem {
    PeriodicCoefficient A, B, C;
    double period;

    AbelSystem(PeriodicCoefficient A_, PeriodicCoefficient B_, PeriodicCoefficient C_)
        : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), period(A.period) {
        if (B.period != period || C.period != period)
            throw SchemaError("coefficient periods differ");
    }
};

/// General quasilinear form [b0 + b1 x] x' = a0 + a1 x + a2 x^2.
struct GeneralAbelSystem {
    PeriodicCoefficient a0, a1, a2, b0, b1;
    double period;

    GeneralAbelSystem(PeriodicCoefficient a0_, PeriodicCoefficient a1_, PeriodicCoefficient a2_,
                      PeriodicCoefficient b0_, PeriodicCoefficient b1_)
        : a0(std::move(a0_)),
          a1(std::move(a1_)),
          a2(std::move(a2_)),
          b0(std::move(b0_)),
          b1(std::move(b1_)),
          period(a0.period) {
        if (a1.period != period || a2.period != period || b0.period != period ||
            b1.period != period)
            throw SchemaError("coefficient periods differ");
    }
};

/// Least-squares Fourier projection via uniform-grid quadrature (spectrally
/// accurate on periodic integrands).
inline PeriodicCoefficient project_periodic(const std::function<double(double)>& f, double period,
                                            int harmonics = 64, int quadrature_points = 4096) {
    if (quadrature_points < 4 * (harmonics + 1)) quadrature_points = 4 * (harmonics + 1);
    const int n = quadrature_points;
    std::vector<double> samples(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) samples[static_cast<std::size_t>(j)] = f(period * double(j) / double(n));

    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= double(n);

    const double w = 2.0 * std::numbers::pi / double(n);
    std::vector<double> cs(static_cast<std::size_t>(harmonics), 0.0);
    std::vector<double> sn(static_cast<std::size_t>(harmonics), 0.0);
    for (int k = 1; k <= harmonics; ++k) {
        double ak = 0.0, bk = 0.0;
        for (int j = 0; j < n; ++j) {
            const double ang = w * double(k) * double(j);
            ak += samples[static_cast<std::size_t>(j)] * std::cos(ang);
            bk += samples[static_cast<std::size_t>(j)] * std::sin(ang);
        }
        cs[static_cast<std::size_t>(k - 1)] = 2.0 * ak / double(n);
        sn[static_cast<std::size_t>(k - 1)] = 2.0 * bk / double(n);
    }
    return PeriodicCoefficient(period, mean, std::move(cs), std::move(sn));
}

/// Max |f - series| on a grid offset from the quadrature nodes.
inline double projection_residual(const std::function<double(double)>& f,
                                  const PeriodicCoefficient& series, int check_points = 8192) {
    double worst = 0.0;
    for (int j = 0; j < check_points; ++j) {
        const double t = series.period * (double(j) + 0.37) / double(check_points);
        worst = std::max(worst, std::abs(f(t) - series(t)));
    }
    return worst;
}

struct NormalizeResult {
    AbelSystem system;
    double projection_residual;  // max over the three projected coefficients
    double min_abs_b1;
};

/// Reduce the general form to leading-normal form via y = x + b0/b1:
///   A = (a0 - a1 q + a2 q^2)/b1,  B = (a1 - 2 a2 q + b1 q')/b1,  C = a2/b1,
/// with q = b0/b1.  Requires b1 bounded away from zero over the period.
inline NormalizeResult normalize(const GeneralAbelSystem& g, int harmonics = 64,
                                 int quadrature_points = 4096, double b1_tolerance = 1e-8) {
    const double b1_floor = min_abs(g.b1);
    if (b1_floor < b1_tolerance)
        throw DegenerateLeadingCoefficient("min |b1| = " + std::to_string(b1_floor) +
                                           " is below tolerance " + std::to_string(b1_tolerance));

    const PeriodicCoefficient da0 = g.b0.derivative();
    const PeriodicCoefficient da1 = g.b1.derivative();
    auto q = [&](double t) { return g.b0(t) / g.b1(t); };
    auto qdot = [&](double t) {
        const double b1v = g.b1(t);
        return (da0(t) * b1v - g.b0(t) * da1(t)) / (b1v * b1v);
    };
    auto Af = [&](double t) {
        const double qv = q(t);
        return (g.a0(t) - g.a1(t) * qv + g.a2(t) * qv * qv) / g.b1(t);
    };
    auto Bf = [&](double t) {
        const double qv = q(t);
        return (g.a1(t) - 2.0 * g.a2(t) * qv + g.b1(t) * qdot(t)) / g.b1(t);
    };
    auto Cf = [&](double t) { return g.a2(t) / g.b1(t); };

    PeriodicCoefficient A = project_periodic(Af, g.period, harmonics, quadrature_points);
    PeriodicCoefficient B = project_periodic(Bf, g.period, harmonics, quadrature_points);
    PeriodicCoefficient C = project_periodic(Cf, g.period, harmonics, quadrature_points);
    double res = std::max({projection_residual(Af, A), projection_residual(Bf, B),
                           projection_residual(Cf, C)});
    return NormalizeResult{AbelSystem(std::move(A), std::move(B), std::move(C)), res, b1_floor};
}

}  // namespace abel
