#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "abel/coefficients.hpp"
#include "abel/errors.hpp"

namespace abel {

enum class BSign { Positive, Negative };

/// Quantities entering the periodic-solution existence test
///   min |B|^2 > -4 min A' (1 + T max |C|)
/// and the weaker product bound min |B|^2 > 2 max |A| max |C|.
struct ConditionReport {
    double period = 0.0;
    double min_abs_B_sq = 0.0;
    double min_Adot = 0.0;
    double max_abs_A = 0.0;
    double max_abs_C = 0.0;
    double rhs_main = 0.0;       // -4 min_Adot (1 + period * max_abs_C)
    double margin_main = 0.0;    // min_abs_B_sq - rhs_main
    bool holds_main = false;
    double rhs_secondary = 0.0;  // 2 max_abs_A max_abs_C
    bool holds_secondary = false;
    BSign B_sign = BSign::Positive;
    bool zero_mean_A = false;
};

inline ConditionReport analyze_conditions(const AbelSystem& sys, int grid = 4096) {
    ConditionReport r;
    r.period = sys.period;
    r.min_abs_B_sq = min_abs(sys.B, grid);
    r.min_abs_B_sq *= r.min_abs_B_sq;
    r.min_Adot = global_extremum(sys.A.derivative(), ExtremumKind::Minimum, grid).value;
    r.max_abs_A = max_abs(sys.A, grid);
    r.max_abs_C = max_abs(sys.C, grid);
    r.rhs_main = -4.0 * r.min_Adot * (1.0 + sys.period * r.max_abs_C);
    r.margin_main = r.min_abs_B_sq - r.rhs_main;
    r.holds_main = r.min_abs_B_sq > r.rhs_main;
    r.rhs_secondary = 2.0 * r.max_abs_A * r.max_abs_C;
    r.holds_secondary = r.min_abs_B_sq > r.rhs_secondary;
    const double bmin = global_extremum(sys.B, ExtremumKind::Minimum, grid).value;
    const double bmax = global_extremum(sys.B, ExtremumKind::Maximum, grid).value;
    r.B_sign = (bmin > 0.0 || (bmax > 0.0 && sys.B.mean >= 0.0)) ? BSign::Positive : BSign::Negative;
    r.zero_mean_A = std::abs(sys.A.period_integral()) <= 1e-10;
    return r;
}

enum class ZeroKind { Saddle, UnstableNode, Degenerate };

inline const char* to_string(ZeroKind k) {
    switch (k) {
        case ZeroKind::Saddle: return "saddle";
        case ZeroKind::UnstableNode: return "unstable_node";
        default: return "degenerate";
    }
}

/// Zero t0 of A with the linearization data of the planar critical point
/// (t0, 0): eigenvalues lambda = B/2 +- sqrt(B^2/4 + A'), classified by the
/// sign of A'(t0).  |B| is used so the data matches the B > 0 orientation.
struct ZeroOfA {
    double t = 0.0;
    double adot = 0.0;
    ZeroKind kind = ZeroKind::Saddle;
    double discriminant = 0.0;  // B^2/4 + adot
    bool is_focus = false;      // discriminant < 0
    double lambda_minus = std::numeric_limits<double>::quiet_NaN();
    double lambda_plus = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {
constexpr double kZeroValueTol = 1e-10;   // |A| below this counts as a zero
constexpr double kZeroTimeTol = 1e-12;    // bisection width target
constexpr double kDegenerateAdot = 1e-8;  // |A'| band treated as degenerate
}  // namespace detail

inline ZeroOfA classify_zero(const AbelSystem& sys, double t) {
    ZeroOfA z;
    z.t = t;
    z.adot = sys.A.derivative_at(t);
    if (z.adot > detail::kDegenerateAdot)
        z.kind = ZeroKind::Saddle;
    else if (z.adot < -detail::kDegenerateAdot)
        z.kind = ZeroKind::UnstableNode;
    else
        z.kind = ZeroKind::Degenerate;
    const double b = std::abs(sys.B(t));
    z.discriminant = 0.25 * b * b + z.adot;
    z.is_focus = z.discriminant < 0.0;
    if (!z.is_focus) {
        const double root = std::sqrt(z.discriminant);
        z.lambda_minus = 0.5 * b - root;
        z.lambda_plus = 0.5 * b + root;
    }
    return z;
}

/// Zeros of A in [0, period), each refined to ~1e-12 in t.  Sign changes are
/// bisected; tangential zeros (local |A| minima dipping below 1e-10) are
/// located by golden-section.  Throws NoZeros when A has constant sign.
inline std::vector<ZeroOfA> find_zeros(const AbelSystem& sys, int grid = 4096) {
    const double T = sys.period;
    const auto& A = sys.A;
    const int n = std::max(grid, 64);

    if (max_abs(A, grid) <= detail::kZeroValueTol)  // A vanishes identically
        return {classify_zero(sys, 0.0)};

    std::vector<double> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = A(T * double(j) / double(n));

    std::vector<double> roots;
    // Merge radius covers golden-section localization noise at flat contacts,
    // where series cancellation drowns |A| below ~1e-8 around the zero.  The
    // first candidate wins; bisected crossings are pushed before tangencies.
    auto push_root = [&](double t) {
        t = A.reduced(t);
        for (double r : roots) {
            double d = std::abs(t - r);
            d = std::min(d, T - d);
            if (d < 1e-6 * T) return;
        }
        roots.push_back(t);
    };

    const double h = T / double(n);
    for (int j = 0; j < n; ++j) {
        const double vj = v[static_cast<std::size_t>(j)];
        const double vn = v[static_cast<std::size_t>((j + 1) % n)];
        const double tj = T * double(j) / double(n);
        if (std::abs(vj) <= detail::kZeroValueTol * 1e-2) {
            push_root(tj);
            continue;
        }
        if ((vj > 0.0 && vn < 0.0) || (vj < 0.0 && vn > 0.0)) {
            double lo = tj, hi = tj + h, flo = vj;
            while (hi - lo > detail::kZeroTimeTol) {
                const double mid = 0.5 * (lo + hi);
                const double fm = A(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((flo > 0.0) == (fm > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            push_root(0.5 * (lo + hi));
        }
    }

    // Tangency pass: local minima of |A| that bottom out below the value
    // tolerance without a sign change.
    for (int j = 0; j < n; ++j) {
        const double aj = std::abs(v[static_cast<std::size_t>(j)]);
        const double ap = std::abs(v[static_cast<std::size_t>((j + n - 1) % n)]);
        const double an = std::abs(v[static_cast<std::size_t>((j + 1) % n)]);
        if (aj <= ap && aj <= an && aj < 1e-3) {
            const double tj = T * double(j) / double(n);
            Extremum e = detail::golden_min([&](double t) { return std::abs(A(t)); }, tj - h,
                                            tj + h, 1e-13 * T);
            if (std::abs(e.value) < detail::kZeroValueTol) push_root(e.t);
        }
    }

    if (roots.empty()) throw NoZeros("A(t) has constant sign over the period");
    std::sort(roots.begin(), roots.end());
    std::vector<ZeroOfA> out;
    out.reserve(roots.size());
    for (double t : roots) out.push_back(classify_zero(sys, t));
    return out;
}

/// Open interval between consecutive zeros with the sign of A inside.
struct SignInterval {
    double a = 0.0;
    double b = 0.0;       // b > a; b may exceed the period for the wrap interval
    int sign_of_A = 0;    // +1 or -1
};

/// Intervals between consecutive zeros (cyclically), skipping stretches where
/// A vanishes identically (the solution is 0 there).
inline std::vector<SignInterval> sign_intervals(const AbelSystem& sys,
                                                const std::vector<ZeroOfA>& zeros) {
    std::vector<SignInterval> out;
    const double T = sys.period;
    const std::size_t m = zeros.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double a = zeros[i].t;
        const double b = i + 1 < m ? zeros[i + 1].t : zeros[0].t + T;
        if (!(b > a)) continue;
        double amax = 0.0;
        int sign = 0;
        for (int j = 1; j <= 17; ++j) {
            const double t = a + (b - a) * double(j) / 18.0;
            const double val = sys.A(t);
            if (std::abs(val) > amax) {
                amax = std::abs(val);
                sign = val > 0.0 ? 1 : -1;
            }
        }
        if (amax <= detail::kZeroValueTol) continue;
        out.push_back(SignInterval{a, b, sign});
    }
    return out;
}

/// x -> -x maps (A, B, C) to (A, -B, C); use it to expose B > 0 to the
/// construction pipeline.  Exact on coefficients.
inline AbelSystem with_positive_B(const AbelSystem& sys, bool* negated = nullptr) {
    const ConditionReport r = analyze_conditions(sys, 512);
    if (r.B_sign == BSign::Negative) {
        if (negated) *negated = true;
        return AbelSystem(sys.A, sys.B.negated(), sys.C);
    }
    if (negated) *negated = false;
    return sys;
}

}  // namespace abel
