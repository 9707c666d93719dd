#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace abel::detail {

// Dormand-Prince 5(4) embedded pair.  The 5th-order result propagates
// (local extrapolation); the embedded difference drives step control.
struct DP45 {
    static constexpr int stages = 7;
    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static constexpr double b5[7] = {35.0 / 384,      0.0,         500.0 / 1113, 125.0 / 192,
                                     -2187.0 / 6784,  11.0 / 84,   0.0};
    static constexpr double b4[7] = {5179.0 / 57600,  0.0,           7571.0 / 16695, 393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

template <std::size_t N>
using State = std::array<double, N>;

/// One embedded step from (u, y) by h.  rhs(u, y, dy) fills dy.
/// Returns the scaled error norm (<= 1 means acceptable).
template <std::size_t N, class RHS>
inline double dp45_step(const RHS& rhs, double u, const State<N>& y, double h, State<N>& y_out,
                        double rel_tol, double abs_tol) {
    State<N> k[DP45::stages];
    State<N> tmp;
    rhs(u, y, k[0]);
    for (int s = 1; s < DP45::stages; ++s) {
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (int j = 0; j < s; ++j) acc += DP45::a[s][j] * k[j][i];
            tmp[i] = y[i] + h * acc;
        }
        rhs(u + DP45::c[s] * h, tmp, k[s]);
    }
    double err_sq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double y5 = 0.0, y4 = 0.0;
        for (int s = 0; s < DP45::stages; ++s) {
            y5 += DP45::b5[s] * k[s][i];
            y4 += DP45::b4[s] * k[s][i];
        }
        y_out[i] = y[i] + h * y5;
        const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y_out[i]));
        const double e = h * (y5 - y4) / sc;
        err_sq += e * e;
    }
    return std::sqrt(err_sq / double(N));
}

/// Step-size growth factor from the scaled error norm (order-5 pair).
inline double dp45_factor(double err_norm) {
    if (!(err_norm > 0.0)) return 5.0;  // exact step (or NaN handled by caller)
    const double f = 0.9 * std::pow(err_norm, -0.2);
    return std::min(5.0, std::max(0.2, f));
}

/// Conservative initial step from the state and derivative scale.
template <std::size_t N, class RHS>
inline double dp45_initial_step(const RHS& rhs, double u0, const State<N>& y0, double rel_tol,
                                double abs_tol) {
    State<N> f0;
    rhs(u0, y0, f0);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = abs_tol + rel_tol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / double(N));
    d1 = std::sqrt(d1 / double(N));
    double h = (d0 >= 1e-5 && d1 >= 1e-5) ? 0.01 * d0 / d1 : 1e-6;
    return std::min(h, 1.0);
}

}  // namespace abel::detail
