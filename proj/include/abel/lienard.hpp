#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "abel/coefficients.hpp"
#include "abel/errors.hpp"
#include "abel/rk45.hpp"

namespace abel {

/// Point on an orbit of the planar system dt/ds = x, dx/ds = A + B x + C x^2.
/// s is the arc parameter of that system (signed; integration runs so that t
/// increases, which means s decreases on orbits with x < 0).
struct PlanarState {
    double t = 0.0;
    double x = 0.0;
    double s = 0.0;
};

/// Right-hand side A/x + B + C x of the scalar equation.  The line x = 0 is
/// singular; values this close to it are rejected rather than overflowed.
inline double slope_field(const AbelSystem& sys, double t, double x) {
    if (std::abs(x) < 1e-300) throw DivisionAtZero("slope field evaluated at |x| < 1e-300");
    return sys.A(t) / x + sys.B(t) + sys.C(t) * x;
}

/// Planar vector field (dt/ds, dx/ds) at (t, x).
inline std::array<double, 2> planar_field(const AbelSystem& sys, double t, double x) {
    return {x, sys.A(t) + sys.B(t) * x + sys.C(t) * x * x};
}

/// Time reflection (t, x) -> (-t, -x): if x solves the system, -x(-t) solves
/// the flipped one.  Exact on Fourier coefficients; an involution.  It swaps
/// interval endpoints, so backward shooting toward a zero becomes forward
/// integration on the flipped system.
inline AbelSystem flip(const AbelSystem& sys) {
    return AbelSystem(sys.A.reflected().negated(), sys.B.reflected(),
                      sys.C.reflected().negated());
}

enum class StopReason { TimeTarget, AbsCeiling, AbsFloor, StepCap, ZeroCrossing };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::TimeTarget: return "time_target";
        case StopReason::AbsCeiling: return "abs_ceiling";
        case StopReason::AbsFloor: return "abs_floor";
        case StopReason::StepCap: return "step_cap";
        default: return "zero_crossing";
    }
}

/// Stop set for integrate(); the first condition met (earliest within a step,
/// located by bisection on the step size) ends the run.  A sign change of x
/// always stops, whether or not a floor is set.
struct StopCondition {
    std::optional<double> time_target;   // stop once t reaches this (t increases)
    std::optional<double> abs_ceiling;   // stop once |x| >= ceiling
    std::optional<double> abs_floor;     // stop once |x| <= floor
    std::optional<long> step_cap;        // stop after this many accepted steps
};

struct IntegrateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();  // in s
    double max_dt = 0.0;        // cap on per-step t advance (0 = none)
    double fixed_step = 0.0;    // > 0: fixed s-step, no error control
    long max_steps = 50'000'000;
    double record_min_dt = 0.0; // thin recorded samples to this t spacing (0 = all)
};

struct TrajectorySample {
    double t = 0.0;
    double x = 0.0;
};

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    double min_step = std::numeric_limits<double>::infinity();
    double max_step = 0.0;
    PlanarState final_state;
};

/// Recorded orbit piece; samples have strictly increasing t.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    StopReason stop_reason = StopReason::TimeTarget;
    IntegratorStats stats;
};

/// Integrate the planar system from start until a stop condition fires.
/// Orientation is chosen so t increases (sigma = sign(x) * s).  Adaptive
/// embedded RK 4(5) with local extrapolation; the stop state is refined by
/// bisection on the final step.
inline Trajectory integrate(const AbelSystem& sys, PlanarState start, const StopCondition& stop,
                            const IntegrateOptions& opts = {}) {
    if (std::abs(start.x) < 1e-300)
        throw DivisionAtZero("integration started on the singular line x = 0");
    if (stop.time_target && !(*stop.time_target > start.t))
        throw std::invalid_argument("time_target must exceed the start time");
    if (stop.abs_floor && !(std::abs(start.x) > *stop.abs_floor))
        throw std::invalid_argument("|x| already at or below abs_floor at start");

    const double dir = start.x > 0.0 ? 1.0 : -1.0;
    auto rhs = [&](double, const detail::State<2>& y, detail::State<2>& dy) {
        dy[0] = dir * y[1];
        dy[1] = dir * (sys.A(y[0]) + sys.B(y[0]) * y[1] + sys.C(y[0]) * y[1] * y[1]);
    };
    // The transverse mode contracts at roughly |B + 2Cx| per arc unit.  Near
    // an invariant branch it sits at roundoff amplitude, invisible to the
    // error norm, so the step must be capped by stability, not accuracy.
    auto stability_cap = [&](double t, double x) {
        const double lin = std::abs(sys.B(t) + 2.0 * sys.C(t) * x);
        const double quad = std::sqrt(std::abs(sys.A.derivative_at(t) +
                                               sys.B.derivative_at(t) * x +
                                               sys.C.derivative_at(t) * x * x));
        return 2.0 / (lin + quad + 1e-12);
    };

    Trajectory traj;
    traj.samples.push_back({start.t, start.x});

    detail::State<2> y{start.t, start.x};
    double sigma = 0.0;
    const double sign0 = start.x > 0.0 ? 1.0 : -1.0;

    const bool fixed = opts.fixed_step > 0.0;
    double h = fixed ? opts.fixed_step
                     : std::min({detail::dp45_initial_step<2>(rhs, sigma, y, opts.rel_tol,
                                                              opts.abs_tol),
                                 opts.max_step, stability_cap(y[0], y[1])});
    long total_attempts = 0;

    detail::State<2> ynew;
    auto step_to = [&](double hh, detail::State<2>& out) {
        return detail::dp45_step<2>(rhs, sigma, y, hh, out, opts.rel_tol, opts.abs_tol);
    };

    // First h with pred(end state) true, for locating events inside one step.
    auto refine = [&](double h_acc, auto&& pred) {
        double lo = 0.0, hi = h_acc;
        detail::State<2> probe;
        for (int it = 0; it < 80 && (hi - lo) > 1e-16 * h_acc; ++it) {
            const double mid = 0.5 * (lo + hi);
            step_to(mid, probe);
            if (pred(probe))
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    };

    auto record = [&](double t, double x, bool force) {
        const double t_last = traj.samples.back().t;
        if (t <= t_last) return;
        if (!force && opts.record_min_dt > 0.0 && t - t_last < opts.record_min_dt) return;
        traj.samples.push_back({t, x});
    };

    auto finish = [&](StopReason reason, double t_end, double x_end, double sigma_end) {
        record(t_end, x_end, true);
        traj.stop_reason = reason;
        traj.stats.final_state = PlanarState{t_end, x_end, start.s + dir * sigma_end};
        return traj;
    };

    while (true) {
        if (++total_attempts > opts.max_steps)
            throw StepCountExceeded("no stop condition met within " +
                                    std::to_string(opts.max_steps) + " steps");
        if (!(h > 1e-14 * std::max(1.0, std::abs(sigma))))
            throw StepSizeUnderflow("step size underflow at t = " + std::to_string(y[0]));

        const double err = step_to(h, ynew);
        const bool finite = std::isfinite(ynew[0]) && std::isfinite(ynew[1]) && std::isfinite(err);

        if (!fixed && (!finite || err > 1.0)) {
            ++traj.stats.rejected;
            h *= finite ? detail::dp45_factor(err) : 0.2;
            continue;
        }
        if (fixed && !finite)
            throw StepSizeUnderflow("state became non-finite in fixed-step mode");

        if (opts.max_dt > 0.0 && ynew[0] - y[0] > opts.max_dt) {
            ++traj.stats.rejected;
            h *= std::max(0.2, 0.9 * opts.max_dt / (ynew[0] - y[0]));
            continue;
        }

        // Event scan on the accepted end state; earliest (smallest h) wins.
        double h_event = std::numeric_limits<double>::infinity();
        StopReason reason{};
        bool snap_target = false;

        if (stop.abs_floor && std::abs(ynew[1]) <= *stop.abs_floor) {
            const double f = *stop.abs_floor;
            const double he = refine(h, [&](const detail::State<2>& p) { return std::abs(p[1]) <= f; });
            if (he < h_event) { h_event = he; reason = StopReason::AbsFloor; snap_target = false; }
        }
        if (sign0 * ynew[1] <= 0.0) {
            const double he = refine(h, [&](const detail::State<2>& p) { return sign0 * p[1] <= 0.0; });
            if (he < h_event) { h_event = he; reason = StopReason::ZeroCrossing; snap_target = false; }
        }
        if (stop.abs_ceiling && std::abs(ynew[1]) >= *stop.abs_ceiling) {
            const double cl = *stop.abs_ceiling;
            const double he = refine(h, [&](const detail::State<2>& p) { return std::abs(p[1]) >= cl; });
            if (he < h_event) { h_event = he; reason = StopReason::AbsCeiling; snap_target = false; }
        }
        if (stop.time_target && ynew[0] >= *stop.time_target) {
            const double tt = *stop.time_target;
            const double he = refine(h, [&](const detail::State<2>& p) { return p[0] >= tt; });
            if (he < h_event) { h_event = he; reason = StopReason::TimeTarget; snap_target = true; }
        }

        if (h_event < std::numeric_limits<double>::infinity()) {
            step_to(h_event, ynew);
            ++traj.stats.accepted;
            const double t_end = snap_target ? *stop.time_target : ynew[0];
            return finish(reason, t_end, ynew[1], sigma + h_event);
        }

        ++traj.stats.accepted;
        traj.stats.min_step = std::min(traj.stats.min_step, h);
        traj.stats.max_step = std::max(traj.stats.max_step, h);
        sigma += h;
        y = ynew;
        record(y[0], y[1], false);

        if (stop.step_cap && traj.stats.accepted >= *stop.step_cap)
            return finish(StopReason::StepCap, y[0], y[1], sigma);

        if (!fixed)
            h = std::min({h * detail::dp45_factor(err), opts.max_step,
                          stability_cap(y[0], y[1])});
    }
}

struct ArcSample {
    double s = 0.0;
    double t = 0.0;
    double x = 0.0;
};

/// Raw arc of the planar system parametrized by s itself (either direction,
/// no orientation fix, crossings of x = 0 allowed).  For local phase
/// portraits around critical points.
inline std::vector<ArcSample> integrate_arc(const AbelSystem& sys, PlanarState start,
                                            double s_span, const IntegrateOptions& opts = {}) {
    if (s_span == 0.0) return {{start.s, start.t, start.x}};
    const double dir = s_span > 0.0 ? 1.0 : -1.0;
    auto rhs = [&](double, const detail::State<2>& y, detail::State<2>& dy) {
        dy[0] = dir * y[1];
        dy[1] = dir * (sys.A(y[0]) + sys.B(y[0]) * y[1] + sys.C(y[0]) * y[1] * y[1]);
    };
    detail::State<2> y{start.t, start.x};
    double sigma = 0.0;
    const double span = std::abs(s_span);
    std::vector<ArcSample> out{{start.s, start.t, start.x}};
    double h = std::min(detail::dp45_initial_step<2>(rhs, sigma, y, opts.rel_tol, opts.abs_tol),
                        span / 16.0);
    detail::State<2> ynew;
    long attempts = 0;
    while (sigma < span) {
        if (++attempts > opts.max_steps)
            throw StepCountExceeded("arc step budget exhausted");
        if (!(h > 1e-16 * std::max(1.0, sigma)))
            throw StepSizeUnderflow("arc step size underflow");
        h = std::min(h, span - sigma);
        const double err =
            detail::dp45_step<2>(rhs, sigma, y, h, ynew, opts.rel_tol, opts.abs_tol);
        const bool finite = std::isfinite(ynew[0]) && std::isfinite(ynew[1]) && std::isfinite(err);
        if (!finite || err > 1.0) {
            h *= finite ? detail::dp45_factor(err) : 0.2;
            continue;
        }
        sigma += h;
        y = ynew;
        out.push_back({start.s + dir * sigma, y[0], y[1]});
        h *= detail::dp45_factor(err);
    }
    return out;
}

enum class BarrierSide { Above, Below };

/// Line x = m t + n that the orbit must stay on one side of over [t_begin, t_end].
struct LineBarrier {
    double m = 0.0;
    double n = 0.0;
    BarrierSide side = BarrierSide::Above;  // side the TRAJECTORY must lie on
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct BarrierCheck {
    bool ok = true;
    double worst_violation = 0.0;  // max penetration depth past the line, 0 if none
    long samples_checked = 0;
};

/// Check recorded samples against the barrier with a slack for roundoff.
/// Sample-based: gaps between samples are not interpolated (sample spacing is
/// capped during construction, see IntegrateOptions::max_dt).
inline BarrierCheck barrier_check(const Trajectory& traj, const LineBarrier& barrier,
                                  double slack = 1e-9) {
    BarrierCheck r;
    for (const auto& smp : traj.samples) {
        if (smp.t < barrier.t_begin || smp.t > barrier.t_end) continue;
        ++r.samples_checked;
        const double line = barrier.m * smp.t + barrier.n;
        const double pen = barrier.side == BarrierSide::Above ? line - smp.x : smp.x - line;
        if (pen > r.worst_violation) r.worst_violation = pen;
    }
    if (r.samples_checked == 0)
        throw std::invalid_argument("no trajectory samples in the barrier window");
    r.ok = r.worst_violation <= slack;
    return r;
}

}  // namespace abel
