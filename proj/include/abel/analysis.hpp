#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "abel/construction.hpp"

namespace abel {

struct WitnessOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;  // tightened automatically to track tiny x_a
    int gate_grid = 512;
};

/// One perturbed orbit demonstrating instability of the sign-changing
/// solution: started at (a, x_a) just above the zero at a, it stays positive
/// while x* dips negative, so |x - x*| > |x*| pointwise on (a, b].
struct InstabilityWitness {
    double a = 0.0;
    double b = 0.0;
    double x_a = 0.0;
    Trajectory trajectory;
    bool reached_end = false;
    bool separation_ok = false;
    double min_excess = 0.0;       // min over samples of |x - x*| - |x*|
    double min_gate_margin = 0.0;  // min over [a,b] of the slope field on the line x = x_a
};

/// Expects the B > 0 oriented system, its solution, and a positive-A interval.
inline InstabilityWitness instability_witness(const AbelSystem& sys, const PeriodicSolution& sol,
                                              const SignInterval& iv, double x_a,
                                              const WitnessOptions& opts = {}) {
    if (!(x_a > 0.0) || x_a > 0.1)
        throw std::invalid_argument("x_a must lie in (0, 0.1]");
    if (iv.sign_of_A <= 0)
        throw std::invalid_argument("witness interval must have A > 0 (flip the system first)");

    InstabilityWitness w;
    w.a = iv.a;
    w.b = iv.b;
    w.x_a = x_a;

    StopCondition sc;
    sc.time_target = iv.b;
    sc.abs_ceiling = 1e6;
    IntegrateOptions io;
    io.rel_tol = opts.rel_tol;
    io.abs_tol = std::max(1e-300, std::min(opts.abs_tol, 1e-6 * x_a));
    io.max_dt = (iv.b - iv.a) / 1024.0;
    w.trajectory = integrate(sys, {iv.a, x_a, 0.0}, sc, io);
    w.reached_end = w.trajectory.stop_reason == StopReason::TimeTarget;

    w.min_excess = std::numeric_limits<double>::infinity();
    for (const auto& smp : w.trajectory.samples) {
        const double xs = sol.eval(smp.t);
        const double excess = std::abs(smp.x - xs) - std::abs(xs);
        w.min_excess = std::min(w.min_excess, excess);
    }
    w.separation_ok = w.reached_end && w.min_excess > 0.0;

    // One-way gate: if the slope field is positive everywhere on the line
    // x = x_a over [a, b], no orbit above it can come back down through it.
    w.min_gate_margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= opts.gate_grid; ++j) {
        const double t = iv.a + (iv.b - iv.a) * double(j) / double(opts.gate_grid);
        w.min_gate_margin = std::min(w.min_gate_margin, slope_field(sys, t, x_a));
    }
    return w;
}

enum class ShotOutcome { ReachesEndpointOnManifold, CrossesZeroEarly, EscapesCone };

inline const char* to_string(ShotOutcome o) {
    switch (o) {
        case ShotOutcome::ReachesEndpointOnManifold: return "reaches_endpoint_on_manifold";
        case ShotOutcome::CrossesZeroEarly: return "crosses_zero_early";
        default: return "escapes_cone";
    }
}

struct SlopeShot {
    double slope = 0.0;
    ShotOutcome outcome = ShotOutcome::CrossesZeroEarly;
    double end_ratio = std::numeric_limits<double>::quiet_NaN();  // x/(t - a) at the stop
    double t_end = 0.0;
    double x_end = 0.0;
};

struct ScanOptions {
    double delta = 1e-4;
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    double ratio_band = 0.5;       // relative half-width around |lambda_-|
    double bisection_tol = 1e-7;   // slope resolution
    int max_bisection = 80;
};

/// Shooting trichotomy at a saddle: orbits seeded at (a + delta, s delta)
/// and driven toward the saddle either cross x = 0 early, escape the cone,
/// or reach t = a + delta/2 still on the manifold (ratio near lambda_-).
/// The drive toward the saddle is the expanding direction, which is what
/// separates nearby slopes; it runs as forward integration on the flipped
/// system.  Bisection between a crossing and an escaping slope recovers
/// lambda_- without using the eigenvalue.
struct UniquenessScan {
    double saddle_t = 0.0;
    double lambda_minus = 0.0;
    double delta = 0.0;
    std::vector<SlopeShot> shots;
    bool bracket_found = false;
    double bisection_slope = std::numeric_limits<double>::quiet_NaN();
    int bisection_steps = 0;
};

namespace detail {

inline SlopeShot shoot_at_saddle(const AbelSystem& fsys, double a, double lambda_minus,
                                 double slope, const ScanOptions& opts) {
    // Flipped coordinates: saddle at tau = -a, seed at tau0 = -a - delta,
    // x_hat = -slope * delta >= 0, target tau = -a - delta/2.
    SlopeShot shot;
    shot.slope = slope;
    const double delta = opts.delta;
    const double lam = std::abs(lambda_minus);
    const double seed_x = -slope * delta;

    if (!(seed_x > 1e-13 * delta)) {  // zero-slope shots start on the wrong side
        shot.outcome = ShotOutcome::CrossesZeroEarly;
        shot.t_end = a + delta;
        shot.x_end = slope * delta;
        shot.end_ratio = slope;
        return shot;
    }

    StopCondition sc;
    sc.time_target = -a - 0.5 * delta;
    sc.abs_ceiling = 50.0 * std::max(std::abs(slope), std::max(lam, 1e-3)) * delta;
    IntegrateOptions io;
    io.rel_tol = opts.rel_tol;
    io.abs_tol = std::max(1e-300, std::min(opts.abs_tol, 1e-6 * seed_x));

    Trajectory tr = integrate(fsys, {-a - delta, seed_x, 0.0}, sc, io);
    const PlanarState end = tr.stats.final_state;
    shot.t_end = -end.t;
    shot.x_end = -end.x;
    const double dist = -a - end.t;  // > 0 short of the saddle

    switch (tr.stop_reason) {
        case StopReason::ZeroCrossing:
        case StopReason::AbsFloor:
            shot.outcome = ShotOutcome::CrossesZeroEarly;
            break;
        case StopReason::AbsCeiling:
            shot.outcome = ShotOutcome::EscapesCone;
            break;
        case StopReason::TimeTarget: {
            const double rho = end.x / dist;  // manifold arrives with rho = |lambda_-|
            shot.end_ratio = -rho;            // report in original coordinates
            if (std::abs(rho - lam) <= opts.ratio_band * lam)
                shot.outcome = ShotOutcome::ReachesEndpointOnManifold;
            else if (rho > lam)
                shot.outcome = ShotOutcome::EscapesCone;
            else
                shot.outcome = ShotOutcome::CrossesZeroEarly;
            break;
        }
        default:
            shot.outcome = ShotOutcome::EscapesCone;
            break;
    }
    return shot;
}

}  // namespace detail

/// Scan the given entry slopes (all <= 0) at a saddle zero, then bisect
/// between a crossing and an escaping slope.
inline UniquenessScan uniqueness_scan(const AbelSystem& sys, const ZeroOfA& saddle,
                                      std::vector<double> slopes, const ScanOptions& opts = {}) {
    if (saddle.kind != ZeroKind::Saddle)
        throw WrongZeroKind("uniqueness scan needs a saddle zero");
    for (double s : slopes)
        if (s > 0.0) throw std::invalid_argument("entry slopes must be <= 0");
    if (!(opts.delta > 0.0) || opts.delta > 1e-3 * sys.period)
        throw std::invalid_argument("delta must lie in (0, period/1000]");

    UniquenessScan scan;
    scan.saddle_t = saddle.t;
    scan.lambda_minus = saddle.lambda_minus;
    scan.delta = opts.delta;

    const AbelSystem fsys = flip(sys);
    auto shoot = [&](double s) {
        return detail::shoot_at_saddle(fsys, saddle.t, saddle.lambda_minus, s, opts);
    };

    for (double s : slopes) scan.shots.push_back(shoot(s));

    // Bracket: a crossing slope (shallow side) and an escaping slope (steep side).
    double cross = std::numeric_limits<double>::quiet_NaN();
    double escape = std::numeric_limits<double>::quiet_NaN();
    for (const auto& sh : scan.shots) {
        if (sh.outcome == ShotOutcome::CrossesZeroEarly &&
            (!(cross == cross) || sh.slope > cross))
            cross = sh.slope;
        if (sh.outcome == ShotOutcome::EscapesCone && (!(escape == escape) || sh.slope > escape))
            escape = sh.slope;
    }
    if (!(cross == cross)) {
        SlopeShot sh = shoot(0.0);
        if (sh.outcome == ShotOutcome::CrossesZeroEarly) cross = 0.0;
        scan.shots.push_back(sh);
    }
    if (!(escape == escape)) {
        double s = 2.0 * saddle.lambda_minus;
        for (int i = 0; i < 8 && !(escape == escape); ++i, s *= 2.0) {
            SlopeShot sh = shoot(s);
            if (sh.outcome == ShotOutcome::EscapesCone) escape = s;
            scan.shots.push_back(sh);
        }
    }
    if (!(cross == cross) || !(escape == escape)) return scan;

    scan.bracket_found = true;
    double lo = escape, hi = cross;  // lo < lambda_- < hi
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_bisection; ++it) {
        mid = 0.5 * (lo + hi);
        SlopeShot sh = shoot(mid);
        ++scan.bisection_steps;
        if (sh.outcome == ShotOutcome::ReachesEndpointOnManifold) break;
        if (sh.outcome == ShotOutcome::EscapesCone)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < opts.bisection_tol) {
            mid = 0.5 * (lo + hi);
            break;
        }
    }
    scan.bisection_slope = mid;
    return scan;
}

/// Local obstruction survey: foci among the zeros (no sign-definite C^1
/// branch exists through a focus), boundary cases |B^2/4 + A'| < 1e-10, and
/// a short inward arc at the first focus showing the spiral re-crossing x = 0.
struct SharpnessReport {
    std::vector<ZeroOfA> zeros;
    std::vector<std::size_t> focus_indices;
    std::vector<std::size_t> boundary_indices;
    bool obstruction = false;
    std::vector<ArcSample> spiral;
    int spiral_x_sign_changes = 0;
};

inline SharpnessReport sharpness_probe(const AbelSystem& sys, double radius = 1e-3) {
    SharpnessReport rep;
    rep.zeros = find_zeros(sys);
    for (std::size_t i = 0; i < rep.zeros.size(); ++i) {
        if (rep.zeros[i].is_focus) rep.focus_indices.push_back(i);
        if (std::abs(rep.zeros[i].discriminant) < 1e-10) rep.boundary_indices.push_back(i);
    }
    rep.obstruction = !rep.focus_indices.empty();
    if (rep.obstruction) {
        const ZeroOfA& z = rep.zeros[rep.focus_indices.front()];
        const double omega = std::sqrt(-z.discriminant);
        const double span = -2.25 * (2.0 * std::numbers::pi / omega);  // inward: backward in s
        rep.spiral = integrate_arc(sys, {z.t, radius, 0.0}, span);
        for (std::size_t i = 1; i < rep.spiral.size(); ++i)
            if (rep.spiral[i - 1].x * rep.spiral[i].x < 0.0) ++rep.spiral_x_sign_changes;
    }
    return rep;
}

enum class MapStatus { Ok, BlowUp };

inline const char* to_string(MapStatus s) { return s == MapStatus::Ok ? "ok" : "blowup"; }

struct MapPoint {
    double u0 = 0.0;
    double value = 0.0;  // u(T); meaningless under BlowUp
    MapStatus status = MapStatus::Ok;
};

/// Time-T map of the cubic equation u' = A u^3 + B u^2 + C u obtained from
/// the second-kind equation by u = 1/x.  Orbits escaping |u| >= 1e6 (or
/// stalling the integrator) are flagged BlowUp.
inline MapPoint first_kind_map(const AbelSystem& sys, double u0, double rel_tol = 1e-10,
                               double abs_tol = 1e-14) {
    MapPoint p;
    p.u0 = u0;
    const double T = sys.period;
    auto rhs = [&](double t, const detail::State<1>& y, detail::State<1>& dy) {
        const double u = y[0];
        dy[0] = sys.A(t) * u * u * u + sys.B(t) * u * u + sys.C(t) * u;
    };
    detail::State<1> y{u0};
    double t = 0.0;
    double h = std::min(detail::dp45_initial_step<1>(rhs, t, y, rel_tol, abs_tol), T / 16.0);
    detail::State<1> ynew;
    long attempts = 0;
    while (t < T) {
        if (++attempts > 2'000'000 || !(h > 1e-15 * std::max(1.0, t))) {
            p.status = MapStatus::BlowUp;
            return p;
        }
        h = std::min(h, T - t);
        const double err = detail::dp45_step<1>(rhs, t, y, h, ynew, rel_tol, abs_tol);
        const bool finite = std::isfinite(ynew[0]) && std::isfinite(err);
        if (!finite || err > 1.0) {
            h *= finite ? detail::dp45_factor(err) : 0.2;
            continue;
        }
        t += h;
        y = ynew;
        if (std::abs(y[0]) >= 1e6) {
            p.status = MapStatus::BlowUp;
            return p;
        }
        h *= detail::dp45_factor(err);
    }
    p.value = y[0];
    return p;
}

struct FirstKindScan {
    std::vector<MapPoint> points;
    std::vector<double> fixed_points;  // sign-constant fixed points of the map
};

/// Scan the time-T map over a u0 grid (default: log-spaced 1e-3..10, both
/// signs) and locate sign-constant fixed points by bisection on P(u0) - u0.
inline FirstKindScan first_kind_poincare(const AbelSystem& sys, std::vector<double> grid = {},
                                         double rel_tol = 1e-10, double abs_tol = 1e-14) {
    if (grid.empty()) {
        for (int j = 0; j < 25; ++j) {
            const double u = 1e-3 * std::pow(10.0 / 1e-3, double(j) / 24.0);
            grid.push_back(u);
            grid.push_back(-u);
        }
        std::sort(grid.begin(), grid.end());
    }
    FirstKindScan scan;
    for (double u0 : grid) scan.points.push_back(first_kind_map(sys, u0, rel_tol, abs_tol));

    auto g = [&](const MapPoint& p) { return p.value - p.u0; };
    for (std::size_t i = 0; i + 1 < scan.points.size(); ++i) {
        const MapPoint& p = scan.points[i];
        const MapPoint& q = scan.points[i + 1];
        if (p.status != MapStatus::Ok || q.status != MapStatus::Ok) continue;
        if (p.u0 * q.u0 <= 0.0) continue;  // sign-constant solutions only
        if (g(p) == 0.0) {
            scan.fixed_points.push_back(p.u0);
            continue;
        }
        if (g(p) * g(q) >= 0.0) continue;
        double lo = p.u0, hi = q.u0, glo = g(p);
        bool aborted = false;
        for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            MapPoint pm = first_kind_map(sys, mid, rel_tol, abs_tol);
            if (pm.status != MapStatus::Ok) {
                aborted = true;
                break;
            }
            const double gm = pm.value - pm.u0;
            if (gm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((glo > 0.0) == (gm > 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        if (!aborted) scan.fixed_points.push_back(0.5 * (lo + hi));
    }
    return scan;
}

}  // namespace abel
