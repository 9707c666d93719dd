#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "abel/conditions.hpp"
#include "abel/lienard.hpp"

namespace abel {

struct SolveOptions {
    double delta = 1e-4;           // seed offset from the left zero
    double end_offset_frac = 1e-3; // stand-off at the right zero: delta_end = frac * (b - a)
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double slope_tol = 1e-3;       // gluing tolerance against lambda_-
    double richardson_tol = 1e-6;  // |x_mid(delta) - x_mid(delta/2)| bound
    double residual_tol = 1e-7;
    double barrier_slack = 1e-9;
    int residual_grid = 2000;
    int span_grid = 4096;          // caps per-step t advance at (b - a)/span_grid
    long max_steps = 50'000'000;
};

struct SolutionSample {
    double t = 0.0;
    double x = 0.0;
    double xdot = 0.0;
};

struct BarrierCertificate {
    LineBarrier barrier;
    bool ok = false;
    double worst_violation = 0.0;
    std::string label;  // "flat", "slanted", "horizontal"
};

/// One sign-definite C^1 piece of the periodic solution over a sign interval
/// of A, anchored at the interval's zeros.
struct SolutionBranch {
    double a = 0.0;
    double b = 0.0;
    int sign_of_A = 0;
    bool flipped = false;               // built through the time reflection
    bool center_manifold_seed = false;  // entry zero was degenerate
    double seed_offset = 0.0;
    double end_offset = 0.0;
    std::vector<SolutionSample> samples;  // strictly increasing t, spans [a, b]
    double entry_slope = 0.0;             // d x / d t sided limits at the zeros
    double exit_slope = 0.0;
    double mid_t = 0.0;
    double mid_x = 0.0;
    double richardson_delta = std::numeric_limits<double>::quiet_NaN();
    bool cone_ordering_ok = false;  // lambda_-(exit) < alpha < lambda_+(exit)
    std::vector<BarrierCertificate> certificates;
    long steps_accepted = 0;
    long steps_rejected = 0;
};

/// Slope of the slanted barrier line: sqrt(-min A' / (1 + T max|C|)), and 0
/// when min A' >= 0 (constant A; only the flat barrier is informative).
inline double slanted_barrier_slope(double min_Adot, double max_abs_C, double period) {
    if (min_Adot >= 0.0) return 0.0;
    return std::sqrt(-min_Adot / (1.0 + period * max_abs_C));
}

/// Initial condition just inside the interval: on the stable eigendirection
/// for a saddle, on the quasi-static branch x = -A/B for a degenerate zero.
inline PlanarState seed_point(const AbelSystem& sys, const ZeroOfA& zero, double delta) {
    if (!(delta > 0.0) || delta > 1e-3 * sys.period)
        throw std::invalid_argument("delta must lie in (0, period/1000]");
    if (zero.is_focus)
        throw WrongZeroKind("no invariant branch enters a focus");
    const double t0 = zero.t + delta;
    switch (zero.kind) {
        case ZeroKind::Saddle:
            return {t0, zero.lambda_minus * delta, 0.0};
        case ZeroKind::Degenerate: {
            double x = -sys.A(t0) / sys.B(t0);
            const double floor = 1e-18 * delta;
            if (!(x < -floor)) x = -floor;  // keep the seed off the singular line
            return {t0, x, 0.0};
        }
        default:
            throw WrongZeroKind("branches leave an unstable node, none enters it");
    }
}

namespace detail {

struct BranchExtrema {
    double max_abs_A = 0.0;
    double max_abs_C = 0.0;
    double min_abs_B = 0.0;
    double min_Adot = 0.0;
};

inline BranchExtrema branch_extrema(const AbelSystem& sys, int grid = 4096) {
    BranchExtrema e;
    e.max_abs_A = max_abs(sys.A, grid);
    e.max_abs_C = max_abs(sys.C, grid);
    e.min_abs_B = min_abs(sys.B, grid);
    e.min_Adot = global_extremum(sys.A.derivative(), ExtremumKind::Minimum, grid).value;
    return e;
}

}  // namespace detail

/// Barrier certificates for a finished branch, checked sample-by-sample:
/// the flat barrier x = 0, the slanted barrier through the node-side zero,
/// and the horizontal bound |x| <= M.
inline std::vector<BarrierCertificate> barrier_certificates(const AbelSystem& sys,
                                                            const SolutionBranch& branch,
                                                            double slack = 1e-9,
                                                            int grid = 4096) {
    const detail::BranchExtrema e = detail::branch_extrema(sys, grid);
    const double alpha = slanted_barrier_slope(e.min_Adot, e.max_abs_C, sys.period);

    double max_abs_x = 0.0;
    for (const auto& smp : branch.samples) max_abs_x = std::max(max_abs_x, std::abs(smp.x));
    double M;
    if (e.max_abs_C > 0.0)
        M = std::sqrt(e.max_abs_A / e.max_abs_C);
    else if (e.min_abs_B > 0.0)
        M = 2.0 * e.max_abs_A / e.min_abs_B + max_abs_x;
    else
        M = 10.0 * (max_abs_x + 1.0);

    Trajectory synth;
    synth.samples.reserve(branch.samples.size());
    for (const auto& smp : branch.samples) synth.samples.push_back({smp.t, smp.x});

    const bool neg = branch.sign_of_A < 0;  // branch is positive, zeros swap roles
    LineBarrier flat{0.0, 0.0, neg ? BarrierSide::Above : BarrierSide::Below, branch.a, branch.b};
    const double pivot = neg ? branch.a : branch.b;
    LineBarrier slanted{alpha, -alpha * pivot, neg ? BarrierSide::Below : BarrierSide::Above,
                        branch.a, branch.b};
    LineBarrier horizontal{0.0, neg ? M : -M, neg ? BarrierSide::Below : BarrierSide::Above,
                           branch.a, branch.b};

    std::vector<BarrierCertificate> out;
    const char* labels[3] = {"flat", "slanted", "horizontal"};
    const LineBarrier* lines[3] = {&flat, &slanted, &horizontal};
    for (int i = 0; i < 3; ++i) {
        BarrierCheck chk = barrier_check(synth, *lines[i], slack);
        out.push_back(BarrierCertificate{*lines[i], chk.ok, chk.worst_violation, labels[i]});
    }
    return out;
}

/// Construct the branch over one sign interval.  Negative intervals are
/// handled through the time reflection, so there is a single code path: the
/// working interval always has A > 0 and x < 0.  Integration runs seed ->
/// midpoint -> (b - delta_end); a rerun with delta/2 gives the Richardson
/// seed-sensitivity estimate at the midpoint.
inline SolutionBranch solve_interval(const AbelSystem& sys, const SignInterval& iv,
                                     const SolveOptions& opts = {}) {
    if (iv.sign_of_A == 0) throw std::invalid_argument("interval has no sign");
    const bool flipped = iv.sign_of_A < 0;
    const AbelSystem wsys = flipped ? flip(sys) : sys;
    // Reflection sends [a, b] to [-b, -a]; adding whole periods moves the
    // working window into [0, period) so a reflection-symmetric system solves
    // both sides through bitwise-identical integrations.
    const double shift = flipped ? (iv.b <= sys.period ? sys.period : 2.0 * sys.period) : 0.0;
    const double wa = flipped ? shift - iv.b : iv.a;
    const double wb = flipped ? shift - iv.a : iv.b;
    const double len = wb - wa;
    if (!(len > 0.0)) throw std::invalid_argument("empty interval");

    const ZeroOfA zl = classify_zero(wsys, wa);
    const ZeroOfA zr = classify_zero(wsys, wb);
    if (zl.kind == ZeroKind::UnstableNode)
        throw WrongZeroKind("interval entry zero is an unstable node");

    SolutionBranch br;
    br.a = iv.a;
    br.b = iv.b;
    br.sign_of_A = iv.sign_of_A;
    br.flipped = flipped;
    br.center_manifold_seed = zl.kind == ZeroKind::Degenerate;
    br.seed_offset = opts.delta;
    br.end_offset = opts.end_offset_frac * len;

    const detail::BranchExtrema ex = detail::branch_extrema(wsys);
    double m_est;
    if (ex.max_abs_C > 0.0)
        m_est = std::sqrt(ex.max_abs_A / ex.max_abs_C);
    else if (ex.min_abs_B > 0.0)
        m_est = ex.max_abs_A / ex.min_abs_B;
    else
        m_est = 1.0;

    auto run_leg = [&](PlanarState from, double target) {
        StopCondition sc;
        sc.time_target = target;
        sc.abs_floor = std::min(1e-12, 0.1 * std::abs(from.x));
        sc.abs_ceiling = 10.0 * std::max({m_est, 1.0, std::abs(from.x)});
        IntegrateOptions io;
        io.rel_tol = opts.rel_tol;
        io.abs_tol = opts.abs_tol;
        io.max_dt = len / double(opts.span_grid);
        io.max_steps = opts.max_steps;
        Trajectory tr = integrate(wsys, from, sc, io);
        if (tr.stop_reason != StopReason::TimeTarget)
            throw BranchEscape(std::string("branch stopped by ") + to_string(tr.stop_reason) +
                               " at t = " + std::to_string(tr.stats.final_state.t) +
                               ", x = " + std::to_string(tr.stats.final_state.x));
        return tr;
    };

    const PlanarState seed = seed_point(wsys, zl, opts.delta);
    const double mid = wa + 0.5 * len;
    const double t_end = wb - br.end_offset;

    Trajectory leg1 = run_leg(seed, mid);
    const PlanarState mid_state = leg1.stats.final_state;
    Trajectory leg2 = run_leg({mid_state.t, mid_state.x, 0.0}, t_end);

    br.steps_accepted = leg1.stats.accepted + leg2.stats.accepted;
    br.steps_rejected = leg1.stats.rejected + leg2.stats.rejected;

    // Seed-offset sensitivity at the midpoint.
    {
        const PlanarState seed_half = seed_point(wsys, zl, 0.5 * opts.delta);
        Trajectory leg1h = run_leg(seed_half, mid);
        br.richardson_delta = std::abs(mid_state.x - leg1h.stats.final_state.x);
        br.steps_accepted += leg1h.stats.accepted;
        br.steps_rejected += leg1h.stats.rejected;
    }

    // Sided slope estimates: averages of x/(t - zero) over the sample windows
    // [delta, 5 delta] past the entry and [delta_end, 10 delta_end] before the exit.
    double entry_acc = 0.0;
    long entry_cnt = 0;
    for (const auto& smp : leg1.samples) {
        const double tau = smp.t - wa;
        if (tau >= opts.delta && tau <= 5.0 * opts.delta) {
            entry_acc += smp.x / tau;
            ++entry_cnt;
        }
    }
    double entry = entry_cnt ? entry_acc / double(entry_cnt) : seed.x / opts.delta;

    double exit_acc = 0.0;
    long exit_cnt = 0;
    for (const auto& smp : leg2.samples) {
        const double gap = wb - smp.t;
        if (gap >= br.end_offset && gap <= 10.0 * br.end_offset) {
            exit_acc += smp.x / (smp.t - wb);
            ++exit_cnt;
        }
    }
    const auto& last = leg2.samples.back();
    double exit = exit_cnt ? exit_acc / double(exit_cnt) : last.x / (last.t - wb);

    // Assemble in working coordinates, closing both ends with linear fills
    // that meet the zeros exactly.
    std::vector<SolutionSample> ws;
    ws.reserve(leg1.samples.size() + leg2.samples.size() + 2);
    ws.push_back({wa, 0.0, seed.x / opts.delta});
    for (const auto& smp : leg1.samples) ws.push_back({smp.t, smp.x, slope_field(wsys, smp.t, smp.x)});
    for (std::size_t i = 1; i < leg2.samples.size(); ++i) {
        const auto& smp = leg2.samples[i];
        ws.push_back({smp.t, smp.x, slope_field(wsys, smp.t, smp.x)});
    }
    ws.push_back({wb, 0.0, last.x / (last.t - wb)});

    double wmid_t = mid_state.t, wmid_x = mid_state.x;

    if (flipped) {
        std::reverse(ws.begin(), ws.end());
        for (auto& smp : ws) {
            smp.t = shift - smp.t;
            smp.x = -smp.x;  // slope dx/dt is invariant under (t, x) -> (shift - t, -x)
        }
        // The closure points must meet the zeros exactly; shift - t rounds.
        ws.front().t = iv.a;
        ws.back().t = iv.b;
        std::swap(entry, exit);
        wmid_t = shift - wmid_t;
        wmid_x = -wmid_x;
    }

    br.samples = std::move(ws);
    br.entry_slope = entry;
    br.exit_slope = exit;
    br.mid_t = wmid_t;
    br.mid_x = wmid_x;

    const double alpha = slanted_barrier_slope(ex.min_Adot, ex.max_abs_C, sys.period);
    br.cone_ordering_ok = !zr.is_focus && zr.lambda_minus < alpha && alpha < zr.lambda_plus;
    br.certificates = barrier_certificates(sys, br, opts.barrier_slack);
    return br;
}

/// C^1 gluing record at one zero: both sided slopes must match the target
/// (lambda_- for simple zeros, 0 for degenerate ones).
struct ZeroJoin {
    double t = 0.0;
    ZeroKind kind = ZeroKind::Saddle;
    double target_slope = 0.0;
    double left_slope = 0.0;
    double right_slope = 0.0;
};

/// Assembled T-periodic solution: piecewise branches between zeros, exact 0
/// on the zero set, linear interpolation inside branch samples.
struct PeriodicSolution {
    double period = 0.0;
    double window_start = 0.0;
    std::vector<ZeroOfA> zeros;  // classification data in the B > 0 orientation
    std::vector<SolutionBranch> branches;
    std::vector<ZeroJoin> joins;
    bool x_negated = false;  // true when reported for a system with B < 0

    double eval(double t) const { return interp(t, false); }
    double slope(double t) const { return interp(t, true); }
    double operator()(double t) const { return eval(t); }

  private:
    double interp(double t, bool want_slope) const {
        if (branches.empty()) return 0.0;
        double tau = t - window_start;
        tau -= period * std::floor(tau / period);
        if (tau >= period) tau -= period;
        tau += window_start;
        for (const auto& br : branches) {
            if (tau < br.a || tau > br.b) continue;
            const auto& v = br.samples;
            std::size_t lo = 0, hi = v.size() - 1;
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                if (v[mid].t <= tau)
                    lo = mid;
                else
                    hi = mid;
            }
            const double span = v[hi].t - v[lo].t;
            const double w = span > 0.0 ? (tau - v[lo].t) / span : 0.0;
            return want_slope ? v[lo].xdot + w * (v[hi].xdot - v[lo].xdot)
                              : v[lo].x + w * (v[hi].x - v[lo].x);
        }
        return 0.0;  // on the zero set or an identically-zero stretch
    }
};

/// Glue branches at the zeros, enforcing the C^1 slope targets.
inline PeriodicSolution assemble(const AbelSystem& sys, const std::vector<ZeroOfA>& zeros,
                                 std::vector<SolutionBranch> branches, double slope_tol = 1e-3) {
    if (zeros.empty()) throw NoZeros("cannot assemble a solution without zeros of A");
    std::sort(branches.begin(), branches.end(),
              [](const SolutionBranch& u, const SolutionBranch& v) { return u.a < v.a; });

    PeriodicSolution sol;
    sol.period = sys.period;
    sol.window_start = zeros.front().t;
    sol.zeros = zeros;

    const double T = sys.period;
    auto cyclic_near = [&](double u, double v) {
        double d = std::abs(u - v);
        d = std::min(d, std::abs(d - T));
        return d < 1e-9 * T;
    };

    for (const auto& z : zeros) {
        ZeroJoin j;
        j.t = z.t;
        j.kind = z.kind;
        j.target_slope = z.kind == ZeroKind::Degenerate ? 0.0 : z.lambda_minus;
        j.left_slope = 0.0;   // sides without a branch carry the zero solution
        j.right_slope = 0.0;
        for (const auto& br : branches) {
            if (cyclic_near(br.a, z.t)) j.right_slope = br.entry_slope;
            if (cyclic_near(br.b, z.t)) j.left_slope = br.exit_slope;
        }
        if (std::abs(j.left_slope - j.target_slope) > slope_tol ||
            std::abs(j.right_slope - j.target_slope) > slope_tol)
            throw GluingMismatch("slopes at t = " + std::to_string(z.t) + " of " +
                                 std::to_string(j.left_slope) + " (left) / " +
                                 std::to_string(j.right_slope) + " (right) miss the target " +
                                 std::to_string(j.target_slope) + " by more than " +
                                 std::to_string(slope_tol));
        sol.joins.push_back(j);
    }
    sol.branches = std::move(branches);
    return sol;
}

/// Max defect |x x' - A - B x - C x^2| over a uniform grid, excluding points
/// within 1e-6 T of the zero set (where x and x' vanish together).
inline double residual(const AbelSystem& sys, const PeriodicSolution& sol, int grid = 2000) {
    const double T = sys.period;
    double worst = 0.0;
    for (int j = 0; j < grid; ++j) {
        const double t = sol.window_start + T * double(j) / double(grid);
        bool near_zero = false;
        for (const auto& z : sol.zeros) {
            double d = std::abs(t - z.t);
            d = std::fmod(d, T);
            d = std::min(d, T - d);
            if (d < 1e-6 * T) {
                near_zero = true;
                break;
            }
        }
        if (near_zero) continue;
        const double x = sol.eval(t);
        const double xd = sol.slope(t);
        const double defect = std::abs(x * xd - sys.A(t) - sys.B(t) * x - sys.C(t) * x * x);
        worst = std::max(worst, defect);
    }
    return worst;
}

/// Flip the reported sign of the solution (for systems given with B < 0).
inline PeriodicSolution negate_solution(PeriodicSolution s) {
    s.x_negated = !s.x_negated;
    for (auto& br : s.branches) {
        for (auto& smp : br.samples) {
            smp.x = -smp.x;
            smp.xdot = -smp.xdot;
        }
        br.entry_slope = -br.entry_slope;
        br.exit_slope = -br.exit_slope;
        br.mid_x = -br.mid_x;
        for (auto& cert : br.certificates) {
            cert.barrier.m = -cert.barrier.m;
            cert.barrier.n = -cert.barrier.n;
            cert.barrier.side =
                cert.barrier.side == BarrierSide::Above ? BarrierSide::Below : BarrierSide::Above;
        }
    }
    for (auto& j : s.joins) {
        j.target_slope = -j.target_slope;
        j.left_slope = -j.left_slope;
        j.right_slope = -j.right_slope;
    }
    return s;
}

struct SolveResult {
    ConditionReport report;
    bool b_negated = false;  // system was reoriented to B > 0 internally
    std::vector<ZeroOfA> zeros;
    std::vector<SignInterval> intervals;
    PeriodicSolution solution;  // in the original x orientation
    double residual_value = 0.0;
    double max_richardson = 0.0;
    bool barriers_ok = true;
    bool certificates_ok = false;
};

/// Full pipeline: conditions, zeros, per-interval branches, gluing, defect.
/// Requires every zero to be non-focal (throws WrongZeroKind otherwise);
/// existence-condition failure does not stop the construction here, callers
/// gate on report.holds_main themselves.
inline SolveResult solve_periodic(const AbelSystem& sys, const SolveOptions& opts = {}) {
    SolveResult res;
    res.report = analyze_conditions(sys);
    res.b_negated = res.report.B_sign == BSign::Negative;
    const AbelSystem nsys = res.b_negated ? AbelSystem(sys.A, sys.B.negated(), sys.C) : sys;

    res.zeros = find_zeros(nsys);
    for (const auto& z : res.zeros)
        if (z.is_focus)
            throw WrongZeroKind("zero at t = " + std::to_string(z.t) +
                                " is a focus; no sign-definite C^1 branch passes through it");

    res.intervals = sign_intervals(nsys, res.zeros);
    std::vector<SolutionBranch> branches;
    branches.reserve(res.intervals.size());
    for (const auto& iv : res.intervals) branches.push_back(solve_interval(nsys, iv, opts));

    PeriodicSolution sol = assemble(nsys, res.zeros, std::move(branches), opts.slope_tol);
    res.residual_value = residual(nsys, sol, opts.residual_grid);

    res.max_richardson = 0.0;
    for (const auto& br : sol.branches) {
        res.max_richardson = std::max(res.max_richardson, br.richardson_delta);
        for (const auto& cert : br.certificates) res.barriers_ok = res.barriers_ok && cert.ok;
    }
    res.certificates_ok = res.barriers_ok && res.residual_value <= opts.residual_tol &&
                          res.max_richardson <= opts.richardson_tol;

    res.solution = res.b_negated ? negate_solution(std::move(sol)) : std::move(sol);
    return res;
}

}  // namespace abel
