#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "abel/analysis.hpp"
#include "abel/conditions.hpp"
#include "abel/config.hpp"
#include "abel/construction.hpp"

namespace abel {

/// Shortest round-trip decimal form (17 significant digits).
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const char* to_string(BSign s) { return s == BSign::Positive ? "positive" : "negative"; }

inline void write_condition_report_text(std::ostream& os, const ConditionReport& r) {
    os << "period = " << g17(r.period) << "\n";
    os << "min_abs_B_sq = " << g17(r.min_abs_B_sq) << "\n";
    os << "min_Adot = " << g17(r.min_Adot) << "\n";
    os << "max_abs_A = " << g17(r.max_abs_A) << "\n";
    os << "max_abs_C = " << g17(r.max_abs_C) << "\n";
    os << "rhs_main = " << g17(r.rhs_main) << "\n";
    os << "margin_main = " << g17(r.margin_main) << "\n";
    os << "holds_main = " << (r.holds_main ? 1 : 0) << "\n";
    os << "rhs_secondary = " << g17(r.rhs_secondary) << "\n";
    os << "holds_secondary = " << (r.holds_secondary ? 1 : 0) << "\n";
    os << "B_sign = " << to_string(r.B_sign) << "\n";
    os << "zero_mean_A = " << (r.zero_mean_A ? 1 : 0) << "\n";
}

// Column order is part of the interface; keep it stable.
inline void write_condition_report_csv(std::ostream& os, const ConditionReport& r) {
    os << "min_abs_B_sq,min_Adot,max_abs_A,max_abs_C,rhs_main,margin_main,holds_main,"
          "holds_secondary,zero_mean_A\n";
    os << g17(r.min_abs_B_sq) << ',' << g17(r.min_Adot) << ',' << g17(r.max_abs_A) << ','
       << g17(r.max_abs_C) << ',' << g17(r.rhs_main) << ',' << g17(r.margin_main) << ','
       << (r.holds_main ? 1 : 0) << ',' << (r.holds_secondary ? 1 : 0) << ','
       << (r.zero_mean_A ? 1 : 0) << "\n";
}

inline void write_zeros_csv(std::ostream& os, const std::vector<ZeroOfA>& zeros) {
    os << "t,adot,kind,discriminant,is_focus,lambda_minus,lambda_plus\n";
    for (const auto& z : zeros)
        os << g17(z.t) << ',' << g17(z.adot) << ',' << to_string(z.kind) << ','
           << g17(z.discriminant) << ',' << (z.is_focus ? 1 : 0) << ',' << g17(z.lambda_minus)
           << ',' << g17(z.lambda_plus) << "\n";
}

/// Uniform sampling of the assembled solution over [0, T): t, x, xdot rows.
inline void write_solution_csv(std::ostream& os, const PeriodicSolution& sol, int grid) {
    os << "t,x,xdot\n";
    for (int j = 0; j < grid; ++j) {
        const double t = sol.period * double(j) / double(grid);
        os << g17(t) << ',' << g17(sol.eval(t)) << ',' << g17(sol.slope(t)) << "\n";
    }
}

inline std::vector<SolutionSample> read_solution_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("solution csv: empty file");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "t,x,xdot") throw Error("solution csv: expected header 't,x,xdot'");
    std::vector<SolutionSample> rows;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        SolutionSample s;
        const char* p = line.c_str();
        char* end = nullptr;
        s.t = std::strtod(p, &end);
        if (end == p || *end != ',') throw Error("solution csv: bad row at line " + std::to_string(line_no));
        p = end + 1;
        s.x = std::strtod(p, &end);
        if (end == p || *end != ',') throw Error("solution csv: bad row at line " + std::to_string(line_no));
        p = end + 1;
        s.xdot = std::strtod(p, &end);
        if (end == p || *end != '\0') throw Error("solution csv: bad row at line " + std::to_string(line_no));
        rows.push_back(s);
    }
    if (rows.empty()) throw Error("solution csv: no data rows");
    return rows;
}

inline void write_branch_report(std::ostream& os, const SolutionBranch& br) {
    os << "branch [" << g17(br.a) << ", " << g17(br.b) << "] sign_of_A = " << br.sign_of_A
       << (br.flipped ? " (built via time reflection)" : "") << "\n";
    os << "  seed_offset = " << g17(br.seed_offset)
       << (br.center_manifold_seed ? " (center-manifold seed x = -A/B)" : " (eigendirection seed)")
       << "\n";
    os << "  entry_slope = " << g17(br.entry_slope) << ", exit_slope = " << g17(br.exit_slope)
       << "\n";
    os << "  midpoint x(" << g17(br.mid_t) << ") = " << g17(br.mid_x) << "\n";
    os << "  seed-halving shift at midpoint = " << g17(br.richardson_delta) << "\n";
    os << "  cone_ordering_ok = " << (br.cone_ordering_ok ? 1 : 0) << ", steps = "
       << br.steps_accepted << " accepted / " << br.steps_rejected << " rejected\n";
    for (const auto& cert : br.certificates) {
        os << "  barrier " << cert.label << ": x " << (cert.barrier.side == BarrierSide::Above
                                                           ? ">="
                                                           : "<=")
           << " " << g17(cert.barrier.m) << " * t + " << g17(cert.barrier.n) << " over ["
           << g17(cert.barrier.t_begin) << ", " << g17(cert.barrier.t_end) << "]: "
           << (cert.ok ? "ok" : "VIOLATED") << " (worst penetration " << g17(cert.worst_violation)
           << ")\n";
    }
}

inline void write_solution_report(std::ostream& os, const SolveResult& res) {
    os << "existence condition: min|B|^2 = " << g17(res.report.min_abs_B_sq) << " vs rhs "
       << g17(res.report.rhs_main) << " -> " << (res.report.holds_main ? "holds" : "FAILS")
       << "\n";
    if (res.b_negated)
        os << "note: B < 0; solved with x -> -x and reported in the original orientation\n";
    os << "zeros of A:\n";
    for (const auto& z : res.zeros)
        os << "  t = " << g17(z.t) << "  kind = " << to_string(z.kind)
           << "  adot = " << g17(z.adot) << "  lambda_minus = " << g17(z.lambda_minus)
           << "  lambda_plus = " << g17(z.lambda_plus) << "\n";
    os << "gluing at the zeros (target = lambda_minus, 0 for degenerate):\n";
    for (const auto& j : res.solution.joins)
        os << "  t = " << g17(j.t) << "  target = " << g17(j.target_slope) << "  left = "
           << g17(j.left_slope) << "  right = " << g17(j.right_slope) << "\n";
    for (const auto& br : res.solution.branches) write_branch_report(os, br);
    os << "residual = " << g17(res.residual_value) << "\n";
    os << "max seed-halving shift = " << g17(res.max_richardson) << "\n";
    os << "certificates_ok = " << (res.certificates_ok ? 1 : 0) << "\n";
}

inline void write_witness_csv(std::ostream& os, const InstabilityWitness& w,
                              const PeriodicSolution& sol) {
    os << "t,x,x_star,excess\n";
    for (const auto& smp : w.trajectory.samples) {
        const double xs = sol.eval(smp.t);
        os << g17(smp.t) << ',' << g17(smp.x) << ',' << g17(xs) << ','
           << g17(std::abs(smp.x - xs) - std::abs(xs)) << "\n";
    }
}

inline void write_uniqueness_csv(std::ostream& os, const UniquenessScan& scan) {
    os << "slope,outcome,end_ratio,t_end,x_end\n";
    for (const auto& sh : scan.shots)
        os << g17(sh.slope) << ',' << to_string(sh.outcome) << ',' << g17(sh.end_ratio) << ','
           << g17(sh.t_end) << ',' << g17(sh.x_end) << "\n";
}

inline void write_poincare_csv(std::ostream& os, const FirstKindScan& scan) {
    os << "u0,value,status\n";
    for (const auto& p : scan.points)
        os << g17(p.u0) << ',' << g17(p.value) << ',' << to_string(p.status) << "\n";
}

inline void write_arc_csv(std::ostream& os, const std::vector<ArcSample>& arc) {
    os << "s,t,x\n";
    for (const auto& a : arc) os << g17(a.s) << ',' << g17(a.t) << ',' << g17(a.x) << "\n";
}

/// Emit a system back in the config grammar (used by the normalizer).
inline void write_system_config(std::ostream& os, const AbelSystem& sys,
                                const SolverConfig* solver = nullptr) {
    os << "period = " << g17(sys.period) << "\n";
    auto coeff = [&](const char* name, const PeriodicCoefficient& f) {
        os << '[' << name << "] mean = " << g17(f.mean) << " cos = [";
        for (std::size_t k = 0; k < f.cos_coeffs.size(); ++k)
            os << (k ? ", " : "") << g17(f.cos_coeffs[k]);
        os << "] sin = [";
        for (std::size_t k = 0; k < f.sin_coeffs.size(); ++k)
            os << (k ? ", " : "") << g17(f.sin_coeffs[k]);
        os << "]\n";
    };
    coeff("A", sys.A);
    coeff("B", sys.B);
    coeff("C", sys.C);
    if (solver) {
        os << "[solver] rel_tol = " << g17(solver->rel_tol) << " abs_tol = " << g17(solver->abs_tol)
           << " delta = " << g17(solver->delta) << " grid = " << solver->grid << "\n";
    }
}

}  // namespace abel
