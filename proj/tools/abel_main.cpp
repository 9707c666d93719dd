// Command-line front end: condition checks, zero classification, solution
// construction and verification, instability/uniqueness/sharpness probes,
// the first-kind return map, and general-form normalization.
//
// Exit codes: 0 ok, 1 usage/config error, 2 existence condition fails (or A
// has no zeros), 3 a zero is a focus, 4 a numeric certificate failed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abel/abel.hpp"

namespace fs = std::filesystem;

namespace {

struct Cmd {
    std::string config_path;
    std::string out_dir = ".";
    std::string solution_path;  // verify only
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw abel::Error("cannot write " + p.string());
    return os;
}

struct Problem {
    abel::ProblemConfig cfg;
    std::optional<abel::AbelSystem> sys;  // as given (general form already reduced)
    bool from_general = false;
    double normalize_residual = 0.0;
};

Problem load_problem(const std::string& path) {
    Problem p;
    p.cfg = abel::load_config(path);
    if (p.cfg.normal) {
        p.sys = *p.cfg.normal;
    } else {
        abel::NormalizeResult nr = abel::normalize(*p.cfg.general, p.cfg.solver.harmonics);
        p.sys = std::move(nr.system);
        p.from_general = true;
        p.normalize_residual = nr.projection_residual;
    }
    return p;
}

abel::SolveOptions make_options(const abel::SolverConfig& sv) {
    abel::SolveOptions o;
    o.delta = sv.delta;
    o.rel_tol = sv.rel_tol;
    o.abs_tol = sv.abs_tol;
    o.residual_grid = sv.grid;
    o.residual_tol = sv.residual_tol;
    o.slope_tol = sv.slope_tol;
    return o;
}

void note_general(const Problem& p) {
    if (p.from_general)
        std::cout << "reduced general form to leading-normal form (projection residual "
                  << abel::g17(p.normalize_residual) << ")\n";
}

int run_check(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const abel::ConditionReport r = abel::analyze_conditions(*p.sys);
    {
        auto os = open_out(cmd.out_dir, "report.txt");
        abel::write_condition_report_text(os, r);
    }
    {
        auto os = open_out(cmd.out_dir, "check.csv");
        abel::write_condition_report_csv(os, r);
    }
    abel::write_condition_report_text(std::cout, r);
    std::cout << (r.holds_main ? "existence condition holds\n" : "existence condition FAILS\n");
    return r.holds_main ? 0 : 2;
}

int run_zeros(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const abel::AbelSystem nsys = abel::with_positive_B(*p.sys);
    const auto zeros = abel::find_zeros(nsys);
    {
        auto os = open_out(cmd.out_dir, "zeros.csv");
        abel::write_zeros_csv(os, zeros);
    }
    abel::write_zeros_csv(std::cout, zeros);
    return 0;
}

// Shared head of solve/stability/uniqueness: gate on the existence condition
// and on focal zeros before construction.
int gate_or_zero(const Problem& p, const abel::AbelSystem& nsys,
                 std::vector<abel::ZeroOfA>& zeros, const Cmd& cmd) {
    const abel::ConditionReport r = abel::analyze_conditions(*p.sys);
    if (!r.holds_main) {
        auto os = open_out(cmd.out_dir, "report.txt");
        abel::write_condition_report_text(os, r);
        std::cout << "existence condition FAILS: min|B|^2 = " << abel::g17(r.min_abs_B_sq)
                  << " <= " << abel::g17(r.rhs_main) << "\n";
        return 2;
    }
    zeros = abel::find_zeros(nsys);
    for (const auto& z : zeros) {
        if (z.is_focus) {
            std::cout << "zero at t = " << abel::g17(z.t)
                      << " is a focus (discriminant = " << abel::g17(z.discriminant)
                      << "); no sign-definite branch exists\n";
            return 3;
        }
    }
    return 0;
}

int run_solve(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const abel::AbelSystem nsys = abel::with_positive_B(*p.sys);
    std::vector<abel::ZeroOfA> zeros;
    if (int rc = gate_or_zero(p, nsys, zeros, cmd)) return rc;

    const abel::SolveResult res = abel::solve_periodic(*p.sys, make_options(p.cfg.solver));
    {
        auto os = open_out(cmd.out_dir, "solution.csv");
        abel::write_solution_csv(os, res.solution, p.cfg.solver.grid);
    }
    {
        auto os = open_out(cmd.out_dir, "solution_report.txt");
        abel::write_solution_report(os, res);
    }
    std::cout << "zeros: " << res.zeros.size() << ", branches: " << res.solution.branches.size()
              << ", residual = " << abel::g17(res.residual_value)
              << ", max seed-halving shift = " << abel::g17(res.max_richardson) << "\n";
    std::cout << "wrote solution.csv (" << p.cfg.solver.grid << " rows) and solution_report.txt\n";
    std::cout << (res.certificates_ok ? "certificates ok\n" : "certificates FAILED\n");
    return res.certificates_ok ? 0 : 4;
}

double cyclic_dist(double u, double v, double T) {
    double d = std::fmod(std::abs(u - v), T);
    return std::min(d, T - d);
}

int run_verify(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const std::string sol_path = cmd.solution_path.empty()
                                     ? (fs::path(cmd.out_dir) / "solution.csv").string()
                                     : cmd.solution_path;
    std::ifstream in(sol_path, std::ios::binary);
    if (!in) throw abel::Error("cannot open " + sol_path);
    std::vector<abel::SolutionSample> rows = abel::read_solution_csv(in);

    const double T = p.sys->period;
    const abel::SolverConfig& sv = p.cfg.solver;
    bool negated = false;
    const abel::AbelSystem nsys = abel::with_positive_B(*p.sys, &negated);
    if (negated)
        for (auto& r : rows) {
            r.x = -r.x;
            r.xdot = -r.xdot;
        }
    const auto zeros = abel::find_zeros(nsys);
    const auto intervals = abel::sign_intervals(nsys, zeros);

    bool ok = true;
    auto report = [&](const char* name, bool pass, const std::string& detail) {
        std::cout << (pass ? "[pass] " : "[FAIL] ") << name << ": " << detail << "\n";
        ok = ok && pass;
    };

    // Grid sanity: strictly ascending within [0, T).
    bool ascending = !rows.empty() && rows.front().t >= 0.0 && rows.back().t < T;
    for (std::size_t i = 1; i < rows.size(); ++i)
        ascending = ascending && rows[i].t > rows[i - 1].t;
    report("grid", ascending, std::to_string(rows.size()) + " rows over [0, T)");

    // Residual of the stored samples against the equation.
    double worst_res = 0.0;
    for (const auto& r : rows) {
        bool near = false;
        for (const auto& z : zeros)
            if (cyclic_dist(r.t, z.t, T) < 1e-6 * T) near = true;
        if (near) continue;
        const double defect =
            std::abs(r.x * r.xdot - nsys.A(r.t) - nsys.B(r.t) * r.x - nsys.C(r.t) * r.x * r.x);
        worst_res = std::max(worst_res, defect);
    }
    report("residual", worst_res <= sv.residual_tol,
           abel::g17(worst_res) + " <= " + abel::g17(sv.residual_tol));

    // Sign pattern: x has the sign of -A away from the zero set.
    long sign_bad = 0;
    for (const auto& r : rows) {
        const double a = nsys.A(r.t);
        if (std::abs(a) < 1e-8 || std::abs(r.x) < 1e-8) continue;
        if ((a > 0.0) == (r.x > 0.0)) ++sign_bad;
    }
    report("sign", sign_bad == 0, std::to_string(sign_bad) + " samples with sign(x) != sign(-A)");

    // Sided slopes at each zero from the stored samples.
    bool slopes_ok = true;
    std::string slope_detail;
    for (const auto& z : zeros) {
        const double target = z.kind == abel::ZeroKind::Degenerate ? 0.0 : z.lambda_minus;
        const double window = std::max(0.02 * T, 3.0 * T / double(rows.size()));
        for (int side = -1; side <= 1; side += 2) {
            // Least-squares intercept of x/(t - z) against (t - z).
            double sw = 0.0, sd = 0.0, sdd = 0.0, sr = 0.0, sdr = 0.0;
            for (const auto& r : rows) {
                double d = r.t - z.t;
                d -= T * std::round(d / T);
                if (side < 0 ? (d >= -window && d < -1e-9 * T) : (d > 1e-9 * T && d <= window))
                    ;
                else
                    continue;
                const double ratio = r.x / d;
                sw += 1.0;
                sd += d;
                sdd += d * d;
                sr += ratio;
                sdr += d * ratio;
            }
            if (sw < 2.0) continue;
            const double det = sw * sdd - sd * sd;
            const double est = det != 0.0 ? (sr * sdd - sd * sdr) / det : sr / sw;
            if (std::abs(est - target) > sv.slope_tol) {
                slopes_ok = false;
                slope_detail += " t=" + abel::g17(z.t) + (side < 0 ? " left " : " right ") +
                                abel::g17(est) + " vs " + abel::g17(target);
            }
        }
    }
    report("slopes", slopes_ok,
           slopes_ok ? "sided slopes match lambda_minus targets" : slope_detail);

    // Barriers: slanted cone and horizontal bound, per interval.
    const double min_Adot =
        abel::global_extremum(nsys.A.derivative(), abel::ExtremumKind::Minimum).value;
    const double max_A = abel::max_abs(nsys.A);
    const double max_C = abel::max_abs(nsys.C);
    const double min_B = abel::min_abs(nsys.B);
    const double alpha = abel::slanted_barrier_slope(min_Adot, max_C, T);
    double max_x = 0.0;
    for (const auto& r : rows) max_x = std::max(max_x, std::abs(r.x));
    const double M = max_C > 0.0 ? std::sqrt(max_A / max_C)
                                 : (min_B > 0.0 ? 2.0 * max_A / min_B + max_x : max_x + 1.0);
    double worst_barrier = 0.0;
    for (const auto& iv : intervals) {
        for (const auto& r : rows) {
            double t = r.t;
            if (t < iv.a) t += T;  // wrap interval
            if (t < iv.a || t > iv.b) continue;
            double pen;
            if (iv.sign_of_A > 0)
                pen = std::max(r.x - 0.0, std::max(alpha * (t - iv.b) - r.x, -M - r.x));
            else
                pen = std::max(0.0 - r.x, std::max(r.x - alpha * (t - iv.a), r.x - M));
            worst_barrier = std::max(worst_barrier, pen);
        }
    }
    report("barriers", worst_barrier <= 1e-9,
           "worst penetration " + abel::g17(worst_barrier) + " (alpha = " + abel::g17(alpha) +
               ", M = " + abel::g17(M) + ")");

    std::cout << (ok ? "verification ok\n" : "verification FAILED\n");
    return ok ? 0 : 4;
}

int run_stability(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const abel::AbelSystem nsys = abel::with_positive_B(*p.sys);
    std::vector<abel::ZeroOfA> zeros;
    if (int rc = gate_or_zero(p, nsys, zeros, cmd)) return rc;

    abel::SolveResult res = abel::solve_periodic(*p.sys, make_options(p.cfg.solver));
    const abel::PeriodicSolution nsol =
        res.b_negated ? abel::negate_solution(res.solution) : res.solution;

    const auto intervals = abel::sign_intervals(nsys, res.zeros);
    const abel::SignInterval* pos = nullptr;
    for (const auto& iv : intervals)
        if (iv.sign_of_A > 0) {
            pos = &iv;
            break;
        }
    if (!pos) {
        std::cout << "no positive-A interval; instability witness not applicable\n";
        return 0;
    }

    auto report_os = open_out(cmd.out_dir, "stability_report.txt");
    bool all_ok = true;
    int idx = 0;
    for (double x_a : p.cfg.analysis.x_a) {
        const abel::InstabilityWitness w = abel::instability_witness(nsys, nsol, *pos, x_a);
        {
            auto os = open_out(cmd.out_dir, "witness_" + std::to_string(idx) + ".csv");
            abel::write_witness_csv(os, w, nsol);
        }
        const std::string line =
            "x_a = " + abel::g17(x_a) + ": separation " + (w.separation_ok ? "ok" : "FAILED") +
            ", min excess = " + abel::g17(w.min_excess) +
            ", gate margin = " + abel::g17(w.min_gate_margin) + ", " +
            std::to_string(w.trajectory.samples.size()) + " samples";
        std::cout << line << "\n";
        report_os << line << "\n";
        all_ok = all_ok && w.separation_ok;
        ++idx;
    }
    std::cout << (all_ok ? "instability witnesses ok\n" : "instability witnesses FAILED\n");
    return all_ok ? 0 : 4;
}

int run_uniqueness(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const abel::AbelSystem nsys = abel::with_positive_B(*p.sys);
    std::vector<abel::ZeroOfA> zeros;
    if (int rc = gate_or_zero(p, nsys, zeros, cmd)) return rc;

    const abel::ZeroOfA* saddle = nullptr;
    for (const auto& z : zeros)
        if (z.kind == abel::ZeroKind::Saddle) {
            saddle = &z;
            break;
        }
    if (!saddle) {
        std::cout << "no saddle zero; entry-slope scan not applicable\n";
        return 0;
    }

    abel::ScanOptions so;
    so.delta = p.cfg.solver.delta;
    so.rel_tol = p.cfg.solver.rel_tol;
    const abel::UniquenessScan scan =
        abel::uniqueness_scan(nsys, *saddle, p.cfg.analysis.slopes, so);
    {
        auto os = open_out(cmd.out_dir, "uniqueness.csv");
        abel::write_uniqueness_csv(os, scan);
    }
    for (const auto& sh : scan.shots)
        std::cout << "slope " << abel::g17(sh.slope) << " -> " << abel::to_string(sh.outcome)
                  << "\n";
    const double diff = std::abs(scan.bisection_slope - saddle->lambda_minus);
    std::cout << "bisection slope = " << abel::g17(scan.bisection_slope)
              << ", lambda_minus = " << abel::g17(saddle->lambda_minus)
              << ", |diff| = " << abel::g17(diff) << "\n";
    const bool ok = scan.bracket_found && diff <= 1e-4;
    std::cout << (ok ? "entry-slope selection ok\n" : "entry-slope selection FAILED\n");
    return ok ? 0 : 4;
}

int run_poincare(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const abel::FirstKindScan scan = abel::first_kind_poincare(*p.sys, p.cfg.analysis.u0);
    {
        auto os = open_out(cmd.out_dir, "poincare.csv");
        abel::write_poincare_csv(os, scan);
    }
    long blowups = 0;
    for (const auto& pt : scan.points)
        if (pt.status == abel::MapStatus::BlowUp) ++blowups;
    std::cout << scan.points.size() << " grid points, " << blowups << " blow-ups, "
              << scan.fixed_points.size() << " sign-constant fixed points\n";
    for (double u : scan.fixed_points) std::cout << "fixed point u0 = " << abel::g17(u) << "\n";
    return 0;
}

int run_sharpness(const Cmd& cmd) {
    Problem p = load_problem(cmd.config_path);
    note_general(p);
    const abel::AbelSystem nsys = abel::with_positive_B(*p.sys);
    const abel::SharpnessReport rep = abel::sharpness_probe(nsys);
    auto os = open_out(cmd.out_dir, "sharpness_report.txt");
    for (std::size_t i = 0; i < rep.zeros.size(); ++i) {
        const auto& z = rep.zeros[i];
        const std::string line = "zero t = " + abel::g17(z.t) + " kind = " +
                                 abel::to_string(z.kind) + " discriminant = " +
                                 abel::g17(z.discriminant) +
                                 (z.is_focus ? " FOCUS" : "") +
                                 (std::abs(z.discriminant) < 1e-10 ? " (boundary case)" : "");
        os << line << "\n";
        std::cout << line << "\n";
    }
    if (rep.obstruction) {
        auto arc = open_out(cmd.out_dir, "focus_orbit.csv");
        abel::write_arc_csv(arc, rep.spiral);
        const std::string line =
            "focus spiral re-crosses x = 0 " + std::to_string(rep.spiral_x_sign_changes) +
            " times near t = " + abel::g17(rep.zeros[rep.focus_indices.front()].t) +
            "; no sign-definite C^1 branch exists there";
        os << line << "\n";
        std::cout << line << "\n";
        return 3;
    }
    std::cout << "no foci among the zeros\n";
    return 0;
}

int run_normalize(const Cmd& cmd) {
    abel::ProblemConfig cfg = abel::load_config(cmd.config_path);
    if (!cfg.general) {
        std::cerr << "normalize requires the general coefficient family [a0]..[b1]\n";
        return 1;
    }
    const abel::NormalizeResult nr = abel::normalize(*cfg.general, cfg.solver.harmonics);
    {
        auto os = open_out(cmd.out_dir, "normalized.cfg");
        abel::write_system_config(os, nr.system, &cfg.solver);
    }
    std::cout << "min |b1| = " << abel::g17(nr.min_abs_b1)
              << ", projection residual = " << abel::g17(nr.projection_residual) << "\n";
    std::cout << "wrote normalized.cfg\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodic solutions of scalar quasilinear equations x x' = A + B x + C x^2"};
    app.require_subcommand(1);

    Cmd cmd;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Cmd&);
    };
    const Sub subs[] = {
        {"check", "evaluate the existence condition", run_check},
        {"zeros", "locate and classify the zeros of A", run_zeros},
        {"solve", "construct the sign-changing periodic solution", run_solve},
        {"verify", "re-check a solution.csv against the equation", run_verify},
        {"stability", "instability witnesses above the left zero", run_stability},
        {"uniqueness", "entry-slope shooting trichotomy at a saddle", run_uniqueness},
        {"poincare", "time-T map of the first-kind cubic equation", run_poincare},
        {"sharpness", "focal obstructions to sign-definite branches", run_sharpness},
        {"normalize", "reduce the general form to leading-normal form", run_normalize},
    };
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("config", cmd.config_path, "problem config file")->required();
        sub->add_option("--out", cmd.out_dir, "output directory (default .)");
        if (std::string(s.name) == "verify")
            sub->add_option("--solution", cmd.solution_path,
                            "solution csv to verify (default <out>/solution.csv)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        for (const auto& s : subs)
            if (app.get_subcommand(s.name)->parsed()) return s.fn(cmd);
        return 1;
    } catch (const abel::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const abel::SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const abel::NoZeros& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const abel::DegenerateLeadingCoefficient& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const abel::BranchEscape& e) {
        std::cerr << "construction failed: " << e.what() << "\n";
        return 4;
    } catch (const abel::GluingMismatch& e) {
        std::cerr << "construction failed: " << e.what() << "\n";
        return 4;
    } catch (const abel::StepSizeUnderflow& e) {
        std::cerr << "integration failed: " << e.what() << "\n";
        return 4;
    } catch (const abel::StepCountExceeded& e) {
        std::cerr << "integration failed: " << e.what() << "\n";
        return 4;
    } catch (const abel::DivisionAtZero& e) {
        std::cerr << "integration failed: " << e.what() << "\n";
        return 4;
    } catch (const abel::WrongZeroKind& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const abel::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "bad parameter: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
