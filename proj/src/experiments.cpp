#include "ergoselect/experiments.hpp"

#include "ergoselect/adjoint.hpp"
#include "ergoselect/mather.hpp"
#include "ergoselect/regularize.hpp"
#include "ergoselect/selection.hpp"

#include <cmath>
#include <ostream>

namespace ergoselect {

namespace {

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions o;
    o.tol = cfg.experiment.tol;
    o.max_iter = cfg.experiment.max_iter;
    o.lambda_ceiling = cfg.experiment.lambda_ceiling;
    return o;
}

std::vector<double> geometric(double from, double to, int count) {
    std::vector<double> out;
    const double r = std::pow(to / from, 1.0 / (count - 1));
    for (int i = 0; i < count; ++i) out.push_back(from * std::pow(r, i));
    return out;
}

double resolve_c_h(const RunConfig& cfg, std::ostream& log) {
    if (cfg.experiment.c_h) return *cfg.experiment.c_h;
    ProblemSpec p = make_problem(cfg);
    if (cfg.grid.dim == 1 && cfg.diffusion.is_zero()) {
        // first-order mechanical: c_H = max W, exact
        SolutionFamily1D fam = oracle_solution_family(cfg.hamiltonian, cfg.grid, 1);
        log << "c_H from the first-order oracle: " << fam.c_h << "\n";
        return fam.c_h;
    }
    ErgodicEstimate est = estimate_ergodic_constant(p, 0.0, {1e-2, 5e-3, 2.5e-3}, solver_options(cfg));
    log << "c_H estimated: " << est.c_h << "\n";
    return est.c_h;
}

// sweeps solve (E_lambda) directly unless the config demands the coupling
std::function<double(double)> sweep_eta_rule(const RunConfig& cfg) {
    if (cfg.experiment.eta_rule == "square") return [](double lam) { return lam * lam; };
    return [](double) { return 0.0; };
}

std::vector<Vec2> x0_points(const RunConfig& cfg) {
    std::vector<Vec2> out;
    for (double x : cfg.experiment.x0) out.push_back(Vec2(x, 0.0));
    if (out.empty()) out.push_back(Vec2::Zero());
    return out;
}

int run_solve(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    ProblemSpec p = make_problem(cfg);
    p.c_h = resolve_c_h(cfg, log);
    SolveReport rep = solve(p, cfg.experiment.lambda, cfg.experiment.eta, solver_options(cfg));
    out.write_file("u.csv", grid_field_csv(rep.u, "u"));
    out.manifest["solve"] = {{"residual_sup", rep.residual_sup}, {"iterations", rep.iterations},
                             {"lipschitz", rep.lipschitz},       {"lambda_u_sup", rep.lambda_u_sup},
                             {"wall_time", rep.wall_time},       {"c_h", p.c_h}};
    return kExitOk;
}

int run_ergodic(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    ProblemSpec p = make_problem(cfg);
    std::vector<double> seq = cfg.experiment.lambda_seq;
    if (seq.empty()) seq = {1e-2, 5e-3, 2.5e-3};
    ErgodicEstimate est = estimate_ergodic_constant(p, cfg.experiment.eta, seq, solver_options(cfg));
    std::vector<std::vector<double>> rows;
    for (const auto& [lam, c] : est.table) rows.push_back({lam, c});
    out.write_file("table.csv", table_csv({"lambda", "c_lambda"}, rows));
    out.manifest["ergodic"] = {{"c_h", est.c_h}};
    log << "c_H = " << est.c_h << "\n";
    return kExitOk;
}

int run_vv_gap(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    ProblemSpec p = make_problem(cfg);
    p.c_h = resolve_c_h(cfg, log);
    std::vector<double> etas = cfg.experiment.eta_seq;
    if (etas.empty()) etas = {0.08, 0.04, 0.02, 0.01};
    ViscosityGapReport rep =
        vanishing_viscosity_gap(p, cfg.experiment.lambda, etas, solver_options(cfg), cfg.workers);
    std::vector<std::vector<double>> rows;
    for (const auto& r : rep.rows)
        rows.push_back({r.eta, r.gap, r.eta > 0 ? r.gap / r.eta : 0.0, double(r.failed)});
    out.write_file("table.csv", table_csv({"eta", "gap", "gap_over_eta", "failed"}, rows));
    out.manifest["vv_gap"] = {{"fitted_slope", rep.fitted_slope}};
    log << "vanishing-viscosity slope = " << rep.fitted_slope << "\n";
    return kExitOk;
}

int run_adjoint(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    ProblemSpec p = make_problem(cfg);
    p.c_h = resolve_c_h(cfg, log);
    const double lam = cfg.experiment.lambda, eta = cfg.experiment.eta;
    SolveReport rep = solve(p, lam, eta, solver_options(cfg));

    out.write_file("u.csv", grid_field_csv(rep.u, "u"));
    Eigen::SparseMatrix<double> jac = assemble_jacobian(p, rep.u, lam, eta);
    AdjointFactorization fact(jac.transpose());
    auto trials = default_trial_fields(p.grid, cfg.experiment.max_mode, 5, cfg.experiment.seed);

    // mass bounds from the validated discount range
    double df_max = -std::numeric_limits<double>::infinity();
    double df_min = std::numeric_limits<double>::infinity();
    const double R = rep.lambda_u_sup;
    for (Eigen::Index i = 0; i < p.grid.size(); ++i) {
        Vec2 x = p.grid.point(i);
        for (double r : {-R, 0.0, R}) {
            df_max = std::max(df_max, p.discount.df_dr(x, r));
            df_min = std::min(df_min, p.discount.df_dr(x, r));
        }
    }

    int k = 0;
    for (const Vec2& x0 : x0_points(cfg)) {
        Eigen::Index idx = p.grid.index(int(std::lround(x0[0] / p.grid.h)),
                                        int(std::lround(x0[1] / p.grid.h)));
        AdjointSolution adj = solve_adjoint(fact, p, rep.u, idx, lam, eta);
        DualityReport dual = duality_certificate(adj, jac, trials);
        out.write_file("sigma_" + std::to_string(k) + ".csv", grid_field_csv(adj.sigma, "sigma"));
        out.add_certificate("weighted_mass_" + std::to_string(k),
                            std::abs(adj.weighted_mass - 1.0) <= 1e-9, adj.weighted_mass, 1e-9);
        out.add_certificate("sigma_nonnegative_" + std::to_string(k), adj.min_sigma >= -1e-9,
                            adj.min_sigma, -1e-9);
        out.add_certificate("mass_bounds_" + std::to_string(k),
                            adj.mass >= 1.0 / df_max - 1e-9 && adj.mass <= 1.0 / df_min + 1e-9,
                            adj.mass, 1.0 / df_min);
        out.add_certificate("duality_" + std::to_string(k), dual.pass, dual.max_defect, dual.tolerance);
        ++k;
    }
    return out.all_certificates_pass() ? kExitOk : kExitCertificate;
}

int run_mather(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    ProblemSpec p = make_problem(cfg);
    p.c_h = resolve_c_h(cfg, log);
    std::vector<double> seq = cfg.experiment.lambda_seq;
    if (seq.empty()) seq = {8e-3, 4e-3, 2e-3, 1e-3};

    MeasureFamilyOptions opts;
    opts.solver = solver_options(cfg);
    const bool eta_zero = cfg.experiment.eta_rule == "zero";  // experiment default: eta = lambda^2
    if (eta_zero) opts.eta_rule = [](double) { return 0.0; };
    auto entries = measure_family(p, seq, x0_points(cfg), opts);

    const double lam_min = seq.back();
    const double eta_min = eta_zero ? 0.0 : lam_min * lam_min;
    const double tol_measure = kMeasureSlackC * (p.grid.h + lam_min + eta_min);

    int k = 0;
    for (const auto& e : entries) {
        if (e.failed) {
            out.manifest["mather_errors"].push_back(e.error);
            ++k;
            continue;
        }
        std::vector<std::vector<double>> rows;
        for (const auto& a : e.measure.atoms)
            rows.push_back({a.x[0], a.x[1], a.p[0], a.p[1], a.v[0], a.v[1], a.w});
        out.write_file("measure_" + std::to_string(k) + ".csv",
                       table_csv({"x0", "x1", "p0", "p1", "v0", "v1", "w"}, rows));
        const double act = action_defect(e.measure, p, p.c_h);
        const double hol = holonomy_defect(e.measure, p, cfg.experiment.max_mode);
        out.add_certificate("action_defect_" + std::to_string(k), act <= tol_measure, act, tol_measure);
        out.add_certificate("holonomy_defect_" + std::to_string(k), hol <= tol_measure, hol, tol_measure);
        out.manifest["measures"].push_back({{"lambda", e.measure.lambda},
                                            {"eta", e.measure.eta},
                                            {"x0", e.measure.x0[0]},
                                            {"action_defect", act},
                                            {"holonomy_defect", hol},
                                            {"tv_distances", e.tv_distances}});
        ++k;
    }
    return out.all_certificates_pass() ? kExitOk : kExitCertificate;
}

GridField regularization_base_field(const RunConfig& cfg, double& c0, std::ostream& log) {
    if (cfg.grid.dim == 1 && cfg.diffusion.is_zero()) {
        SolutionFamily1D fam =
            oracle_solution_family(cfg.hamiltonian, cfg.grid, std::max(cfg.experiment.n_representatives, 3));
        c0 = fam.c_h;
        // a kinked representative exercises the regularization
        return fam.representatives[fam.representatives.size() / 2];
    }
    log << "regularize: no first-order oracle in this configuration; using the zero field\n";
    c0 = cfg.experiment.c_h.value_or(0.0);
    return GridField(cfg.grid);
}

int run_regularize(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    ProblemSpec p = make_problem(cfg);
    double c0 = 0.0;
    GridField w = regularization_base_field(cfg, c0, log);

    std::vector<std::vector<double>> rows;
    std::vector<std::pair<double, double>> excesses, dists;
    SubsolutionCertificate finest;
    for (double eta : cfg.experiment.reg_eta) {
        SubsolutionCertificate cert = smooth_subsolution_certificate(w, eta, p, c0);
        rows.push_back({eta, cert.params.K, cert.params.eps, cert.params.delta, cert.max_excess,
                        cert.sup_distance, double(cert.mollifier_sub_resolution)});
        if (cert.max_excess > 0.0) excesses.emplace_back(eta, cert.max_excess);
        dists.emplace_back(eta, cert.sup_distance);
        finest = std::move(cert);
    }
    out.write_file("table.csv",
                   table_csv({"eta", "K", "eps", "delta", "excess", "sup_distance", "sub_resolution"}, rows));
    for (const auto& r : rows)
        out.manifest["regularize"]["certificates"].push_back({{"eta", r[0]},
                                                              {"K", r[1]},
                                                              {"eps", r[2]},
                                                              {"delta", r[3]},
                                                              {"excess", r[4]},
                                                              {"sup_distance", r[5]}});
    out.write_file("w_reg.csv", grid_field_csv(finest.w_reg, "w_reg"));
    if (excesses.size() >= 3) {
        RateFit fit = rate_fit(excesses);
        out.manifest["regularize"]["excess_slope"] = fit.slope;
        out.add_certificate("excess_slope", fit.slope >= 0.8, fit.slope, 0.8);
    }
    if (dists.size() >= 3) {
        RateFit fit = rate_fit(dists);
        out.manifest["regularize"]["sup_distance_slope"] = fit.slope;
        out.add_certificate("sup_distance_slope", fit.slope >= 0.8, fit.slope, 0.8);
    }
    return out.all_certificates_pass() ? kExitOk : kExitCertificate;
}

int run_select(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    if (cfg.grid.dim != 1 || !cfg.diffusion.is_zero())
        throw ConfigError("select: the brute-force oracle needs dim=1 and zero diffusion");
    ProblemSpec p = make_problem(cfg);
    SolutionFamily1D fam =
        oracle_solution_family(cfg.hamiltonian, cfg.grid, std::max(cfg.experiment.n_representatives, 5));
    p.c_h = cfg.experiment.c_h.value_or(fam.c_h);

    std::vector<double> seq = cfg.experiment.lambda_seq;
    if (seq.empty()) seq = geometric(0.1, 1e-3, 8);

    SweepOptions sopts;
    sopts.solver = solver_options(cfg);
    sopts.richardson = cfg.experiment.richardson;
    sopts.eta_rule = sweep_eta_rule(cfg);
    SweepResult sweep = lambda_sweep(p, seq, sopts);
    if (!sweep.limit) throw NonConvergence("select: sweep did not reach its Cauchy tolerance",
                                           sweep.reports.back());

    MeasureFamilyOptions mopts;
    mopts.solver = solver_options(cfg);
    auto entries = measure_family(p, {8e-3, 4e-3, 2e-3, 1e-3}, x0_points(cfg), mopts);
    std::vector<DiscreteMeasure> measures;
    for (auto& e : entries)
        if (!e.failed) measures.push_back(std::move(e.measure));

    GridField u_star = u_star_brute_force(fam, measures, p.potential, p.discount);
    const double gap = (sweep.limit->values - u_star.values).abs().maxCoeff();
    const double slack = cfg.experiment.slack_c * (p.grid.h + seq.back());

    std::vector<std::vector<double>> rows;
    std::size_t pw = 0;
    for (std::size_t i = 0; i < sweep.lambdas.size(); ++i) {
        const auto& r = sweep.reports[i];
        double dist = (i > 0 && !sweep.failed[i] && pw < sweep.pairwise.size()) ? sweep.pairwise[pw++] : 0.0;
        rows.push_back({sweep.lambdas[i], dist, r.lipschitz, r.lambda_u_sup});
    }
    out.write_file("sweep.csv", table_csv({"lambda", "pairwise_distance", "lipschitz", "lambda_u_sup"}, rows));
    out.write_file("u0.csv", grid_field_csv(*sweep.limit, "u0"));
    out.write_file("ustar.csv", grid_field_csv(u_star, "ustar"));
    out.add_certificate("selection_consistency", gap <= slack, gap, slack);
    log << "||sweep limit - u_star||_inf = " << gap << " (slack " << slack << ")\n";
    return out.all_certificates_pass() ? kExitOk : kExitCertificate;
}

int run_theorem_a(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    ProblemSpec p = make_problem(cfg);
    p.c_h = resolve_c_h(cfg, log);
    std::vector<double> seq = cfg.experiment.lambda_seq;
    if (seq.empty()) seq = geometric(0.1, 1e-3, 8);

    SweepOptions sopts;
    sopts.solver = solver_options(cfg);
    sopts.eta_rule = sweep_eta_rule(cfg);
    SweepResult sweep = lambda_sweep(p, seq, sopts);
    if (!sweep.limit) throw NonConvergence("theorem-a: sweep did not converge", sweep.reports.back());

    MeasureFamilyOptions mopts;
    mopts.solver = solver_options(cfg);
    auto entries = measure_family(p, {8e-3, 4e-3, 2e-3, 1e-3}, x0_points(cfg), mopts);
    std::vector<DiscreteMeasure> measures;
    for (auto& e : entries)
        if (!e.failed) measures.push_back(std::move(e.measure));

    const double slack = cfg.experiment.slack_c * (p.grid.h + seq.back());
    TheoremAReport rep = theorem_a_certificate(sweep, measures, p, slack);
    std::vector<std::vector<double>> rows;
    for (std::size_t m = 0; m < rep.functionals.size(); ++m)
        rows.push_back({double(m), rep.functionals[m]});
    out.write_file("margins.csv", table_csv({"measure", "constraint_functional"}, rows));
    out.add_certificate("theorem_a_constraint", rep.pass, rep.worst, slack);
    return out.all_certificates_pass() ? kExitOk : kExitCertificate;
}

int run_theorem_b(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    if (cfg.grid.dim != 1 || !cfg.diffusion.is_zero())
        throw ConfigError("theorem-b: the oracle family needs dim=1 and zero diffusion");
    ProblemSpec p = make_problem(cfg);
    SolutionFamily1D fam =
        oracle_solution_family(cfg.hamiltonian, cfg.grid, std::max(cfg.experiment.n_representatives, 5));
    p.c_h = cfg.experiment.c_h.value_or(fam.c_h);

    MeasureFamilyOptions mopts;
    mopts.solver = solver_options(cfg);
    auto entries = measure_family(p, {8e-3, 4e-3, 2e-3, 1e-3}, x0_points(cfg), mopts);
    std::vector<DiscreteMeasure> measures;
    for (auto& e : entries)
        if (!e.failed) measures.push_back(std::move(e.measure));
    if (measures.empty()) throw std::runtime_error("theorem-b: no measures available");

    GridField sigma = GridField::from_function(p.grid, [](const Vec2& x) {
        return 1.0 + 0.5 * std::sin(2.0 * M_PI * x[0]);
    });
    const double slack = cfg.experiment.slack_c * (p.grid.h + 1e-3);

    // ordered pairs: u2 = rep_j, u1 = rep_i shifted to the largest level at
    // which the sampled hypothesis still holds; plus one deliberate violation
    std::vector<std::vector<double>> rows;
    int claims = 0, claim_failures = 0, no_claims = 0;
    const auto& reps = fam.representatives;
    for (std::size_t i = 0; i < reps.size(); ++i)
        for (std::size_t j = 0; j < reps.size(); ++j) {
            if (i == j) continue;
            double shift = std::numeric_limits<double>::infinity();
            for (const auto& m : measures) {
                double num = 0.0, den = 0.0;
                for (const auto& a : m.atoms) {
                    const double sv = interpolate(sigma, a.x);
                    num += a.w * (interpolate(reps[j], a.x) - interpolate(reps[i], a.x)) * sv;
                    den += a.w * sv;
                }
                shift = std::min(shift, num / den);
            }
            GridField u1 = reps[i];
            u1.values += shift;
            TheoremBReport rep = theorem_b_experiment(u1, reps[j], measures, sigma, p, slack, slack);
            if (rep.no_claim) ++no_claims;
            else if (rep.conclusion_holds) ++claims;
            else ++claim_failures;
            rows.push_back({double(i), double(j), shift, rep.min_hypothesis_margin,
                            rep.conclusion_margin, rep.no_claim ? 2.0 : (rep.conclusion_holds ? 0.0 : 1.0)});
        }
    {
        GridField u1 = reps[0];
        u1.values += 0.5;  // hypothesis-violating pair
        TheoremBReport rep = theorem_b_experiment(u1, reps[0], measures, sigma, p, slack, slack);
        rows.push_back({0.0, 0.0, 0.5, rep.min_hypothesis_margin, rep.conclusion_margin,
                        rep.no_claim ? 2.0 : (rep.conclusion_holds ? 0.0 : 1.0)});
        if (rep.no_claim) ++no_claims;
    }
    out.write_file("report.csv", table_csv({"i", "j", "shift", "min_hypothesis_margin",
                                            "conclusion_margin", "verdict"}, rows));
    out.add_certificate("theorem_b_claims", claim_failures == 0 && claims >= 10, double(claims),
                        10.0);
    out.add_certificate("theorem_b_no_claim_reported", no_claims >= 1, double(no_claims), 1.0);
    log << "theorem-b: " << claims << " claims verified against sampled measures, " << no_claims
        << " no-claim rows\n";
    return out.all_certificates_pass() ? kExitOk : kExitCertificate;
}

int run_theorem_c(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
    if (cfg.grid.dim != 1 || !cfg.diffusion.is_zero())
        throw ConfigError("theorem-c: the oracle family needs dim=1 and zero diffusion");
    ProblemSpec p = make_problem(cfg);
    SolutionFamily1D fam =
        oracle_solution_family(cfg.hamiltonian, cfg.grid, std::max(cfg.experiment.n_representatives, 1));
    p.c_h = cfg.experiment.c_h.value_or(fam.c_h);
    const GridField& u_hat = fam.representatives.front();

    std::vector<double> seq = cfg.experiment.lambda_seq;
    if (seq.empty()) seq = geometric(0.05, 1.25e-3, 6);

    SweepOptions sopts;
    sopts.solver = solver_options(cfg);
    TheoremCReport rep = theorem_c_harness(p, u_hat, seq, sopts);

    std::vector<std::vector<double>> rows;
    for (const auto& [lam, e] : rep.errors)
        rows.push_back({lam, e, (rep.m_analytic + rep.m_scheme) * lam});
    out.write_file("rate.csv", table_csv({"lambda", "error", "bound"}, rows));
    out.write_file("u_hat.csv", grid_field_csv(u_hat, "u_hat"));
    out.manifest["theorem_c"] = {{"slope_raw", rep.raw_fit.slope},
                                 {"slope_floor_adjusted", rep.floor_adjusted_fit.slope},
                                 {"floor_dominated", rep.floor_adjusted_fit.exact},
                                 {"floor_estimate", rep.floor_estimate},
                                 {"M", rep.m_analytic},
                                 {"M_scheme", rep.m_scheme},
                                 {"d0", rep.d0},
                                 {"K0", rep.k0}};
    const bool rate_ok = rep.floor_adjusted_fit.exact || rep.floor_adjusted_fit.slope >= 0.9;
    out.add_certificate("theorem_c_rate", rate_ok, rep.floor_adjusted_fit.slope, 0.9);
    out.add_certificate("theorem_c_bound", rep.bounds_ok, rep.m_analytic + rep.m_scheme, 0.0);
    log << "theorem-c: floor-adjusted slope " << rep.floor_adjusted_fit.slope
        << (rep.floor_adjusted_fit.exact ? " (floor-dominated)" : "") << "\n";
    return out.all_certificates_pass() ? kExitOk : kExitCertificate;
}

}  // namespace

int run_experiment(const RunConfig& cfg, std::ostream& log) {
    RunWriter out(cfg.out_dir, cfg.echo);
    int code = kExitOk;
    std::string status = "ok";
    try {
        const std::string& name = cfg.experiment.name;
        if (name == "solve") code = run_solve(cfg, out, log);
        else if (name == "ergodic") code = run_ergodic(cfg, out, log);
        else if (name == "vv-gap") code = run_vv_gap(cfg, out, log);
        else if (name == "adjoint") code = run_adjoint(cfg, out, log);
        else if (name == "mather") code = run_mather(cfg, out, log);
        else if (name == "regularize") code = run_regularize(cfg, out, log);
        else if (name == "select") code = run_select(cfg, out, log);
        else if (name == "theorem-a") code = run_theorem_a(cfg, out, log);
        else if (name == "theorem-b") code = run_theorem_b(cfg, out, log);
        else if (name == "theorem-c") code = run_theorem_c(cfg, out, log);
        else throw ConfigError("experiment.name: unknown experiment");
        if (code == kExitCertificate) status = "certificate-failure";
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        out.finalize("config-error");
        return kExitConfig;
    } catch (const AssumptionViolation& e) {
        log << e.what() << "\n";
        out.finalize("config-error");
        return kExitConfig;
    } catch (const NonConvergence& e) {
        log << e.what() << "\n";
        out.finalize("solver-failure");
        return kExitSolver;
    }
    out.finalize(status);
    return code;
}

}  // namespace ergoselect
