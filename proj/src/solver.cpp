#include "ergoselect/solver.hpp"

#include "ergoselect/rate_fit.hpp"

#include <Eigen/SparseLU>

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace ergoselect {

double numerical_hamiltonian(const HamiltonianSpec& spec, const Vec2& x, const Vec2& p_minus,
                             const Vec2& p_plus) {
    double v = spec.potential_w.eval(x);
    for (int ax = 0; ax < 2; ++ax) {
        double up = std::max(p_minus[ax], 0.0);
        double dn = std::min(p_plus[ax], 0.0);
        v += 0.5 * (up * up + dn * dn);
    }
    return v;
}

namespace {

struct SchemeData {
    std::vector<GridField> a;  // diffusion coefficients per axis
    GridField w;               // H potential at nodes
    GridField v;               // perturbation potential at nodes

    SchemeData(const ProblemSpec& p) {
        a = p.diffusion.sample(p.grid);
        for (int ax = 0; ax < p.grid.dim; ++ax)
            if ((a[ax].values < 0.0).any()) throw AssumptionViolation("negative diffusion");
        w = GridField::from_function(p.grid, [&](const Vec2& x) { return p.hamiltonian.potential_w.eval(x); });
        v = GridField::from_function(p.grid, [&](const Vec2& x) { return p.potential.eval(x); });
    }
};

}  // namespace

GridField residual(const ProblemSpec& problem, const GridField& u, double lambda, double eta) {
    const auto& g = problem.grid;
    if (!(u.grid == g)) throw std::logic_error("incompatible-grid: residual");
    SchemeData data(problem);

    GridField out(g);
    const double inv_h = 1.0 / g.h;
    const double inv_h2 = inv_h * inv_h;
    const double eta2 = eta * eta;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        double flux = data.w.values[i];
        double second = 0.0;
        for (int ax = 0; ax < g.dim; ++ax) {
            const double up = u.values[g.neighbor(i, ax, +1)];
            const double um = u.values[g.neighbor(i, ax, -1)];
            const double pm = (u.values[i] - um) * inv_h;
            const double pp = (up - u.values[i]) * inv_h;
            const double a_up = std::max(pm, 0.0);
            const double a_dn = std::min(pp, 0.0);
            flux += 0.5 * (a_up * a_up + a_dn * a_dn);
            const double d2 = (up - 2.0 * u.values[i] + um) * inv_h2;
            second += (eta2 + data.a[ax].values[i]) * d2;
        }
        const Vec2 x = g.point(i);
        out.values[i] = problem.discount.f(x, lambda * u.values[i]) + flux +
                        lambda * data.v.values[i] - second - problem.c_h;
    }
    return out;
}

Eigen::SparseMatrix<double> assemble_jacobian(const ProblemSpec& problem, const GridField& u,
                                              double lambda, double eta) {
    const auto& g = problem.grid;
    SchemeData data(problem);

    const double inv_h = 1.0 / g.h;
    const double inv_h2 = inv_h * inv_h;
    const double eta2 = eta * eta;
    const Eigen::Index n = g.size();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(n) * (1 + 2 * g.dim));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2 x = g.point(i);
        double diag = lambda * problem.discount.df_dr(x, lambda * u.values[i]);
        for (int ax = 0; ax < g.dim; ++ax) {
            const Eigen::Index ip = g.neighbor(i, ax, +1);
            const Eigen::Index im = g.neighbor(i, ax, -1);
            const double pm = (u.values[i] - u.values[im]) * inv_h;
            const double pp = (u.values[ip] - u.values[i]) * inv_h;
            const double a_up = std::max(pm, 0.0);   // dH/dp_minus >= 0
            const double a_dn = std::min(pp, 0.0);   // dH/dp_plus <= 0
            const double nu = eta2 + data.a[ax].values[i];

            diag += (a_up - a_dn) * inv_h + 2.0 * nu * inv_h2;
            const double off_p = a_dn * inv_h - nu * inv_h2;
            const double off_m = -a_up * inv_h - nu * inv_h2;
            if (off_p > 1e-13 || off_m > 1e-13)
                throw std::logic_error("monotonicity-violation: positive off-diagonal entry");
            trip.emplace_back(int(i), int(ip), off_p);
            trip.emplace_back(int(i), int(im), off_m);
        }
        trip.emplace_back(int(i), int(i), diag);
    }
    Eigen::SparseMatrix<double> jac(n, n);
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
}

namespace {

// Damped Newton with monotone pseudo-time marching fallback. Steps are
// accepted when the sup-norm residual decreases, or failing that when the
// l2 merit satisfies an Armijo decrease (the sup norm alone can livelock
// while the upwind branch pattern settles around forming kinks).
// Returns the iterate; `converged` signals ||F||_inf <= tol.
GridField newton_loop(const ProblemSpec& problem, GridField u, double lambda, double eta,
                      const SolverOptions& opts, int& iterations, double& res_sup, bool& converged) {
    GridField f = residual(problem, u, lambda, eta);
    res_sup = f.max_abs();
    double res_l2 = f.values.matrix().norm();
    converged = res_sup <= opts.tol;

    int stagnant = 0;
    for (int it = 0; it < opts.max_iter && !converged; ++it) {
        ++iterations;
        Eigen::SparseMatrix<double> jac = assemble_jacobian(problem, u, lambda, eta);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(jac);
        if (lu.info() != Eigen::Success) throw std::runtime_error("Newton: factorization failed");
        Eigen::VectorXd step = lu.solve(f.values.matrix());

        double t = 1.0;
        bool improved = false;
        GridField trial(u.grid);
        GridField f_trial(u.grid);
        for (int halv = 0; halv <= opts.max_halvings; ++halv, t *= 0.5) {
            trial.values = u.values - t * step.array();
            f_trial = residual(problem, trial, lambda, eta);
            if (f_trial.max_abs() < res_sup ||
                f_trial.values.matrix().norm() <= (1.0 - 1e-4 * t) * res_l2) {
                improved = true;
                break;
            }
        }
        if (improved) {
            u = trial;
            f = f_trial;
        } else {
            // monotone fallback: explicit marching u <- u - tau F(u) with the
            // per-node stability bound tau_i = 0.9 / J_ii
            for (int s = 0; s < opts.march_steps; ++s) {
                Eigen::SparseMatrix<double> jm = assemble_jacobian(problem, u, lambda, eta);
                Eigen::ArrayXd diag = jm.diagonal().array();
                u.values -= 0.9 * f.values / diag;
                f = residual(problem, u, lambda, eta);
                if (f.max_abs() <= opts.tol) break;
            }
        }
        const double prev_sup = res_sup, prev_l2 = res_l2;
        res_sup = f.max_abs();
        res_l2 = f.values.matrix().norm();
        converged = res_sup <= opts.tol;
        // three rounds with no progress in either norm: the roundoff floor
        if (res_sup > 0.999 * prev_sup && res_l2 > 0.999 * prev_l2) ++stagnant;
        else stagnant = 0;
        if (!converged && stagnant >= 3) break;
    }
    return u;
}

}  // namespace

SolveReport solve(const ProblemSpec& problem, double lambda, double eta, const SolverOptions& opts) {
    if (!(lambda > 0.0)) throw AssumptionViolation("lambda must be > 0");
    if (lambda > opts.lambda_ceiling)
        throw AssumptionViolation("lambda exceeds the configured ceiling lambda_0");
    if (eta < 0.0) throw AssumptionViolation("eta must be >= 0");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be > 0");

    const auto t0 = std::chrono::steady_clock::now();

    // Cold starts are stiff: at u = 0 the upwind flux derivatives vanish and
    // the Jacobian degenerates to the discount diagonal, so solve a chain of
    // easier problems first, warm-starting each stage. Two chains cover the
    // failure modes: a viscous chain (strong eta keeps Newton tame while a
    // potential term is switched on, then the viscosity anneals) and an
    // inviscid chain at the target eta (marginally resolved viscous layers
    // sit in Newton's worst regime, and solution kinks can migrate during
    // the anneal when the discount is spatial). The discrete fixed point is
    // unique, so whichever chain converges yields the answer. An explicit
    // initial guess skips the homotopy.
    struct Stage {
        double lambda, eta;
    };
    auto lambda_chain = [&](double eta_chain) {
        std::vector<Stage> path;
        double lam = std::max(lambda, std::min(opts.lambda_ceiling, 0.25));
        while (lam > lambda * 1.0001) {
            path.push_back({lam, eta_chain});
            lam *= 0.5;
        }
        return path;
    };
    std::vector<std::vector<Stage>> attempts;
    if (opts.initial_guess) attempts.push_back({Stage{lambda, eta}});
    // cold chains follow; they also rescue a stalled warm start
    const double eta_strong = std::max(eta, 0.3);
    std::vector<Stage> viscous = lambda_chain(eta_strong);
    for (double e = eta_strong; e > eta * 1.0001; e *= 0.5) viscous.push_back({lambda, e});
    viscous.push_back({lambda, eta});
    const std::size_t first_cold = attempts.size();
    attempts.push_back(std::move(viscous));
    if (eta_strong > eta) {
        std::vector<Stage> inviscid = lambda_chain(eta);
        inviscid.push_back({lambda, eta});
        attempts.push_back(std::move(inviscid));
        // spatial discounts shift the solution's kinks while the viscosity
        // anneals, which favors the inviscid chain
        if (problem.discount.family != DiscountFamily::Linear)
            std::swap(attempts[first_cold], attempts[first_cold + 1]);
    }

    GridField u(problem.grid);
    int iterations = 0;
    double res_sup = 0.0;
    bool converged = false;
    std::optional<GridField> best;
    double best_res = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < attempts.size(); ++a) {
        const auto& path = attempts[a];
        const bool from_guess = opts.initial_guess && a == 0;
        u = from_guess ? *opts.initial_guess : GridField(problem.grid);
        for (std::size_t s = 0; s < path.size(); ++s) {
            const bool final_stage = (s + 1 == path.size());
            SolverOptions stage_opts = opts;
            if (!final_stage) {  // interior stages only feed a warm start
                stage_opts.tol = std::max(opts.tol, 1e-6);
                stage_opts.max_iter = std::min(opts.max_iter, 30);
            }
            u = newton_loop(problem, std::move(u), path[s].lambda, path[s].eta, stage_opts,
                            iterations, res_sup, converged);
        }
        if (converged) break;
        if (res_sup < best_res) {
            best_res = res_sup;
            best = u;
        }
    }
    if (!converged && best) {
        u = *best;
        res_sup = best_res;
    }

    SolveReport rep;
    rep.u = std::move(u);
    rep.residual_sup = res_sup;
    rep.iterations = iterations;
    rep.lambda = lambda;
    rep.eta = eta;
    rep.lipschitz = discrete_lipschitz(rep.u);
    rep.lambda_u_sup = lambda * rep.u.max_abs();
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!converged) throw NonConvergence("non-convergence: max_iter reached", rep);
    return rep;
}

ErgodicEstimate estimate_ergodic_constant(const ProblemSpec& problem, double eta,
                                          const std::vector<double>& lambda_seq,
                                          const SolverOptions& opts) {
    if (lambda_seq.size() < 2)
        throw std::invalid_argument("estimate_ergodic_constant: need at least 2 lambda values");

    ProblemSpec plain = problem;
    plain.discount = DiscountSpec::linear();
    plain.potential = PotentialSpec::zero();
    plain.c_h = 0.0;

    ErgodicEstimate est;
    SolverOptions o = opts;
    for (double lam : lambda_seq) {
        SolveReport rep = solve(plain, lam, eta, o);
        est.table.emplace_back(lam, -lam * integrate(rep.u));  // unit torus volume: integral = mean
        o.initial_guess = rep.u;
    }
    const auto [l1, c1] = est.table[est.table.size() - 2];
    const auto [l2, c2] = est.table[est.table.size() - 1];
    est.c_h = (c2 * l1 - c1 * l2) / (l1 - l2);  // linear fit through the last two points
    return est;
}

ViscosityGapReport vanishing_viscosity_gap(const ProblemSpec& problem, double lambda,
                                           const std::vector<double>& eta_seq,
                                           const SolverOptions& opts, int workers) {
    ViscosityGapReport rep;
    SolveReport base = solve(problem, lambda, 0.0, opts);
    rep.u_base = base.u;
    rep.rows.resize(eta_seq.size());

    auto run_row = [&](std::size_t k) {
        rep.rows[k].eta = eta_seq[k];
        try {
            SolverOptions o = opts;
            o.initial_guess = base.u;
            SolveReport r = solve(problem, lambda, eta_seq[k], o);
            rep.rows[k].gap = (r.u.values - base.u.values).abs().maxCoeff();
        } catch (const NonConvergence&) {
            rep.rows[k].failed = true;
        }
    };

    if (workers <= 1) {
        for (std::size_t k = 0; k < eta_seq.size(); ++k) run_row(k);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < eta_seq.size(); k = next.fetch_add(1))
                    run_row(k);
            });
        for (auto& t : pool) t.join();
    }

    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : rep.rows)
        if (!r.failed && r.gap > 0.0) pairs.emplace_back(r.eta, r.gap);
    if (pairs.size() >= 3) rep.fitted_slope = rate_fit(pairs).slope;
    return rep;
}

}  // namespace ergoselect
