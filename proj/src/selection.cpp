#include "ergoselect/selection.hpp"

#include <algorithm>
#include <cmath>

namespace ergoselect {

SweepResult lambda_sweep(const ProblemSpec& problem, const std::vector<double>& lambda_seq,
                         const SweepOptions& opts) {
    if (lambda_seq.size() < 4) throw std::invalid_argument("lambda_sweep: need >= 4 lambda values");
    for (std::size_t i = 1; i < lambda_seq.size(); ++i)
        if (!(lambda_seq[i] < lambda_seq[i - 1]))
            throw std::invalid_argument("lambda_sweep: lambda_seq must be strictly decreasing");

    auto eta_of = opts.eta_rule ? opts.eta_rule : [](double) { return 0.0; };

    SweepResult res;
    res.lambdas = lambda_seq;
    res.failed.assign(lambda_seq.size(), 0);
    SolverOptions o = opts.solver;
    const GridField* prev_u = nullptr;
    std::size_t n_failed = 0;
    for (std::size_t i = 0; i < lambda_seq.size(); ++i) {
        try {
            SolveReport rep = solve(problem, lambda_seq[i], eta_of(lambda_seq[i]), o);
            o.initial_guess = rep.u;
            res.reports.push_back(std::move(rep));
        } catch (const NonConvergence& e) {
            res.failed[i] = 1;
            ++n_failed;
            res.reports.push_back(e.best);
        }
        const SolveReport& r = res.reports.back();
        if (!res.failed[i]) {
            res.equi_lipschitz_max = std::max(res.equi_lipschitz_max, r.lipschitz);
            res.lambda_u_sup_max = std::max(res.lambda_u_sup_max, r.lambda_u_sup);
            if (prev_u) res.pairwise.push_back((r.u.values - prev_u->values).abs().maxCoeff());
            prev_u = &res.reports.back().u;
        }
    }
    if (4 * n_failed > lambda_seq.size())
        throw std::runtime_error("lambda_sweep: more than 25% of rows failed");

    if (!res.pairwise.empty() && res.pairwise.back() <= opts.cauchy_tolerance) {
        // last two successful solves
        std::vector<const GridField*> ok;
        for (std::size_t i = 0; i < res.reports.size(); ++i)
            if (!res.failed[i]) ok.push_back(&res.reports[i].u);
        GridField limit = *ok.back();
        if (opts.richardson && res.pairwise.size() >= 2) {
            const double ratio = res.pairwise.back() / res.pairwise[res.pairwise.size() - 2];
            if (ratio > 0.35 && ratio < 0.65) {  // first-order Cauchy decay
                limit.values = 2.0 * ok.back()->values - ok[ok.size() - 2]->values;
                res.used_richardson = true;
            }
        }
        res.limit = std::move(limit);
    }
    return res;
}

namespace {

// 5-point Gauss-Legendre on [a, b]
template <class Fn>
double gauss5(Fn f, double a, double b) {
    static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += ws[i] * f(mid + half * xs[i]);
    return s * half;
}

// integral over [a, b] split at interior breakpoints (sorted subset supplied)
template <class Fn>
double integrate_with_breaks(Fn f, double a, double b, const std::vector<double>& breaks) {
    double s = 0.0, left = a;
    for (double c : breaks)
        if (c > a && c < b) {
            s += gauss5(f, left, c);
            left = c;
        }
    return s + gauss5(f, left, b);
}

// each representative must satisfy the first-order scheme at its own c_H to
// truncation order, away from the switch kinks
void validate_family(const SolutionFamily1D& fam, const HamiltonianSpec& hamiltonian,
                     const PeriodicGrid& grid) {
    double max_dw = 0.0;
    for (int i = 0; i < 4096; ++i)
        max_dw = std::max(max_dw, hamiltonian.potential_w.gradient(Vec2(double(i) / 4096, 0.0)).norm());
    const double bound = 2.0 * std::max(max_dw, 1.0) * grid.h + 1e-10;

    for (std::size_t r = 0; r < fam.representatives.size(); ++r) {
        const GridField& u = fam.representatives[r];
        auto [dm, dp] = forward_backward_differences(u, 0);
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            const double x = grid.point(i)[0];
            bool near_kink = false;
            for (double s : fam.switches[r]) {
                double d = std::abs(x - (s - std::floor(s)));
                if (std::min(d, 1.0 - d) < 2.0 * grid.h) near_kink = true;
            }
            if (near_kink) continue;
            const double res = numerical_hamiltonian(hamiltonian, grid.point(i),
                                                     Vec2(dm.values[i], 0.0), Vec2(dp.values[i], 0.0)) -
                               fam.c_h;
            if (std::abs(res) > bound)
                throw std::logic_error("oracle_solution_family: representative fails the scheme residual check");
        }
    }
}

}  // namespace

SolutionFamily1D oracle_solution_family(const HamiltonianSpec& hamiltonian, const PeriodicGrid& grid,
                                        int n_representatives) {
    if (grid.dim != 1) throw std::invalid_argument("oracle_solution_family: 1D only");
    const auto& W = hamiltonian.potential_w;

    SolutionFamily1D fam;
    const int dense = 1 << 16;
    double wmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < dense; ++i)
        wmax = std::max(wmax, W.eval(Vec2(double(i) / dense, 0.0)));
    fam.c_h = wmax;

    auto speed = [&](double x) {
        const double s = 2.0 * (fam.c_h - W.eval(Vec2(x, 0.0)));
        return s > 0.0 ? std::sqrt(s) : 0.0;
    };
    fam.max_speed = 0.0;
    for (int i = 0; i < dense; ++i) fam.max_speed = std::max(fam.max_speed, speed(double(i) / dense));

    // maximizer set of W: components of {speed ~ 0}; degenerate if everything qualifies
    const double tol_speed = 1e-6 * std::max(fam.max_speed, 1.0);
    std::vector<char> low(dense);
    int n_low = 0;
    for (int i = 0; i < dense; ++i) n_low += (low[i] = speed(double(i) / dense) <= tol_speed);
    if (n_low > dense / 2 || fam.max_speed <= 1e-12) {
        fam.degenerate = true;
        fam.representatives.push_back(GridField(grid));
        fam.switches.push_back({});
        return fam;
    }
    // component centers, scanning cyclically
    int start = 0;
    while (low[start]) ++start;  // begin outside a component
    for (int i = 0; i < dense; ++i) {
        int j = (start + i) % dense;
        if (low[j] && !low[(j + dense - 1) % dense]) {
            int k = j, len = 0;
            while (low[k]) {
                k = (k + 1) % dense;
                ++len;
            }
            double center = (j + 0.5 * (len - 1)) / dense;
            fam.maximizers.push_back(std::fmod(center, 1.0));
        }
    }
    std::sort(fam.maximizers.begin(), fam.maximizers.end());
    const int n_wells = int(fam.maximizers.size());

    // wells between consecutive maximizers; per-well signed mass
    // G_w(s) = int_a^s speed - int_s^b speed, increasing from -T_w to T_w
    struct Well {
        double a, b, total;
    };
    std::vector<Well> wells;
    std::vector<double> breaks = fam.maximizers;
    for (int w = 0; w < n_wells; ++w) {
        double a = fam.maximizers[w];
        double b = (w + 1 < n_wells) ? fam.maximizers[w + 1] : fam.maximizers[0] + 1.0;
        wells.push_back({a, b, integrate_with_breaks(speed, a, b, breaks)});
    }
    auto g_of = [&](const Well& w, double s) {
        return 2.0 * integrate_with_breaks(speed, w.a, s, breaks) - w.total;
    };

    // sample switch fractions in the first wells; solve the last switch by
    // bisection so the total integral of u' vanishes (periodicity)
    const int m = std::max(n_representatives, 1);
    for (int r = 0; r < m; ++r) {
        std::vector<double> sw(n_wells);
        double partial = 0.0;
        const double frac = (m == 1) ? 0.5 : double(r) / (m - 1);
        for (int w = 0; w + 1 < n_wells; ++w) {
            sw[w] = wells[w].a + frac * (wells[w].b - wells[w].a);
            partial += g_of(wells[w], sw[w]);
        }
        const Well& last = wells[n_wells - 1];
        if (std::abs(partial) > last.total * (1.0 + 1e-12)) continue;  // infeasible combo
        double lo = last.a, hi = last.b;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (g_of(last, mid) + partial > 0.0 ? hi : lo) = mid;
        }
        sw[n_wells - 1] = 0.5 * (lo + hi);

        // u' = +speed before the switch, -speed after, per well
        auto uprime = [&](double x) {
            double xc = x - std::floor(x);
            for (int w = 0; w < n_wells; ++w) {
                double rel = xc;
                if (rel < wells[w].a) rel += 1.0;
                if (rel >= wells[w].a && rel < wells[w].b)
                    return rel <= sw[w] ? speed(rel) : -speed(rel);
            }
            return 0.0;
        };
        std::vector<double> all_breaks = breaks;
        for (double s : sw) all_breaks.push_back(s - std::floor(s));  // wrap into [0,1)
        std::sort(all_breaks.begin(), all_breaks.end());

        if (!fam.switches.empty()) {  // a single-well family collapses to one profile
            const auto& prev = fam.switches.back();
            double diff = 0.0;
            for (int w = 0; w < n_wells; ++w) diff = std::max(diff, std::abs(prev[w] - sw[w]));
            if (diff < 1e-9) continue;
        }

        GridField u(grid);
        double acc = 0.0;
        u.values[0] = 0.0;
        for (int i = 1; i < grid.n_per_axis; ++i) {
            acc += integrate_with_breaks(uprime, (i - 1) * grid.h, i * grid.h, all_breaks);
            u.values[i] = acc;
        }
        fam.representatives.push_back(std::move(u));
        fam.switches.push_back(std::move(sw));
    }
    if (fam.representatives.empty())
        throw std::runtime_error("oracle_solution_family: no feasible representatives");
    validate_family(fam, hamiltonian, grid);
    return fam;
}

TheoremAReport theorem_a_certificate(const SweepResult& sweep,
                                     const std::vector<DiscreteMeasure>& measures,
                                     const ProblemSpec& problem, double slack) {
    if (!sweep.limit) throw std::invalid_argument("theorem_a_certificate: sweep has no limit");
    TheoremAReport rep;
    rep.slack = slack;
    for (const auto& m : measures) {
        double v = constraint_functional(m, *sweep.limit, problem.potential, problem.discount);
        rep.functionals.push_back(v);
        rep.worst = std::max(rep.worst, v);
    }

    // lambda-level inequality at the smallest successful lambda:
    // int f(x, lambda u_lambda) d(mu) + lambda int V d(mu) <= lambda * slack
    const SolveReport* last = nullptr;
    double lam = 0.0;
    for (std::size_t i = 0; i < sweep.reports.size(); ++i)
        if (!sweep.failed[i]) {
            last = &sweep.reports[i];
            lam = sweep.lambdas[i];
        }
    double lhs_max = -std::numeric_limits<double>::infinity();
    for (const auto& m : measures) {
        double s = 0.0;
        for (const auto& a : m.atoms)
            s += a.w * (problem.discount.f(a.x, lam * interpolate(last->u, a.x)) +
                        lam * problem.potential.eval(a.x));
        lhs_max = std::max(lhs_max, s);
    }
    rep.lambda_level_lhs = lhs_max;
    rep.pass = rep.worst <= slack && lhs_max <= lam * slack;
    return rep;
}

TheoremCReport theorem_c_harness(const ProblemSpec& problem_sans_potential, const GridField& u_hat,
                                 const std::vector<double>& lambda_seq, const SweepOptions& opts,
                                 double floor_estimate) {
    ProblemSpec problem = problem_sans_potential;
    GridField v_hat(u_hat.grid);
    for (Eigen::Index i = 0; i < u_hat.grid.size(); ++i)
        v_hat.values[i] = -problem.discount.df_dr_at_zero(u_hat.grid.point(i)) * u_hat.values[i];
    problem.potential = PotentialSpec::grid_sampled(v_hat);

    TheoremCReport rep;
    const double norm_u = u_hat.max_abs();
    ValidationReport val = validate_assumptions(problem, norm_u + 1.0);
    if (!val.ok) throw AssumptionViolation(val.failure);
    rep.d0 = val.d0;
    rep.k0 = val.k0;
    rep.m_analytic = (rep.k0 / (2.0 * rep.d0)) * norm_u * norm_u;

    SweepResult sweep = lambda_sweep(problem, lambda_seq, opts);
    for (std::size_t i = 0; i < sweep.lambdas.size(); ++i) {
        if (sweep.failed[i]) continue;
        rep.errors.emplace_back(sweep.lambdas[i],
                                (sweep.reports[i].u.values - u_hat.values).abs().maxCoeff());
    }

    rep.floor_estimate = floor_estimate > 0.0 ? floor_estimate : rep.errors.back().second;
    rep.m_scheme = rep.floor_estimate / rep.errors.back().first;
    rep.raw_fit = rate_fit(rep.errors, rep.floor_estimate);

    // subtract the discretization floor before fitting the lambda-rate
    std::vector<std::pair<double, double>> adjusted;
    for (const auto& [lam, e] : rep.errors)
        if (e > 2.0 * rep.floor_estimate) adjusted.emplace_back(lam, e - rep.floor_estimate);
    if (adjusted.size() >= 3) {
        rep.floor_adjusted_fit = rate_fit(adjusted);
    } else {
        rep.floor_adjusted_fit.exact = true;  // everything at the floor
    }

    rep.bounds_ok = true;
    for (const auto& [lam, e] : rep.errors)
        if (e > (rep.m_analytic + rep.m_scheme) * lam) rep.bounds_ok = false;
    return rep;
}

TheoremBReport theorem_b_experiment(const GridField& u1, const GridField& u2,
                                    const std::vector<DiscreteMeasure>& measures,
                                    const GridField& sigma_weight, const ProblemSpec& problem,
                                    double slack_hyp, double slack_conclusion) {
    require_compatible(u1, u2);
    require_compatible(u1, sigma_weight);
    if (sigma_weight.values.minCoeff() <= 0.0)
        throw std::invalid_argument("theorem_b_experiment: sigma must be positive");
    (void)problem;

    TheoremBReport rep;
    rep.min_hypothesis_margin = std::numeric_limits<double>::infinity();
    for (const auto& m : measures) {
        double s = 0.0;
        for (const auto& a : m.atoms)
            s += a.w * (interpolate(u2, a.x) - interpolate(u1, a.x)) * interpolate(sigma_weight, a.x);
        rep.hypothesis_margins.push_back(s);
        rep.min_hypothesis_margin = std::min(rep.min_hypothesis_margin, s);
    }
    rep.conclusion_margin = (u2.values - u1.values).minCoeff();
    rep.hypothesis_holds = rep.min_hypothesis_margin >= -slack_hyp;
    if (rep.hypothesis_holds)
        rep.conclusion_holds = rep.conclusion_margin >= -slack_conclusion;
    else
        rep.no_claim = true;
    return rep;
}

GridField u_star_brute_force(const SolutionFamily1D& family,
                             const std::vector<DiscreteMeasure>& measures, const PotentialSpec& V,
                             const DiscountSpec& discount, double slack) {
    if (family.representatives.empty()) throw std::runtime_error("empty-class: no representatives");

    std::optional<GridField> best;
    for (const auto& w : family.representatives) {
        // the constraint functional is affine in an additive shift c with
        // positive slope sum w_i df/dr(x_i, 0); the largest admissible shift
        // is attained in closed form measure by measure
        double c_star = std::numeric_limits<double>::infinity();
        for (const auto& m : measures) {
            double g = constraint_functional(m, w, V, discount);
            double s = 0.0;
            for (const auto& a : m.atoms) s += a.w * discount.df_dr_at_zero(a.x);
            if (!(s > 0.0)) throw std::runtime_error("empty-class: nonpositive shift slope");
            c_star = std::min(c_star, (slack - g) / s);
        }
        if (!std::isfinite(c_star)) {
            if (measures.empty()) c_star = 0.0;
            else continue;
        }
        GridField shifted = w;
        shifted.values += c_star;
        if (!best)
            best = std::move(shifted);
        else
            best->values = best->values.max(shifted.values);
    }
    if (!best) throw std::runtime_error("empty-class: no shifted representative admissible");
    return *best;
}

}  // namespace ergoselect
