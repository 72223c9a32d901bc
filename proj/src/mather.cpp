#include "ergoselect/mather.hpp"

#include <cmath>

namespace ergoselect {

DiscreteMeasure build_measure(const GridField& u, const GridField& sigma, const ProblemSpec& problem) {
    require_compatible(u, sigma);
    const auto& g = u.grid;
    const double total = sigma.values.sum();
    if (!(total > 0.0)) throw std::runtime_error("unnormalizable: sum sigma <= 0");

    DiscreteMeasure m;
    m.atoms.resize(std::size_t(g.size()));
    const double inv_h = 1.0 / g.h;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        Atom& a = m.atoms[std::size_t(i)];
        a.x = g.point(i);
        a.w = sigma.values[i] / total;
        for (int ax = 0; ax < g.dim; ++ax) {
            const double pm = (u.values[i] - u.values[g.neighbor(i, ax, -1)]) * inv_h;
            const double pp = (u.values[g.neighbor(i, ax, +1)] - u.values[i]) * inv_h;
            const bool up_active = pm > 0.0;
            const bool dn_active = pp < 0.0;
            if (up_active && !dn_active)
                a.p[ax] = pm;
            else if (dn_active && !up_active)
                a.p[ax] = pp;
            else
                a.p[ax] = 0.5 * (pm + pp);  // kink or flat: averaged value
        }
        a.v = dp_H(problem.hamiltonian, a.x, a.p);
    }
    return m;
}

DiscreteMeasure pushforward(const DiscreteMeasure& measure, Representation target,
                            const HamiltonianSpec& spec) {
    DiscreteMeasure out = measure;
    out.rep = target;
    for (auto& a : out.atoms) {
        if (target == Representation::Lagrangian)
            a.v = dp_H(spec, a.x, a.p);
        else
            a.p = dv_L(spec, a.x, a.v);
    }
    return out;
}

double action_defect(const DiscreteMeasure& measure, const ProblemSpec& problem, double c_h) {
    double hamiltonian_form = 0.0, lagrangian_form = 0.0;
    for (const auto& a : measure.atoms) {
        const Vec2 v = dp_H(problem.hamiltonian, a.x, a.p);
        const double per_atom_h = v.dot(a.p) - eval_H(problem.hamiltonian, a.x, a.p);
        const double per_atom_l = legendre_L(problem.hamiltonian, a.x, a.v);
        if (a.w > 0.0 && std::abs(per_atom_h - per_atom_l) > 1e-12 * (1.0 + std::abs(per_atom_h)))
            throw std::logic_error("Fenchel equality violated atom-wise");
        hamiltonian_form += a.w * per_atom_h;
        lagrangian_form += a.w * per_atom_l;
    }
    if (std::abs(hamiltonian_form - lagrangian_form) > 1e-10 * (1.0 + std::abs(hamiltonian_form)))
        throw std::logic_error("action forms disagree");
    return std::abs(hamiltonian_form + c_h);
}

double holonomy_defect(const DiscreteMeasure& measure, const ProblemSpec& problem, int max_mode) {
    auto tests = fourier_test_functions(problem.grid, max_mode);
    const auto& g = problem.grid;
    double worst = 0.0;
    for (const auto& t : tests) {
        double s = 0.0;
        for (const auto& a : measure.atoms) {
            // atoms sit on nodes; evaluate the analytic derivatives there
            Eigen::Index idx = g.index(int(std::lround(a.x[0] / g.h)), int(std::lround(a.x[1] / g.h)));
            double term = 0.0;
            for (int ax = 0; ax < g.dim; ++ax) {
                term += a.v[ax] * t.dphi[ax].values[idx];
                term -= problem.diffusion.eval(ax, a.x) * t.d2phi[ax].values[idx];
            }
            s += a.w * term;
        }
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

double constraint_functional(const DiscreteMeasure& measure, const GridField& w_field,
                             const PotentialSpec& V, const DiscountSpec& discount) {
    double s = 0.0;
    for (const auto& a : measure.atoms)
        s += a.w * (discount.df_dr_at_zero(a.x) * interpolate(w_field, a.x) + V.eval(a.x));
    return s;
}

double total_variation(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.atoms.size() != b.atoms.size())
        throw std::invalid_argument("total_variation: atom counts differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.atoms.size(); ++i) s += std::abs(a.atoms[i].w - b.atoms[i].w);
    return 0.5 * s;
}

std::vector<MeasureFamilyEntry> measure_family(const ProblemSpec& problem,
                                               const std::vector<double>& lambda_seq,
                                               const std::vector<Vec2>& x0_list,
                                               const MeasureFamilyOptions& opts) {
    for (std::size_t i = 1; i < lambda_seq.size(); ++i)
        if (!(lambda_seq[i] < lambda_seq[i - 1]))
            throw std::invalid_argument("measure_family: lambda_seq must be decreasing");

    auto eta_of = opts.eta_rule ? opts.eta_rule : [](double lam) { return lam * lam; };
    const auto& g = problem.grid;

    std::vector<MeasureFamilyEntry> out(x0_list.size());
    // one solve + factorization per lambda, shared across the x0 sources
    SolverOptions solver_opts = opts.solver;
    std::vector<std::vector<DiscreteMeasure>> per_x0(x0_list.size());
    try {
        for (double lam : lambda_seq) {
            const double eta = eta_of(lam);
            SolveReport rep = solve(problem, lam, eta, solver_opts);
            solver_opts.initial_guess = rep.u;

            Eigen::SparseMatrix<double> jac = assemble_jacobian(problem, rep.u, lam, eta);
            AdjointFactorization fact(jac.transpose());
            for (std::size_t k = 0; k < x0_list.size(); ++k) {
                Eigen::Index x0_idx = g.index(int(std::lround(x0_list[k][0] / g.h)),
                                              int(std::lround(x0_list[k][1] / g.h)));
                AdjointSolution adj = solve_adjoint(fact, problem, rep.u, x0_idx, lam, eta);
                DiscreteMeasure m = build_measure(rep.u, adj.sigma, problem);
                m.lambda = lam;
                m.eta = eta;
                m.x0 = g.point(x0_idx);
                per_x0[k].push_back(std::move(m));
            }
        }
    } catch (const std::exception& e) {
        for (auto& entry : out) {
            entry.failed = true;
            entry.error = e.what();
        }
        return out;
    }

    for (std::size_t k = 0; k < x0_list.size(); ++k) {
        auto& seq = per_x0[k];
        out[k].measure = seq.back();
        for (std::size_t j = 1; j < seq.size(); ++j)
            out[k].tv_distances.push_back(total_variation(seq[j - 1], seq[j]));
    }
    return out;
}

}  // namespace ergoselect
