#include "ergoselect/adjoint.hpp"

#include <cmath>
#include <random>

namespace ergoselect {

AdjointFactorization::AdjointFactorization(Eigen::SparseMatrix<double> jac_transposed)
    : jt_(std::move(jac_transposed)) {
    jt_.makeCompressed();
    lu_.compute(jt_);
    if (lu_.info() != Eigen::Success)
        throw std::runtime_error("singular-system: adjoint factorization failed");
}

Eigen::VectorXd AdjointFactorization::solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = lu_.solve(rhs);
    // one round of iterative refinement: the certificates demand tiny residuals
    Eigen::VectorXd r = rhs - jt_ * x;
    x += lu_.solve(r);
    return x;
}

AdjointSolution solve_adjoint(const AdjointFactorization& fact, const ProblemSpec& problem,
                              const GridField& u, Eigen::Index x0_index, double lambda, double eta) {
    const auto& g = problem.grid;
    const double cell = (g.dim == 2) ? g.h * g.h : g.h;

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.size());
    rhs[x0_index] = lambda / cell;

    AdjointSolution sol;
    sol.sigma = GridField(g);
    sol.sigma.values = fact.solve(rhs).array();
    sol.x0_index = x0_index;
    sol.lambda = lambda;
    sol.eta = eta;
    sol.linear_residual = (fact.matrix() * sol.sigma.values.matrix() - rhs).cwiseAbs().maxCoeff();
    sol.min_sigma = sol.sigma.values.minCoeff();
    if (sol.min_sigma < -1e-9) throw std::runtime_error("negativity-violation: min sigma < -1e-9");

    sol.mass = integrate(sol.sigma);
    GridField weighted(g);
    for (Eigen::Index i = 0; i < g.size(); ++i)
        weighted.values[i] =
            problem.discount.df_dr(g.point(i), lambda * u.values[i]) * sol.sigma.values[i];
    sol.weighted_mass = integrate(weighted);
    return sol;
}

AdjointSolution solve_adjoint(const ProblemSpec& problem, const GridField& u, Eigen::Index x0_index,
                              double lambda, double eta) {
    Eigen::SparseMatrix<double> jac = assemble_jacobian(problem, u, lambda, eta);
    AdjointFactorization fact(jac.transpose());
    return solve_adjoint(fact, problem, u, x0_index, lambda, eta);
}

DualityReport duality_certificate(const AdjointSolution& adjoint, const Eigen::SparseMatrix<double>& jac,
                                  const std::vector<GridField>& trial_fields) {
    const auto& g = adjoint.sigma.grid;
    const double cell = (g.dim == 2) ? g.h * g.h : g.h;

    DualityReport rep;
    rep.trials = int(trial_fields.size());
    double max_norm = 0.0;
    for (const auto& phi : trial_fields) {
        Eigen::VectorXd jphi = jac * phi.values.matrix();
        const double pairing = cell * (adjoint.sigma.values * jphi.array()).sum();
        const double defect = std::abs(pairing - adjoint.lambda * phi.values[adjoint.x0_index]);
        rep.max_defect = std::max(rep.max_defect, defect);
        max_norm = std::max(max_norm, phi.max_abs());
    }
    rep.tolerance = 1e-9 * std::max(max_norm, 1.0);
    rep.pass = rep.max_defect <= rep.tolerance;
    return rep;
}

std::vector<GridField> default_trial_fields(const PeriodicGrid& grid, int max_mode, int n_random,
                                            unsigned seed) {
    std::vector<GridField> out;
    for (auto& t : fourier_test_functions(grid, max_mode)) out.push_back(std::move(t.phi));

    // smooth pseudo-random fields: low-mode Fourier series with decaying
    // coefficients, fixed seed
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int r = 0; r < n_random; ++r) {
        GridField f(grid);
        for (int k = 1; k <= 4; ++k) {
            const double as = unif(rng) / (k * k), ac = unif(rng) / (k * k);
            const double bs = unif(rng) / (k * k), bc = unif(rng) / (k * k);
            for (Eigen::Index i = 0; i < grid.size(); ++i) {
                Vec2 x = grid.point(i);
                f.values[i] += as * std::sin(kTwoPi * k * x[0]) + ac * std::cos(kTwoPi * k * x[0]);
                if (grid.dim == 2)
                    f.values[i] += bs * std::sin(kTwoPi * k * x[1]) + bc * std::cos(kTwoPi * k * x[1]);
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace ergoselect
