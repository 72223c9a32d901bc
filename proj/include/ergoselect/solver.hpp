#pragma once

// Monotone finite-difference solver for the discounted equation
//   f(x, lambda u) + H(x, Du) + lambda V(x)
//     = eta^2 Lap u + sum_ax a_ax(x) D^2_ax u + c_H
// on the periodic grid, with ergodic-constant estimation and the
// vanishing-viscosity gap experiment.

#include "ergoselect/grid.hpp"
#include "ergoselect/models.hpp"

#include <Eigen/Sparse>

#include <optional>

namespace ergoselect {

struct ProblemSpec {
    HamiltonianSpec hamiltonian;
    DiffusionSpec diffusion;
    DiscountSpec discount;
    PotentialSpec potential;
    double c_h = 0.0;  // ergodic constant entering the equation as data
    PeriodicGrid grid;
};

struct SolveReport {
    GridField u;
    double residual_sup = 0.0;
    int iterations = 0;
    double lambda = 0.0;
    double eta = 0.0;
    double lipschitz = 0.0;
    double lambda_u_sup = 0.0;  // lambda * ||u||_inf, the discount-range bound R
    double wall_time = 0.0;     // seconds
};

struct NonConvergence : std::runtime_error {
    SolveReport best;
    NonConvergence(std::string what, SolveReport b)
        : std::runtime_error(std::move(what)), best(std::move(b)) {}
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 100;           // outer Newton iterations
    double lambda_ceiling = 0.5;  // refuse lambda above this
    int max_halvings = 30;        // damping halvings before marching fallback
    int march_steps = 200;        // pseudo-time steps per fallback round
    std::optional<GridField> initial_guess;  // default: continuation from the ceiling
};

// Engquist-Osher flux for the mechanical family:
//   W(x) + 1/2 sum_ax [ max(p_minus,0)^2 + min(p_plus,0)^2 ].
double numerical_hamiltonian(const HamiltonianSpec& spec, const Vec2& x, const Vec2& p_minus,
                             const Vec2& p_plus);

// Discrete residual F(u); zero residual <=> discrete solution.
GridField residual(const ProblemSpec& problem, const GridField& u, double lambda, double eta);

// Exact Jacobian of the discrete residual at u. M-matrix: off-diagonal <= 0,
// diagonal > 0, row sums = lambda df/dr(x, lambda u). Throws logic_error on
// a monotonicity violation (scheme bug, not user input).
Eigen::SparseMatrix<double> assemble_jacobian(const ProblemSpec& problem, const GridField& u,
                                              double lambda, double eta);

SolveReport solve(const ProblemSpec& problem, double lambda, double eta,
                  const SolverOptions& opts = {});

struct ErgodicEstimate {
    double c_h = 0.0;
    std::vector<std::pair<double, double>> table;  // (lambda, c(lambda) = -lambda mean w)
};

// Solve the plain discounted equation (Linear discount, V = 0, no c_H term)
// for each lambda and extrapolate c(lambda) = -lambda mean(w) to lambda -> 0
// by a linear fit through the last two points.
ErgodicEstimate estimate_ergodic_constant(const ProblemSpec& problem, double eta,
                                          const std::vector<double>& lambda_seq,
                                          const SolverOptions& opts = {});

struct ViscosityGapRow {
    double eta = 0.0;
    double gap = 0.0;  // ||u^eta_lambda - u_lambda||_inf
    bool failed = false;
};

struct ViscosityGapReport {
    std::vector<ViscosityGapRow> rows;
    double fitted_slope = 0.0;  // log-log least squares of gap vs eta
    GridField u_base;           // eta = 0 solution
};

ViscosityGapReport vanishing_viscosity_gap(const ProblemSpec& problem, double lambda,
                                           const std::vector<double>& eta_seq,
                                           const SolverOptions& opts = {}, int workers = 1);

}  // namespace ergoselect
