#pragma once

// Discrete adjoint: the transpose of the scheme Jacobian with a Dirac
// source, producing the density sigma whose positivity and mass identities
// certify the construction.

#include "ergoselect/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>

namespace ergoselect {

struct AdjointSolution {
    GridField sigma;
    Eigen::Index x0_index = 0;
    double lambda = 0.0;
    double eta = 0.0;
    double mass = 0.0;           // integrate(sigma)
    double weighted_mass = 0.0;  // integrate(df/dr(x, lambda u) * sigma)
    double linear_residual = 0.0;
    double min_sigma = 0.0;
};

// Shared factorization of J^T: factor once, backsolve once per Dirac source.
class AdjointFactorization {
  public:
    AdjointFactorization(Eigen::SparseMatrix<double> jac_transposed);
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    const Eigen::SparseMatrix<double>& matrix() const { return jt_; }

  private:
    Eigen::SparseMatrix<double> jt_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

// Solve J^T sigma = lambda/h^dim * e_{x0}. The scaling makes the h^dim-weighted
// weak form reproduce lambda * phi(x0) exactly.
AdjointSolution solve_adjoint(const AdjointFactorization& fact, const ProblemSpec& problem,
                              const GridField& u, Eigen::Index x0_index, double lambda, double eta);

// Convenience: assemble, factor, solve for a single source.
AdjointSolution solve_adjoint(const ProblemSpec& problem, const GridField& u, Eigen::Index x0_index,
                              double lambda, double eta);

struct DualityReport {
    double max_defect = 0.0;  // max |h^dim <sigma, J phi> - lambda phi(x0)| over trials
    int trials = 0;
    bool pass = false;
    double tolerance = 0.0;
};

// Weak-form certificate over the Fourier test functions plus a few seeded
// smooth pseudo-random fields; defect must stay below 1e-9 * ||phi||_inf.
DualityReport duality_certificate(const AdjointSolution& adjoint, const Eigen::SparseMatrix<double>& jac,
                                  const std::vector<GridField>& trial_fields);

std::vector<GridField> default_trial_fields(const PeriodicGrid& grid, int max_mode, int n_random,
                                            unsigned seed);

}  // namespace ergoselect
