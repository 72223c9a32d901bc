#pragma once

// Experiments realizing the selection results: vanishing-discount sweeps,
// the 1D first-order oracle solution family, the constraint certificate,
// the prescribed-limit rate harness and the comparison experiment.

#include "ergoselect/mather.hpp"
#include "ergoselect/rate_fit.hpp"

namespace ergoselect {

struct SweepOptions {
    SolverOptions solver;
    std::function<double(double)> eta_rule;  // default: eta = 0 (solve E_lambda directly)
    double cauchy_tolerance = 0.05;
    bool richardson = false;  // opt-in limit extrapolation 2 u_{l/2} - u_l
};

struct SweepResult {
    std::vector<double> lambdas;
    std::vector<SolveReport> reports;      // aligned with lambdas; failed rows hold best iterate
    std::vector<char> failed;
    std::vector<double> pairwise;          // sup-distances between successive successful solves
    std::optional<GridField> limit;        // present only if the final distance is Cauchy-small
    double equi_lipschitz_max = 0.0;
    double lambda_u_sup_max = 0.0;
    bool used_richardson = false;
};

SweepResult lambda_sweep(const ProblemSpec& problem, const std::vector<double>& lambda_seq,
                         const SweepOptions& opts = {});

// One-parameter family of first-order ergodic solutions
// u'(x) = +/- sqrt(2 (c_H - W(x))) with sign switches inside the wells
// between consecutive maximizers of W; used purely as a brute-force oracle.
struct SolutionFamily1D {
    double c_h = 0.0;
    double max_speed = 0.0;                       // max |u'| over the family
    std::vector<GridField> representatives;
    std::vector<std::vector<double>> switches;    // switch positions per representative
    std::vector<double> maximizers;               // zero set of c_H - W
    bool degenerate = false;                      // constant W: family = {0}
};

SolutionFamily1D oracle_solution_family(const HamiltonianSpec& hamiltonian, const PeriodicGrid& grid,
                                        int n_representatives = 8);

struct TheoremAReport {
    std::vector<double> functionals;  // constraint functional of the limit per measure
    double worst = 0.0;
    double lambda_level_lhs = 0.0;    // int f(x, lambda u_lambda) + lambda V d(mu) at smallest lambda
    double slack = 0.0;
    bool pass = false;
};

TheoremAReport theorem_a_certificate(const SweepResult& sweep,
                                     const std::vector<DiscreteMeasure>& measures,
                                     const ProblemSpec& problem, double slack);

struct TheoremCReport {
    std::vector<std::pair<double, double>> errors;  // (lambda, ||u_lambda - u_hat||_inf)
    RateFit raw_fit;
    RateFit floor_adjusted_fit;
    double floor_estimate = 0.0;   // error level attributed to discretization
    double m_analytic = 0.0;          // (K0 / 2 d0) ||u_hat||_inf^2
    double m_scheme = 0.0;         // floor_estimate / lambda_min
    double d0 = 0.0, k0 = 0.0;
    bool bounds_ok = false;        // e(lambda) <= (m_analytic + m_scheme) lambda for every row
};

// Build V_hat = -df/dr(x,0) u_hat, sweep, and report the O(lambda) rate.
// floor_estimate <= 0 means self-estimate from the smallest-lambda error.
TheoremCReport theorem_c_harness(const ProblemSpec& problem_sans_potential, const GridField& u_hat,
                                 const std::vector<double>& lambda_seq, const SweepOptions& opts = {},
                                 double floor_estimate = 0.0);

struct TheoremBReport {
    std::vector<double> hypothesis_margins;  // int (u2-u1) sigma d(mu) per measure
    double min_hypothesis_margin = 0.0;
    double conclusion_margin = 0.0;          // min over nodes of u2 - u1
    bool hypothesis_holds = false;           // within the given slack
    bool conclusion_holds = false;
    bool no_claim = false;                   // hypothesis violated: theorem says nothing
};

TheoremBReport theorem_b_experiment(const GridField& u1, const GridField& u2,
                                    const std::vector<DiscreteMeasure>& measures,
                                    const GridField& sigma_weight, const ProblemSpec& problem,
                                    double slack_hyp, double slack_conclusion);

// Filter the sampled family by the constraint (within slack), shift each
// representative to the largest admissible constant, take the pointwise sup.
GridField u_star_brute_force(const SolutionFamily1D& family,
                             const std::vector<DiscreteMeasure>& measures, const PotentialSpec& V,
                             const DiscountSpec& discount, double slack = 0.0);

}  // namespace ergoselect
