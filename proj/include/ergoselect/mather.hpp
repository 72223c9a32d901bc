#pragma once

// Approximate generalized Mather measures built from (u, sigma) pairs, and
// the action / holonomy / constraint functionals evaluated against them.

#include "ergoselect/adjoint.hpp"

#include <functional>
#include <string>

namespace ergoselect {

// Single slack constant for the measure identities, calibrated once on the
// cos(4 pi x) model and frozen: defects must stay below
// kMeasureSlackC * (h + lambda + eta).
inline constexpr double kMeasureSlackC = 8.0;

enum class Representation { Hamiltonian, Lagrangian };  // nu (x,p) vs mu (x,v)

struct Atom {
    Vec2 x = Vec2::Zero();
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();  // == dp_H(x, p) always
    double w = 0.0;
};

struct DiscreteMeasure {
    std::vector<Atom> atoms;
    Representation rep = Representation::Hamiltonian;
    double lambda = 0.0;
    double eta = 0.0;
    Vec2 x0 = Vec2::Zero();
};

// One atom per node, weight sigma_i / sum sigma. The momentum is the
// scheme-consistent gradient: the active EO branch when exactly one branch
// is active per axis, the average of D- and D+ otherwise.
DiscreteMeasure build_measure(const GridField& u, const GridField& sigma, const ProblemSpec& problem);

DiscreteMeasure pushforward(const DiscreteMeasure& measure, Representation target,
                            const HamiltonianSpec& spec);

// | sum w (dpH(x,p).p - H(x,p)) + c_H |; cross-checked against the Lagrangian
// form sum w L(x,v) atom-wise (Fenchel equality within 1e-12).
double action_defect(const DiscreteMeasure& measure, const ProblemSpec& problem, double c_h);

// max over sup-normalized test functions of
// | sum w ( dpH(x,p).Dphi(x) - sum_ax a_ax(x) D2_ax phi(x) ) |.
double holonomy_defect(const DiscreteMeasure& measure, const ProblemSpec& problem, int max_mode);

// sum w [ df/dr(x,0) * w_field(x) + V(x) ]; <= 0 means the Theorem A
// constraint holds for this measure.
double constraint_functional(const DiscreteMeasure& measure, const GridField& w_field,
                             const PotentialSpec& V, const DiscountSpec& discount);

struct MeasureFamilyEntry {
    DiscreteMeasure measure;            // at the smallest lambda
    std::vector<double> tv_distances;   // between successive-lambda measures
    bool failed = false;
    std::string error;
};

struct MeasureFamilyOptions {
    SolverOptions solver;
    std::function<double(double)> eta_rule;  // default eta = lambda^2
};

// For each x0, solve down the lambda sequence (eta = eta_rule(lambda)) and
// build the measure at the smallest lambda; earlier measures feed the
// total-variation Cauchy diagnostics.
std::vector<MeasureFamilyEntry> measure_family(const ProblemSpec& problem,
                                               const std::vector<double>& lambda_seq,
                                               const std::vector<Vec2>& x0_list,
                                               const MeasureFamilyOptions& opts = {});

double total_variation(const DiscreteMeasure& a, const DiscreteMeasure& b);

}  // namespace ergoselect
