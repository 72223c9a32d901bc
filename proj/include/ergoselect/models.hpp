#pragma once

// Catalog of mechanical Hamiltonians H(x,p) = |p|^2/2 + W(x), discount
// nonlinearities f(x,r), diagonal diffusions a(x) and potentials V(x), with
// Legendre data and the assumption validators the solver relies on.

#include "ergoselect/grid.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace ergoselect {

// --- closed-form scalar functions on the torus: offset + sum of cosine terms ---

struct CosineTerm {
    int axis = 0;
    double amplitude = 0.0;
    int frequency = 1;       // integer so the term is 1-periodic
    double phase = 0.0;      // W term: amplitude * cos(2*pi*frequency*(x[axis] - phase))
};

struct CosineSum {
    double offset = 0.0;
    std::vector<CosineTerm> terms;

    double eval(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;
    double second_derivative(const Vec2& x, int axis) const;

    static CosineSum constant(double c) { return CosineSum{c, {}}; }
    static CosineSum cosine(double amplitude, int frequency, int axis = 0, double phase = 0.0) {
        return CosineSum{0.0, {CosineTerm{axis, amplitude, frequency, phase}}};
    }
};

// --- Hamiltonian ---

struct HamiltonianSpec {
    CosineSum potential_w;  // mechanical family: H(x,p) = |p|^2/2 + W(x)

    static HamiltonianSpec mechanical(CosineSum w) { return HamiltonianSpec{std::move(w)}; }
    // The running double-well example H(x,p) = p^2/2 + cos(4 pi x).
    static HamiltonianSpec cos4pix() { return mechanical(CosineSum::cosine(1.0, 2)); }
    static HamiltonianSpec free_particle() { return mechanical(CosineSum::constant(0.0)); }
};

double eval_H(const HamiltonianSpec& spec, const Vec2& x, const Vec2& p);
double legendre_L(const HamiltonianSpec& spec, const Vec2& x, const Vec2& v);
Vec2 dp_H(const HamiltonianSpec& spec, const Vec2& x, const Vec2& p);
Vec2 dv_L(const HamiltonianSpec& spec, const Vec2& x, const Vec2& v);

// --- discount nonlinearity ---

enum class DiscountFamily { Linear, SpatialLinear, ExpSpatial };

struct DiscountSpec {
    DiscountFamily family = DiscountFamily::Linear;
    CosineSum sigma;  // spatial factor for SpatialLinear / ExpSpatial; must be > 0

    double f(const Vec2& x, double r) const;
    double df_dr(const Vec2& x, double r) const;
    double df_dr_at_zero(const Vec2& x) const;

    static DiscountSpec linear() { return DiscountSpec{DiscountFamily::Linear, CosineSum::constant(1.0)}; }
    static DiscountSpec spatial_linear(CosineSum s) { return DiscountSpec{DiscountFamily::SpatialLinear, std::move(s)}; }
    static DiscountSpec exp_spatial(CosineSum s) { return DiscountSpec{DiscountFamily::ExpSpatial, std::move(s)}; }
};

// --- diffusion: diagonal A(x) = diag(a_0(x), a_1(x)), each a >= 0 ---

enum class DiffusionFamily { Zero, Constant, SinSq };

struct DiffusionAxis {
    DiffusionFamily family = DiffusionFamily::Zero;
    double theta = 0.0;  // strength
    int k = 1;           // SinSq: a(x) = theta * sin(pi k x)^2

    double eval(double x) const {
        switch (family) {
            case DiffusionFamily::Zero: return 0.0;
            case DiffusionFamily::Constant: return theta;
            case DiffusionFamily::SinSq: {
                double s = std::sin(M_PI * k * x);
                return theta * s * s;
            }
        }
        return 0.0;
    }
};

struct DiffusionSpec {
    std::vector<DiffusionAxis> axes;  // one entry per axis

    static DiffusionSpec zero(int dim) { return DiffusionSpec{std::vector<DiffusionAxis>(dim)}; }
    static DiffusionSpec constant(int dim, double theta) {
        DiffusionSpec d;
        d.axes.assign(dim, DiffusionAxis{DiffusionFamily::Constant, theta, 1});
        return d;
    }
    static DiffusionSpec sin_sq(int dim, double theta, int k = 1) {
        DiffusionSpec d;
        d.axes.assign(dim, DiffusionAxis{DiffusionFamily::SinSq, theta, k});
        return d;
    }

    double eval(int axis, const Vec2& x) const { return axes.at(axis).eval(x[axis]); }
    bool is_zero() const;
    std::vector<GridField> sample(const PeriodicGrid& grid) const;
};

// --- potential: closed form or grid-sampled (V_hat_0 in the Theorem C harness) ---

struct PotentialSpec {
    enum class Kind { ClosedForm, GridSampled } kind = Kind::ClosedForm;
    CosineSum form;                    // ClosedForm
    std::optional<GridField> samples;  // GridSampled; off-node evaluation is linear interpolation

    double eval(const Vec2& x) const {
        if (kind == Kind::ClosedForm) return form.eval(x);
        return interpolate(*samples, x);
    }

    static PotentialSpec zero() { return PotentialSpec{}; }
    static PotentialSpec closed_form(CosineSum c) { return PotentialSpec{Kind::ClosedForm, std::move(c), std::nullopt}; }
    static PotentialSpec grid_sampled(GridField f) { return PotentialSpec{Kind::GridSampled, {}, std::move(f)}; }
};

struct ProblemSpec;  // defined in solver.hpp

struct AssumptionViolation : std::runtime_error {
    explicit AssumptionViolation(const std::string& clause)
        : std::runtime_error("assumption-violation: " + clause) {}
};

// Report of the (H1)-(H3) checks over |r| <= R, plus the constants the
// Theorem C harness and the equi-Lipschitz report consume.
struct ValidationReport {
    double min_df_dr = 0.0;       // min of df/dr over T^n x [-R, R] (> 0 required)
    double max_f_at_zero = 0.0;   // max |f(x,0)| (== 0 required)
    double min_diffusion = 0.0;   // min over axes and x of a(x) (>= 0 required)
    double d0 = 0.0;              // min_x df/dr(x, 0)
    double k0 = 0.0;              // Lipschitz constant of df/dr in r on [-R, R]
    double gamma1 = 0.0;          // |D_x H| <= gamma1 (1 + |H|)
    double gamma2 = 0.0;          // 1 + 2 |min H|
    double range_r = 0.0;         // the R used
    bool ok = false;
    std::string failure;
};

ValidationReport validate_assumptions(const ProblemSpec& problem, double R);

}  // namespace ergoselect
