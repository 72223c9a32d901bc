#include "ergoselect/models.hpp"

#include "ergoselect/solver.hpp"

namespace ergoselect {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kAuditSamplesPerAxis = 4096;
}  // namespace

double CosineSum::eval(const Vec2& x) const {
    double v = offset;
    for (const auto& t : terms) v += t.amplitude * std::cos(kTwoPi * t.frequency * (x[t.axis] - t.phase));
    return v;
}

Vec2 CosineSum::gradient(const Vec2& x) const {
    Vec2 g = Vec2::Zero();
    for (const auto& t : terms) {
        double w = kTwoPi * t.frequency;
        g[t.axis] += -t.amplitude * w * std::sin(w * (x[t.axis] - t.phase));
    }
    return g;
}

double CosineSum::second_derivative(const Vec2& x, int axis) const {
    double v = 0.0;
    for (const auto& t : terms) {
        if (t.axis != axis) continue;
        double w = kTwoPi * t.frequency;
        v += -t.amplitude * w * w * std::cos(w * (x[t.axis] - t.phase));
    }
    return v;
}

double eval_H(const HamiltonianSpec& spec, const Vec2& x, const Vec2& p) {
    return 0.5 * p.squaredNorm() + spec.potential_w.eval(x);
}

double legendre_L(const HamiltonianSpec& spec, const Vec2& x, const Vec2& v) {
    return 0.5 * v.squaredNorm() - spec.potential_w.eval(x);
}

Vec2 dp_H(const HamiltonianSpec&, const Vec2&, const Vec2& p) { return p; }

Vec2 dv_L(const HamiltonianSpec&, const Vec2&, const Vec2& v) { return v; }

double DiscountSpec::f(const Vec2& x, double r) const {
    switch (family) {
        case DiscountFamily::Linear: return r;
        case DiscountFamily::SpatialLinear: return sigma.eval(x) * r;
        case DiscountFamily::ExpSpatial: return sigma.eval(x) * std::expm1(r);
    }
    return r;
}

double DiscountSpec::df_dr(const Vec2& x, double r) const {
    switch (family) {
        case DiscountFamily::Linear: return 1.0;
        case DiscountFamily::SpatialLinear: return sigma.eval(x);
        case DiscountFamily::ExpSpatial: return sigma.eval(x) * std::exp(r);
    }
    return 1.0;
}

double DiscountSpec::df_dr_at_zero(const Vec2& x) const { return df_dr(x, 0.0); }

bool DiffusionSpec::is_zero() const {
    for (const auto& a : axes)
        if (!(a.family == DiffusionFamily::Zero || a.theta == 0.0)) return false;
    return true;
}

std::vector<GridField> DiffusionSpec::sample(const PeriodicGrid& grid) const {
    if (int(axes.size()) != grid.dim)
        throw std::invalid_argument("DiffusionSpec: one axis entry per grid dimension required");
    std::vector<GridField> out;
    for (int ax = 0; ax < grid.dim; ++ax) {
        GridField f(grid);
        for (Eigen::Index i = 0; i < grid.size(); ++i) f.values[i] = eval(ax, grid.point(i));
        out.push_back(std::move(f));
    }
    return out;
}

namespace {

// dense audit sampling of a scalar function of one axis coordinate
template <class Fn>
void audit_minmax(int dim, Fn f, double& mn, double& mx) {
    mn = std::numeric_limits<double>::infinity();
    mx = -mn;
    const int n = (dim == 1) ? kAuditSamplesPerAxis : 512;
    for (int i = 0; i < n; ++i) {
        double x0 = double(i) / n;
        if (dim == 1) {
            double v = f(Vec2(x0, 0.0));
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        } else {
            for (int j = 0; j < n; ++j) {
                double v = f(Vec2(x0, double(j) / n));
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
        }
    }
}

}  // namespace

ValidationReport validate_assumptions(const ProblemSpec& problem, double R) {
    ValidationReport rep;
    rep.range_r = R;
    const int dim = problem.grid.dim;
    const auto& disc = problem.discount;

    double sig_min, sig_max;
    audit_minmax(dim, [&](const Vec2& x) { return disc.sigma.eval(x); }, sig_min, sig_max);

    switch (disc.family) {
        case DiscountFamily::Linear:
            rep.min_df_dr = 1.0;
            rep.d0 = 1.0;
            rep.k0 = 0.0;
            break;
        case DiscountFamily::SpatialLinear:
            rep.min_df_dr = sig_min;
            rep.d0 = sig_min;
            rep.k0 = 0.0;
            break;
        case DiscountFamily::ExpSpatial:
            // df/dr = sigma(x) e^r: min at r = -R; d/dr of df/dr bounded by sigma_max e^R
            rep.min_df_dr = sig_min * std::exp(-R);
            rep.d0 = sig_min;
            rep.k0 = sig_max * std::exp(R);
            break;
    }

    double f0_min, f0_max;
    audit_minmax(dim, [&](const Vec2& x) { return std::abs(disc.f(x, 0.0)); }, f0_min, f0_max);
    rep.max_f_at_zero = f0_max;

    rep.min_diffusion = 0.0;
    for (int ax = 0; ax < dim; ++ax) {
        double amn, amx;
        audit_minmax(dim, [&](const Vec2& x) { return problem.diffusion.eval(ax, x); }, amn, amx);
        rep.min_diffusion = std::min(ax == 0 ? amn : rep.min_diffusion, amn);
    }

    double dw_min, dw_max;
    audit_minmax(dim, [&](const Vec2& x) { return problem.hamiltonian.potential_w.gradient(x).norm(); },
                 dw_min, dw_max);
    rep.gamma1 = dw_max;  // |D_x H| = |DW| <= gamma1 (1 + |H|) with gamma1 = max |DW|

    double w_min, w_max;
    audit_minmax(dim, [&](const Vec2& x) { return problem.hamiltonian.potential_w.eval(x); }, w_min, w_max);
    rep.gamma2 = 1.0 + 2.0 * std::abs(w_min);  // min_{x,p} H = min_x W for the mechanical family

    rep.ok = true;
    if (!(rep.min_df_dr > 0.0)) {
        rep.ok = false;
        rep.failure = "df/dr must be > 0 on the validated range";
    } else if (rep.max_f_at_zero > 1e-14) {
        rep.ok = false;
        rep.failure = "f(x,0) must vanish";
    } else if (rep.min_diffusion < 0.0) {
        rep.ok = false;
        rep.failure = "negative diffusion";
    }
    return rep;
}

}  // namespace ergoselect
