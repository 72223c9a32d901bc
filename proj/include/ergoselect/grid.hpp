#pragma once

// Periodic uniform grids on the torus T^1 / T^2 with the discrete
// differential operators, quadrature and Fourier test functions used by
// the scheme and its certificates.

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

namespace ergoselect {

using Vec2 = Eigen::Vector2d;  // point on the torus / momentum; 1D uses component 0

struct PeriodicGrid {
    int dim = 1;          // 1 or 2
    int n_per_axis = 8;   // nodes per axis, h = 1/n_per_axis
    double h = 0.125;

    PeriodicGrid() = default;
    PeriodicGrid(int dim_, int n_per_axis_) : dim(dim_), n_per_axis(n_per_axis_) {
        if (dim < 1 || dim > 2) throw std::invalid_argument("PeriodicGrid: dim must be 1 or 2");
        if (n_per_axis < 8) throw std::invalid_argument("PeriodicGrid: n_per_axis must be >= 8");
        h = 1.0 / n_per_axis;
    }

    Eigen::Index size() const {
        Eigen::Index s = n_per_axis;
        for (int d = 1; d < dim; ++d) s *= n_per_axis;
        return s;
    }
    int wrap(int i) const {
        int m = i % n_per_axis;
        return m < 0 ? m + n_per_axis : m;
    }
    // row-major: axis 0 is the slow index
    Eigen::Index index(int i0, int i1 = 0) const {
        return dim == 1 ? Eigen::Index(wrap(i0))
                        : Eigen::Index(wrap(i0)) * n_per_axis + wrap(i1);
    }
    std::array<int, 2> coords(Eigen::Index idx) const {
        if (dim == 1) return {int(idx), 0};
        return {int(idx / n_per_axis), int(idx % n_per_axis)};
    }
    Vec2 point(Eigen::Index idx) const {
        auto c = coords(idx);
        return Vec2(c[0] * h, c[1] * h);
    }
    // neighbour in +/- direction along an axis
    Eigen::Index neighbor(Eigen::Index idx, int axis, int step) const {
        auto c = coords(idx);
        c[axis] = wrap(c[axis] + step);
        return index(c[0], c[1]);
    }

    friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) {
        return a.dim == b.dim && a.n_per_axis == b.n_per_axis;
    }
};

struct GridField {
    PeriodicGrid grid;
    Eigen::ArrayXd values;

    GridField() = default;
    explicit GridField(const PeriodicGrid& g) : grid(g), values(Eigen::ArrayXd::Zero(g.size())) {}
    GridField(const PeriodicGrid& g, Eigen::ArrayXd v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw std::invalid_argument("GridField: size mismatch");
    }

    template <class Fn>
    static GridField from_function(const PeriodicGrid& g, Fn f) {
        GridField out(g);
        for (Eigen::Index i = 0; i < g.size(); ++i) out.values[i] = f(g.point(i));
        return out;
    }

    double max_abs() const { return values.abs().maxCoeff(); }
    bool all_finite() const { return values.isFinite().all(); }
};

void require_compatible(const GridField& a, const GridField& b);

// One-sided differences with periodic wrap: D-  and D+ along `axis`.
std::pair<GridField, GridField> forward_backward_differences(const GridField& u, int axis);

// (u_{i+1} - 2 u_i + u_{i-1}) / h^2 along `axis`.
GridField second_difference(const GridField& u, int axis);

// sum_axis a_axis(x) * second_difference(u, axis); every a >= 0 required.
GridField diffusion_term(const GridField& u, const std::vector<GridField>& a_per_axis);

// h^dim * sum(values): periodic midpoint quadrature.
double integrate(const GridField& u);

// max over nodes and axes of |D+ u|.
double discrete_lipschitz(const GridField& u);

// Cyclic shift by k nodes along an axis (wrap-consistency checks).
GridField shift(const GridField& u, int axis, int k);

// Periodic multilinear interpolation at an arbitrary point.
double interpolate(const GridField& u, const Vec2& x);

struct TestFunction {
    GridField phi;                   // sup-norm 1
    std::array<GridField, 2> dphi;   // analytic first derivative per axis
    std::array<GridField, 2> d2phi;  // analytic diagonal second derivative per axis
};

// sin/cos of modes 1..max_mode per axis (and products in 2D) with analytic
// derivatives sampled on the grid. Requires max_mode < n_per_axis/2.
std::vector<TestFunction> fourier_test_functions(const PeriodicGrid& grid, int max_mode);

}  // namespace ergoselect
