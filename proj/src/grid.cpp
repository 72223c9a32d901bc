#include "ergoselect/grid.hpp"

#include <cmath>

namespace ergoselect {

void require_compatible(const GridField& a, const GridField& b) {
    if (!(a.grid == b.grid)) throw std::logic_error("incompatible-grid: fields live on different grids");
}

static void require_axis(const GridField& u, int axis) {
    if (axis < 0 || axis >= u.grid.dim) throw std::invalid_argument("axis out of range");
}

std::pair<GridField, GridField> forward_backward_differences(const GridField& u, int axis) {
    require_axis(u, axis);
    const auto& g = u.grid;
    GridField minus(g), plus(g);
    const double inv_h = 1.0 / g.h;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double up = u.values[g.neighbor(i, axis, +1)];
        const double um = u.values[g.neighbor(i, axis, -1)];
        plus.values[i] = (up - u.values[i]) * inv_h;
        minus.values[i] = (u.values[i] - um) * inv_h;
    }
    return {std::move(minus), std::move(plus)};
}

GridField second_difference(const GridField& u, int axis) {
    require_axis(u, axis);
    const auto& g = u.grid;
    GridField out(g);
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double up = u.values[g.neighbor(i, axis, +1)];
        const double um = u.values[g.neighbor(i, axis, -1)];
        out.values[i] = (up - 2.0 * u.values[i] + um) * inv_h2;
    }
    return out;
}

GridField diffusion_term(const GridField& u, const std::vector<GridField>& a_per_axis) {
    if (int(a_per_axis.size()) != u.grid.dim)
        throw std::invalid_argument("diffusion_term: one coefficient field per axis required");
    GridField out(u.grid);
    for (int ax = 0; ax < u.grid.dim; ++ax) {
        require_compatible(u, a_per_axis[ax]);
        if ((a_per_axis[ax].values < 0.0).any())
            throw std::domain_error("negative-diffusion: a(x) must be >= 0");
        out.values += a_per_axis[ax].values * second_difference(u, ax).values;
    }
    return out;
}

double integrate(const GridField& u) {
    double cell = u.grid.h;
    if (u.grid.dim == 2) cell *= u.grid.h;
    return cell * u.values.sum();
}

double discrete_lipschitz(const GridField& u) {
    double m = 0.0;
    for (int ax = 0; ax < u.grid.dim; ++ax) {
        auto [dm, dp] = forward_backward_differences(u, ax);
        m = std::max(m, dp.values.abs().maxCoeff());
    }
    return m;
}

GridField shift(const GridField& u, int axis, int k) {
    require_axis(u, axis);
    const auto& g = u.grid;
    GridField out(g);
    for (Eigen::Index i = 0; i < g.size(); ++i) out.values[i] = u.values[g.neighbor(i, axis, k)];
    return out;
}

double interpolate(const GridField& u, const Vec2& x) {
    const auto& g = u.grid;
    auto locate = [&](double xi, int& i0, double& t) {
        double s = xi / g.h;
        double fl = std::floor(s);
        i0 = g.wrap(int(fl));
        t = s - fl;
    };
    int i0;
    double t0;
    locate(x[0], i0, t0);
    if (g.dim == 1) {
        int i1 = g.wrap(i0 + 1);
        return (1.0 - t0) * u.values[i0] + t0 * u.values[i1];
    }
    int j0;
    double t1;
    locate(x[1], j0, t1);
    const double v00 = u.values[g.index(i0, j0)];
    const double v01 = u.values[g.index(i0, j0 + 1)];
    const double v10 = u.values[g.index(i0 + 1, j0)];
    const double v11 = u.values[g.index(i0 + 1, j0 + 1)];
    return (1.0 - t0) * ((1.0 - t1) * v00 + t1 * v01) + t0 * ((1.0 - t1) * v10 + t1 * v11);
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Mode1D {
    int k;      // frequency
    bool sine;  // sin vs cos
    double eval(double x) const { return sine ? std::sin(kTwoPi * k * x) : std::cos(kTwoPi * k * x); }
    double deriv(double x) const {
        double w = kTwoPi * k;
        return sine ? w * std::cos(w * x) : -w * std::sin(w * x);
    }
    double deriv2(double x) const {
        double w = kTwoPi * k;
        return -w * w * eval(x);
    }
};

}  // namespace

std::vector<TestFunction> fourier_test_functions(const PeriodicGrid& grid, int max_mode) {
    if (max_mode < 1) throw std::invalid_argument("fourier_test_functions: max_mode must be >= 1");
    if (2 * max_mode >= grid.n_per_axis)
        throw std::domain_error("aliasing: max_mode must be < n_per_axis/2");

    std::vector<TestFunction> out;
    auto blank = [&] {
        TestFunction t;
        t.phi = GridField(grid);
        for (int ax = 0; ax < 2; ++ax) {
            t.dphi[ax] = GridField(grid);
            t.d2phi[ax] = GridField(grid);
        }
        return t;
    };

    // pure modes along each axis
    for (int ax = 0; ax < grid.dim; ++ax) {
        for (int k = 1; k <= max_mode; ++k) {
            for (bool sine : {true, false}) {
                Mode1D m{k, sine};
                TestFunction t = blank();
                for (Eigen::Index i = 0; i < grid.size(); ++i) {
                    double xa = grid.point(i)[ax];
                    t.phi.values[i] = m.eval(xa);
                    t.dphi[ax].values[i] = m.deriv(xa);
                    t.d2phi[ax].values[i] = m.deriv2(xa);
                }
                out.push_back(std::move(t));
            }
        }
    }

    // products in 2D
    if (grid.dim == 2) {
        for (int k = 1; k <= max_mode; ++k)
            for (int l = 1; l <= max_mode; ++l)
                for (bool s0 : {true, false})
                    for (bool s1 : {true, false}) {
                        Mode1D m0{k, s0}, m1{l, s1};
                        TestFunction t = blank();
                        for (Eigen::Index i = 0; i < grid.size(); ++i) {
                            Vec2 x = grid.point(i);
                            double f0 = m0.eval(x[0]), f1 = m1.eval(x[1]);
                            t.phi.values[i] = f0 * f1;
                            t.dphi[0].values[i] = m0.deriv(x[0]) * f1;
                            t.dphi[1].values[i] = f0 * m1.deriv(x[1]);
                            t.d2phi[0].values[i] = m0.deriv2(x[0]) * f1;
                            t.d2phi[1].values[i] = f0 * m1.deriv2(x[1]);
                        }
                        out.push_back(std::move(t));
                    }
    }
    return out;
}

}  // namespace ergoselect
