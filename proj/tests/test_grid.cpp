#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ergoselect/grid.hpp"

#include <cmath>
#include <random>

using namespace ergoselect;

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

GridField random_field(const PeriodicGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    GridField f(g);
    for (Eigen::Index i = 0; i < g.size(); ++i) f.values[i] = unif(rng);
    return f;
}
}  // namespace

TEST_CASE("one-sided differences: constants, sawtooth wrap, analytic derivative") {
    PeriodicGrid g(1, 64);
    GridField c(g);
    c.values.setConstant(5.0);
    auto [dm, dp] = forward_backward_differences(c, 0);
    CHECK(dm.max_abs() == 0.0);
    CHECK(dp.max_abs() == 0.0);

    GridField saw = GridField::from_function(g, [](const Vec2& x) { return x[0]; });
    auto [sm, sp] = forward_backward_differences(saw, 0);
    for (int i = 0; i + 1 < g.n_per_axis; ++i) CHECK(sp.values[i] == doctest::Approx(1.0));
    CHECK(sp.values[g.n_per_axis - 1] == doctest::Approx(1.0 - g.n_per_axis));

    PeriodicGrid fine(1, 256);
    GridField s = GridField::from_function(fine, [](const Vec2& x) { return std::sin(kTwoPi * x[0]); });
    auto [m2, p2] = forward_backward_differences(s, 0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < fine.size(); ++i)
        worst = std::max(worst, std::abs(p2.values[i] - kTwoPi * std::cos(kTwoPi * fine.point(i)[0])));
    CHECK(worst <= 0.1);
}

TEST_CASE("second difference: constants, analytic, exact on quadratic stencils") {
    PeriodicGrid g(1, 256);
    GridField c(g);
    c.values.setConstant(-3.25);
    CHECK(second_difference(c, 0).max_abs() == 0.0);

    GridField u = GridField::from_function(g, [](const Vec2& x) { return std::cos(kTwoPi * x[0]); });
    GridField d2 = second_difference(u, 0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i)
        worst = std::max(worst,
                         std::abs(d2.values[i] + kTwoPi * kTwoPi * std::cos(kTwoPi * g.point(i)[0])));
    CHECK(worst <= 0.05);

    // quadratic-on-stencil: values 0, 1, 4 with h = 1 give exactly 2
    CHECK((0.0 - 2.0 * 1.0 + 4.0) / 1.0 == 2.0);
}

TEST_CASE("second difference equals forward of backward difference") {
    PeriodicGrid g(1, 128);
    GridField u = random_field(g, 7);
    GridField d2 = second_difference(u, 0);
    auto [dm, dp] = forward_backward_differences(u, 0);
    auto [ddm, ddp] = forward_backward_differences(dm, 0);
    double worst = (d2.values - ddp.values).abs().maxCoeff();
    CHECK(worst <= 1e-13 * (1.0 + d2.max_abs()));
}

TEST_CASE("diffusion term: zero and identity weights, analytic product, linearity") {
    PeriodicGrid g(1, 256);
    GridField u = GridField::from_function(g, [](const Vec2& x) { return std::cos(kTwoPi * x[0]); });

    std::vector<GridField> a0{GridField(g)};
    CHECK(diffusion_term(u, a0).max_abs() == 0.0);

    std::vector<GridField> a1{GridField(g)};
    a1[0].values.setConstant(1.0);
    CHECK((diffusion_term(u, a1).values - second_difference(u, 0).values).abs().maxCoeff() == 0.0);

    std::vector<GridField> asin{GridField::from_function(g, [](const Vec2& x) {
        double s = std::sin(M_PI * x[0]);
        return s * s;
    })};
    GridField d = diffusion_term(u, asin);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        double x = g.point(i)[0];
        double s = std::sin(M_PI * x);
        worst = std::max(worst,
                         std::abs(d.values[i] + kTwoPi * kTwoPi * s * s * std::cos(kTwoPi * x)));
    }
    CHECK(worst <= 0.05);

    // linear in u and in a
    GridField v = random_field(g, 3), w = random_field(g, 4);
    std::vector<GridField> aw{random_field(g, 5)};
    aw[0].values = aw[0].values.abs();
    GridField both(g);
    both.values = 2.0 * v.values + 3.0 * w.values;
    GridField lhs = diffusion_term(both, aw);
    GridField rhs(g);
    rhs.values = 2.0 * diffusion_term(v, aw).values + 3.0 * diffusion_term(w, aw).values;
    CHECK((lhs.values - rhs.values).abs().maxCoeff() <= 1e-12 * (1.0 + lhs.max_abs()));

    std::vector<GridField> neg{GridField(g)};
    neg[0].values.setConstant(-0.1);
    CHECK_THROWS_AS(diffusion_term(u, neg), std::domain_error);
}

TEST_CASE("quadrature: unit volume, exact cancellation, sin^2") {
    PeriodicGrid g(1, 64);
    GridField one(g);
    one.values.setConstant(1.0);
    CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-15));

    GridField s = GridField::from_function(g, [](const Vec2& x) { return std::sin(kTwoPi * x[0]); });
    CHECK(std::abs(integrate(s)) <= 1e-12);

    for (int n : {8, 64, 200}) {
        PeriodicGrid gn(1, n);
        GridField s2 = GridField::from_function(gn, [](const Vec2& x) {
            double v = std::sin(kTwoPi * x[0]);
            return v * v;
        });
        CHECK(std::abs(integrate(s2) - 0.5) <= 1e-12);
    }

    // discrete divergence theorem: integrate(forward difference) == 0
    GridField r = random_field(g, 11);
    auto [dm, dp] = forward_backward_differences(r, 0);
    CHECK(std::abs(integrate(dp)) <= 1e-12);
}

TEST_CASE("fourier test functions: count, analytic triples, truncation order") {
    PeriodicGrid g(1, 256);
    auto fam = fourier_test_functions(g, 1);
    REQUIRE(fam.size() == 2);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        double x = g.point(i)[0];
        CHECK(fam[0].phi.values[i] == doctest::Approx(std::sin(kTwoPi * x)).epsilon(1e-14));
        CHECK(fam[0].dphi[0].values[i] == doctest::Approx(kTwoPi * std::cos(kTwoPi * x)).epsilon(1e-14));
        CHECK(fam[0].d2phi[0].values[i] ==
              doctest::Approx(-kTwoPi * kTwoPi * std::sin(kTwoPi * x)).epsilon(1e-14));
    }
    for (int m : {1, 2, 5}) CHECK(fourier_test_functions(g, m).size() == std::size_t(2 * m));

    // centered-difference consistency against the analytic derivative
    for (int m = 1; m <= 3; ++m) {
        for (const auto& t : fourier_test_functions(g, m)) {
            auto [dm, dp] = forward_backward_differences(t.phi, 0);
            double worst = 0.0;
            for (Eigen::Index i = 0; i < g.size(); ++i)
                worst = std::max(worst,
                                 std::abs(0.5 * (dm.values[i] + dp.values[i]) - t.dphi[0].values[i]));
            CHECK(worst <= g.h * m * m);
        }
    }

    CHECK_THROWS_AS(fourier_test_functions(PeriodicGrid(1, 8), 4), std::domain_error);
}

TEST_CASE("fourier test functions in 2D include products") {
    PeriodicGrid g(2, 16);
    auto fam = fourier_test_functions(g, 2);
    // 2 axes x 2 modes x sin/cos  +  4 products per (k,l) pair
    CHECK(fam.size() == std::size_t(2 * 2 * 2 + 2 * 2 * 4));
    for (const auto& t : fam) CHECK(t.phi.max_abs() <= 1.0 + 1e-12);
}

TEST_CASE("discrete Lipschitz: constants and the sawtooth") {
    PeriodicGrid g(1, 128);
    GridField c(g);
    c.values.setConstant(2.0);
    CHECK(discrete_lipschitz(c) == 0.0);

    GridField saw = GridField::from_function(g, [](const Vec2& x) {
        return std::min(x[0], 1.0 - x[0]);
    });
    CHECK(discrete_lipschitz(saw) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wrap consistency: cyclic shifts commute with the operators") {
    for (int dim : {1, 2}) {
        PeriodicGrid g(dim, 32);
        GridField u = random_field(g, 21);
        for (int ax = 0; ax < dim; ++ax) {
            GridField su = shift(u, ax, 5);
            CHECK((second_difference(su, ax).values - shift(second_difference(u, ax), ax, 5).values)
                      .abs()
                      .maxCoeff() <= 1e-12);
            auto [dm, dp] = forward_backward_differences(u, ax);
            auto [sdm, sdp] = forward_backward_differences(su, ax);
            CHECK((sdp.values - shift(dp, ax, 5).values).abs().maxCoeff() <= 1e-12);
            CHECK(std::abs(integrate(su) - integrate(u)) <= 1e-12);
        }
    }
}

TEST_CASE("periodic interpolation agrees with nodes and wraps") {
    PeriodicGrid g(1, 32);
    GridField u = random_field(g, 5);
    for (Eigen::Index i = 0; i < g.size(); ++i)
        CHECK(interpolate(u, g.point(i)) == doctest::Approx(u.values[i]).epsilon(1e-14));
    double mid = interpolate(u, Vec2(1.0 - 0.5 * g.h, 0.0));  // wraps to node 0
    CHECK(mid == doctest::Approx(0.5 * (u.values[g.size() - 1] + u.values[0])).epsilon(1e-12));
}
