#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ergoselect/regularize.hpp"
#include "ergoselect/selection.hpp"

#include <cmath>
#include <random>

using namespace ergoselect;

namespace {

GridField seeded_field(const PeriodicGrid& g, unsigned seed) {
    // smooth low-mode part plus rough noise, range kept within the period guard
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    GridField f(g);
    double a1 = unif(rng), b1 = unif(rng), a2 = unif(rng);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        double x = g.point(i)[0];
        f.values[i] = 0.4 * a1 * std::sin(2 * M_PI * x) + 0.3 * b1 * std::cos(4 * M_PI * x) +
                      0.2 * a2 * std::sin(6 * M_PI * x) + 0.1 * unif(rng);
    }
    return f;
}

ProblemSpec cos4pix_problem(int n) {
    ProblemSpec p;
    p.hamiltonian = HamiltonianSpec::cos4pix();
    p.diffusion = DiffusionSpec::zero(1);
    p.discount = DiscountSpec::linear();
    p.potential = PotentialSpec::zero();
    p.c_h = 1.0;
    p.grid = PeriodicGrid(1, n);
    return p;
}

}  // namespace

TEST_CASE("sup convolution equals the brute-force envelope") {
    PeriodicGrid g(1, 128);
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
        GridField w = seeded_field(g, seed);
        for (double eps : {0.3, 0.1, 0.02, 0.003}) {
            GridField fast = sup_convolution(w, eps);
            GridField slow = sup_convolution_brute_force(w, eps);
            CHECK((fast.values - slow.values).abs().maxCoeff() <= 1e-12);
        }
    }
    // 2D separable envelope against the full double loop
    PeriodicGrid g2(2, 24);
    GridField w2(g2);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (Eigen::Index i = 0; i < g2.size(); ++i) w2.values[i] = unif(rng);
    for (double eps : {0.2, 0.05}) {
        GridField fast = sup_convolution(w2, eps);
        GridField slow = sup_convolution_brute_force(w2, eps);
        CHECK((fast.values - slow.values).abs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("sup convolution: constants and the single spike") {
    PeriodicGrid g(1, 128);
    GridField c(g);
    c.values.setConstant(-1.7);
    CHECK((sup_convolution(c, 0.1).values + 1.7).abs().maxCoeff() <= 1e-14);

    GridField spike(g);
    const int i0 = 40;
    spike.values[i0] = 1.0;
    const double eps = 0.01;
    GridField env = sup_convolution(spike, eps);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        double d = std::abs(double(i - i0)) * g.h;
        d = std::min(d, 1.0 - d);
        CHECK(env.values[i] == doctest::Approx(std::max(0.0, 1.0 - d * d / (2 * eps))).epsilon(1e-12));
    }
}

TEST_CASE("inf convolution duality and ordering chain") {
    PeriodicGrid g(1, 128);
    for (unsigned seed : {5u, 6u}) {
        GridField w = seeded_field(g, seed);
        for (double eps : {0.2, 0.05}) {
            GridField lo = inf_convolution(w, eps);
            GridField hi = sup_convolution(w, eps);
            GridField neg = w;
            neg.values = -neg.values;
            GridField via = sup_convolution(neg, eps);
            via.values = -via.values;
            CHECK((lo.values - via.values).abs().maxCoeff() == 0.0);  // definitional identity
            CHECK((w.values - lo.values).minCoeff() >= 0.0);          // w_eps <= w
            CHECK((hi.values - w.values).minCoeff() >= 0.0);          // w <= w^eps
        }
    }
}

TEST_CASE("semiconvexity / semiconcavity bounds and Lipschitz non-expansion") {
    PeriodicGrid g(1, 128);
    for (unsigned seed = 0; seed < 50; ++seed) {
        GridField w = seeded_field(g, seed);
        const double eps = (seed % 2) ? 0.08 : 0.02;
        GridField hi = sup_convolution(w, eps);
        GridField lo = inf_convolution(w, eps);
        CHECK(second_difference(hi, 0).values.minCoeff() >= -1.0 / eps - 1e-9);
        CHECK(second_difference(lo, 0).values.maxCoeff() <= 1.0 / eps + 1e-9);
        CHECK(discrete_lipschitz(hi) <= discrete_lipschitz(w) + 1e-12);
        CHECK(discrete_lipschitz(lo) <= discrete_lipschitz(w) + 1e-12);
    }
}

TEST_CASE("operations commute with constants") {
    PeriodicGrid g(1, 128);
    GridField w = seeded_field(g, 33);
    GridField wc = w;
    wc.values += 2.5;
    auto params = RegularizationParams::from_eta(0.1, 0.5);
    CHECK((sup_convolution(wc, 0.1).values - sup_convolution(w, 0.1).values - 2.5).abs().maxCoeff() <=
          1e-13);
    CHECK((lasry_lions(wc, params).values - lasry_lions(w, params).values - 2.5).abs().maxCoeff() <=
          1e-13);
    CHECK((mollify(wc, 0.05).field.values - mollify(w, 0.05).field.values - 2.5).abs().maxCoeff() <=
          1e-12);
}

TEST_CASE("Lasry-Lions: cone Hessian bounds and non-expansion") {
    PeriodicGrid g(1, 512);
    GridField cone = GridField::from_function(g, [](const Vec2& x) {
        double d = std::abs(x[0] - 0.5);
        return std::min(d, 1.0 - d);
    });
    auto params = RegularizationParams::from_eta(0.1, 1.0 / 3.0);
    GridField ll = lasry_lions(cone, params);
    CHECK((ll.values - sup_convolution(cone, params.eta).values).minCoeff() >= -1e-12);  // w^eta <= LL
    CHECK((ll.values - cone.values).minCoeff() >= -1e-12);                               // w <= LL
    GridField d2 = second_difference(ll, 0);
    CHECK(d2.values.minCoeff() >= -1.0 / params.eta - 1e-9);
    CHECK(d2.values.maxCoeff() <= 1.0 / params.eps + 1e-9);
    CHECK(discrete_lipschitz(ll) <= discrete_lipschitz(cone) + 1e-12);

    GridField c(g);
    c.values.setConstant(0.4);
    CHECK((lasry_lions(c, params).values - 0.4).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("auto_K: degenerate fallback, coupling arithmetic, monotonicity") {
    ProblemSpec flat;
    flat.hamiltonian = HamiltonianSpec::free_particle();
    flat.diffusion = DiffusionSpec::zero(1);
    flat.discount = DiscountSpec::linear();
    flat.potential = PotentialSpec::zero();
    flat.grid = PeriodicGrid(1, 64);
    GridField zero(flat.grid);
    auto k0 = auto_K(flat, zero, 0.0);
    CHECK(k0.fallback);
    CHECK(k0.K == doctest::Approx(1.0));

    ProblemSpec p = cos4pix_problem(512);
    auto fam = oracle_solution_family(p.hamiltonian, p.grid, 9);
    auto k = auto_K(p, fam.representatives[4], 1.0);
    CHECK(k.m1 == doctest::Approx(0.0));
    CHECK(k.m2 == doctest::Approx(4.0).epsilon(0.02));  // max|H| over |p| <= 2 is 3, plus |c0| = 1
    CHECK(k.K == doctest::Approx(1.0 / 3.0).epsilon(0.02));

    // larger ||W|| never increases K
    ProblemSpec big = p;
    big.hamiltonian = HamiltonianSpec::mechanical(CosineSum::cosine(2.0, 2));
    auto kb = auto_K(big, fam.representatives[4], 1.0);
    CHECK(kb.K <= k.K + 1e-12);
}

TEST_CASE("mollify: mean preservation, non-expansion, Lipschitz bound, sub-resolution flag") {
    PeriodicGrid g(1, 256);
    GridField c(g);
    c.values.setConstant(1.3);
    CHECK((mollify(c, 0.05).field.values - 1.3).abs().maxCoeff() <= 1e-13);

    for (unsigned seed : {7u, 8u, 9u}) {
        GridField w = seeded_field(g, seed);
        auto out = mollify(w, 0.03);
        CHECK(!out.sub_resolution);
        CHECK(std::abs(integrate(out.field) - integrate(w)) <= 1e-12);
        CHECK(out.field.max_abs() <= w.max_abs() + 1e-12);
    }

    GridField saw = GridField::from_function(g, [](const Vec2& x) {
        return std::min(x[0], 1.0 - x[0]);
    });
    const double delta = 0.04;
    auto smooth = mollify(saw, delta);
    CHECK((smooth.field.values - saw.values).abs().maxCoeff() <= discrete_lipschitz(saw) * delta + 1e-12);

    auto tiny = mollify(saw, 0.5 * g.h);
    CHECK(tiny.sub_resolution);
    CHECK((tiny.field.values - saw.values).abs().maxCoeff() == 0.0);
}

TEST_CASE("smooth subsolution certificate: trivial case and rates on kinked oracles") {
    ProblemSpec flat;
    flat.hamiltonian = HamiltonianSpec::free_particle();
    flat.diffusion = DiffusionSpec::zero(1);
    flat.discount = DiscountSpec::linear();
    flat.potential = PotentialSpec::zero();
    flat.grid = PeriodicGrid(1, 128);
    GridField zero(flat.grid);
    auto cert0 = smooth_subsolution_certificate(zero, 0.2, flat, 0.0);
    CHECK(cert0.max_excess <= 1e-12);
    CHECK(cert0.sup_distance <= 1e-12);

    // gentle one-well model: the pinned eta range sits in the asymptotic regime
    ProblemSpec gentle = cos4pix_problem(512);
    gentle.hamiltonian = HamiltonianSpec::mechanical(CosineSum::cosine(0.05, 1));
    auto gfam = oracle_solution_family(gentle.hamiltonian, gentle.grid, 5);
    const GridField& gw = gfam.representatives[gfam.representatives.size() / 2];
    std::vector<std::pair<double, double>> gex, gsd;
    for (double eta : {0.2, 0.1, 0.05}) {
        auto cert = smooth_subsolution_certificate(gw, eta, gentle, gfam.c_h);
        gex.emplace_back(eta, cert.max_excess);
        gsd.emplace_back(eta, cert.sup_distance);
    }
    CHECK(rate_fit(gex).slope >= 0.8);
    CHECK(rate_fit(gsd).slope >= 0.8);

    // cos4pix at smaller eta where its larger constants reach the asymptotic regime
    ProblemSpec p = cos4pix_problem(512);
    auto fam = oracle_solution_family(p.hamiltonian, p.grid, 9);
    std::vector<std::pair<double, double>> ex, sd;
    for (double eta : {0.05, 0.025, 0.0125}) {
        auto cert = smooth_subsolution_certificate(fam.representatives[4], eta, p, fam.c_h);
        ex.emplace_back(eta, cert.max_excess);
        sd.emplace_back(eta, cert.sup_distance);
    }
    CHECK(rate_fit(ex).slope >= 0.8);
    CHECK(rate_fit(sd).slope >= 0.8);
}

TEST_CASE("smoothness proxy: regularization bounds third differences at fixed eta") {
    // raw kinked representative: second differences blow up under refinement;
    // the mollified regularization keeps third differences bounded
    double raw_d2_coarse = 0.0, raw_d2_fine = 0.0, reg_d3 = 0.0;
    const double eta = 0.5;  // delta = eta^4 = 0.0625 resolvable on both grids
    for (int n : {256, 512}) {
        ProblemSpec p = cos4pix_problem(n);
        auto fam = oracle_solution_family(p.hamiltonian, p.grid, 9);
        const GridField& w = fam.representatives[4];
        double d2 = second_difference(w, 0).values.abs().maxCoeff();
        (n == 256 ? raw_d2_coarse : raw_d2_fine) = d2;
        auto cert = smooth_subsolution_certificate(w, eta, p, fam.c_h);
        CHECK(!cert.mollifier_sub_resolution);
        // divided third difference of the mollified field
        const GridField& r = cert.w_reg;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < p.grid.size(); ++i) {
            double v = r.values[p.grid.neighbor(i, 0, 2)] - 3.0 * r.values[p.grid.neighbor(i, 0, 1)] +
                       3.0 * r.values[i] - r.values[p.grid.neighbor(i, 0, -1)];
            worst = std::max(worst, std::abs(v) / (p.grid.h * p.grid.h * p.grid.h));
        }
        if (n == 512) reg_d3 = worst;
    }
    CHECK(raw_d2_fine >= 1.5 * raw_d2_coarse);  // kink curvature grows like 1/h
    const double delta = eta * eta * eta * eta;
    CHECK(reg_d3 <= 10.0 / (delta * delta * delta));  // bounded at fixed eta
}
