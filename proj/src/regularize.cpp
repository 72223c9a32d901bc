#include "ergoselect/regularize.hpp"

#include <cmath>

namespace ergoselect {

namespace {

// Lower envelope of parabolas f(j) + c (q - j)^2 over a line of samples
// (Felzenszwalb-Huttenlocher). Positions are in index units; c carries h^2.
void lower_envelope(const std::vector<double>& f, double c, std::vector<double>& out) {
    const int n = int(f.size());
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            const int p = v[k];
            s = ((f[q] + c * q * q) - (f[p] + c * p * p)) / (2.0 * c * (q - p));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    out.resize(n);
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double d = q - v[k];
        out[q] = f[v[k]] + c * d * d;
    }
}

// periodic min-convolution with the quadratic |x-y|^2/(2 eps) along one axis:
// tile three periods so every node's nearest image is in range.
void min_conv_axis(GridField& u, int axis, double eps) {
    const auto& g = u.grid;
    const int n = g.n_per_axis;
    const double c = g.h * g.h / (2.0 * eps);
    std::vector<double> line(3 * n), env;

    const int n_lines = (g.dim == 1) ? 1 : n;
    for (int l = 0; l < n_lines; ++l) {
        for (int i = 0; i < n; ++i) {
            const Eigen::Index idx = (g.dim == 1) ? i : (axis == 0 ? g.index(i, l) : g.index(l, i));
            line[i] = line[i + n] = line[i + 2 * n] = u.values[idx];
        }
        lower_envelope(line, c, env);
        for (int i = 0; i < n; ++i) {
            const Eigen::Index idx = (g.dim == 1) ? i : (axis == 0 ? g.index(i, l) : g.index(l, i));
            u.values[idx] = env[i + n];  // middle period
        }
    }
}

void check_period(const GridField& w, double eps) {
    const double range = w.values.maxCoeff() - w.values.minCoeff();
    if (!(eps * range < 1.0))
        throw std::domain_error("period-insufficiency: eps * range must be < period^2");
}

}  // namespace

GridField sup_convolution(const GridField& w, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("sup_convolution: eps must be > 0");
    check_period(w, eps);
    GridField u = w;
    u.values = -u.values;
    for (int ax = 0; ax < w.grid.dim; ++ax) min_conv_axis(u, ax, eps);
    u.values = -u.values;
    return u;
}

GridField inf_convolution(const GridField& w, double eps) {
    GridField neg = w;
    neg.values = -neg.values;
    GridField out = sup_convolution(neg, eps);
    out.values = -out.values;
    return out;
}

GridField sup_convolution_brute_force(const GridField& w, double eps) {
    check_period(w, eps);
    const auto& g = w.grid;
    GridField out(g);
    auto torus_d = [](double a, double b) {
        double d = std::abs(a - b);
        return std::min(d, 1.0 - d);
    };
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const Vec2 xi = g.point(i);
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < g.size(); ++j) {
            const Vec2 xj = g.point(j);
            double d2 = 0.0;
            for (int ax = 0; ax < g.dim; ++ax) {
                const double d = torus_d(xi[ax], xj[ax]);
                d2 += d * d;
            }
            best = std::max(best, w.values[j] - d2 / (2.0 * eps));
        }
        out.values[i] = best;
    }
    return out;
}

GridField lasry_lions(const GridField& w, const RegularizationParams& params) {
    return inf_convolution(sup_convolution(w, params.eta + params.eps), params.eps);
}

AutoK auto_K(const ProblemSpec& problem, const GridField& w, double c0) {
    AutoK out;
    const int dim = problem.grid.dim;
    const double lip = discrete_lipschitz(w);

    const int samples = 4096;
    for (int i = 0; i < samples; ++i) {
        Vec2 x(double(i) / samples, 0.0);
        const int nj = (dim == 2) ? 128 : 1;
        for (int j = 0; j < nj; ++j) {
            if (dim == 2) x[1] = double(j) / 128;
            double tr = 0.0;
            for (int ax = 0; ax < dim; ++ax) tr += problem.diffusion.eval(ax, x);
            out.m1 = std::max(out.m1, tr);
            const double wx = problem.hamiltonian.potential_w.eval(x);
            out.m2 = std::max({out.m2, std::abs(wx), std::abs(0.5 * lip * lip + wx)});
        }
    }
    out.m2 += std::abs(c0);

    const double denom = (dim - 1) + out.m1 + out.m2 - c0;
    if (denom > 0.0) {
        out.K = 1.0 / denom;
    } else {
        out.K = 1.0;
        out.fallback = true;
    }
    return out;
}

MollifyResult mollify(const GridField& w, double delta) {
    const auto& g = w.grid;
    if (delta < 2.0 * g.h) return {w, true};
    if (delta > 0.25)  // the bump must fit the torus
        throw std::invalid_argument("mollify: delta must be <= period/4");

    const int reach = int(std::floor(delta / g.h));
    auto bump = [&](double r) {
        const double t = 1.0 - (r / delta) * (r / delta);
        return t > 0.0 ? t * t * t * t : 0.0;
    };

    MollifyResult out{GridField(g), false};
    if (g.dim == 1) {
        std::vector<double> k(2 * reach + 1);
        double total = 0.0;
        for (int o = -reach; o <= reach; ++o) total += (k[o + reach] = bump(std::abs(o) * g.h));
        for (auto& v : k) v /= total;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            double s = 0.0;
            for (int o = -reach; o <= reach; ++o) s += k[o + reach] * w.values[g.neighbor(i, 0, o)];
            out.field.values[i] = s;
        }
    } else {
        std::vector<std::pair<std::array<int, 2>, double>> taps;
        double total = 0.0;
        for (int o0 = -reach; o0 <= reach; ++o0)
            for (int o1 = -reach; o1 <= reach; ++o1) {
                const double r = g.h * std::sqrt(double(o0 * o0 + o1 * o1));
                const double kv = bump(r);
                if (kv > 0.0) {
                    taps.push_back({{o0, o1}, kv});
                    total += kv;
                }
            }
        for (auto& t : taps) t.second /= total;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            auto c = g.coords(i);
            double s = 0.0;
            for (const auto& [o, kv] : taps) s += kv * w.values[g.index(c[0] + o[0], c[1] + o[1])];
            out.field.values[i] = s;
        }
    }
    return out;
}

SubsolutionCertificate smooth_subsolution_certificate(const GridField& w, double eta,
                                                      const ProblemSpec& problem, double c0) {
    SubsolutionCertificate cert;
    AutoK k = auto_K(problem, w, c0);
    cert.k_fallback = k.fallback;
    cert.params = RegularizationParams::from_eta(eta, k.K);

    GridField ll = lasry_lions(w, cert.params);
    MollifyResult mol = mollify(ll, cert.params.delta);
    cert.w_reg = mol.field;
    cert.mollifier_sub_resolution = mol.sub_resolution;

    const auto& g = problem.grid;
    auto a = problem.diffusion.sample(g);
    const double eta2 = eta * eta;
    const double inv_h = 1.0 / g.h;
    const double inv_h2 = inv_h * inv_h;
    double excess = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        Vec2 grad = Vec2::Zero();
        double second = 0.0;
        for (int ax = 0; ax < g.dim; ++ax) {
            const double up = cert.w_reg.values[g.neighbor(i, ax, +1)];
            const double um = cert.w_reg.values[g.neighbor(i, ax, -1)];
            grad[ax] = (up - um) * 0.5 * inv_h;
            const double d2 = (up - 2.0 * cert.w_reg.values[i] + um) * inv_h2;
            second += (eta2 + a[ax].values[i]) * d2;
        }
        const Vec2 x = g.point(i);
        excess = std::max(excess, -second + eval_H(problem.hamiltonian, x, grad) - c0);
    }
    cert.max_excess = excess;
    cert.sup_distance = (cert.w_reg.values - w.values).abs().maxCoeff();
    return cert;
}

}  // namespace ergoselect
