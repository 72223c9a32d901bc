#pragma once

// Sup/inf convolutions by linear-time parabola envelopes, the Lasry-Lions
// inf-sup regularization with the eta -> (eps, delta) coupling, periodic
// mollification, and the smooth-subsolution certificate.

#include "ergoselect/solver.hpp"

namespace ergoselect {

struct RegularizationParams {
    double eta = 0.0;  // master scale
    double K = 1.0;    // coupling
    double eps = 0.0;  // = K eta^3
    double delta = 0.0;  // = eta^4

    static RegularizationParams from_eta(double eta, double K) {
        RegularizationParams p;
        p.eta = eta;
        p.K = K;
        p.eps = K * eta * eta * eta;
        p.delta = eta * eta * eta * eta;
        if (!(p.eps < p.eta)) throw std::invalid_argument("RegularizationParams: eps must be < eta");
        return p;
    }
};

// w^eps(x) = max_y { w(y) - |x-y|^2 / (2 eps) }, exact discrete envelope.
GridField sup_convolution(const GridField& w, double eps);

// w_eps(x) = min_y { w(y) + |x-y|^2 / (2 eps) } = -((-w)^eps).
GridField inf_convolution(const GridField& w, double eps);

// O(N^2)-per-axis reference used by the envelope tests.
GridField sup_convolution_brute_force(const GridField& w, double eps);

// inf-sup convolution (w^{eta+eps})_eps.
GridField lasry_lions(const GridField& w, const RegularizationParams& params);

struct AutoK {
    double K = 1.0;
    double m1 = 0.0;  // max tr A
    double m2 = 0.0;  // max |H| over |p| <= Lip(w), plus |c0|
    bool fallback = false;  // denominator <= 0: K = 1 with a warning flag
};

AutoK auto_K(const ProblemSpec& problem, const GridField& w, double c0);

struct MollifyResult {
    GridField field;
    bool sub_resolution = false;  // delta < 2h: returned unchanged
};

// Periodic convolution with the compactly supported bump (1-|y/delta|^2)^4,
// normalized to unit discrete mass.
MollifyResult mollify(const GridField& w, double delta);

struct SubsolutionCertificate {
    GridField w_reg;
    double max_excess = 0.0;    // centered-difference residual above c0
    double sup_distance = 0.0;  // ||w_reg - w||_inf
    RegularizationParams params;
    bool mollifier_sub_resolution = false;
    bool k_fallback = false;
};

// w_reg = mollify(lasry_lions(w, params(eta, auto_K)), eta^4) and its
// centered-difference excess -eta^2 Lap w_reg - tr(A D^2 w_reg)
// + H(x, central gradient) - c0.
SubsolutionCertificate smooth_subsolution_certificate(const GridField& w, double eta,
                                                      const ProblemSpec& problem, double c0);

}  // namespace ergoselect
