#pragma once

// Spectral curves mu(lambda) = anchor^{p+1} / lambda^p, the scaling map that
// generates them from a diagonal eigenpair, and region membership in the
// (lambda, mu) plane.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lespectra/geometry.hpp"

namespace lespectra {

enum class CurveLabel { Plus, Minus, Second };

inline const char* to_string(CurveLabel l) {
    switch (l) {
        case CurveLabel::Plus: return "plus";
        case CurveLabel::Minus: return "minus";
        case CurveLabel::Second: return "second";
    }
    return "?";
}

struct SpectralCurve {
    double anchor = 1.0;  // lambda_1^+, lambda_1^-, or lambda_2
    double p = 1.0;
    CurveLabel label = CurveLabel::Plus;

    SpectralCurve() = default;
    SpectralCurve(double anchor_, double p_, CurveLabel label_)
        : anchor(anchor_), p(p_), label(label_) {
        if (!(anchor > 0) || !(p > 0))
            throw std::invalid_argument("SpectralCurve: anchor and p must be positive");
    }
};

inline double curve_mu(const SpectralCurve& c, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("curve_mu: lambda must be positive");
    return std::pow(c.anchor, c.p + 1.0) / std::pow(lambda, c.p);
}

/// Inverse of curve_mu: the diagonal anchor through (lambda, mu).
inline double anchor_recovery(double lambda, double mu, double p) {
    if (!(lambda > 0) || !(mu > 0))
        throw std::invalid_argument("anchor_recovery: inputs must be positive");
    return std::pow(mu * std::pow(lambda, p), 1.0 / (p + 1.0));
}

/// Push a diagonal eigenpair (u0, v0) at lambda0 along its curve to the
/// parameter pair (lambda, mu(lambda)): u = u0, v = (lambda0/lambda)^p v0.
struct ScaledPair {
    Field u, v;
    double mu;
};

inline ScaledPair scaling_map(const Field& u0, const Field& v0, double lambda0,
                              double lambda, double p) {
    if (!(lambda0 > 0) || !(lambda > 0))
        throw std::invalid_argument("scaling_map: parameters must be positive");
    require_same_grid(u0, v0);
    double ratio = std::pow(lambda0 / lambda, p);
    ScaledPair out{u0, ratio * v0, std::pow(lambda0, p + 1.0) / std::pow(lambda, p)};
    return out;
}

struct RegionVerdict {
    bool in_c1_plus = false;     // 0 < mu < mu_1^+(lambda)
    bool in_c1_minus = false;
    bool on_lambda1_plus = false;
    bool on_lambda1_minus = false;
    bool between_m1_and_lambda2 = false;
    bool outside_first_quadrant = false;
};

struct CurveSet {
    SpectralCurve plus;
    SpectralCurve minus;
    std::optional<SpectralCurve> second;
};

inline RegionVerdict classify(double lambda, double mu, const CurveSet& cs,
                              double on_tol = 1e-9) {
    if (cs.plus.p != cs.minus.p || (cs.second && cs.second->p != cs.plus.p))
        throw std::invalid_argument("classify: curves carry inconsistent p");
    RegionVerdict v;
    if (!(lambda > 0) || !(mu > 0)) {
        v.outside_first_quadrant = true;
        return v;
    }
    double p = cs.plus.p;
    double a = anchor_recovery(lambda, mu, p);
    v.in_c1_plus = a < cs.plus.anchor;
    v.in_c1_minus = a < cs.minus.anchor;
    v.on_lambda1_plus = std::abs(a - cs.plus.anchor) <= on_tol * cs.plus.anchor;
    v.on_lambda1_minus = std::abs(a - cs.minus.anchor) <= on_tol * cs.minus.anchor;
    if (cs.second) {
        double M1 = std::max(cs.plus.anchor, cs.minus.anchor);
        v.between_m1_and_lambda2 = a > M1 && a < cs.second->anchor;
    }
    return v;
}

struct CurveSample {
    double lambda, mu;
    CurveLabel label;
};

/// Log-spaced samples of the curve; mu strictly decreasing in lambda.
inline std::vector<CurveSample> sample_curve(const SpectralCurve& c, double lambda_min,
                                             double lambda_max, int n) {
    if (!(0 < lambda_min && lambda_min < lambda_max) || n < 2)
        throw std::invalid_argument("sample_curve: bad range");
    std::vector<CurveSample> out;
    out.reserve(n);
    double lr = std::log(lambda_min), dr = (std::log(lambda_max) - lr) / (n - 1);
    for (int k = 0; k < n; ++k) {
        double lam = std::exp(lr + k * dr);
        out.push_back({lam, curve_mu(c, lam), c.label});
    }
    return out;
}

}  // namespace lespectra
