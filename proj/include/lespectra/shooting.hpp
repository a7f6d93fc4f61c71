#pragma once

// Independent 1D oracles for the coupled two-point problem
//   -u'' = lambda |v|^{q-1} v,  -v'' = lambda |u|^{p-1} u,  u(0)=v(0)=0,
// by adaptive Runge-Kutta shooting.  Test-oracle code: never used by the
// main solution path.

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "lespectra/geometry.hpp"
#include "lespectra/profiles.hpp"

namespace lespectra {
namespace shooting {

using State = std::array<double, 4>;  // u, u', v, v'

namespace detail {

inline State rhs(const State& y, double p, double q, double lambda) {
    return {y[1], -lambda * signed_power(y[2], q), y[3], -lambda * signed_power(y[0], p)};
}

inline State axpy(const State& a, double c, const State& b) {
    State r;
    for (int i = 0; i < 4; ++i) r[i] = a[i] + c * b[i];
    return r;
}

inline State rk4_step(const State& y, double h, double p, double q, double lambda) {
    State k1 = rhs(y, p, q, lambda);
    State k2 = rhs(axpy(y, 0.5 * h, k1), p, q, lambda);
    State k3 = rhs(axpy(y, 0.5 * h, k2), p, q, lambda);
    State k4 = rhs(axpy(y, h, k3), p, q, lambda);
    State r = y;
    for (int i = 0; i < 4; ++i)
        r[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return r;
}

struct StepResult {
    State y;
    double used;  // step actually taken
    double next;  // suggested next step
};

// Step doubling with Richardson error control.
inline StepResult adaptive_step(const State& y, double h, double p, double q,
                                double lambda, double tol) {
    for (int tries = 0; tries < 60; ++tries) {
        State big = rk4_step(y, h, p, q, lambda);
        State half = rk4_step(y, 0.5 * h, p, q, lambda);
        State two = rk4_step(half, 0.5 * h, p, q, lambda);
        double err = 0.0;
        for (int i = 0; i < 4; ++i) err = std::max(err, std::abs(big[i] - two[i]) / 15.0);
        double scale = 1.0;
        for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(two[i]));
        if (err <= tol * scale) {
            double grow = err > 0 ? 0.9 * std::pow(tol * scale / err, 0.2) : 2.0;
            StepResult r;
            for (int i = 0; i < 4; ++i) r.y[i] = two[i] + (two[i] - big[i]) / 15.0;
            r.used = h;
            r.next = h * std::min(2.0, std::max(0.5, grow));
            return r;
        }
        h *= 0.5;
    }
    throw std::runtime_error("shooting: step control failed");
}

}  // namespace detail

class Integrator {
public:
    Integrator(double p, double q, double lambda, double tol = 1e-12)
        : p_(p), q_(q), lambda_(lambda), tol_(tol) {}

    /// First zero in (0, cap] of component (0 for u, 2 for v) along the shot
    /// with u'(0)=1, v'(0)=s; returns cap if the component never returns to 0.
    double first_zero(int comp, double s, double cap) const {
        State y{0.0, 1.0, 0.0, s};
        double x = 0.0, h = 1e-3;
        double prev = 0.0;
        bool armed = false;
        while (x < cap) {
            auto r = detail::adaptive_step(y, std::min(h, cap - x), p_, q_, lambda_, tol_);
            double cur = r.y[comp];
            if (!armed && cur > 1e-12) armed = true;
            if (armed && prev > 0 && cur <= 0) {
                double lo = 0.0, hi = r.used;
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    State ym = detail::rk4_step(y, mid, p_, q_, lambda_);
                    (ym[comp] > 0 ? lo : hi) = mid;
                }
                return x + 0.5 * (lo + hi);
            }
            prev = cur;
            x += r.used;
            y = r.y;
            h = r.next;
        }
        return cap;
    }

    State state_at(double xt, double s) const {
        State y{0.0, 1.0, 0.0, s};
        double x = 0.0, h = 1e-3;
        while (x < xt - 1e-15) {
            auto r = detail::adaptive_step(y, std::min(h, xt - x), p_, q_, lambda_, tol_);
            x += r.used;
            y = r.y;
            h = r.next;
        }
        return y;
    }

private:
    double p_, q_, lambda_, tol_;
};

/// Slope s* at which u and v first vanish together, with the common zero T.
/// gap(s) = first_zero(u) - first_zero(v) is decreasing in s.
struct MatchedShot {
    double s = 1.0;
    double T = 0.0;
};

inline MatchedShot match_first_zeros(double p, double q, double lambda,
                                     double cap = 100.0) {
    Integrator I(p, q, lambda);
    auto gap = [&](double s) {
        return I.first_zero(0, s, cap) - I.first_zero(2, s, cap);
    };
    double lo = 1.0, hi = 1.0;
    double glo = gap(lo);
    for (int it = 0; it < 60 && glo < 0; ++it) {
        lo *= 0.5;
        glo = gap(lo);
    }
    double ghi = gap(hi);
    for (int it = 0; it < 60 && ghi > 0; ++it) {
        hi *= 2.0;
        ghi = gap(hi);
    }
    if (!(glo >= 0 && ghi <= 0))
        throw std::runtime_error("shooting: failed to bracket the matching slope");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (gap(mid) >= 0 ? lo : hi) = mid;
        if (hi - lo <= 1e-14 * hi) break;
    }
    MatchedShot m;
    m.s = 0.5 * (lo + hi);
    m.T = I.first_zero(0, m.s, cap);
    return m;
}

/// Boundary miss at x=1 for the matched shot with multiplier lambda:
/// strictly positive below the principal eigenvalue, zero at it.
inline double boundary_miss(double p, double q, double lambda) {
    MatchedShot m = match_first_zeros(p, q, lambda);
    Integrator I(p, q, lambda);
    return I.state_at(1.0, m.s)[0];
}

/// Principal eigenvalue of the pq=1 system on (0,1): match first zeros at
/// unit multiplier, then rescale x -> x/T, so lambda_1 = T^2.
inline double principal_eigenvalue(double p, double q) {
    if (std::abs(p * q - 1.0) > 1e-12)
        throw std::invalid_argument("shooting principal_eigenvalue: needs pq = 1");
    MatchedShot m = match_first_zeros(p, q, 1.0);
    return m.T * m.T;
}

/// Positive solution of the sublinear (pq < 1) system with unit multipliers,
/// sampled on the 1D grid g: solve at multiplier 1 on (0,T), then pull back
/// to the grid interval with the exact amplitude power law.
inline std::pair<Field, Field> sublinear_solution(double p, double q, const Grid& g) {
    if (!(p * q < 1.0)) throw std::invalid_argument("sublinear_solution: needs pq < 1");
    if (g.dim() != 1) throw std::invalid_argument("sublinear_solution: 1D only");
    MatchedShot m = match_first_zeros(p, q, 1.0);
    Integrator I(p, q, 1.0);
    double len = g.hi(0) - g.lo(0);
    double Teff = m.T / len;
    double cu = std::pow(Teff, -2.0 * (1.0 + q) / (1.0 - p * q));
    double cv = std::pow(Teff, -2.0 * (1.0 + p) / (1.0 - p * q));
    Field u(g), v(g);
    for (std::size_t k = 0; k < u.size(); ++k) {
        double x = g.point(g.unflat(k))[0];
        double xi = (x - g.lo(0)) / len;
        State st = I.state_at(std::min(std::max(xi, 0.0) * m.T, m.T), m.s);
        u[k] = cu * st[0];
        v[k] = cv * st[2];
    }
    return {u, v};
}

}  // namespace shooting
}  // namespace lespectra
