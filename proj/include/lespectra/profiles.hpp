#pragma once

// Named analytic coefficient profiles sampled at grid nodes.  The CLI
// restricts itself to this whitelist; library code may wrap any callable.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "lespectra/geometry.hpp"

namespace lespectra {

class Profile {
public:
    Profile() = default;  // identically zero

    static Profile zero() { return Profile(); }

    static Profile constant(double c) {
        if (c == 0.0) return Profile();
        return Profile([c](double, double) { return c; });
    }

    /// Polynomial in the axis-a coordinate, coeffs[k] * t^k.
    static Profile poly(std::vector<double> coeffs, int axis = 0) {
        return Profile([coeffs = std::move(coeffs), axis](double x, double y) {
            double t = axis == 0 ? x : y;
            double acc = 0.0, tk = 1.0;
            for (double c : coeffs) {
                acc += c * tk;
                tk *= t;
            }
            return acc;
        });
    }

    static Profile sine(double amplitude, double freq, int axis = 0) {
        return Profile([=](double x, double y) {
            return amplitude * std::sin(freq * (axis == 0 ? x : y));
        });
    }

    static Profile cosine(double amplitude, double freq, int axis = 0) {
        return Profile([=](double x, double y) {
            return amplitude * std::cos(freq * (axis == 0 ? x : y));
        });
    }

    /// scale / (distance-to-left-endpoint + eps), clipped at cap.  A bounded
    /// stand-in for the unbounded weights the theory allows.
    static Profile inv_dist(double scale, double eps, double cap, double origin = 0.0,
                            int axis = 0) {
        if (eps <= 0) throw std::invalid_argument("inv_dist: eps must be positive");
        return Profile([=](double x, double y) {
            double d = std::abs((axis == 0 ? x : y) - origin);
            return std::min(cap, scale / (d + eps));
        });
    }

    static Profile from_function(std::function<double(double, double)> f) {
        return Profile(std::move(f));
    }

    bool is_zero() const { return !f_; }

    double operator()(double x, double y = 0.0) const { return f_ ? f_(x, y) : 0.0; }

    Field sample(const Grid& g) const {
        return Field::sample(g, [this](double x, double y) { return (*this)(x, y); });
    }

private:
    explicit Profile(std::function<double(double, double)> f) : f_(std::move(f)) {}
    std::function<double(double, double)> f_;
};

/// sign(v) |v|^q with value 0 at v = 0, the continuous extension used for
/// the coupling |v|^{q-1} v.
inline double signed_power(double v, double q) {
    if (v == 0.0) return 0.0;
    return v > 0 ? std::pow(v, q) : -std::pow(-v, q);
}

}  // namespace lespectra
