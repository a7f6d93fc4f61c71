#pragma once

// Operator specifications for the fully nonlinear families handled here
// (linear, Pucci extremal, max/min of linear members, Isaacs inf-sup /
// sup-inf), exact pointwise evaluation, the reflection G, computable
// envelopes, and the monotone finite-difference discretization.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lespectra/geometry.hpp"
#include "lespectra/profiles.hpp"

namespace lespectra {

struct EllipticityPair {
    double alpha = 1.0;
    double beta = 1.0;
    EllipticityPair() = default;
    EllipticityPair(double a, double b) : alpha(a), beta(b) {
        if (!(0 < a && a <= b))
            throw std::invalid_argument("EllipticityPair: need 0 < alpha <= beta");
    }
};

/// Symmetric matrix, dim deduced from use: 1D code reads xx only.
struct SymMat {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    SymMat operator-() const { return {-xx, -xy, -yy}; }
    SymMat operator+(const SymMat& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
    SymMat operator*(double t) const { return {t * xx, t * xy, t * yy}; }

    /// Closed-form eigenvalues, ascending.
    std::array<double, 2> eigenvalues() const {
        double m = 0.5 * (xx + yy);
        double r = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
        return {m - r, m + r};
    }
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

inline double pucci_plus(const SymMat& X, const EllipticityPair& e, int dim) {
    if (dim == 1) return X.xx >= 0 ? e.beta * X.xx : e.alpha * X.xx;
    auto ev = X.eigenvalues();
    double v = 0.0;
    for (double l : ev) v += l >= 0 ? e.beta * l : e.alpha * l;
    return v;
}

inline double pucci_minus(const SymMat& X, const EllipticityPair& e, int dim) {
    return -pucci_plus(-X, e, dim);
}

/// One linear member tr(A(x) D^2 u) + b(x).Du + c(x) u, with
/// A(x) = diffusion_scale(x) * diffusion.
struct LinearOpSpec {
    SymMat diffusion{1.0, 0.0, 1.0};
    Profile diffusion_scale;  // zero profile means identically 1
    Profile drift_x, drift_y;
    Profile zero_order;

    static LinearOpSpec laplacian() { return LinearOpSpec{}; }

    static LinearOpSpec scaled_laplacian(double s) {
        LinearOpSpec m;
        m.diffusion = {s, 0.0, s};
        return m;
    }

    double scale_at(double x, double y) const {
        return diffusion_scale.is_zero() ? 1.0 : diffusion_scale(x, y);
    }
    SymMat diffusion_at(double x, double y) const { return diffusion * scale_at(x, y); }
};

enum class OpKind { Linear, PucciPlus, PucciMinus, MaxOf, MinOf, InfSup, SupInf };

inline const char* to_string(OpKind k) {
    switch (k) {
        case OpKind::Linear: return "linear";
        case OpKind::PucciPlus: return "pucci_plus";
        case OpKind::PucciMinus: return "pucci_minus";
        case OpKind::MaxOf: return "max_of";
        case OpKind::MinOf: return "min_of";
        case OpKind::InfSup: return "inf_sup";
        case OpKind::SupInf: return "sup_inf";
    }
    return "?";
}

struct OperatorSpec {
    OpKind kind = OpKind::Linear;
    EllipticityPair ell{1.0, 1.0};
    std::vector<LinearOpSpec> members;  // Linear: one entry; families: all members
    std::size_t family_rows = 0;        // InfSup/SupInf: members is row-major rows x cols
    std::size_t family_cols = 0;

    Profile gradient_magnitude;  // gamma(x) >= 0
    int gradient_sign = +1;      // contributes gradient_sign * gamma |Du|
    Profile zero_abs;            // vartheta(x) >= 0
    int zero_abs_sign = +1;      // contributes zero_abs_sign * vartheta |u|
    Profile zero_linear;         // c(x) u on top of the member terms
    bool reflected = false;

    static OperatorSpec linear(LinearOpSpec m) {
        OperatorSpec s;
        s.kind = OpKind::Linear;
        s.members = {std::move(m)};
        return s;
    }
    static OperatorSpec laplacian() { return linear(LinearOpSpec::laplacian()); }
    static OperatorSpec pucci_plus(EllipticityPair e) {
        OperatorSpec s;
        s.kind = OpKind::PucciPlus;
        s.ell = e;
        return s;
    }
    static OperatorSpec pucci_minus(EllipticityPair e) {
        OperatorSpec s;
        s.kind = OpKind::PucciMinus;
        s.ell = e;
        return s;
    }
    static OperatorSpec max_of(std::vector<LinearOpSpec> ms) {
        OperatorSpec s;
        s.kind = OpKind::MaxOf;
        s.members = std::move(ms);
        return s;
    }
    static OperatorSpec min_of(std::vector<LinearOpSpec> ms) {
        OperatorSpec s;
        s.kind = OpKind::MinOf;
        s.members = std::move(ms);
        return s;
    }
    static OperatorSpec inf_sup(std::vector<LinearOpSpec> ms, std::size_t rows,
                                std::size_t cols) {
        if (ms.size() != rows * cols || ms.empty())
            throw std::invalid_argument("inf_sup: member count must equal rows*cols > 0");
        OperatorSpec s;
        s.kind = OpKind::InfSup;
        s.members = std::move(ms);
        s.family_rows = rows;
        s.family_cols = cols;
        return s;
    }
    static OperatorSpec sup_inf(std::vector<LinearOpSpec> ms, std::size_t rows,
                                std::size_t cols) {
        OperatorSpec s = inf_sup(std::move(ms), rows, cols);
        s.kind = OpKind::SupInf;
        return s;
    }

    bool has_members() const { return kind != OpKind::PucciPlus && kind != OpKind::PucciMinus; }
};

namespace detail {

inline double member_eval(const LinearOpSpec& m, double x, double y, double r,
                          const Vec2& xi, const SymMat& X, int dim) {
    SymMat A = m.diffusion_at(x, y);
    double v = A.xx * X.xx;
    if (dim == 2) v += A.yy * X.yy + 2.0 * A.xy * X.xy;
    v += m.drift_x(x, y) * xi.x;
    if (dim == 2) v += m.drift_y(x, y) * xi.y;
    v += m.zero_order(x, y) * r;
    return v;
}

// Lowest index wins ties.
template <class Better>
inline std::size_t select(const std::vector<double>& vals, Better better) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < vals.size(); ++k)
        if (better(vals[k], vals[best])) best = k;
    return best;
}

inline double family_value(const OperatorSpec& s, const std::vector<double>& vals,
                           std::size_t* chosen = nullptr) {
    auto lt = [](double a, double b) { return a < b; };
    auto gt = [](double a, double b) { return a > b; };
    switch (s.kind) {
        case OpKind::Linear: {
            if (chosen) *chosen = 0;
            return vals[0];
        }
        case OpKind::MaxOf: {
            std::size_t k = select(vals, gt);
            if (chosen) *chosen = k;
            return vals[k];
        }
        case OpKind::MinOf: {
            std::size_t k = select(vals, lt);
            if (chosen) *chosen = k;
            return vals[k];
        }
        case OpKind::InfSup:
        case OpKind::SupInf: {
            // Inner optimization first, exact enumeration over the grid.
            bool inner_sup = s.kind == OpKind::InfSup;
            std::size_t best_row = 0, best_col = 0;
            double outer = 0.0;
            for (std::size_t r = 0; r < s.family_rows; ++r) {
                std::size_t col = 0;
                double inner = vals[r * s.family_cols];
                for (std::size_t c = 1; c < s.family_cols; ++c) {
                    double v = vals[r * s.family_cols + c];
                    if (inner_sup ? v > inner : v < inner) {
                        inner = v;
                        col = c;
                    }
                }
                bool take = r == 0 || (inner_sup ? inner < outer : inner > outer);
                if (take) {
                    outer = inner;
                    best_row = r;
                    best_col = col;
                }
            }
            if (chosen) *chosen = best_row * s.family_cols + best_col;
            return outer;
        }
        default:
            throw std::logic_error("family_value: kind has no members");
    }
}

}  // namespace detail

/// Pointwise F(x, r, xi, X) with exact inner/outer family enumeration.
inline double evaluate(const OperatorSpec& s, double x, double y, double r,
                       const Vec2& xi, const SymMat& X, int dim) {
    double v = 0.0;
    if (s.kind == OpKind::PucciPlus) {
        v = pucci_plus(X, s.ell, dim);
    } else if (s.kind == OpKind::PucciMinus) {
        v = pucci_minus(X, s.ell, dim);
    } else {
        if (s.members.empty()) throw std::invalid_argument("evaluate: empty member family");
        std::vector<double> vals(s.members.size());
        for (std::size_t k = 0; k < s.members.size(); ++k)
            vals[k] = detail::member_eval(s.members[k], x, y, r, xi, X, dim);
        v = detail::family_value(s, vals);
    }
    if (!s.gradient_magnitude.is_zero()) {
        double norm = dim == 2 ? std::hypot(xi.x, xi.y) : std::abs(xi.x);
        v += s.gradient_sign * s.gradient_magnitude(x, y) * norm;
    }
    if (!s.zero_abs.is_zero()) v += s.zero_abs_sign * s.zero_abs(x, y) * std::abs(r);
    if (!s.zero_linear.is_zero()) v += s.zero_linear(x, y) * r;
    return v;
}

inline double evaluate1d(const OperatorSpec& s, double x, double r, double xi, double X) {
    return evaluate(s, x, 0.0, r, Vec2{xi, 0.0}, SymMat{X, 0.0, 0.0}, 1);
}

/// The reflected operator G(x,r,p,X) = -F(x,-r,-p,-X), realized structurally:
/// every supported kind has a closed-form dual.
inline OperatorSpec reflect(const OperatorSpec& s) {
    OperatorSpec g = s;
    switch (s.kind) {
        case OpKind::Linear: break;
        case OpKind::PucciPlus: g.kind = OpKind::PucciMinus; break;
        case OpKind::PucciMinus: g.kind = OpKind::PucciPlus; break;
        case OpKind::MaxOf: g.kind = OpKind::MinOf; break;
        case OpKind::MinOf: g.kind = OpKind::MaxOf; break;
        case OpKind::InfSup: g.kind = OpKind::SupInf; break;
        case OpKind::SupInf: g.kind = OpKind::InfSup; break;
    }
    g.gradient_sign = -s.gradient_sign;
    g.zero_abs_sign = -s.zero_abs_sign;
    g.reflected = !s.reflected;
    return g;
}

struct Envelope {
    OperatorSpec spec;
    bool exact = true;  // false: conservative bound only (Isaacs families)
};

inline Envelope upper_envelope(const OperatorSpec& s) {
    switch (s.kind) {
        case OpKind::Linear:
        case OpKind::MaxOf:
        case OpKind::PucciPlus:
            return {s, true};
        case OpKind::MinOf: {
            OperatorSpec e = s;
            e.kind = OpKind::MaxOf;
            return {e, true};
        }
        case OpKind::PucciMinus: {
            OperatorSpec e = s;
            e.kind = OpKind::PucciPlus;
            return {e, true};
        }
        case OpKind::InfSup:
        case OpKind::SupInf: {
            OperatorSpec e = s;
            e.kind = OpKind::MaxOf;
            e.family_rows = e.family_cols = 0;
            return {e, false};
        }
    }
    throw std::logic_error("upper_envelope: unreachable");
}

inline Envelope lower_envelope(const OperatorSpec& s) {
    switch (s.kind) {
        case OpKind::Linear:
        case OpKind::MinOf:
        case OpKind::PucciMinus:
            return {s, true};
        case OpKind::MaxOf: {
            OperatorSpec e = s;
            e.kind = OpKind::MinOf;
            return {e, true};
        }
        case OpKind::PucciPlus: {
            OperatorSpec e = s;
            e.kind = OpKind::PucciMinus;
            return {e, true};
        }
        case OpKind::InfSup:
        case OpKind::SupInf: {
            OperatorSpec e = s;
            e.kind = OpKind::MinOf;
            e.family_rows = e.family_cols = 0;
            return {e, false};
        }
    }
    throw std::logic_error("lower_envelope: unreachable");
}

/// Discrete first/second differences gathered at one interior node.
struct Derivs {
    double u = 0.0;
    std::array<double, 2> fwd{0, 0};   // (u(x+h) - u(x)) / h
    std::array<double, 2> bwd{0, 0};   // (u(x) - u(x-h)) / h
    std::array<double, 2> d2{0, 0};    // centered second difference
    double cross = 0.0;                // 4-point centered D_xy
};

/// Frozen linear action at one node: tr(A X_h) + sum_a (bf_a fwd_a + bb_a bwd_a) + c u.
/// For a monotone freeze, bf >= 0 and bb <= 0.
struct FrozenNode {
    SymMat A;
    std::array<double, 2> bfwd{0, 0};
    std::array<double, 2> bbwd{0, 0};
    double c = 0.0;
    std::int32_t signature = 0;
};

class DiscreteOperator {
public:
    DiscreteOperator(const Grid& g, OperatorSpec s) : grid_(g), spec_(std::move(s)) {
        const int dim = grid_.dim();
        if (spec_.has_members() && spec_.members.empty())
            throw std::invalid_argument("discretize: empty member family");
        nmembers_ = spec_.has_members() ? spec_.members.size() : 0;
        const std::size_t ni = grid_.interior_count();
        mAxx_.resize(nmembers_ * ni);
        mAxy_.resize(dim == 2 ? nmembers_ * ni : 0);
        mAyy_.resize(dim == 2 ? nmembers_ * ni : 0);
        mbx_.resize(nmembers_ * ni);
        mby_.resize(dim == 2 ? nmembers_ * ni : 0);
        mc_.resize(nmembers_ * ni);
        gamma_.resize(ni);
        vtheta_.resize(ni);
        clin_.resize(ni);
        grid_.for_interior([&](NodeIndex nd) {
            std::size_t q = iidx(nd);
            auto p = grid_.point(nd);
            for (std::size_t m = 0; m < nmembers_; ++m) {
                const LinearOpSpec& mem = spec_.members[m];
                SymMat A = mem.diffusion_at(p[0], p[1]);
                mAxx_[m * ni + q] = A.xx;
                if (dim == 2) {
                    mAxy_[m * ni + q] = A.xy;
                    mAyy_[m * ni + q] = A.yy;
                }
                mbx_[m * ni + q] = mem.drift_x(p[0], p[1]);
                if (dim == 2) mby_[m * ni + q] = mem.drift_y(p[0], p[1]);
                mc_[m * ni + q] = mem.zero_order(p[0], p[1]);
            }
            gamma_[q] = spec_.gradient_magnitude(p[0], p[1]);
            vtheta_[q] = spec_.zero_abs(p[0], p[1]);
            clin_[q] = spec_.zero_linear(p[0], p[1]);
        });
        bool pucci = !spec_.has_members();
        bool has_cross = false;
        for (double a : mAxy_)
            if (a != 0.0) has_cross = true;
        monotone_ = !(dim == 2 && (pucci || has_cross));
    }

    const Grid& grid() const { return grid_; }
    const OperatorSpec& spec() const { return spec_; }
    std::size_t member_count() const { return nmembers_; }

    /// False when the 2D Hessian-eigenvalue Pucci evaluation (or a cross
    /// diffusion term) can violate strict scheme monotonicity.
    bool monotone() const { return monotone_; }

    std::size_t iidx(NodeIndex nd) const {
        std::size_t q = static_cast<std::size_t>(nd.i - 1);
        if (grid_.dim() == 2) q += static_cast<std::size_t>(grid_.interior(0)) * (nd.j - 1);
        return q;
    }

    Derivs derivs(const Field& u, NodeIndex nd) const {
        Derivs d;
        d.u = u.at(nd);
        double hx = grid_.h(0);
        double up = u.at({nd.i + 1, nd.j}), um = u.at({nd.i - 1, nd.j});
        d.fwd[0] = (up - d.u) / hx;
        d.bwd[0] = (d.u - um) / hx;
        d.d2[0] = (up - 2.0 * d.u + um) / (hx * hx);
        if (grid_.dim() == 2) {
            double hy = grid_.h(1);
            double vp = u.at({nd.i, nd.j + 1}), vm = u.at({nd.i, nd.j - 1});
            d.fwd[1] = (vp - d.u) / hy;
            d.bwd[1] = (d.u - vm) / hy;
            d.d2[1] = (vp - 2.0 * d.u + vm) / (hy * hy);
            d.cross = (u.at({nd.i + 1, nd.j + 1}) + u.at({nd.i - 1, nd.j - 1}) -
                       u.at({nd.i + 1, nd.j - 1}) - u.at({nd.i - 1, nd.j + 1})) /
                      (4.0 * hx * hy);
        }
        return d;
    }

    /// Member value with Godunov-consistent upwinding of the member drift.
    double member_value(std::size_t m, std::size_t q, const Derivs& d) const {
        const std::size_t ni = grid_.interior_count();
        double v = mAxx_[m * ni + q] * d.d2[0];
        if (grid_.dim() == 2)
            v += mAyy_[m * ni + q] * d.d2[1] + 2.0 * mAxy_[m * ni + q] * d.cross;
        double bx = mbx_[m * ni + q];
        v += bx >= 0 ? bx * d.fwd[0] : bx * d.bwd[0];
        if (grid_.dim() == 2) {
            double by = mby_[m * ni + q];
            v += by >= 0 ? by * d.fwd[1] : by * d.bwd[1];
        }
        v += mc_[m * ni + q] * d.u;
        return v;
    }

    /// Per-axis Godunov gradient branch for a term s*gamma|Du|:
    /// s=+1 uses max(fwd, -bwd, 0); s=-1 uses -max(-fwd, bwd, 0).
    /// Either way the term is nondecreasing in each neighbor value.
    static double godunov_axis(double fwd, double bwd, int s, int* branch = nullptr) {
        double a = s > 0 ? fwd : -fwd;
        double b = s > 0 ? -bwd : bwd;
        double g = std::max({a, b, 0.0});
        if (branch) *branch = g == 0.0 ? 0 : (a >= b ? 1 : 2);
        return g;
    }

    double gradient_term(std::size_t q, const Derivs& d) const {
        if (gamma_[q] == 0.0) return 0.0;
        int s = spec_.gradient_sign;
        double gx = godunov_axis(d.fwd[0], d.bwd[0], s);
        double norm = gx;
        if (grid_.dim() == 2) {
            double gy = godunov_axis(d.fwd[1], d.bwd[1], s);
            norm = std::hypot(gx, gy);
        }
        return s * gamma_[q] * norm;
    }

    /// Residual value F[u] at interior node nd.
    double residual_at(const Field& u, NodeIndex nd) const {
        Derivs d = derivs(u, nd);
        std::size_t q = iidx(nd);
        double v;
        if (spec_.kind == OpKind::PucciPlus || spec_.kind == OpKind::PucciMinus) {
            SymMat X{d.d2[0], d.cross, d.d2[1]};
            v = spec_.kind == OpKind::PucciPlus ? pucci_plus(X, spec_.ell, grid_.dim())
                                                : pucci_minus(X, spec_.ell, grid_.dim());
        } else {
            std::vector<double> vals(nmembers_);
            for (std::size_t m = 0; m < nmembers_; ++m) vals[m] = member_value(m, q, d);
            v = detail::family_value(spec_, vals);
        }
        v += gradient_term(q, d);
        if (vtheta_[q] != 0.0) v += spec_.zero_abs_sign * vtheta_[q] * std::abs(d.u);
        if (clin_[q] != 0.0) v += clin_[q] * d.u;
        return v;
    }

    /// Freeze the optimizing linear policy at one node given the current
    /// iterate's differences.  The frozen action agrees with residual_at
    /// when re-applied to the same iterate.
    FrozenNode freeze(const Field& u, NodeIndex nd) const {
        Derivs d = derivs(u, nd);
        std::size_t q = iidx(nd);
        const std::size_t ni = grid_.interior_count();
        FrozenNode fz;
        std::int32_t sig = 0;
        if (spec_.kind == OpKind::PucciPlus || spec_.kind == OpKind::PucciMinus) {
            bool plus = spec_.kind == OpKind::PucciPlus;
            if (grid_.dim() == 1) {
                bool up = d.d2[0] >= 0;
                double a = (up == plus) ? spec_.ell.beta : spec_.ell.alpha;
                fz.A = {a, 0.0, 0.0};
                sig = up ? 1 : 2;
            } else {
                // Spectral freeze A = beta P+ + alpha P- (reversed for M-).
                SymMat X{d.d2[0], d.cross, d.d2[1]};
                auto ev = X.eigenvalues();
                double c1 = (ev[0] >= 0) == plus ? spec_.ell.beta : spec_.ell.alpha;
                double c2 = (ev[1] >= 0) == plus ? spec_.ell.beta : spec_.ell.alpha;
                // Eigenvector for ev[1]: (xy, ev[1]-xx) or (ev[1]-yy, xy).
                double vx = X.xy, vy = ev[1] - X.xx;
                if (std::abs(vx) + std::abs(vy) < 1e-300) { vx = 1.0; vy = 0.0; }
                double nrm = std::hypot(vx, vy);
                vx /= nrm;
                vy /= nrm;
                // A = c2 vv^T + c1 (I - vv^T)
                fz.A = {c1 + (c2 - c1) * vx * vx, (c2 - c1) * vx * vy,
                        c1 + (c2 - c1) * vy * vy};
                sig = (ev[0] >= 0 ? 1 : 0) | (ev[1] >= 0 ? 2 : 0);
            }
        } else {
            std::vector<double> vals(nmembers_);
            for (std::size_t m = 0; m < nmembers_; ++m) vals[m] = member_value(m, q, d);
            std::size_t m;
            detail::family_value(spec_, vals, &m);
            fz.A = {mAxx_[m * ni + q],
                    grid_.dim() == 2 ? mAxy_[m * ni + q] : 0.0,
                    grid_.dim() == 2 ? mAyy_[m * ni + q] : 0.0};
            double bx = mbx_[m * ni + q];
            (bx >= 0 ? fz.bfwd[0] : fz.bbwd[0]) = bx;
            if (grid_.dim() == 2) {
                double by = mby_[m * ni + q];
                (by >= 0 ? fz.bfwd[1] : fz.bbwd[1]) = by;
            }
            fz.c = mc_[m * ni + q];
            sig = static_cast<std::int32_t>(m);
        }
        if (gamma_[q] != 0.0) {
            int s = spec_.gradient_sign;
            int brx = 0, bry = 0;
            double gx = godunov_axis(d.fwd[0], d.bwd[0], s, &brx);
            double gy = grid_.dim() == 2 ? godunov_axis(d.fwd[1], d.bwd[1], s, &bry) : 0.0;
            double norm = std::hypot(gx, gy);
            if (norm > 0) {
                // gamma |Du| ~ gamma sum_a w_a * (chosen one-sided difference),
                // weights w_a = g_a / |g| frozen from the current iterate.
                double wx = gamma_[q] * gx / norm;
                double wy = gamma_[q] * gy / norm;
                auto add_axis = [&](int axis, double w, int br) {
                    if (w == 0.0 || br == 0) return;
                    if (br == 1)
                        fz.bfwd[axis] += w;
                    else
                        fz.bbwd[axis] -= w;
                };
                add_axis(0, wx, brx);
                if (grid_.dim() == 2) add_axis(1, wy, bry);
            }
            sig = sig * 16 + brx * 4 + bry;
        }
        if (vtheta_[q] != 0.0) {
            int sg = d.u > 0 ? 1 : (d.u < 0 ? -1 : 0);
            fz.c += spec_.zero_abs_sign * vtheta_[q] * sg;
            sig = sig * 4 + (sg + 1);
        }
        fz.c += clin_[q];
        fz.signature = sig;
        return fz;
    }

private:
    Grid grid_;
    OperatorSpec spec_;
    std::size_t nmembers_ = 0;
    bool monotone_ = true;
    // Member coefficient samples at interior nodes, member-major.
    std::vector<double> mAxx_, mAxy_, mAyy_, mbx_, mby_, mc_;
    std::vector<double> gamma_, vtheta_, clin_;
};

inline DiscreteOperator discretize(const OperatorSpec& s, const Grid& g) {
    return DiscreteOperator(g, s);
}

/// Residual field F[u] at interior nodes; boundary entries carry u - g.
inline Field apply(const DiscreteOperator& dop, const Field& u,
                   const Field* boundary = nullptr) {
    if (!(u.grid() == dop.grid())) throw std::invalid_argument("apply: grid mismatch");
    Field out(dop.grid());
    dop.grid().for_interior(
        [&](NodeIndex nd) { out.at(nd) = dop.residual_at(u, nd); });
    dop.grid().for_boundary([&](NodeIndex nd) {
        out.at(nd) = u.at(nd) - (boundary ? boundary->at(nd) : 0.0);
    });
    return out;
}

}  // namespace lespectra
