#pragma once

// Principal half-eigenvalues: scalar inverse power iteration on the proper
// shifted operator, coupled inverse iteration with gauge recovery for the
// Lane-Emden system, and a deflated solver for the second eigenvalue of
// linear symmetric instances.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <optional>
#include <stdexcept>

#include "lespectra/geometry.hpp"
#include "lespectra/operators.hpp"
#include "lespectra/profiles.hpp"
#include "lespectra/solve.hpp"

namespace lespectra {

struct ExponentPair {
    double p = 1.0;
    double q = 1.0;

    ExponentPair() = default;
    ExponentPair(double p_, double q_) : p(p_), q(q_) {
        if (!(p > 0) || !(q > 0)) throw std::invalid_argument("ExponentPair: p,q > 0");
        if (p * q > 1.0 + 1e-12)
            throw std::invalid_argument("ExponentPair: pq > 1 unsupported");
    }
    bool pq_equal_1() const { return std::abs(p * q - 1.0) <= 1e-12; }
    bool sublinear() const { return p * q < 1.0 - 1e-12; }
};

struct EigenPair {
    double lambda1 = 0.0;
    Field u;
    std::optional<Field> v;
    int sign = +1;
    double residual = 0.0;
    int iterations = 0;
    std::array<double, 2> lambda_raw{0.0, 0.0};  // per-equation multipliers
};

struct EigenOptions {
    double residual_tol = 1e-8;
    double lambda_tol = 1e-10;
    int max_sweeps = 500;
    bool include_weight_shift = false;  // spec carries +theta(x)u: report lambda0 - 1
    SolveOptions inner;
};

namespace detail {

inline void require_weight(const Field& theta) {
    bool nonzero = false;
    theta.grid().for_interior([&](NodeIndex nd) {
        if (theta.at(nd) < 0)
            throw std::invalid_argument("weight must be nonnegative");
        if (theta.at(nd) > 0) nonzero = true;
    });
    if (!nonzero) throw std::invalid_argument("weight vanishes identically");
}

inline void require_interior_positive(const Field& w, const char* what) {
    w.grid().for_interior([&](NodeIndex nd) {
        if (!(w.at(nd) > 0)) throw std::runtime_error(std::string(what) +
            ": iterate lost positivity (grid too coarse or H3 fails discretely)");
    });
}

}  // namespace detail

/// lambda_1^+ (sign=+) or lambda_1^- (sign=-) of the scalar problem
/// F[u] + lambda theta(x) u = 0.  The minus branch reflects the operator and
/// runs the positive-cone iteration.
inline EigenPair scalar_principal_eigen(const OperatorSpec& spec, const Field& theta,
                                        int sign, const EigenOptions& opts = {}) {
    detail::require_weight(theta);
    const Grid& g = theta.grid();
    OperatorSpec work = sign < 0 ? reflect(spec) : spec;
    DiscreteOperator dop(g, work);

    Field u = boundary_distance_bump(g);
    Field zero_bdry(g);
    double lambda = 0.0, lambda_prev = -1.0, rel = 1.0;
    int sweeps = 0;
    for (int it = 1; it <= opts.max_sweeps; ++it) {
        sweeps = it;
        Field rhs(g);
        g.for_interior([&](NodeIndex nd) { rhs.at(nd) = -theta.at(nd) * u.at(nd); });
        auto [w, rep] = solve_nonlinear({dop, rhs, zero_bdry}, opts.inner, &u);
        detail::require_interior_positive(w, "scalar_principal_eigen");
        double nw = sup_norm(w);
        lambda = 1.0 / nw;
        for (std::size_t k = 0; k < u.size(); ++k) u[k] = w[k] / nw;

        double num = 0.0, den = 0.0;
        g.for_interior([&](NodeIndex nd) {
            double tu = theta.at(nd) * u.at(nd);
            num = std::max(num, std::abs(dop.residual_at(u, nd) + lambda * tu));
            den = std::max(den, std::abs(tu));
        });
        rel = den > 0 ? num / den : num;
        if (rel <= opts.residual_tol &&
            std::abs(lambda - lambda_prev) <= opts.lambda_tol * lambda)
            break;
        lambda_prev = lambda;
    }
    EigenPair out;
    out.lambda1 = lambda - (opts.include_weight_shift ? 1.0 : 0.0);
    out.sign = sign < 0 ? -1 : +1;
    out.u = sign < 0 ? -1.0 * u : u;
    out.residual = rel;
    out.iterations = sweeps;
    out.lambda_raw = {lambda, lambda};
    return out;
}

/// Lower bound 1/(C_A ||theta||_N) - 1 from the empirical ABP constant.
inline double abp_lower_bound(const Field& theta, double C_A) {
    if (!(C_A > 0)) throw std::invalid_argument("abp_lower_bound: C_A must be positive");
    const Grid& g = theta.grid();
    const int N = g.dim();
    double cell = g.h(0) * (g.dim() == 2 ? g.h(1) : 1.0);
    double acc = 0.0;
    g.for_interior([&](NodeIndex nd) { acc += std::pow(std::abs(theta.at(nd)), N) * cell; });
    double norm = std::pow(acc, 1.0 / N);
    if (norm == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (C_A * norm) - 1.0;
}

/// Coupled inverse iteration for the system principal half-eigenvalue with
/// both components sup-normalized each sweep; the eigenvalue is recovered
/// from the two multipliers by the curve identity (mu lambda^p)^(1/(p+1)).
inline EigenPair system_principal_eigen(const OperatorSpec& f1, const OperatorSpec& f2,
                                        const Field& tau1, const Field& tau2,
                                        const ExponentPair& exps, int sign,
                                        const EigenOptions& opts = {},
                                        const Field* start_u = nullptr,
                                        const Field* start_v = nullptr) {
    if (!exps.pq_equal_1())
        throw std::invalid_argument("system_principal_eigen: needs pq = 1");
    require_same_grid(tau1, tau2);
    detail::require_weight(tau1);
    detail::require_weight(tau2);
    const Grid& g = tau1.grid();
    bool overlap = false;
    g.for_interior([&](NodeIndex nd) {
        if (tau1.at(nd) * tau2.at(nd) > 0) overlap = true;
    });
    if (!overlap)
        throw std::invalid_argument("system_principal_eigen: weight supports are disjoint");

    OperatorSpec w1 = sign < 0 ? reflect(f1) : f1;
    OperatorSpec w2 = sign < 0 ? reflect(f2) : f2;
    DiscreteOperator d1(g, w1), d2(g, w2);

    Field u = start_u ? *start_u : boundary_distance_bump(g);
    Field v = start_v ? *start_v : boundary_distance_bump(g);
    Field zero_bdry(g);
    double lambda = 0.0, mu = 0.0, lambda_prev = -1.0, mu_prev = -1.0, rel = 1.0;
    int sweeps = 0;
    for (int it = 1; it <= opts.max_sweeps; ++it) {
        sweeps = it;
        Field rhs1(g), rhs2(g);
        g.for_interior([&](NodeIndex nd) {
            rhs1.at(nd) = -tau1.at(nd) * signed_power(v.at(nd), exps.q);
            rhs2.at(nd) = -tau2.at(nd) * signed_power(u.at(nd), exps.p);
        });
        auto [U, rep1] = solve_nonlinear({d1, rhs1, zero_bdry}, opts.inner, &u);
        auto [V, rep2] = solve_nonlinear({d2, rhs2, zero_bdry}, opts.inner, &v);
        detail::require_interior_positive(U, "system_principal_eigen");
        detail::require_interior_positive(V, "system_principal_eigen");
        lambda = 1.0 / sup_norm(U);
        mu = 1.0 / sup_norm(V);
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] = U[k] * lambda;
            v[k] = V[k] * mu;
        }

        double num1 = 0.0, den1 = 0.0, num2 = 0.0, den2 = 0.0;
        g.for_interior([&](NodeIndex nd) {
            double c1 = tau1.at(nd) * signed_power(v.at(nd), exps.q);
            double c2 = tau2.at(nd) * signed_power(u.at(nd), exps.p);
            num1 = std::max(num1, std::abs(d1.residual_at(u, nd) + lambda * c1));
            den1 = std::max(den1, std::abs(c1));
            num2 = std::max(num2, std::abs(d2.residual_at(v, nd) + mu * c2));
            den2 = std::max(den2, std::abs(c2));
        });
        rel = std::max(den1 > 0 ? num1 / den1 : num1, den2 > 0 ? num2 / den2 : num2);
        if (rel <= opts.residual_tol &&
            std::abs(lambda - lambda_prev) <= opts.lambda_tol * lambda &&
            std::abs(mu - mu_prev) <= opts.lambda_tol * mu)
            break;
        lambda_prev = lambda;
        mu_prev = mu;
    }
    EigenPair out;
    out.lambda1 = std::pow(mu * std::pow(lambda, exps.p), 1.0 / (exps.p + 1.0));
    out.sign = sign < 0 ? -1 : +1;
    out.u = sign < 0 ? -1.0 * u : u;
    out.v = sign < 0 ? -1.0 * v : v;
    out.residual = rel;
    out.iterations = sweeps;
    out.lambda_raw = {lambda, mu};
    return out;
}

/// Distance between two eigenpairs after aligning pair2 on the gauge orbit
/// (t u, t^p v) so that the u sup-norms match.
inline double gauge_distance(const EigenPair& a, const EigenPair& b, double p) {
    if (!(a.u.grid() == b.u.grid()))
        throw std::invalid_argument("gauge_distance: grids differ");
    if (a.sign != b.sign) throw std::invalid_argument("gauge_distance: sign branches differ");
    double t = sup_norm(a.u) / sup_norm(b.u);
    double du = 0.0, dv = 0.0;
    for (std::size_t k = 0; k < a.u.size(); ++k)
        du = std::max(du, std::abs(a.u[k] - t * b.u[k]));
    if (a.v && b.v) {
        double tp = std::pow(t, p);
        for (std::size_t k = 0; k < a.v->size(); ++k)
            dv = std::max(dv, std::abs((*a.v)[k] - tp * (*b.v)[k]));
    }
    return std::max(du, dv);
}

namespace detail {

/// Interior-only matrix of -L with zero Dirichlet boundary.
inline SpMat assemble_interior_neg(const LinearOpSpec& L, const Grid& g) {
    DiscreteOperator dop(g, OperatorSpec::linear(L));
    Field zero(g);
    const auto N = static_cast<Eigen::Index>(g.interior_count());
    std::vector<Eigen::Triplet<double>> trip;
    const double hx = g.h(0), hy = g.dim() == 2 ? g.h(1) : 1.0;
    auto interior_id = [&](NodeIndex nd) -> Eigen::Index {
        if (g.is_boundary(nd)) return -1;
        return static_cast<Eigen::Index>(dop.iidx(nd));
    };
    g.for_interior([&](NodeIndex nd) {
        FrozenNode z = dop.freeze(zero, nd);
        Eigen::Index row = interior_id(nd);
        double diag = 0.0;
        auto add = [&](int di, int dj, double vv) {
            Eigen::Index col = interior_id({nd.i + di, nd.j + dj});
            if (col >= 0) trip.emplace_back(row, col, -vv);  // minus: matrix of -L
        };
        double axx = z.A.xx / (hx * hx);
        add(1, 0, axx);
        add(-1, 0, axx);
        diag -= 2.0 * axx;
        if (g.dim() == 2) {
            double ayy = z.A.yy / (hy * hy);
            add(0, 1, ayy);
            add(0, -1, ayy);
            diag -= 2.0 * ayy;
            if (z.A.xy != 0.0) {
                double cxy = z.A.xy / (2.0 * hx * hy);
                add(1, 1, cxy);
                add(-1, -1, cxy);
                add(1, -1, -cxy);
                add(-1, 1, -cxy);
            }
        }
        if (z.bfwd[0] != 0.0) {
            add(1, 0, z.bfwd[0] / hx);
            diag -= z.bfwd[0] / hx;
        }
        if (z.bbwd[0] != 0.0) {
            add(-1, 0, -z.bbwd[0] / hx);
            diag += z.bbwd[0] / hx;
        }
        if (g.dim() == 2) {
            if (z.bfwd[1] != 0.0) {
                add(0, 1, z.bfwd[1] / hy);
                diag -= z.bfwd[1] / hy;
            }
            if (z.bbwd[1] != 0.0) {
                add(0, -1, -z.bbwd[1] / hy);
                diag += z.bbwd[1] / hy;
            }
        }
        diag += z.c;
        add(0, 0, diag);
    });
    SpMat A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

}  // namespace detail

/// Second generalized eigenvalue of -L[w] = lambda tau w (zero Dirichlet),
/// by shift-invert power iteration with deflation against the ground mode.
inline double second_eigen_linear_symmetric(const LinearOpSpec& L, const Field& tau,
                                            const Grid& g) {
    detail::require_weight(tau);
    detail::SpMat A = detail::assemble_interior_neg(L, g);
    const auto N = A.rows();
    Eigen::VectorXd t(N);
    DiscreteOperator dop(g, OperatorSpec::linear(L));
    g.for_interior([&](NodeIndex nd) {
        t[static_cast<Eigen::Index>(dop.iidx(nd))] = tau.at(nd);
    });

    Eigen::SparseLU<detail::SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("second_eigen_linear_symmetric: singular operator");

    auto rayleigh = [&](const Eigen::VectorXd& w) {
        double num = w.dot(A * w), den = w.dot(t.cwiseProduct(w));
        return num / den;
    };
    auto inverse_iterate = [&](Eigen::VectorXd w, const Eigen::VectorXd* deflate) {
        double lam = 0.0, lam_prev = -1.0;
        double dnorm = deflate ? deflate->dot(t.cwiseProduct(*deflate)) : 0.0;
        for (int it = 0; it < 20000; ++it) {
            // Materialize the right-hand side: SparseLU's solve permutes the
            // RHS into the destination, so it must not alias w.
            Eigen::VectorXd rhs = t.cwiseProduct(w);
            w = lu.solve(rhs);
            if (deflate) w -= (deflate->dot(t.cwiseProduct(w)) / dnorm) * (*deflate);
            w /= w.norm();
            lam = rayleigh(w);
            if (it > 2 && std::abs(lam - lam_prev) <= 1e-13 * std::abs(lam)) break;
            lam_prev = lam;
        }
        return std::pair{lam, w};
    };

    Eigen::VectorXd w0 = Eigen::VectorXd::Ones(N);
    auto [lam1, v1] = inverse_iterate(w0, nullptr);
    // Start orthogonal to the ground mode with a sign-changing seed.
    Eigen::VectorXd w1(N);
    g.for_interior([&](NodeIndex nd) {
        auto p = g.point(nd);
        double mid = 0.5 * (g.lo(0) + g.hi(0));
        w1[static_cast<Eigen::Index>(dop.iidx(nd))] = p[0] - mid + 0.1;
    });
    auto [lam2, v2] = inverse_iterate(w1, &v1);
    (void)lam1;
    (void)v2;
    return lam2;
}

}  // namespace lespectra
