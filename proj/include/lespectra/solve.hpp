#pragma once

// Scalar Dirichlet solvers: frozen-policy linear solves (sparse LU) and
// Howard policy iteration with a damped-Picard fallback, plus the ABP audit.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "lespectra/geometry.hpp"
#include "lespectra/operators.hpp"

namespace lespectra {

struct SolveOptions {
    double tol = 1e-10;
    int max_sweeps = 200;
    double damping = 0.5;       // Picard fallback relaxation
    int cycle_window = 10;      // repeated policy signature window
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    int policy_switches = 0;
    bool converged = false;
    std::string method = "policy";
};

struct DirichletProblem {
    const DiscreteOperator& dop;
    Field f;         // right-hand side, F[u] = f at interior nodes
    Field boundary;  // Dirichlet data, read at boundary nodes
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;

/// Assemble the frozen linear system over all nodes (identity rows at the
/// boundary).  Positive zero-order parts are shifted to the right-hand side
/// against the lagged iterate, keeping the frozen matrix proper.
inline void assemble_frozen(const DiscreteOperator& dop,
                            const std::vector<FrozenNode>& fz, const Field& f,
                            const Field& boundary, const Field& lag, SpMat& M,
                            Eigen::VectorXd& rhs) {
    const Grid& g = dop.grid();
    const std::size_t N = g.node_count();
    const double hx = g.h(0), hy = g.dim() == 2 ? g.h(1) : 1.0;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * N);
    rhs.setZero(static_cast<Eigen::Index>(N));

    g.for_boundary([&](NodeIndex nd) {
        auto k = static_cast<Eigen::Index>(g.flat(nd));
        trip.emplace_back(k, k, 1.0);
        rhs[k] = boundary.at(nd);
    });
    g.for_interior([&](NodeIndex nd) {
        const FrozenNode& z = fz[dop.iidx(nd)];
        auto row = static_cast<Eigen::Index>(g.flat(nd));
        auto at = [&](int di, int dj) {
            return static_cast<Eigen::Index>(g.flat({nd.i + di, nd.j + dj}));
        };
        double diag = 0.0;
        auto add = [&](Eigen::Index col, double v) { trip.emplace_back(row, col, v); };

        double axx = z.A.xx / (hx * hx);
        add(at(1, 0), axx);
        add(at(-1, 0), axx);
        diag -= 2.0 * axx;
        if (g.dim() == 2) {
            double ayy = z.A.yy / (hy * hy);
            add(at(0, 1), ayy);
            add(at(0, -1), ayy);
            diag -= 2.0 * ayy;
            if (z.A.xy != 0.0) {
                double cxy = 2.0 * z.A.xy / (4.0 * hx * hy);
                add(at(1, 1), cxy);
                add(at(-1, -1), cxy);
                add(at(1, -1), -cxy);
                add(at(-1, 1), -cxy);
            }
        }
        if (z.bfwd[0] != 0.0) {
            add(at(1, 0), z.bfwd[0] / hx);
            diag -= z.bfwd[0] / hx;
        }
        if (z.bbwd[0] != 0.0) {
            add(at(-1, 0), -z.bbwd[0] / hx);
            diag += z.bbwd[0] / hx;
        }
        if (g.dim() == 2) {
            if (z.bfwd[1] != 0.0) {
                add(at(0, 1), z.bfwd[1] / hy);
                diag -= z.bfwd[1] / hy;
            }
            if (z.bbwd[1] != 0.0) {
                add(at(0, -1), -z.bbwd[1] / hy);
                diag += z.bbwd[1] / hy;
            }
        }
        double cneg = std::min(z.c, 0.0), cpos = z.c - cneg;
        diag += cneg;
        add(row, diag);
        rhs[row] = f.at(nd) - cpos * lag.at(nd);
    });
    M.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    M.setFromTriplets(trip.begin(), trip.end());
}

inline Field solve_sparse(const Grid& g, const SpMat& M, const Eigen::VectorXd& rhs) {
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(M);
    lu.factorize(M);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_linear: singular frozen system");
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_linear: sparse solve failed");
    Field out(g);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = x[static_cast<Eigen::Index>(k)];
    return out;
}

inline double interior_residual_norm(const DiscreteOperator& dop, const Field& u,
                                     const Field& f) {
    double r = 0.0;
    dop.grid().for_interior([&](NodeIndex nd) {
        r = std::max(r, std::abs(dop.residual_at(u, nd) - f.at(nd)));
    });
    return r;
}

}  // namespace detail

/// Direct solve of a frozen linear operator (kind Linear, no |Du| term).
inline Field solve_linear(const DiscreteOperator& dop, const Field& f,
                          const Field& boundary) {
    if (dop.spec().kind != OpKind::Linear)
        throw std::invalid_argument("solve_linear: operator is not linear");
    if (!dop.spec().gradient_magnitude.is_zero() || !dop.spec().zero_abs.is_zero())
        throw std::invalid_argument("solve_linear: spec carries nonlinear terms");
    Field zero(dop.grid());
    std::vector<FrozenNode> fz(dop.grid().interior_count());
    dop.grid().for_interior([&](NodeIndex nd) { fz[dop.iidx(nd)] = dop.freeze(zero, nd); });
    detail::SpMat M;
    Eigen::VectorXd rhs;
    detail::assemble_frozen(dop, fz, f, boundary, zero, M, rhs);
    return detail::solve_sparse(dop.grid(), M, rhs);
}

inline Field solve_linear(const LinearOpSpec& m, const Grid& g, const Field& f,
                          const Field& boundary) {
    DiscreteOperator dop(g, OperatorSpec::linear(m));
    return solve_linear(dop, f, boundary);
}

/// Howard policy iteration: freeze the optimizing linear member per node,
/// solve the frozen Dirichlet problem, repeat until the policy is stable and
/// the residual is below tolerance.  Detected policy cycling switches to
/// damped Picard relaxation.
inline std::pair<Field, SolveReport> solve_nonlinear(
    const DirichletProblem& prob, const SolveOptions& opts = {},
    const Field* initial = nullptr) {
    const DiscreteOperator& dop = prob.dop;
    const Grid& g = dop.grid();
    SolveReport rep;

    if (!initial && sup_norm(prob.f) == 0.0 && sup_norm(prob.boundary) == 0.0) {
        rep.converged = true;
        return {Field(g), rep};
    }

    Field u = initial ? *initial : Field(g);
    g.for_boundary([&](NodeIndex nd) { u.at(nd) = prob.boundary.at(nd); });

    const double fscale = 1.0 + sup_norm(prob.f) + sup_norm(prob.boundary);
    std::vector<std::int32_t> prev_sig;
    std::deque<std::size_t> recent_hashes;
    bool picard_mode = false;
    bool policy_stable = false;

    std::vector<FrozenNode> fz(g.interior_count());
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        rep.iterations = sweep;
        g.for_interior([&](NodeIndex nd) { fz[dop.iidx(nd)] = dop.freeze(u, nd); });

        std::vector<std::int32_t> sig(fz.size());
        std::size_t hash = 1469598103934665603ull;
        for (std::size_t k = 0; k < fz.size(); ++k) {
            sig[k] = fz[k].signature;
            hash = (hash ^ static_cast<std::size_t>(sig[k])) * 1099511628211ull;
        }
        policy_stable = sig == prev_sig;
        if (!prev_sig.empty() && !policy_stable) ++rep.policy_switches;
        if (!picard_mode && !policy_stable) {
            for (std::size_t hprev : recent_hashes)
                if (hprev == hash) {
                    picard_mode = true;
                    rep.method = "picard";
                }
        }
        recent_hashes.push_back(hash);
        if (static_cast<int>(recent_hashes.size()) > opts.cycle_window)
            recent_hashes.pop_front();
        prev_sig = std::move(sig);

        detail::SpMat M;
        Eigen::VectorXd rhs;
        detail::assemble_frozen(dop, fz, prob.f, prob.boundary, u, M, rhs);
        Field cand = detail::solve_sparse(g, M, rhs);
        if (picard_mode) {
            for (std::size_t k = 0; k < u.size(); ++k)
                cand[k] = u[k] + opts.damping * (cand[k] - u[k]);
        }
        for (std::size_t k = 0; k < cand.size(); ++k)
            if (!std::isfinite(cand[k]))
                throw std::runtime_error("solve_nonlinear: NaN in iterate");
        u = std::move(cand);

        rep.residual = detail::interior_residual_norm(dop, u, prob.f);
        if (rep.residual <= opts.tol * fscale && (policy_stable || picard_mode)) {
            rep.converged = true;
            break;
        }
    }
    return {u, rep};
}

struct AbpAudit {
    double lhs = 0.0;        // max over all nodes of u
    double boundary_term = 0.0;  // max over boundary of u+
    double rhs_norm = 0.0;   // discrete L^N norm of f-
    double ratio = 0.0;      // empirical C_A sample
};

/// Empirical Alexandrov-Bakelman-Pucci sample: max u against boundary
/// positive part plus the L^N norm of the negative forcing part.
inline AbpAudit abp_audit(const Field& u, const Field& f) {
    require_same_grid(u, f);
    const Grid& g = u.grid();
    AbpAudit a;
    a.lhs = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k) a.lhs = std::max(a.lhs, u[k]);
    g.for_boundary([&](NodeIndex nd) {
        a.boundary_term = std::max(a.boundary_term, std::max(u.at(nd), 0.0));
    });
    const int N = g.dim();
    double cell = g.h(0) * (g.dim() == 2 ? g.h(1) : 1.0);
    double acc = 0.0;
    g.for_interior([&](NodeIndex nd) {
        double fm = std::max(-f.at(nd), 0.0);
        acc += std::pow(fm, N) * cell;
    });
    a.rhs_norm = std::pow(acc, 1.0 / N);
    double excess = a.lhs - a.boundary_term;
    if (a.lhs <= 0.0 || excess <= 0.0)
        a.ratio = 0.0;
    else
        a.ratio = a.rhs_norm > 0.0 ? excess / a.rhs_norm
                                   : std::numeric_limits<double>::infinity();
    return a;
}

}  // namespace lespectra
