#pragma once

// Structured uniform grids on intervals and axis-aligned rectangles,
// real-valued fields on them, sup norms and boundary-derivative probes.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace lespectra {

struct NodeIndex {
    int i = 0;
    int j = 0;
    bool operator==(const NodeIndex&) const = default;
};

/// Uniform tensor grid with explicitly stored boundary nodes.
/// Interior node counts are n[a] per axis; node a-th coordinate runs over
/// n[a]+2 values including the two endpoints.
class Grid {
public:
    Grid() = default;

    Grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
         std::array<int, 2> n)
        : dim_(dim), lo_(lo), hi_(hi), n_(n) {
        if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
        for (int a = 0; a < dim_; ++a) {
            if (!(hi_[a] > lo_[a])) throw std::invalid_argument("Grid: degenerate extents");
            if (n_[a] < 3) throw std::invalid_argument("Grid: need at least 3 interior nodes per axis");
            h_[a] = (hi_[a] - lo_[a]) / (n_[a] + 1);
        }
        if (dim_ == 1) { n_[1] = 1; h_[1] = 0.0; lo_[1] = 0.0; hi_[1] = 0.0; }
    }

    int dim() const { return dim_; }
    double lo(int axis) const { return lo_[axis]; }
    double hi(int axis) const { return hi_[axis]; }
    int interior(int axis) const { return n_[axis]; }
    double h(int axis) const { return h_[axis]; }

    /// Nodes per axis including the two boundary nodes.
    int npts(int axis) const { return axis < dim_ ? n_[axis] + 2 : 1; }

    std::size_t node_count() const {
        return static_cast<std::size_t>(npts(0)) * static_cast<std::size_t>(npts(1));
    }
    std::size_t interior_count() const {
        std::size_t c = n_[0];
        if (dim_ == 2) c *= n_[1];
        return c;
    }

    std::size_t flat(NodeIndex nd) const {
        return static_cast<std::size_t>(nd.i) + static_cast<std::size_t>(npts(0)) * nd.j;
    }
    NodeIndex unflat(std::size_t k) const {
        int nx = npts(0);
        return {static_cast<int>(k % nx), static_cast<int>(k / nx)};
    }

    double coord(int axis, int idx) const { return lo_[axis] + idx * h_[axis]; }
    std::array<double, 2> point(NodeIndex nd) const {
        return {coord(0, nd.i), dim_ == 2 ? coord(1, nd.j) : 0.0};
    }

    bool is_boundary(NodeIndex nd) const {
        if (nd.i == 0 || nd.i == npts(0) - 1) return true;
        if (dim_ == 2 && (nd.j == 0 || nd.j == npts(1) - 1)) return true;
        return false;
    }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && lo_ == o.lo_ && hi_ == o.hi_ && n_ == o.n_;
    }

    template <class F>
    void for_interior(F&& fn) const {
        if (dim_ == 1) {
            for (int i = 1; i <= n_[0]; ++i) fn(NodeIndex{i, 0});
        } else {
            for (int j = 1; j <= n_[1]; ++j)
                for (int i = 1; i <= n_[0]; ++i) fn(NodeIndex{i, j});
        }
    }

    template <class F>
    void for_boundary(F&& fn) const {
        if (dim_ == 1) {
            fn(NodeIndex{0, 0});
            fn(NodeIndex{npts(0) - 1, 0});
        } else {
            for (int j = 0; j < npts(1); ++j)
                for (int i = 0; i < npts(0); ++i) {
                    NodeIndex nd{i, j};
                    if (is_boundary(nd)) fn(nd);
                }
        }
    }

private:
    int dim_ = 1;
    std::array<double, 2> lo_{0.0, 0.0}, hi_{1.0, 0.0};
    std::array<int, 2> n_{3, 1};
    std::array<double, 2> h_{0.25, 0.0};
};

inline Grid make_uniform_grid(const std::vector<std::array<double, 2>>& extents,
                              const std::vector<int>& n) {
    if (extents.size() != n.size() || extents.empty() || extents.size() > 2)
        throw std::invalid_argument("make_uniform_grid: need 1 or 2 matching axes");
    std::array<double, 2> lo{0, 0}, hi{0, 0};
    std::array<int, 2> nn{1, 1};
    for (std::size_t a = 0; a < extents.size(); ++a) {
        lo[a] = extents[a][0];
        hi[a] = extents[a][1];
        nn[a] = n[a];
    }
    return Grid(static_cast<int>(extents.size()), lo, hi, nn);
}

/// Node samples of a real function, boundary values stored explicitly.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& g, double init = 0.0)
        : grid_(g), v_(g.node_count(), init) {}

    static Field sample(const Grid& g, const std::function<double(double, double)>& f) {
        Field out(g);
        for (std::size_t k = 0; k < out.v_.size(); ++k) {
            auto p = g.point(g.unflat(k));
            out.v_[k] = f(p[0], p[1]);
        }
        return out;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }

    double operator[](std::size_t k) const { return v_[k]; }
    double& operator[](std::size_t k) { return v_[k]; }
    double at(NodeIndex nd) const { return v_[grid_.flat(nd)]; }
    double& at(NodeIndex nd) { return v_[grid_.flat(nd)]; }

    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

private:
    Grid grid_;
    std::vector<double> v_;
};

inline void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("fields live on different grids");
}

inline double sup_norm(const Field& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k]));
    return m;
}

inline double interior_max(const Field& f) {
    double m = -std::numeric_limits<double>::infinity();
    f.grid().for_interior([&](NodeIndex nd) { m = std::max(m, f.at(nd)); });
    return m;
}

inline double interior_min(const Field& f) {
    double m = std::numeric_limits<double>::infinity();
    f.grid().for_interior([&](NodeIndex nd) { m = std::min(m, f.at(nd)); });
    return m;
}

/// One-sided difference quotient (f(x+h nu) - f(x))/h along the inward normal.
/// At a 2D corner the two inward axis probes are averaged.
inline double inward_boundary_derivative(const Field& f, NodeIndex nd) {
    const Grid& g = f.grid();
    if (!g.is_boundary(nd))
        throw std::invalid_argument("inward_boundary_derivative: node not on boundary");
    double acc = 0.0;
    int count = 0;
    if (nd.i == 0) {
        acc += (f.at({nd.i + 1, nd.j}) - f.at(nd)) / g.h(0);
        ++count;
    } else if (nd.i == g.npts(0) - 1) {
        acc += (f.at({nd.i - 1, nd.j}) - f.at(nd)) / g.h(0);
        ++count;
    }
    if (g.dim() == 2) {
        if (nd.j == 0) {
            acc += (f.at({nd.i, nd.j + 1}) - f.at(nd)) / g.h(1);
            ++count;
        } else if (nd.j == g.npts(1) - 1) {
            acc += (f.at({nd.i, nd.j - 1}) - f.at(nd)) / g.h(1);
            ++count;
        }
    }
    return acc / count;
}

/// Product of distances to the opposite boundary faces; the standard
/// positive, boundary-vanishing start for cone iterations.
inline Field boundary_distance_bump(const Grid& g) {
    Field out = Field::sample(g, [&](double x, double y) {
        double b = (x - g.lo(0)) * (g.hi(0) - x);
        if (g.dim() == 2) b *= (y - g.lo(1)) * (g.hi(1) - y);
        return b;
    });
    double m = sup_norm(out);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] /= m;
    return out;
}

// Field arithmetic (new-value semantics; inputs are never mutated).

inline Field operator*(double c, const Field& f) {
    Field out = f;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= c;
    return out;
}

inline Field operator+(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
    return out;
}

inline Field operator-(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
    return out;
}

}  // namespace lespectra
