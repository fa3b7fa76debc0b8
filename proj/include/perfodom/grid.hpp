#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "perfodom/geometry.hpp"

namespace perfodom {

struct Mat2 {
    double m[2][2] = {{0, 0}, {0, 0}};

    static Mat2 zero() { return {}; }
    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }
    Mat2 operator+(const Mat2& o) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }
    Mat2 operator-(const Mat2& o) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }
    Mat2 operator*(double s) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }
    Vec2 operator*(const Vec2& x) const {
        return v2(m[0][0] * x.c[0] + m[0][1] * x.c[1], m[1][0] * x.c[0] + m[1][1] * x.c[1]);
    }
    Mat2 transpose() const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[j][i];
        return r;
    }
    Mat2 sym() const { return (*this + transpose()) * 0.5; }
    Mat2 skew() const { return (*this - transpose()) * 0.5; }
    double frobenius2() const {
        double s = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) s += m[i][j] * m[i][j];
        return s;
    }
    double frobenius() const { return std::sqrt(frobenius2()); }
};

namespace field_traits {
inline double abs2(double v) { return v * v; }
inline double abs2(const Vec2& v) { return norm2(v); }
inline double abs2(const Mat2& v) { return v.frobenius2(); }
template <typename T>
T zero();
template <>
inline double zero<double>() {
    return 0.0;
}
template <>
inline Vec2 zero<Vec2>() {
    return v2(0, 0);
}
template <>
inline Mat2 zero<Mat2>() {
    return Mat2::zero();
}
}  // namespace field_traits

/// Scalar / vector / matrix samples on a uniform node-centered grid with a
/// boolean mask of defined nodes. Norms are h^d-weighted sums over the mask;
/// gradient stencils never combine nodes across the mask edge.
template <typename T>
struct GridField {
    Vec2 origin{};
    double h = 1;
    int nx = 0, ny = 0;
    std::vector<T> values;
    std::vector<char> mask;

    static GridField on_box(const Box<2>& box, double h) {
        if (!(h > 0)) throw std::invalid_argument("GridField: h must be positive");
        GridField f;
        f.origin = box.lo;
        f.h = h;
        f.nx = (int)std::floor(box.side(0) / h + 1e-9) + 1;
        f.ny = (int)std::floor(box.side(1) / h + 1e-9) + 1;
        f.values.assign((size_t)f.nx * f.ny, field_traits::zero<T>());
        f.mask.assign((size_t)f.nx * f.ny, 1);
        return f;
    }

    size_t idx(int i, int j) const { return (size_t)j * nx + i; }
    bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    bool on(int i, int j) const { return in_range(i, j) && mask[idx(i, j)]; }
    Vec2 node(int i, int j) const { return origin + v2(i * h, j * h); }
    T& at(int i, int j) { return values[idx(i, j)]; }
    const T& at(int i, int j) const { return values[idx(i, j)]; }

    template <typename F>
    void fill(F&& f) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (mask[idx(i, j)]) values[idx(i, j)] = f(node(i, j));
    }

    template <typename Member>
    void mask_by(Member&& member) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) mask[idx(i, j)] = member(node(i, j)) ? 1 : 0;
    }

    size_t count_on() const {
        size_t n = 0;
        for (char c : mask) n += c;
        return n;
    }

    /// Bilinear interpolation; requires all four corners defined unless
    /// `graceful`, in which case the defined corners are reweighted
    /// (degrades to O(h) accuracy in a boundary layer).
    T interpolate(const Vec2& x, bool graceful = false) const {
        double gx = (x.c[0] - origin.c[0]) / h, gy = (x.c[1] - origin.c[1]) / h;
        int i = (int)std::floor(gx), j = (int)std::floor(gy);
        if (i == nx - 1 && gx <= nx - 1 + 1e-12) --i;
        if (j == ny - 1 && gy <= ny - 1 + 1e-12) --j;
        if (i < 0 || j < 0 || i + 1 >= nx || j + 1 >= ny)
            throw std::domain_error("interpolate: point outside grid");
        double fx = gx - i, fy = gy - j;
        double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
        const int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
        T sum = field_traits::zero<T>();
        double tot = 0;
        for (int k = 0; k < 4; ++k) {
            bool def = mask[idx(i + di[k], j + dj[k])];
            if (!def) {
                if (!graceful) throw std::domain_error("interpolate: stencil crosses the mask");
                continue;
            }
            sum = sum + values[idx(i + di[k], j + dj[k])] * w[k];
            tot += w[k];
        }
        if (tot <= 0) throw std::domain_error("interpolate: no defined corner");
        return sum * (1.0 / tot);
    }

    bool can_interpolate(const Vec2& x) const {
        double gx = (x.c[0] - origin.c[0]) / h, gy = (x.c[1] - origin.c[1]) / h;
        int i = (int)std::floor(gx), j = (int)std::floor(gy);
        if (i == nx - 1 && gx <= nx - 1 + 1e-12) --i;
        if (j == ny - 1 && gy <= ny - 1 + 1e-12) --j;
        if (i < 0 || j < 0 || i + 1 >= nx || j + 1 >= ny) return false;
        return mask[idx(i, j)] && mask[idx(i + 1, j)] && mask[idx(i, j + 1)] && mask[idx(i + 1, j + 1)];
    }
};

/// Gradient of the bilinear interpolant of a scalar field (exact for affine
/// data). All four cell corners must be defined.
inline Vec2 interp_gradient(const GridField<double>& f, const Vec2& x) {
    double gx = (x.c[0] - f.origin.c[0]) / f.h, gy = (x.c[1] - f.origin.c[1]) / f.h;
    int i = (int)std::floor(gx), j = (int)std::floor(gy);
    if (i == f.nx - 1 && gx <= f.nx - 1 + 1e-12) --i;
    if (j == f.ny - 1 && gy <= f.ny - 1 + 1e-12) --j;
    if (i < 0 || j < 0 || i + 1 >= f.nx || j + 1 >= f.ny)
        throw std::domain_error("interp_gradient: point outside grid");
    if (!(f.mask[f.idx(i, j)] && f.mask[f.idx(i + 1, j)] && f.mask[f.idx(i, j + 1)] &&
          f.mask[f.idx(i + 1, j + 1)]))
        throw std::domain_error("interp_gradient: stencil crosses the mask");
    double fx = gx - i, fy = gy - j;
    double u00 = f.at(i, j), u10 = f.at(i + 1, j), u01 = f.at(i, j + 1), u11 = f.at(i + 1, j + 1);
    double dx = ((u10 - u00) * (1 - fy) + (u11 - u01) * fy) / f.h;
    double dy = ((u01 - u00) * (1 - fx) + (u11 - u10) * fx) / f.h;
    return v2(dx, dy);
}

inline Mat2 interp_jacobian(const GridField<Vec2>& f, const Vec2& x) {
    Mat2 J;
    double gx = (x.c[0] - f.origin.c[0]) / f.h, gy = (x.c[1] - f.origin.c[1]) / f.h;
    int i = (int)std::floor(gx), j = (int)std::floor(gy);
    if (i == f.nx - 1 && gx <= f.nx - 1 + 1e-12) --i;
    if (j == f.ny - 1 && gy <= f.ny - 1 + 1e-12) --j;
    if (i < 0 || j < 0 || i + 1 >= f.nx || j + 1 >= f.ny)
        throw std::domain_error("interp_jacobian: point outside grid");
    if (!(f.mask[f.idx(i, j)] && f.mask[f.idx(i + 1, j)] && f.mask[f.idx(i, j + 1)] &&
          f.mask[f.idx(i + 1, j + 1)]))
        throw std::domain_error("interp_jacobian: stencil crosses the mask");
    double fx = gx - i, fy = gy - j;
    for (int comp_i = 0; comp_i < 2; ++comp_i) {
        double u00 = f.at(i, j).c[comp_i], u10 = f.at(i + 1, j).c[comp_i];
        double u01 = f.at(i, j + 1).c[comp_i], u11 = f.at(i + 1, j + 1).c[comp_i];
        J(comp_i, 0) = ((u10 - u00) * (1 - fy) + (u11 - u01) * fy) / f.h;
        J(comp_i, 1) = ((u01 - u00) * (1 - fx) + (u11 - u10) * fx) / f.h;
    }
    return J;
}

/// Forward difference with backward fallback, never crossing the mask.
/// Returns false when no one-sided stencil is available.
inline bool grad_component(const GridField<double>& f, int i, int j, int axis, double& out) {
    int di = axis == 0 ? 1 : 0, dj = axis == 1 ? 1 : 0;
    if (f.on(i + di, j + dj)) {
        out = (f.at(i + di, j + dj) - f.at(i, j)) / f.h;
        return true;
    }
    if (f.on(i - di, j - dj)) {
        out = (f.at(i, j) - f.at(i - di, j - dj)) / f.h;
        return true;
    }
    return false;
}

/// Gradient field of a scalar field; nodes without a full one-sided stencil
/// are masked out.
inline GridField<Vec2> gradient(const GridField<double>& f) {
    GridField<Vec2> g;
    g.origin = f.origin;
    g.h = f.h;
    g.nx = f.nx;
    g.ny = f.ny;
    g.values.assign(f.values.size(), v2(0, 0));
    g.mask.assign(f.values.size(), 0);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            if (!f.on(i, j)) continue;
            double dx, dy;
            if (grad_component(f, i, j, 0, dx) && grad_component(f, i, j, 1, dy)) {
                g.values[g.idx(i, j)] = v2(dx, dy);
                g.mask[g.idx(i, j)] = 1;
            }
        }
    return g;
}

/// Jacobian field of a vector field (rows: components, cols: derivatives).
inline GridField<Mat2> jacobian(const GridField<Vec2>& f) {
    GridField<Mat2> g;
    g.origin = f.origin;
    g.h = f.h;
    g.nx = f.nx;
    g.ny = f.ny;
    g.values.assign(f.values.size(), Mat2::zero());
    g.mask.assign(f.values.size(), 0);
    auto diff = [&](int i, int j, int axis, Vec2& out) {
        int di = axis == 0 ? 1 : 0, dj = axis == 1 ? 1 : 0;
        if (f.on(i + di, j + dj)) {
            out = (f.at(i + di, j + dj) - f.at(i, j)) * (1.0 / f.h);
            return true;
        }
        if (f.on(i - di, j - dj)) {
            out = (f.at(i, j) - f.at(i - di, j - dj)) * (1.0 / f.h);
            return true;
        }
        return false;
    };
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            if (!f.on(i, j)) continue;
            Vec2 dx, dy;
            if (diff(i, j, 0, dx) && diff(i, j, 1, dy)) {
                Mat2 J;
                for (int c = 0; c < 2; ++c) {
                    J(c, 0) = dx.c[c];
                    J(c, 1) = dy.c[c];
                }
                g.values[g.idx(i, j)] = J;
                g.mask[g.idx(i, j)] = 1;
            }
        }
    return g;
}

/// h^d-weighted L^p norm over defined nodes, restricted by an optional
/// per-node predicate.
template <typename T, typename Pred>
double lp_norm_p(const GridField<T>& f, double p, Pred&& keep) {
    double sum = 0;
    double w = f.h * f.h;
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            if (!f.on(i, j) || !keep(i, j)) continue;
            double a2 = field_traits::abs2(f.at(i, j));
            sum += w * std::pow(a2, p / 2.0);
        }
    return sum;
}

template <typename T>
double lp_norm_p(const GridField<T>& f, double p) {
    return lp_norm_p(f, p, [](int, int) { return true; });
}

template <typename T>
double lp_norm(const GridField<T>& f, double p) {
    return std::pow(lp_norm_p(f, p), 1.0 / p);
}

/// Mean over grid nodes inside the ball (the resolution floor rejects balls
/// with fewer than 8 interior nodes).
template <typename T>
T ball_average(const GridField<T>& f, const Vec2& center, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("ball_average: radius must be positive");
    int i0 = (int)std::floor((center.c[0] - radius - f.origin.c[0]) / f.h);
    int i1 = (int)std::ceil((center.c[0] + radius - f.origin.c[0]) / f.h);
    int j0 = (int)std::floor((center.c[1] - radius - f.origin.c[1]) / f.h);
    int j1 = (int)std::ceil((center.c[1] + radius - f.origin.c[1]) / f.h);
    T sum = field_traits::zero<T>();
    size_t n = 0;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            if (!f.on(i, j)) continue;
            if (dist(f.node(i, j), center) >= radius) continue;
            sum = sum + f.at(i, j);
            ++n;
        }
    if (n < 8) throw std::domain_error("ball_average: fewer than 8 nodes in ball (resolution floor)");
    return sum * (1.0 / (double)n);
}

namespace detail {
// 4-node Gauss-Legendre on [0,1]
inline constexpr double kGL4x[4] = {0.06943184420297371, 0.33000947820757187, 0.6699905217924281,
                                    0.9305681557970262};
inline constexpr double kGL4w[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                    0.1739274225687269};
}  // namespace detail

/// Disk mean of a pointwise evaluator by a fixed 4x16 polar quadrature
/// (radially exact for quartics, exact for affine integrands). Radius can be
/// far below the grid spacing.
template <typename T, typename F>
T disk_average_quadrature(F&& eval, const Vec2& center, double radius) {
    T sum = field_traits::zero<T>();
    const int na = 16;
    for (int k = 0; k < 4; ++k) {
        double rho = radius * std::sqrt(detail::kGL4x[k]);
        T ring = field_traits::zero<T>();
        for (int a = 0; a < na; ++a) {
            double th = 2 * M_PI * (a + 0.5) / na;
            ring = ring + eval(center + v2(rho * std::cos(th), rho * std::sin(th)));
        }
        sum = sum + ring * (detail::kGL4w[k] / na);
    }
    return sum;
}

/// Gauss-Legendre nodes/weights on [a,b], n = 8 (used by the Nitsche
/// pullback integral).
inline void gauss8(double a, double b, double* x, double* w) {
    static const double xs[8] = {-0.9602898564975363, -0.7966664774136267, -0.525532409916329,
                                 -0.1834346424956498, 0.1834346424956498,  0.525532409916329,
                                 0.7966664774136267,  0.9602898564975363};
    static const double ws[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    for (int i = 0; i < 8; ++i) {
        x[i] = 0.5 * (a + b) + 0.5 * (b - a) * xs[i];
        w[i] = 0.5 * (b - a) * ws[i];
    }
}

}  // namespace perfodom
