#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace perfodom {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <int D>
struct Vec {
    static_assert(D == 2 || D == 3, "dimension is 2 or 3");
    std::array<double, D> c{};

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec operator+(const Vec& o) const {
        Vec r;
        for (int i = 0; i < D; ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r;
        for (int i = 0; i < D; ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r;
        for (int i = 0; i < D; ++i) r.c[i] = c[i] * s;
        return r;
    }
    Vec operator-() const { return *this * (-1.0); }
    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < D; ++i) c[i] += o.c[i];
        return *this;
    }
    bool operator==(const Vec& o) const { return c == o.c; }
};

template <int D>
inline Vec<D> operator*(double s, const Vec<D>& v) {
    return v * s;
}

template <int D>
inline double dot(const Vec<D>& a, const Vec<D>& b) {
    double s = 0;
    for (int i = 0; i < D; ++i) s += a.c[i] * b.c[i];
    return s;
}

template <int D>
inline double norm2(const Vec<D>& a) {
    return dot(a, a);
}

template <int D>
inline double norm(const Vec<D>& a) {
    return std::sqrt(norm2(a));
}

template <int D>
inline double dist(const Vec<D>& a, const Vec<D>& b) {
    return norm(a - b);
}

template <int D>
inline Vec<D> normalized(const Vec<D>& a) {
    double n = norm(a);
    if (n == 0) throw std::invalid_argument("normalized: zero vector");
    return a * (1.0 / n);
}

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

inline Vec2 v2(double x, double y) { return Vec2{{x, y}}; }
inline Vec3 v3(double x, double y, double z) { return Vec3{{x, y, z}}; }

inline double cross(const Vec2& a, const Vec2& b) { return a.c[0] * b.c[1] - a.c[1] * b.c[0]; }
/// Rotate by +90 degrees.
inline Vec2 perp(const Vec2& a) { return v2(-a.c[1], a.c[0]); }

template <int D>
struct Ball {
    Vec<D> center;
    double radius = 0;

    Ball() = default;
    Ball(const Vec<D>& c, double r) : center(c), radius(r) {
        if (!(r > 0)) throw std::invalid_argument("Ball: radius must be positive");
    }
    bool contains(const Vec<D>& x) const { return dist(x, center) < radius; }
};

/// Axis-aligned box [lo, hi]^D.
template <int D>
struct Box {
    Vec<D> lo{}, hi{};

    Box() = default;
    Box(const Vec<D>& a, const Vec<D>& b) : lo(a), hi(b) {
        for (int i = 0; i < D; ++i)
            if (!(lo.c[i] < hi.c[i])) throw std::invalid_argument("Box: empty interior");
    }
    static Box cube(double a, double b) {
        Box r;
        for (int i = 0; i < D; ++i) {
            r.lo.c[i] = a;
            r.hi.c[i] = b;
        }
        if (!(a < b)) throw std::invalid_argument("Box: empty interior");
        return r;
    }
    /// Centered square/cube of side `side`.
    static Box centered(double side) { return cube(-side / 2, side / 2); }

    double volume() const {
        double v = 1;
        for (int i = 0; i < D; ++i) v *= hi.c[i] - lo.c[i];
        return v;
    }
    double side(int i) const { return hi.c[i] - lo.c[i]; }
    bool contains(const Vec<D>& x) const {
        for (int i = 0; i < D; ++i)
            if (x.c[i] < lo.c[i] || x.c[i] > hi.c[i]) return false;
        return true;
    }
    Box padded(double pad) const {
        Box r = *this;
        for (int i = 0; i < D; ++i) {
            r.lo.c[i] -= pad;
            r.hi.c[i] += pad;
        }
        return r;
    }
    /// Scaled box m*[lo,hi] about the origin.
    Box scaled(double m) const {
        Box r = *this;
        for (int i = 0; i < D; ++i) {
            r.lo.c[i] *= m;
            r.hi.c[i] *= m;
        }
        return r;
    }
    Vec<D> center() const { return (lo + hi) * 0.5; }
};

using Window = Box<2>;

/// Cone with apex x, unit axis nu, half angle alpha and height R:
/// { z : (z-x).nu > |z-x| cos(alpha), |z-x| < R }.
template <int D>
struct Cone {
    Vec<D> apex;
    Vec<D> axis;
    double half_angle = 0;
    double height = kInf;

    Cone(const Vec<D>& a, const Vec<D>& ax, double alpha, double R = kInf)
        : apex(a), axis(ax), half_angle(alpha), height(R) {
        if (std::abs(norm(axis) - 1.0) > 1e-12) throw std::invalid_argument("Cone: axis not unit");
        if (!(alpha > 0 && alpha < M_PI / 2)) throw std::invalid_argument("Cone: half angle out of (0,pi/2)");
        if (!(R > 0)) throw std::invalid_argument("Cone: height must be positive");
    }
};

template <int D>
inline bool cone_contains(const Cone<D>& cone, const Vec<D>& z) {
    Vec<D> w = z - cone.apex;
    double n = norm(w);
    if (!(n < cone.height)) return false;
    return dot(w, cone.axis) > n * std::cos(cone.half_angle);
}

/// Volume of the unit ball in dimension D.
inline double unit_ball_volume(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        default: throw std::invalid_argument("unit_ball_volume: unsupported dimension");
    }
}

/// Surface measure of the unit sphere S^{d-1}.
inline double unit_sphere_area(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
        default: throw std::invalid_argument("unit_sphere_area: unsupported dimension");
    }
}

// ---- segment / polygon helpers (2D) ----

inline Vec2 closest_point_on_segment(const Vec2& a, const Vec2& b, const Vec2& x) {
    Vec2 ab = b - a;
    double t = norm2(ab) > 0 ? dot(x - a, ab) / norm2(ab) : 0.0;
    t = std::fmin(1.0, std::fmax(0.0, t));
    return a + ab * t;
}

inline double dist_point_segment(const Vec2& a, const Vec2& b, const Vec2& x) {
    return dist(x, closest_point_on_segment(a, b, x));
}

inline double dist_segment_segment(const Vec2& a1, const Vec2& b1, const Vec2& a2, const Vec2& b2) {
    auto sgn = [](double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
    double d1 = cross(b1 - a1, a2 - a1), d2 = cross(b1 - a1, b2 - a1);
    double d3 = cross(b2 - a2, a1 - a2), d4 = cross(b2 - a2, b1 - a2);
    if (sgn(d1) * sgn(d2) < 0 && sgn(d3) * sgn(d4) < 0) return 0.0;  // proper intersection
    double d = dist_point_segment(a1, b1, a2);
    d = std::fmin(d, dist_point_segment(a1, b1, b2));
    d = std::fmin(d, dist_point_segment(a2, b2, a1));
    d = std::fmin(d, dist_point_segment(a2, b2, b1));
    return d;
}

/// Convex polygon, vertices in counter-clockwise order.
struct ConvexPolygon {
    std::vector<Vec2> v;

    bool empty() const { return v.size() < 3; }

    /// tol is a signed distance tolerance; degenerate micro-edges from
    /// clipping are skipped.
    bool contains(const Vec2& x, double tol = 0.0) const {
        size_t n = v.size();
        if (n < 3) return false;
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = v[i];
            const Vec2& b = v[(i + 1) % n];
            double len = dist(a, b);
            if (len < 1e-12) continue;
            if (cross(b - a, x - a) < -tol * len) return false;
        }
        return true;
    }

    /// Collapse consecutive duplicate vertices within tolerance.
    void dedupe(double tol) {
        if (v.size() < 2) return;
        std::vector<Vec2> out;
        for (const Vec2& p : v) {
            if (out.empty() || dist(out.back(), p) > tol) out.push_back(p);
        }
        while (out.size() > 1 && dist(out.front(), out.back()) <= tol) out.pop_back();
        if (out.size() < 3) out.clear();
        v = std::move(out);
    }

    /// 0 for points inside or on the boundary.
    double distance(const Vec2& x) const {
        if (contains(x)) return 0.0;
        double d = kInf;
        size_t n = v.size();
        for (size_t i = 0; i < n; ++i) d = std::fmin(d, dist_point_segment(v[i], v[(i + 1) % n], x));
        return d;
    }

    Vec2 closest_boundary_point(const Vec2& x) const {
        double best = kInf;
        Vec2 q = v.empty() ? x : v[0];
        size_t n = v.size();
        for (size_t i = 0; i < n; ++i) {
            Vec2 p = closest_point_on_segment(v[i], v[(i + 1) % n], x);
            double d = dist(x, p);
            if (d < best) {
                best = d;
                q = p;
            }
        }
        return q;
    }

    double diameter() const {
        double d = 0;
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t j = i + 1; j < v.size(); ++j) d = std::fmax(d, dist(v[i], v[j]));
        return d;
    }

    double area() const {
        double s = 0;
        size_t n = v.size();
        for (size_t i = 0; i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
        return 0.5 * s;
    }

    /// Keep the half plane { x : (x-p).nrm <= 0 }.
    void clip_halfplane(const Vec2& p, const Vec2& nrm) {
        if (v.empty()) return;
        std::vector<Vec2> out;
        out.reserve(v.size() + 2);
        size_t n = v.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = v[i];
            const Vec2& b = v[(i + 1) % n];
            double da = dot(a - p, nrm), db = dot(b - p, nrm);
            if (da <= 0) out.push_back(a);
            if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
                double t = da / (da - db);
                out.push_back(a + (b - a) * t);
            }
        }
        v = std::move(out);
        if (v.size() < 3) v.clear();
    }

    static ConvexPolygon from_box(const Box<2>& b) {
        ConvexPolygon p;
        p.v = {v2(b.lo.c[0], b.lo.c[1]), v2(b.hi.c[0], b.lo.c[1]), v2(b.hi.c[0], b.hi.c[1]),
               v2(b.lo.c[0], b.hi.c[1])};
        return p;
    }
};

inline double dist_polygon_polygon(const ConvexPolygon& A, const ConvexPolygon& B) {
    if (A.empty() || B.empty()) return kInf;
    for (const Vec2& x : B.v)
        if (A.contains(x)) return 0.0;
    for (const Vec2& x : A.v)
        if (B.contains(x)) return 0.0;
    double d = kInf;
    size_t n = A.v.size(), m = B.v.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j)
            d = std::fmin(d, dist_segment_segment(A.v[i], A.v[(i + 1) % n], B.v[j], B.v[(j + 1) % m]));
    return d;
}

// ---- uniform grid hash over points (neighbor queries) ----

template <int D>
class PointGrid {
  public:
    PointGrid() = default;
    PointGrid(const std::vector<Vec<D>>& pts, double cell) : pts_(&pts), cell_(cell) {
        keys_.resize(pts.size());
        order_.resize(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) {
            keys_[i] = key_of(pts[i]);
            order_[i] = i;
        }
        std::sort(order_.begin(), order_.end(), [&](size_t a, size_t b) { return keys_[a] < keys_[b]; });
        sorted_keys_.resize(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) sorted_keys_[i] = keys_[order_[i]];
    }

    /// Visit indices of stored points within `r` of x.
    template <typename F>
    void for_neighbors(const Vec<D>& x, double r, F&& f) const {
        if (!pts_ || pts_->empty()) return;
        std::array<int64_t, D> lo, hi;
        for (int i = 0; i < D; ++i) {
            lo[i] = cell_index(x.c[i] - r);
            hi[i] = cell_index(x.c[i] + r);
        }
        std::array<int64_t, D> it = lo;
        double r2 = r * r;
        while (true) {
            uint64_t k = pack(it);
            auto range = std::equal_range(sorted_keys_.begin(), sorted_keys_.end(), k);
            for (auto p = range.first; p != range.second; ++p) {
                size_t idx = order_[p - sorted_keys_.begin()];
                if (norm2((*pts_)[idx] - x) <= r2) f(idx);
            }
            int d = 0;
            while (d < D) {
                if (++it[d] <= hi[d]) break;
                it[d] = lo[d];
                ++d;
            }
            if (d == D) break;
        }
    }

    std::vector<size_t> neighbors(const Vec<D>& x, double r) const {
        std::vector<size_t> out;
        for_neighbors(x, r, [&](size_t i) { out.push_back(i); });
        return out;
    }

  private:
    int64_t cell_index(double v) const { return (int64_t)std::floor(v / cell_); }
    uint64_t key_of(const Vec<D>& p) const {
        std::array<int64_t, D> ix;
        for (int i = 0; i < D; ++i) ix[i] = cell_index(p.c[i]);
        return pack(ix);
    }
    static uint64_t pack(const std::array<int64_t, D>& ix) {
        uint64_t h = 1469598103934665603ull;
        for (int i = 0; i < D; ++i) {
            uint64_t u = (uint64_t)(ix[i] + (int64_t)0x40000000);
            h ^= u + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }

    const std::vector<Vec<D>>* pts_ = nullptr;
    double cell_ = 1.0;
    std::vector<uint64_t> keys_, sorted_keys_;
    std::vector<size_t> order_;
};

}  // namespace perfodom
