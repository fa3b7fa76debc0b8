#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "perfodom/geometry.hpp"
#include "perfodom/point_process.hpp"
#include "perfodom/rng.hpp"
#include "perfodom/solids.hpp"
#include "perfodom/voronoi.hpp"

namespace perfodom {

enum class DomainTag { halfplane, wedge, boolean_union, boolean_complement, pipe_network };

inline const char* to_string(DomainTag t) {
    switch (t) {
        case DomainTag::halfplane: return "halfplane";
        case DomainTag::wedge: return "wedge";
        case DomainTag::boolean_union: return "boolean_union";
        case DomainTag::boolean_complement: return "boolean_complement";
        case DomainTag::pipe_network: return "pipe_network";
    }
    return "?";
}

/// Microscopic regularity alpha, extension order and symmetric extension
/// order per model. Pipe networks and ball unions have locally graph-above
/// boundaries, so all three vanish; the complement of a ball union pays the
/// Lipschitz penalty; anything unknown falls back to the universal orders.
inline std::array<int, 3> micro_regularity_and_orders(DomainTag tag) {
    switch (tag) {
        case DomainTag::halfplane:
        case DomainTag::wedge:
        case DomainTag::pipe_network:
        case DomainTag::boolean_union: return {0, 0, 0};
        case DomainTag::boolean_complement: return {1, 1, 2};
    }
    return {1, 1, 2};
}

/// Random open set with analytic membership, exact signed distance to the
/// boundary (positive inside P) and an arclength boundary sampler.
class Domain {
  public:
    Domain() = default;
    Domain(DomainTag tag, std::shared_ptr<const SolidUnion> solids, Box<2> window, bool complement)
        : tag_(tag), solids_(std::move(solids)), window_(window), complement_(complement) {}

    DomainTag tag() const { return tag_; }
    const Box<2>& window() const { return window_; }
    const SolidUnion& solids() const { return *solids_; }

    bool contains(const Vec2& x) const {
        bool in = solids_->contains(x);
        if (!complement_) return in;
        if (in) return false;
        // complement is open: exclude the boundary itself
        return solids_->signed_distance(x) < 0;
    }

    double signed_distance(const Vec2& x, Vec2* nearest = nullptr) const {
        double d = solids_->signed_distance(x, nearest);
        return complement_ ? -d : d;
    }

    /// Samples of the boundary inside the (slightly padded) window. Gaps
    /// along each boundary piece never exceed max_gap; near junction points
    /// the spacing refines geometrically down to refine_floor.
    std::vector<BoundarySample> boundary_samples(double max_gap, double refine_floor = 0,
                                                 double window_pad = 0) const {
        auto all = solids_->sample_boundary(max_gap, refine_floor);
        Box<2> keep = window_.padded(window_pad + 1e-12);
        std::vector<BoundarySample> out;
        out.reserve(all.size());
        for (auto& s : all) {
            if (!keep.contains(s.point)) continue;
            if (complement_) {
                s.normal = -s.normal;
                s.tangent = v2(s.normal.c[1], -s.normal.c[0]);
            }
            out.push_back(s);
        }
        if (out.empty()) throw std::runtime_error("boundary_samples: no boundary inside window");
        return out;
    }

  private:
    DomainTag tag_ = DomainTag::halfplane;
    std::shared_ptr<const SolidUnion> solids_;
    Box<2> window_;
    bool complement_ = false;
};

/// B_r(q) subset of P, by the exact signed distance (eq. P_{-r}).
inline bool inner_hull(const Domain& dom, double r, const Vec2& q) {
    if (!(r > 0)) throw std::invalid_argument("inner_hull: r must be positive");
    return dom.signed_distance(q) >= r;
}

/// dist(q, P) <= r (eq. P_r).
inline bool outer_hull(const Domain& dom, double r, const Vec2& q) {
    if (!(r > 0)) throw std::invalid_argument("outer_hull: r must be positive");
    return dom.signed_distance(q) >= -r;
}

namespace detail {

/// Half plane {x . n < c} as a giant rectangle reaching `margin` past the window.
inline ConvexPolygon halfplane_polygon(const Vec2& n, double c, const Box<2>& window) {
    double margin = 16 * (std::abs(window.side(0)) + std::abs(window.side(1)) +
                          norm(window.center()) + 1.0);
    Vec2 nn = normalized(n);
    Vec2 t = v2(-nn.c[1], nn.c[0]);
    Vec2 base = nn * c + t * dot(window.center(), t);
    ConvexPolygon poly;
    // CCW with outward side +n
    poly.v = {base + t * margin, base + t * margin - nn * margin, base - t * margin - nn * margin,
              base - t * margin};
    if (poly.area() < 0) std::reverse(poly.v.begin(), poly.v.end());
    return poly;
}

}  // namespace detail

/// Reference half-plane {x_2 < 0} (or a general one).
inline Domain make_halfplane(const Box<2>& window, Vec2 n = v2(0, 1), double c = 0) {
    auto su = std::make_shared<SolidUnion>();
    su->add_polygon(detail::halfplane_polygon(n, c, window));
    su->build();
    return Domain(DomainTag::halfplane, su, window, false);
}

/// Wedge {x_2 < m |x_1|}: union of the two half planes {x_2 < m x_1} and
/// {x_2 < -m x_1}; the boundary is the graph of m|t| with apex at origin.
inline Domain make_wedge(double slope, const Box<2>& window) {
    if (!(slope > 0)) throw std::invalid_argument("make_wedge: slope must be positive");
    auto su = std::make_shared<SolidUnion>();
    double s = 1.0 / std::sqrt(1.0 + slope * slope);
    su->add_polygon(detail::halfplane_polygon(v2(-slope * s, s), 0, window));
    su->add_polygon(detail::halfplane_polygon(v2(slope * s, s), 0, window));
    su->build();
    return Domain(DomainTag::wedge, su, window, false);
}

// ---------------------------------------------------------------------------
// Boolean model
// ---------------------------------------------------------------------------

/// Union of unit balls at Poisson points, with the distance-2 connectivity
/// graph, its components, and the finite-window surrogate of the infinite
/// component: the largest component whose balls touch all four window edges
/// when one exists, otherwise the largest by site count.
struct BooleanModel {
    PointCloud<2> sites;  // on the padded window
    Box<2> window;        // analysis window
    std::vector<std::pair<int, int>> edges;
    std::vector<int> component;       // label per site
    std::vector<char> in_largest;     // site belongs to the selected component
    int selected_component = -1;
    bool spanning = false;            // selected component touches all four edges
    uint64_t seed = 0;

    Domain domain;             // union of all balls
    Domain domain_largest;     // union over the selected component only
    Domain domain_complement;  // complement of the closed union
};

inline BooleanModel boolean_build(const Box<2>& window, double lambda, uint64_t seed,
                                  uint64_t replica = 0) {
    if (!(lambda > 0)) throw std::invalid_argument("boolean_build: lambda must be positive");
    BooleanModel model;
    model.window = window;
    model.seed = seed;
    model.sites = sample_poisson<2>(window.padded(2.0), lambda, seed, replica);
    const auto& pts = model.sites.points;
    size_t n = pts.size();

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    if (n > 0) {
        PointGrid<2> grid(pts, 2.0);
        for (size_t i = 0; i < n; ++i) {
            grid.for_neighbors(pts[i], 2.0, [&](size_t j) {
                if (j <= i) return;
                if (dist(pts[i], pts[j]) < 2.0) {
                    model.edges.push_back({(int)i, (int)j});
                    parent[find((int)i)] = find((int)j);
                }
            });
        }
    }
    model.component.resize(n);
    for (size_t i = 0; i < n; ++i) model.component[i] = find((int)i);

    // per component: size and ball reach relative to the window edges
    struct Span {
        int size = 0;
        bool left = false, right = false, bottom = false, top = false;
        bool spanning() const { return left && right && bottom && top; }
    };
    std::unordered_map<int, Span> spans;
    for (size_t i = 0; i < n; ++i) {
        Span& s = spans[model.component[i]];
        ++s.size;
        if (pts[i].c[0] - 1 < window.lo.c[0]) s.left = true;
        if (pts[i].c[0] + 1 > window.hi.c[0]) s.right = true;
        if (pts[i].c[1] - 1 < window.lo.c[1]) s.bottom = true;
        if (pts[i].c[1] + 1 > window.hi.c[1]) s.top = true;
    }
    int best = -1, best_size = -1;
    bool best_span = false;
    for (auto& [label, s] : spans) {
        bool better = best_span == s.spanning() ? s.size > best_size : s.spanning() > best_span;
        if (better) {
            best = label;
            best_size = s.size;
            best_span = s.spanning();
        }
    }
    model.selected_component = best;
    model.spanning = best_span;
    model.in_largest.assign(n, 0);
    for (size_t i = 0; i < n; ++i)
        if (model.component[i] == best) model.in_largest[i] = 1;

    auto all = std::make_shared<SolidUnion>();
    auto sel = std::make_shared<SolidUnion>();
    for (size_t i = 0; i < n; ++i) {
        all->add_disk(pts[i], 1.0);
        if (model.in_largest[i]) sel->add_disk(pts[i], 1.0);
    }
    all->build();
    sel->build();
    model.domain = Domain(DomainTag::boolean_union, all, window, false);
    model.domain_largest = Domain(DomainTag::boolean_union, sel, window, false);
    model.domain_complement = Domain(DomainTag::boolean_complement, all, window, true);
    return model;
}

// ---------------------------------------------------------------------------
// Delaunay pipe network
// ---------------------------------------------------------------------------

enum class DeltaLaw {
    beta_poly,  // P(delta < t) = (t/r)^beta on (0, r)
    exp_tail    // P(delta < t) = exp(a/r) exp(-a/t)
};

struct PipeParams {
    double r_frak = 0.25;    // the scale r
    double lambda = 1.0;     // Poisson intensity before thinning
    double hardcore = 0.5;   // Matern erasure distance (paper uses d*r or 2r)
    DeltaLaw law = DeltaLaw::exp_tail;
    double beta = 3.0;       // beta_poly exponent
    double a = 0.5;          // exp_tail rate
};

struct PipeEdge {
    int a, b;
    double delta;
};

struct PipeNetwork {
    PointCloud<2> sites;  // Matern, on padded window
    Box<2> window;
    double pad = 0;
    Tessellation tess;
    std::vector<PipeEdge> edges;
    PipeParams params;
    uint64_t seed = 0;
    Domain domain;
};

inline double sample_delta(const PipeParams& p, Rng& rng) {
    if (p.law == DeltaLaw::beta_poly) return p.r_frak * std::pow(rng.uniform(), 1.0 / p.beta);
    double e = rng.exponential();
    return p.a / (p.a / p.r_frak + e);
}

/// Matern sites joined along Delaunay edges by pipes of i.i.d. half-width
/// delta, plus a ball of radius r/2 around every site.
inline PipeNetwork pipe_build(const Box<2>& window, const PipeParams& params, uint64_t seed,
                              uint64_t replica = 0) {
    PipeNetwork net;
    net.params = params;
    net.window = window;
    net.seed = seed;
    double pad = std::fmax(params.hardcore, 4 * params.r_frak);
    net.pad = pad;
    net.sites = sample_matern<2>(window.padded(pad), params.lambda, params.hardcore, seed, replica);
    if (net.sites.points.empty()) throw std::runtime_error("pipe_build: no sites survived thinning");
    net.tess = build_voronoi(net.sites, 2 * pad);
    Rng delta_rng(seed ^ 0x9e3779b97f4a7c15ull, (replica << 8) | 1);
    auto su = std::make_shared<SolidUnion>();
    for (const Vec2& x : net.sites.points) su->add_disk(x, params.r_frak / 2);
    for (const auto& [a, b] : net.tess.delaunay_edges) {
        double delta = sample_delta(params, delta_rng);
        net.edges.push_back({a, b, delta});
        const Vec2& xa = net.sites.points[a];
        const Vec2& xb = net.sites.points[b];
        Vec2 t = normalized(xa - xb);
        Vec2 nrm = v2(-t.c[1], t.c[0]);
        ConvexPolygon rect;
        rect.v = {xb - nrm * delta, xa - nrm * delta, xa + nrm * delta, xb + nrm * delta};
        if (rect.area() < 0) std::reverse(rect.v.begin(), rect.v.end());
        su->add_polygon(std::move(rect));
    }
    su->build();
    net.domain = Domain(DomainTag::pipe_network, su, window, false);
    return net;
}

/// Membership in the pipe P_delta(x,y): axial range 0 <= z.(x-y) <= |x-y|^2
/// and radial distance below delta (z measured from y).
inline bool pipe_membership(const Vec2& x, const Vec2& y, double delta, const Vec2& q) {
    Vec2 z = q - y;
    Vec2 ax = x - y;
    double along = dot(z, ax);
    if (along < 0 || along > norm2(ax)) return false;
    Vec2 t = normalized(ax);
    Vec2 radial = z - t * dot(z, t);
    return norm(radial) < delta;
}

/// Network membership: any node ball or any pipe.
inline bool pipe_membership(const PipeNetwork& net, const Vec2& q) {
    for (size_t i = 0; i < net.sites.points.size(); ++i)
        if (dist(q, net.sites.points[i]) < net.params.r_frak / 2) return true;
    for (const PipeEdge& e : net.edges)
        if (pipe_membership(net.sites.points[e.a], net.sites.points[e.b], e.delta, q)) return true;
    return false;
}

}  // namespace perfodom
