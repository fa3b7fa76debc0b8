#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "perfodom/geometry.hpp"
#include "perfodom/point_process.hpp"

namespace perfodom {

/// Voronoi cells clipped to a padded window, with the Delaunay dual graph.
/// Cells touching the clip boundary are flagged; their diameters are
/// truncated and should be excluded from tail statistics.
struct Tessellation {
    PointCloud<2> sites;
    std::vector<ConvexPolygon> cells;
    std::vector<double> diameters;
    std::vector<char> clipped;
    std::vector<std::pair<int, int>> delaunay_edges;  // i < j
    std::vector<std::vector<int>> delaunay_adj;
    Box<2> clip_box;

    size_t size() const { return sites.points.size(); }
};

namespace detail {

struct TaggedPolygon {
    std::vector<Vec2> v;
    std::vector<int> tag;  // tag[i] belongs to edge v[i] -> v[i+1]; -1 for box edges

    /// Keep { x : (x-p).nrm <= 0 }, new edge tagged `who`.
    void clip(const Vec2& p, const Vec2& nrm, int who) {
        if (v.empty()) return;
        std::vector<Vec2> nv;
        std::vector<int> nt;
        size_t n = v.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = v[i];
            const Vec2& b = v[(i + 1) % n];
            double da = dot(a - p, nrm), db = dot(b - p, nrm);
            if (da <= 0) {
                nv.push_back(a);
                nt.push_back(tag[i]);
            }
            if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
                double t = da / (da - db);
                Vec2 q = a + (b - a) * t;
                if (da < 0) {
                    // leaving: cut edge keeps old tag up to q, then the new cut edge starts
                    nv.push_back(q);
                    nt.push_back(who);
                } else {
                    // entering: edge from q continues with the old tag
                    nv.push_back(q);
                    nt.push_back(tag[i]);
                }
            }
        }
        v = std::move(nv);
        tag = std::move(nt);
        if (v.size() < 3) {
            v.clear();
            tag.clear();
        }
    }
};

}  // namespace detail

/// Voronoi tessellation by half-plane clipping against bisectors of nearby
/// sites (sorted by distance with an early-out once no further site can cut).
inline Tessellation build_voronoi(const PointCloud<2>& cloud, double pad) {
    const auto& pts = cloud.points;
    if (pts.empty()) throw std::invalid_argument("build_voronoi: need at least one site");
    if (pad < 0) throw std::invalid_argument("build_voronoi: negative pad");
    Tessellation tess;
    tess.sites = cloud;
    tess.clip_box = cloud.window.padded(pad);
    size_t n = pts.size();
    tess.cells.resize(n);
    tess.diameters.assign(n, 0.0);
    tess.clipped.assign(n, 0);
    tess.delaunay_adj.assign(n, {});

    std::vector<size_t> order(n);
    std::vector<std::vector<char>> adj;  // filled from edge tags
    std::vector<std::pair<int, int>> edges;

    double edge_tol = 1e-10 * std::fmax(1.0, std::fmax(tess.clip_box.side(0), tess.clip_box.side(1)));

    for (size_t a = 0; a < n; ++a) {
        detail::TaggedPolygon poly;
        ConvexPolygon box = ConvexPolygon::from_box(tess.clip_box);
        poly.v = box.v;
        poly.tag.assign(poly.v.size(), -1);

        // other sites sorted by distance to a
        std::vector<size_t>& ord = order;
        ord.clear();
        for (size_t b = 0; b < n; ++b)
            if (b != a) ord.push_back(b);
        std::sort(ord.begin(), ord.end(), [&](size_t x, size_t y) {
            double dx = norm2(pts[x] - pts[a]), dy = norm2(pts[y] - pts[a]);
            if (dx != dy) return dx < dy;
            return x < y;  // lexicographic tie-break
        });
        for (size_t b : ord) {
            if (poly.v.empty()) break;
            double rmax = 0;
            for (const Vec2& q : poly.v) rmax = std::fmax(rmax, dist(q, pts[a]));
            if (dist(pts[a], pts[b]) > 2 * rmax) break;  // bisector cannot reach the cell
            Vec2 mid = (pts[a] + pts[b]) * 0.5;
            Vec2 nrm = pts[b] - pts[a];
            poly.clip(mid, nrm, (int)b);
        }
        ConvexPolygon cell;
        cell.v = poly.v;
        cell.dedupe(edge_tol);
        tess.cells[a] = cell;
        tess.diameters[a] = cell.diameter();
        for (size_t i = 0; i < poly.v.size(); ++i) {
            const Vec2& va = poly.v[i];
            const Vec2& vb = poly.v[(i + 1) % poly.v.size()];
            if (dist(va, vb) <= edge_tol) continue;
            if (poly.tag[i] == -1)
                tess.clipped[a] = 1;
            else if ((size_t)poly.tag[i] > a)
                edges.push_back({(int)a, poly.tag[i]});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    tess.delaunay_edges = std::move(edges);
    for (auto& e : tess.delaunay_edges) {
        tess.delaunay_adj[e.first].push_back(e.second);
        tess.delaunay_adj[e.second].push_back(e.first);
    }
    return tess;
}

/// Weak neighbors: a ~~ b iff the r/2 neighborhoods of the two cells meet,
/// i.e. dist(G_a, G_b) < r. Returns symmetric index pairs with a < b.
inline std::vector<std::pair<int, int>> weak_neighbors(const Tessellation& tess, double r) {
    if (!(r > 0)) throw std::invalid_argument("weak_neighbors: r must be positive");
    size_t n = tess.size();
    std::vector<Vec2> centers(n);
    std::vector<double> rad(n, 0.0);
    double maxrad = 0;
    for (size_t i = 0; i < n; ++i) {
        centers[i] = tess.sites.points[i];
        for (const Vec2& v : tess.cells[i].v) rad[i] = std::fmax(rad[i], dist(v, centers[i]));
        maxrad = std::fmax(maxrad, rad[i]);
    }
    PointGrid<2> grid(centers, std::fmax(maxrad, r));
    std::vector<std::pair<int, int>> out;
    for (size_t a = 0; a < n; ++a) {
        grid.for_neighbors(centers[a], rad[a] + maxrad + r, [&](size_t b) {
            if (b <= a) return;
            if (dist(centers[a], centers[b]) > rad[a] + rad[b] + r) return;
            if (dist_polygon_polygon(tess.cells[a], tess.cells[b]) < r) out.push_back({(int)a, (int)b});
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Per-site verification of the Voronoi neighbor-count bound: with mutual
/// site distance > 2r, every cell meeting B_r(G_x) has |x-y| <= 4 d(x) and
/// there are at most (4 d(x)/r)^d of them.
struct NeighborCountReport {
    struct Row {
        int site;
        int count;
        double bound;
        double max_center_dist;
        double diam;
        bool pass;
    };
    std::vector<Row> rows;
    bool all_pass = true;
    int checked = 0, skipped_clipped = 0;
};

inline NeighborCountReport neighbor_count_check(const Tessellation& tess, double r) {
    if (!(r > 0)) throw std::invalid_argument("neighbor_count_check: r must be positive");
    double mind = min_pairwise_distance(tess.sites);
    if (!(mind > 2 * r))
        throw std::invalid_argument("neighbor_count_check: sites must have pairwise distance > 2r");
    size_t n = tess.size();
    NeighborCountReport rep;
    // interaction radius r between cell polygons
    std::vector<Vec2> centers = tess.sites.points;
    std::vector<double> rad(n, 0.0);
    double maxrad = 0;
    for (size_t i = 0; i < n; ++i) {
        for (const Vec2& v : tess.cells[i].v) rad[i] = std::fmax(rad[i], dist(v, centers[i]));
        maxrad = std::fmax(maxrad, rad[i]);
    }
    PointGrid<2> grid(centers, std::fmax(maxrad, 1.0));
    for (size_t a = 0; a < n; ++a) {
        // exclude sites whose own cell or candidate neighborhood is clipped
        if (tess.clipped[a]) {
            ++rep.skipped_clipped;
            continue;
        }
        bool near_clip = false;
        int count = 0;
        double max_center_dist = 0;
        grid.for_neighbors(centers[a], rad[a] + maxrad + r, [&](size_t b) {
            if (dist(centers[a], centers[b]) > rad[a] + rad[b] + r) return;
            double d = b == a ? 0.0 : dist_polygon_polygon(tess.cells[a], tess.cells[b]);
            if (d < r) {
                if (tess.clipped[b]) near_clip = true;
                ++count;
                max_center_dist = std::fmax(max_center_dist, dist(centers[a], centers[b]));
            }
        });
        if (near_clip) {
            ++rep.skipped_clipped;
            continue;
        }
        double diam = tess.diameters[a];
        double bound = std::pow(4.0 * diam / r, 2.0);
        bool pass = count <= bound + 1e-9 && max_center_dist <= 4.0 * diam + 1e-9;
        rep.rows.push_back({(int)a, count, bound, max_center_dist, diam, pass});
        rep.all_pass = rep.all_pass && pass;
        ++rep.checked;
    }
    return rep;
}

/// C-infinity monotone step: 1 on (-inf,0], 0 on [1,inf). The sharpness
/// parameter q < 1 keeps the maximal slope at 2q, strictly below 2.
struct SmoothStep {
    double q = 0.9;

    double operator()(double s) const {
        if (s <= 0) return 1.0;
        if (s >= 1) return 0.0;
        double fa = std::exp(-q / (1 - s)), fb = std::exp(-q / s);
        return fa / (fa + fb);
    }
    double derivative(double s) const {
        if (s <= 0 || s >= 1) return 0.0;
        double fa = std::exp(-q / (1 - s)), fb = std::exp(-q / s);
        double dfa = fa * (-q / ((1 - s) * (1 - s)));
        double dfb = fb * (q / (s * s));
        double den = fa + fb;
        return (dfa * fb - fa * dfb) / (den * den);
    }
};

/// Mesoscopic partition of unity Phi_a built from a smooth cutoff of the
/// distance to each Voronoi cell. Weights sum to 1 wherever evaluated and
/// gradients are computed analytically from the quotient rule.
class MesoPartition {
  public:
    MesoPartition(const Tessellation& tess, double r) : tess_(&tess), r_(r) {
        if (!(r > 0)) throw std::invalid_argument("MesoPartition: r must be positive");
        size_t n = tess.size();
        rad_.assign(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (const Vec2& v : tess.cells[i].v) rad_[i] = std::fmax(rad_[i], dist(v, tess.sites.points[i]));
            maxrad_ = std::fmax(maxrad_, rad_[i]);
        }
        grid_ = PointGrid<2>(tess.sites.points, std::fmax(maxrad_, r));
    }

    double r() const { return r_; }
    const Tessellation& tessellation() const { return *tess_; }

    struct Term {
        int site;
        double weight;
        Vec2 gradient;
    };

    /// Per-site weights and gradients at x; sites not listed carry weight 0.
    std::vector<Term> eval(const Vec2& x) const {
        struct Raw {
            int site;
            double val;
            Vec2 grad;
        };
        std::vector<Raw> raws;
        grid_.for_neighbors(x, maxrad_ + r_ / 2 + 1e-12, [&](size_t b) {
            if (dist(x, tess_->sites.points[b]) > rad_[b] + r_ / 2) return;
            const ConvexPolygon& cell = tess_->cells[b];
            double d = cell.distance(x);
            if (d >= r_ / 2) return;
            double s = d / (r_ / 2);
            double val = step_(s);
            Vec2 grad = v2(0, 0);
            if (d > 0) {
                Vec2 q = cell.closest_boundary_point(x);
                Vec2 dir = (x - q) * (1.0 / d);
                grad = dir * (step_.derivative(s) * (2.0 / r_));
            }
            if (val > 0 || norm(grad) > 0) raws.push_back({(int)b, val, grad});
        });
        double sum = 0;
        Vec2 gsum = v2(0, 0);
        for (const Raw& rw : raws) {
            sum += rw.val;
            gsum += rw.grad;
        }
        if (!(sum > 0)) throw std::logic_error("MesoPartition: no cell within r/2 of query");
        std::vector<Term> out;
        out.reserve(raws.size());
        for (const Raw& rw : raws) {
            Vec2 g = (rw.grad * sum - gsum * rw.val) * (1.0 / (sum * sum));
            out.push_back({rw.site, rw.val / sum, g});
        }
        return out;
    }

    const SmoothStep& profile() const { return step_; }

  private:
    const Tessellation* tess_;
    double r_;
    SmoothStep step_;
    std::vector<double> rad_;
    double maxrad_ = 0;
    PointGrid<2> grid_;
};

}  // namespace perfodom
