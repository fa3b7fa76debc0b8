#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perfodom/geometry.hpp"

namespace perfodom {

/// A boundary sample point with exact outward normal. `local_gap` is the
/// spacing to the adjacent samples on the same piece; at junctions between
/// two boundary pieces (lens vertices, pipe/ball seams) `is_junction` is
/// set and the normal is the bisector of the adjacent piece normals.
struct BoundarySample {
    Vec2 point;
    Vec2 normal;   // unit, pointing out of P
    Vec2 tangent;  // unit, normal rotated by -90 deg
    int piece = -1;
    double local_gap = 0;
    bool is_junction = false;
};

/// Union of open convex solids (disks and convex polygons) in the plane.
/// The boundary is decomposed into the visible parts of circle arcs and
/// polygon edges, which gives exact membership, exact signed distance to
/// the boundary of the union, and arclength boundary sampling.
class SolidUnion {
  public:
    struct Sub {
        double lo, hi;            // angle (arcs) or arclength from `a` (segments)
        int left_cov, right_cov;  // covering solid at each end, -1 if free end
    };
    struct Piece {
        bool is_arc;
        int solid;
        // arc
        Vec2 center{};
        double radius = 0;
        // segment
        Vec2 a{}, b{};
        Vec2 outward{};
        double len = 0;
        std::vector<Sub> subs;
        Vec2 anchor{};
        double reach = 0;
    };

    void add_disk(const Vec2& c, double r) {
        Solid s;
        s.is_disk = true;
        s.ball = Ball<2>(c, r);
        s.center = c;
        s.extent = r;
        solids_.push_back(std::move(s));
        built_ = false;
    }

    void add_polygon(ConvexPolygon poly) {
        if (poly.empty()) throw std::invalid_argument("add_polygon: degenerate polygon");
        Solid s;
        s.is_disk = false;
        s.poly = std::move(poly);
        Vec2 c = v2(0, 0);
        for (const Vec2& v : s.poly.v) c += v;
        c = c * (1.0 / s.poly.v.size());
        double e = 0;
        for (const Vec2& v : s.poly.v) e = std::fmax(e, dist(c, v));
        s.center = c;
        s.extent = e;
        solids_.push_back(std::move(s));
        built_ = false;
    }

    size_t solid_count() const { return solids_.size(); }
    bool empty() const { return solids_.empty(); }

    void build() {
        pieces_.clear();
        for (size_t i = 0; i < solids_.size(); ++i) {
            const Solid& s = solids_[i];
            if (s.is_disk) {
                Piece p;
                p.is_arc = true;
                p.solid = (int)i;
                p.center = s.ball.center;
                p.radius = s.ball.radius;
                cover_arc(p, i);
                if (!p.subs.empty()) {
                    p.anchor = p.center;
                    p.reach = p.radius;
                    pieces_.push_back(std::move(p));
                }
            } else {
                size_t n = s.poly.v.size();
                for (size_t e = 0; e < n; ++e) {
                    Piece p;
                    p.is_arc = false;
                    p.solid = (int)i;
                    p.a = s.poly.v[e];
                    p.b = s.poly.v[(e + 1) % n];
                    p.len = dist(p.a, p.b);
                    if (p.len < 1e-14) continue;
                    Vec2 t = (p.b - p.a) * (1.0 / p.len);
                    p.outward = v2(t.c[1], -t.c[0]);  // CCW polygon: outward on the right
                    cover_segment(p, i);
                    if (!p.subs.empty()) {
                        p.anchor = (p.a + p.b) * 0.5;
                        p.reach = p.len / 2;
                        pieces_.push_back(std::move(p));
                    }
                }
            }
        }
        solid_centers_.clear();
        max_extent_ = 1e-6;
        for (const Solid& s : solids_) {
            solid_centers_.push_back(s.center);
            max_extent_ = std::fmax(max_extent_, s.extent);
        }
        solid_grid_ = PointGrid<2>(solid_centers_, max_extent_);
        piece_anchors_.clear();
        max_reach_ = 1e-6;
        for (const Piece& p : pieces_) {
            piece_anchors_.push_back(p.anchor);
            max_reach_ = std::fmax(max_reach_, p.reach);
        }
        piece_grid_ = PointGrid<2>(piece_anchors_, std::fmax(max_reach_, 1e-6));
        world_reach_ = 1;
        for (const Solid& s : solids_) world_reach_ = std::fmax(world_reach_, norm(s.center) + s.extent);
        built_ = true;
    }

    bool contains(const Vec2& x) const {
        require_built();
        bool in = false;
        solid_grid_.for_neighbors(x, max_extent_ * 1.0000001 + 1e-12, [&](size_t i) {
            if (!in && solid_contains(solids_[i], x)) in = true;
        });
        return in;
    }

    /// Exact signed distance to the boundary of the union: positive inside P,
    /// negative outside. Optionally reports the nearest boundary point.
    double signed_distance(const Vec2& x, Vec2* nearest = nullptr) const {
        require_built();
        if (pieces_.empty()) return -kInf;
        double best = kInf;
        Vec2 bq{};
        double radius = 4 * max_reach_ + 1e-9;
        while (true) {
            piece_grid_.for_neighbors(x, radius, [&](size_t pi) {
                const Piece& p = pieces_[pi];
                if (piece_lower_bound(p, x) >= best) return;
                for (const Sub& s : p.subs) {
                    Vec2 q;
                    double d = dist_to_sub(p, s, x, q);
                    if (d < best) {
                        best = d;
                        bq = q;
                    }
                }
            });
            // any unexamined piece has its whole boundary farther than radius - max_reach_
            if (best <= radius - max_reach_) break;
            if (radius > 2 * (world_reach_ + norm(x)) + 8) break;
            radius = std::fmax(2 * radius, best + max_reach_ + 1e-9);
        }
        if (nearest) *nearest = bq;
        return contains(x) ? best : -best;
    }

    /// Samples the visible boundary. Gaps never exceed max_gap; towards
    /// junction endpoints the spacing is refined geometrically down to
    /// refine_floor (0 disables refinement). Junction points themselves are
    /// emitted with the bisector normal of the two adjacent pieces.
    std::vector<BoundarySample> sample_boundary(double max_gap, double refine_floor = 0) const {
        require_built();
        if (!(max_gap > 0)) throw std::invalid_argument("sample_boundary: max_gap must be positive");
        std::vector<BoundarySample> out;
        for (size_t pi = 0; pi < pieces_.size(); ++pi) {
            const Piece& p = pieces_[pi];
            for (const Sub& s : p.subs) {
                double len = p.is_arc ? (s.hi - s.lo) * p.radius : (s.hi - s.lo);
                if (len <= 1e-13) continue;
                std::vector<double> ts;
                int n = (int)std::ceil(len / max_gap);
                for (int k = 0; k <= n; ++k) ts.push_back(len * k / n);
                if (refine_floor > 0 && refine_floor < max_gap) {
                    double base = len / n;
                    if (s.left_cov >= 0)
                        for (double g = base / 2; g > refine_floor; g /= 2) ts.push_back(g);
                    if (s.right_cov >= 0)
                        for (double g = base / 2; g > refine_floor; g /= 2) ts.push_back(len - g);
                }
                std::sort(ts.begin(), ts.end());
                ts.erase(std::unique(ts.begin(), ts.end(),
                                     [&](double u, double v) { return std::abs(u - v) < 1e-13 * (1 + len); }),
                         ts.end());
                size_t first = out.size();
                for (double t : ts) out.push_back(eval_sample(p, s, t, (int)pi));
                for (size_t k = first; k < out.size(); ++k) {
                    size_t i = k - first;
                    double gl = i > 0 ? ts[i] - ts[i - 1] : kInf;
                    double gr = i + 1 < ts.size() ? ts[i + 1] - ts[i] : kInf;
                    double g = std::fmin(gl, gr);
                    out[k].local_gap = g == kInf ? len : g;
                }
                if (s.left_cov >= 0) mark_junction(out[first], s.left_cov);
                if (s.right_cov >= 0) mark_junction(out.back(), s.right_cov);
            }
        }
        return out;
    }

    const std::vector<Piece>& pieces() const { return pieces_; }

    double boundary_length() const {
        require_built();
        double L = 0;
        for (const Piece& p : pieces_)
            for (const Sub& s : p.subs) L += p.is_arc ? (s.hi - s.lo) * p.radius : (s.hi - s.lo);
        return L;
    }

  private:
    struct Solid {
        bool is_disk = true;
        Ball<2> ball{v2(0, 0), 1};
        ConvexPolygon poly;
        Vec2 center{};
        double extent = 0;
    };

    struct CoverIv {
        double lo, hi;
        int cov_l, cov_r;  // covering solid providing the left/right edge
    };

    void require_built() const {
        if (!built_) throw std::logic_error("SolidUnion: build() not called");
    }

    static bool solid_contains(const Solid& s, const Vec2& x) {
        if (s.is_disk) return dist(x, s.ball.center) < s.ball.radius;
        return s.poly.contains(x);
    }

    static double piece_lower_bound(const Piece& p, const Vec2& x) {
        if (p.is_arc) return std::abs(dist(x, p.center) - p.radius);
        return dist_point_segment(p.a, p.b, x);
    }

    static double dist_to_sub(const Piece& p, const Sub& s, const Vec2& x, Vec2& q) {
        if (p.is_arc) {
            double th = std::atan2(x.c[1] - p.center.c[1], x.c[0] - p.center.c[0]);
            double t = th;
            while (t < s.lo) t += 2 * M_PI;
            if (t <= s.hi) {
                double r = dist(x, p.center);
                Vec2 dir = r > 1e-300 ? (x - p.center) * (1.0 / r) : v2(1, 0);
                q = p.center + dir * p.radius;
                return std::abs(r - p.radius);
            }
            Vec2 e1 = p.center + v2(std::cos(s.lo), std::sin(s.lo)) * p.radius;
            Vec2 e2 = p.center + v2(std::cos(s.hi), std::sin(s.hi)) * p.radius;
            double d1 = dist(x, e1), d2 = dist(x, e2);
            q = d1 <= d2 ? e1 : e2;
            return std::fmin(d1, d2);
        }
        Vec2 t = (p.b - p.a) * (1.0 / p.len);
        double u = dot(x - p.a, t);
        u = std::fmin(s.hi, std::fmax(s.lo, u));
        q = p.a + t * u;
        return dist(x, q);
    }

    BoundarySample eval_sample(const Piece& p, const Sub& s, double arclen, int piece_id) const {
        BoundarySample bs;
        bs.piece = piece_id;
        if (p.is_arc) {
            double th = s.lo + arclen / p.radius;
            Vec2 n = v2(std::cos(th), std::sin(th));
            bs.point = p.center + n * p.radius;
            bs.normal = n;
        } else {
            Vec2 t = (p.b - p.a) * (1.0 / p.len);
            bs.point = p.a + t * (s.lo + arclen);
            bs.normal = p.outward;
        }
        bs.tangent = v2(bs.normal.c[1], -bs.normal.c[0]);
        return bs;
    }

    void mark_junction(BoundarySample& bs, int coverer) const {
        bs.is_junction = true;
        Vec2 n2 = solid_outward_normal(solids_[coverer], bs.point);
        Vec2 sum = bs.normal + n2;
        if (norm(sum) > 1e-9) bs.normal = normalized(sum);
        bs.tangent = v2(bs.normal.c[1], -bs.normal.c[0]);
    }

    static Vec2 solid_outward_normal(const Solid& s, const Vec2& q) {
        if (s.is_disk) {
            Vec2 d = q - s.ball.center;
            double n = norm(d);
            return n > 1e-300 ? d * (1.0 / n) : v2(1, 0);
        }
        size_t n = s.poly.v.size();
        double best = kInf;
        Vec2 nrm = v2(1, 0);
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = s.poly.v[i];
            const Vec2& b = s.poly.v[(i + 1) % n];
            double d = dist_point_segment(a, b, q);
            if (d < best) {
                best = d;
                Vec2 t = normalized(b - a);
                nrm = v2(t.c[1], -t.c[0]);
            }
        }
        return nrm;
    }

    void cover_arc(Piece& p, size_t self) {
        std::vector<CoverIv> cov;
        bool swallowed = false;
        for (size_t j = 0; j < solids_.size() && !swallowed; ++j) {
            if (j == self) continue;
            const Solid& o = solids_[j];
            if (dist(p.center, o.center) > p.radius + o.extent + 1e-12) continue;
            if (o.is_disk) {
                double d = dist(p.center, o.ball.center);
                double R = o.ball.radius;
                if (d >= p.radius + R) continue;
                if (d <= R - p.radius) {
                    swallowed = true;
                    break;
                }
                if (d <= 1e-14) continue;
                double cg = (d * d + p.radius * p.radius - R * R) / (2 * d * p.radius);
                if (cg <= -1) {
                    swallowed = true;
                    break;
                }
                if (cg >= 1) continue;
                double g = std::acos(cg);
                double th =
                    std::atan2(o.ball.center.c[1] - p.center.c[1], o.ball.center.c[0] - p.center.c[0]);
                push_circle_iv(cov, th - g, th + g, (int)j);
            } else {
                std::vector<std::pair<double, double>> ivs{{0, 2 * M_PI}};
                size_t n = o.poly.v.size();
                for (size_t e = 0; e < n && !ivs.empty(); ++e) {
                    const Vec2& a = o.poly.v[e];
                    const Vec2& b = o.poly.v[(e + 1) % n];
                    Vec2 t = normalized(b - a);
                    Vec2 nrm = v2(t.c[1], -t.c[0]);
                    // constraint (center + r e(th) - a) . nrm <= 0
                    double A = p.radius * nrm.c[0], B = p.radius * nrm.c[1];
                    double C = -dot(p.center - a, nrm);
                    auto sol = solve_trig_leq(A, B, C);
                    if (!sol) {
                        ivs.clear();
                        break;
                    }
                    if (sol->first == 0 && sol->second == 2 * M_PI) continue;
                    ivs = intersect_circle_ivs(ivs, sol->first, sol->second);
                }
                double total = 0;
                for (auto& iv : ivs) total += iv.second - iv.first;
                if (total >= 2 * M_PI - 1e-12) {
                    swallowed = true;
                    break;
                }
                for (auto& iv : ivs)
                    if (iv.second - iv.first > 1e-13) push_circle_iv(cov, iv.first, iv.second, (int)j);
            }
        }
        if (swallowed) {
            p.subs.clear();
            return;
        }
        p.subs = complement_circle(std::move(cov));
    }

    // A cos th + B sin th <= C: empty, full, or one interval of width <= 2pi.
    static std::optional<std::pair<double, double>> solve_trig_leq(double A, double B, double C) {
        double R = std::hypot(A, B);
        if (R < 1e-15) {
            if (C >= 0) return std::make_pair(0.0, 2 * M_PI);
            return std::nullopt;
        }
        if (C >= R) return std::make_pair(0.0, 2 * M_PI);
        if (C <= -R) return std::nullopt;
        double phi = std::atan2(B, A);
        double g = std::acos(C / R);  // cos(th - phi) <= C/R
        return std::make_pair(phi + g, phi + 2 * M_PI - g);
    }

    static std::vector<std::pair<double, double>> intersect_circle_ivs(
        const std::vector<std::pair<double, double>>& ivs, double lo, double hi) {
        std::vector<std::pair<double, double>> parts;
        double w = hi - lo;
        lo = std::fmod(lo, 2 * M_PI);
        if (lo < 0) lo += 2 * M_PI;
        hi = lo + w;
        if (hi <= 2 * M_PI)
            parts.push_back({lo, hi});
        else {
            parts.push_back({lo, 2 * M_PI});
            parts.push_back({0, hi - 2 * M_PI});
        }
        std::vector<std::pair<double, double>> out;
        for (auto& a : ivs)
            for (auto& b : parts) {
                double l = std::fmax(a.first, b.first), h = std::fmin(a.second, b.second);
                if (h - l > 1e-14) out.push_back({l, h});
            }
        return out;
    }

    static void push_circle_iv(std::vector<CoverIv>& cov, double lo, double hi, int who) {
        double w = hi - lo;
        if (w <= 0) return;
        if (w >= 2 * M_PI - 1e-13) {
            cov.push_back({0, 2 * M_PI, who, who});
            return;
        }
        lo = std::fmod(lo, 2 * M_PI);
        if (lo < 0) lo += 2 * M_PI;
        hi = lo + w;
        if (hi <= 2 * M_PI)
            cov.push_back({lo, hi, who, who});
        else {
            cov.push_back({lo, 2 * M_PI, who, who});
            cov.push_back({0, hi - 2 * M_PI, who, who});
        }
    }

    static std::vector<CoverIv> merge_ivs(std::vector<CoverIv> cov) {
        std::sort(cov.begin(), cov.end(), [](const CoverIv& a, const CoverIv& b) { return a.lo < b.lo; });
        std::vector<CoverIv> merged;
        for (const CoverIv& c : cov) {
            if (!merged.empty() && c.lo <= merged.back().hi + 1e-13) {
                if (c.hi > merged.back().hi) {
                    merged.back().hi = c.hi;
                    merged.back().cov_r = c.cov_r;
                }
            } else
                merged.push_back(c);
        }
        return merged;
    }

    static std::vector<Sub> complement_circle(std::vector<CoverIv> cov) {
        std::vector<Sub> subs;
        if (cov.empty()) {
            subs.push_back({0, 2 * M_PI, -1, -1});
            return subs;
        }
        std::vector<CoverIv> merged = merge_ivs(std::move(cov));
        if (merged.size() == 1 && merged[0].hi - merged[0].lo >= 2 * M_PI - 1e-12) return subs;
        for (size_t i = 0; i < merged.size(); ++i) {
            const CoverIv& cur = merged[i];
            bool wrap = i + 1 == merged.size();
            const CoverIv& nxt = merged[(i + 1) % merged.size()];
            double lo = cur.hi;
            double hi = wrap ? nxt.lo + 2 * M_PI : nxt.lo;
            if (hi - lo > 1e-12) subs.push_back({lo, hi, cur.cov_r, nxt.cov_l});
        }
        return subs;
    }

    void cover_segment(Piece& p, size_t self) {
        Vec2 t = (p.b - p.a) * (1.0 / p.len);
        std::vector<CoverIv> cov;
        for (size_t j = 0; j < solids_.size(); ++j) {
            if (j == self) continue;
            const Solid& o = solids_[j];
            if (dist_point_segment(p.a, p.b, o.center) > o.extent + 1e-12) continue;
            if (o.is_disk) {
                Vec2 w = p.a - o.ball.center;
                double bq = dot(w, t);
                double cq = norm2(w) - o.ball.radius * o.ball.radius;
                double disc = bq * bq - cq;
                if (disc <= 0) continue;
                double sq = std::sqrt(disc);
                double lo = std::fmax(-bq - sq, 0.0);
                double hi = std::fmin(-bq + sq, p.len);
                if (hi - lo > 1e-14) cov.push_back({lo, hi, (int)j, (int)j});
            } else {
                double lo = 0, hi = p.len;
                bool empty = false;
                size_t n = o.poly.v.size();
                for (size_t e = 0; e < n; ++e) {
                    const Vec2& va = o.poly.v[e];
                    const Vec2& vb = o.poly.v[(e + 1) % n];
                    Vec2 tt = normalized(vb - va);
                    Vec2 nrm = v2(tt.c[1], -tt.c[0]);
                    double da = dot(p.a - va, nrm);
                    double dt = dot(t, nrm);
                    if (std::abs(dt) < 1e-15) {
                        if (da > 0) {
                            empty = true;
                            break;
                        }
                    } else if (dt > 0)
                        hi = std::fmin(hi, -da / dt);
                    else
                        lo = std::fmax(lo, -da / dt);
                    if (lo >= hi) {
                        empty = true;
                        break;
                    }
                }
                if (!empty && hi - lo > 1e-14) cov.push_back({lo, hi, (int)j, (int)j});
            }
        }
        std::vector<CoverIv> merged = merge_ivs(std::move(cov));
        double pos = 0;
        int left = -1;
        for (const CoverIv& c : merged) {
            if (c.lo - pos > 1e-12) p.subs.push_back({pos, c.lo, left, c.cov_l});
            pos = std::fmax(pos, c.hi);
            left = c.cov_r;
        }
        if (p.len - pos > 1e-12) p.subs.push_back({pos, p.len, left, -1});
    }

    std::vector<Solid> solids_;
    std::vector<Piece> pieces_;
    std::vector<Vec2> solid_centers_, piece_anchors_;
    PointGrid<2> solid_grid_, piece_grid_;
    double max_extent_ = 0, max_reach_ = 0, world_reach_ = 1;
    bool built_ = false;
};

}  // namespace perfodom
