#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "perfodom/domains.hpp"
#include "perfodom/grid.hpp"
#include "perfodom/point_process.hpp"
#include "perfodom/voronoi.hpp"

namespace perfodom {

/// Wilson score interval at confidence z (default 95%).
inline std::pair<double, double> wilson_interval(size_t successes, size_t n, double z = 1.959963985) {
    if (n == 0) return {0.0, 1.0};
    double p = (double)successes / n;
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (p + z2 / (2 * n)) / denom;
    double half = z / denom * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n));
    return {std::fmax(0.0, center - half), std::fmin(1.0, center + half)};
}

/// Empirical survival curve with Wilson confidence bands and an optional
/// closed-form bound overlay. Dominance is violated only when the lower
/// confidence bound exceeds the bound curve.
struct TailEstimate {
    std::vector<double> thresholds;
    std::vector<double> p_hat, lo, hi;
    std::vector<double> bound;  // empty when no closed form is given
    size_t replicas = 0;
    uint64_t seed = 0;
    double confidence = 0.95;
    std::vector<std::string> flags;

    bool monotone() const {
        for (size_t i = 1; i < p_hat.size(); ++i)
            if (p_hat[i] > p_hat[i - 1] + 1e-12) return false;
        return true;
    }
    /// survival dominated by the bound curve up to the CI
    bool dominated() const {
        if (bound.empty()) return true;
        for (size_t i = 0; i < thresholds.size(); ++i)
            if (lo[i] > bound[i]) return false;
        return true;
    }
};

inline TailEstimate make_tail(const std::vector<double>& thresholds,
                              const std::vector<double>& values, size_t n_total) {
    TailEstimate t;
    t.thresholds = thresholds;
    t.replicas = n_total;
    for (double th : thresholds) {
        size_t k = 0;
        for (double v : values)
            if (v >= th) ++k;
        auto [lo, hi] = wilson_interval(k, n_total);
        t.p_hat.push_back(n_total ? (double)k / n_total : 0.0);
        t.lo.push_back(lo);
        t.hi.push_back(hi);
    }
    return t;
}

/// Least squares fit y = a + b x; returns (a, b, R^2).
inline std::array<double, 3> linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    size_t n = xs.size();
    if (n < 2) return {0, 0, 0};
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    if (vx <= 0) return {sy / n, 0, 0};
    double b = cxy / vx, a = (sy - b * sx) / n;
    double r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
    return {a, b, r2};
}

// ---------------------------------------------------------------------------
// Point process statistics
// ---------------------------------------------------------------------------

/// Survival of interior Voronoi cell diameters for the Matern tessellation,
/// with the decaying closed-form overlay exp(-lambda_mat |B_{D/4}|). The
/// bound as printed in the source material carries (4D)^d in the exponent,
/// which contradicts its own void-probability derivation; both readings are
/// reported and the discrepancy flagged.
struct DiameterTailResult {
    TailEstimate tail;
    std::vector<double> printed_bound;
    double fitted_exponent = 0;  // slope of log(-log S) vs log D
    size_t interior_cells = 0;
};

inline DiameterTailResult voronoi_diameter_tail(double lambda, double rfrak, double hardcore,
                                                const Box<2>& window, int replicas, uint64_t seed,
                                                const std::vector<double>& thresholds) {
    DiameterTailResult out;
    std::vector<double> diams;
    double pad = 4.0;
    for (int rep = 0; rep < replicas; ++rep) {
        auto cloud = sample_matern<2>(window.padded(pad), lambda, hardcore, seed, rep);
        if (cloud.size() < 4) continue;
        auto tess = build_voronoi(cloud, pad);
        for (size_t i = 0; i < tess.size(); ++i) {
            if (tess.clipped[i]) continue;
            if (!window.contains(tess.sites.points[i])) continue;
            diams.push_back(tess.diameters[i]);
        }
    }
    out.interior_cells = diams.size();
    out.tail = make_tail(thresholds, diams, diams.size());
    out.tail.seed = seed;
    if (diams.size() < 100) out.tail.flags.push_back("few interior cells: widened confidence");
    double survive = std::exp(-lambda * M_PI * hardcore * hardcore);
    double lambda_mat = lambda * survive;
    for (double D : thresholds) {
        out.tail.bound.push_back(std::exp(-lambda_mat * M_PI * (D / 4) * (D / 4)));
        out.printed_bound.push_back(std::exp(-lambda * 2 * M_PI * std::pow(4 * D, 2.0) *
                                             (1 - std::exp(-lambda * 2 * M_PI *
                                                           std::pow(2 * hardcore, 2.0)))));
    }
    out.tail.flags.push_back(
        "printed diameter bound disagrees with its void-probability derivation; "
        "overlay uses the decaying reading with the thinned intensity");
    // fitted exponent of -log S in D over the informative band
    std::vector<double> xs, ys;
    for (size_t i = 0; i < thresholds.size(); ++i) {
        double s = out.tail.p_hat[i];
        if (s > 0.005 && s < 0.95) {
            xs.push_back(std::log(thresholds[i]));
            ys.push_back(std::log(-std::log(s)));
        }
    }
    auto fit = linear_fit(xs, ys);
    out.fitted_exponent = fit[1];
    return out;
}

struct VoidEstimate {
    double p_hat = 0, lo = 0, hi = 1;
    double theory = 0;
    size_t replicas = 0;
};

/// Fraction of replicas with no point of the process inside the region.
inline VoidEstimate void_probability(ProcessKind kind, double lambda, double hardcore,
                                     const Box<2>& region, int replicas, uint64_t seed) {
    Box<2> gen = region.padded(kind == ProcessKind::matern ? hardcore : 0.0);
    size_t zero = 0;
    for (int rep = 0; rep < replicas; ++rep) {
        auto cloud = sample_poisson<2>(gen, lambda, seed, rep);
        if (kind == ProcessKind::matern) cloud = matern_thin(cloud, hardcore);
        bool any = false;
        for (const auto& p : cloud.points)
            if (region.contains(p)) any = true;
        if (!any) ++zero;
    }
    VoidEstimate est;
    est.replicas = replicas;
    est.p_hat = (double)zero / replicas;
    auto [lo, hi] = wilson_interval(zero, replicas);
    est.lo = lo;
    est.hi = hi;
    double A = region.volume();
    if (kind == ProcessKind::poisson)
        est.theory = std::exp(-lambda * A);
    else {
        double p0 = std::exp(-lambda * M_PI * hardcore * hardcore);
        est.theory = std::exp(-lambda * A * (1 - p0));
    }
    return est;
}

/// f~(R): probability that no ball of radius 4 sqrt(d) r fits inside
/// B_R(0) cap P, estimated by a dense candidate-center search with the
/// exact containment test.
inline TailEstimate mesoscopic_f(const std::function<Domain(uint64_t)>& domain_factory,
                                 const std::vector<double>& R_grid, double rfrak, int replicas,
                                 uint64_t seed) {
    double ball = 4 * std::sqrt(2.0) * rfrak;
    std::vector<size_t> fail(R_grid.size(), 0);
    for (int rep = 0; rep < replicas; ++rep) {
        Domain dom = domain_factory(rep);
        for (size_t k = 0; k < R_grid.size(); ++k) {
            double R = R_grid[k];
            if (!(R > ball)) throw std::invalid_argument("mesoscopic_f: need 4 sqrt(d) r < R");
            bool found = false;
            double pitch = rfrak / 2;
            double reach = R - ball;
            for (double y = -reach; y <= reach && !found; y += pitch)
                for (double x = -reach; x <= reach && !found; x += pitch) {
                    Vec2 c = v2(x, y);
                    if (norm(c) > reach) continue;
                    if (dom.signed_distance(c) >= ball) found = true;
                }
            if (!found) ++fail[k];
        }
    }
    TailEstimate t;
    t.seed = seed;
    t.replicas = replicas;
    for (size_t k = 0; k < R_grid.size(); ++k) {
        t.thresholds.push_back(R_grid[k]);
        auto [lo, hi] = wilson_interval(fail[k], replicas);
        t.p_hat.push_back((double)fail[k] / replicas);
        t.lo.push_back(lo);
        t.hi.push_back(hi);
    }
    return t;
}

/// Isotropic cone mixing: per R the fraction of replicas in which every
/// axis cone C_{+-e_j, alpha, R}(0) contains a process point. Reports the
/// success probability 1 - f(R).
inline TailEstimate cone_mixing_check(const std::function<PointCloud<2>(uint64_t)>& cloud_factory,
                                      double alpha, const std::vector<double>& R_grid, int replicas,
                                      uint64_t seed) {
    std::vector<size_t> success(R_grid.size(), 0);
    std::vector<Vec2> dirs = {v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)};
    for (int rep = 0; rep < replicas; ++rep) {
        auto cloud = cloud_factory(rep);
        for (size_t k = 0; k < R_grid.size(); ++k) {
            bool all = true;
            for (const Vec2& e : dirs) {
                Cone<2> cone(v2(0, 0), e, alpha, R_grid[k]);
                bool hit = false;
                for (const auto& p : cloud.points)
                    if (cone_contains(cone, p)) {
                        hit = true;
                        break;
                    }
                if (!hit) {
                    all = false;
                    break;
                }
            }
            if (all) ++success[k];
        }
    }
    TailEstimate t;
    t.seed = seed;
    t.replicas = replicas;
    for (size_t k = 0; k < R_grid.size(); ++k) {
        t.thresholds.push_back(R_grid[k]);
        auto [lo, hi] = wilson_interval(success[k], replicas);
        t.p_hat.push_back((double)success[k] / replicas);
        t.lo.push_back(lo);
        t.hi.push_back(hi);
    }
    return t;
}

// ---------------------------------------------------------------------------
// b-moment sums
// ---------------------------------------------------------------------------

struct BMomentConfig {
    double eta = 0, xi = 0, zeta = 0;  // exponents on d, s, n
    double p = 2.0;
    double r = 1.5;        // Hoelder split exponent of the bound
    double n_const = 1.0;  // constant laws by default
    double s_const = 1.0;
    double grid_pitch = 0.2;
};

struct BMomentResult {
    double spatial_average = 0;  // average of b^p over the window
    double bound = 0;            // triple-sum bound from empirical histograms
    bool dominated = false;
};

/// b(y) = sum_x chi_{G_{n(x)}(x)}(y) d(x)^eta s(x)^xi n(x)^zeta with scaled
/// cells; ergodic spatial average of b^p against the histogram triple sum.
inline BMomentResult b_moment_sum(double lambda, double rfrak, const Box<2>& window, int replicas,
                                  uint64_t seed, const BMomentConfig& cfg) {
    double hardcore = 2 * rfrak + 1e-9;
    double acc = 0;
    size_t acc_n = 0;
    std::map<int, size_t> d_hist;
    size_t d_total = 0;
    for (int rep = 0; rep < replicas; ++rep) {
        auto cloud = sample_matern<2>(window.padded(4.0), lambda, hardcore, seed, rep);
        if (cloud.size() < 4) continue;
        auto tess = build_voronoi(cloud, 4.0);
        Rng mark_rng(seed ^ 0xb0f0, rep);
        std::vector<double> nmark(tess.size()), smark(tess.size());
        for (size_t i = 0; i < tess.size(); ++i) {
            nmark[i] = cfg.n_const;
            smark[i] = cfg.s_const;
            (void)mark_rng;
        }
        for (size_t i = 0; i < tess.size(); ++i)
            if (!tess.clipped[i] && window.contains(tess.sites.points[i])) {
                ++d_total;
                ++d_hist[(int)std::floor(tess.diameters[i])];
            }
        // spatial average over grid points of the window
        for (double y = window.lo.c[1] + cfg.grid_pitch / 2; y < window.hi.c[1];
             y += cfg.grid_pitch)
            for (double x = window.lo.c[0] + cfg.grid_pitch / 2; x < window.hi.c[0];
                 x += cfg.grid_pitch) {
                Vec2 q = v2(x, y);
                double b = 0;
                for (size_t i = 0; i < tess.size(); ++i) {
                    // scaled cell: x + n (G - x)
                    Vec2 rel = tess.sites.points[i] + (q - tess.sites.points[i]) * (1.0 / nmark[i]);
                    if (tess.cells[i].contains(rel))
                        b += std::pow(tess.diameters[i], cfg.eta) * std::pow(smark[i], cfg.xi) *
                             std::pow(nmark[i], cfg.zeta);
                }
                acc += std::pow(b, cfg.p);
                ++acc_n;
            }
    }
    BMomentResult res;
    res.spatial_average = acc_n ? acc / acc_n : 0.0;
    // triple-sum bound with the empirical diameter histogram and the constant
    // n and s laws (their histograms are unit masses)
    double d = 2, p = cfg.p, r = cfg.r;
    double N = cfg.n_const, S = cfg.s_const;
    double sum = 0;
    for (auto [k, cnt] : d_hist) {
        double Pd = (double)cnt / std::fmax<size_t>(d_total, 1);
        sum += std::pow(k + 1.0, d * (p + 1) + cfg.eta * p + r * (p - 1)) * Pd;
    }
    sum *= std::pow(S + 1.0, cfg.xi * p + r * (p - 1)) *
           std::pow(N + 1.0, d * (p + 1) + cfg.zeta * p + r * (p - 1));
    res.bound = sum;
    res.dominated = res.spatial_average <= res.bound;
    return res;
}

// ---------------------------------------------------------------------------
// Delaunay angle vs diameter
// ---------------------------------------------------------------------------

struct AngleDiameterResult {
    double fitted_C = kInf;  // min over sites of d_x sin(alpha_min)
    std::vector<std::pair<double, double>> scatter;  // (1/sin a_min, d_x)
    size_t sites = 0;
};

inline AngleDiameterResult angle_diameter_bound(double lambda, double rfrak, const Box<2>& window,
                                                int replicas, uint64_t seed) {
    AngleDiameterResult out;
    double hardcore = 2 * rfrak + 1e-9;
    for (int rep = 0; rep < replicas; ++rep) {
        auto cloud = sample_matern<2>(window.padded(3.0), lambda, hardcore, seed, rep);
        if (cloud.size() < 4) continue;
        auto tess = build_voronoi(cloud, 3.0);
        for (size_t a = 0; a < tess.size(); ++a) {
            if (tess.clipped[a] || !window.contains(tess.sites.points[a])) continue;
            const auto& adj = tess.delaunay_adj[a];
            if (adj.size() < 2) continue;
            bool rim = false;
            for (int b : adj)
                if (tess.clipped[b]) {
                    rim = true;
                    break;
                }
            if (rim) continue;
            double amin = kInf;
            for (size_t i = 0; i < adj.size(); ++i)
                for (size_t j = i + 1; j < adj.size(); ++j) {
                    Vec2 u = normalized(tess.sites.points[adj[i]] - tess.sites.points[a]);
                    Vec2 v = normalized(tess.sites.points[adj[j]] - tess.sites.points[a]);
                    double ang = std::acos(std::fmin(1.0, std::fmax(-1.0, dot(u, v))));
                    amin = std::fmin(amin, ang);
                }
            double dsin = tess.diameters[a] * std::sin(amin);
            out.fitted_C = std::fmin(out.fitted_C, dsin);
            if (out.scatter.size() < 4096)
                out.scatter.push_back({1.0 / std::sin(amin), tess.diameters[a]});
            ++out.sites;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Percolation graph statistics
// ---------------------------------------------------------------------------

/// Dijkstra over the connectivity graph with Euclidean edge weights.
inline std::vector<double> graph_distances(const std::vector<Vec2>& pts,
                                           const std::vector<std::vector<int>>& adj, int source) {
    std::vector<double> dist_v(pts.size(), kInf);
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>, std::greater<>>
        pq;
    dist_v[source] = 0;
    pq.push({0.0, source});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist_v[u] + 1e-15) continue;
        for (int w : adj[u]) {
            double nd = d + dist(pts[u], pts[w]);
            if (nd < dist_v[w] - 1e-15) {
                dist_v[w] = nd;
                pq.push({nd, w});
            }
        }
    }
    return dist_v;
}

struct StretchResult {
    TailEstimate tail;          // survival of S over base sites
    double fit_slope = 0;       // slope of log-survival vs S
    double fit_r2 = 0;
    size_t base_sites = 0;
};

/// Statistical local stretch factor S(x,R) = max_{y in comp cap B_R(x)}
/// d_graph(x,y)/R; S(x) pooled over a grid of R values and base sites.
inline StretchResult stretch_factor(double lambda, const Box<2>& window, int replicas,
                                    uint64_t seed, const std::vector<double>& R_grid,
                                    int base_per_replica, const std::vector<double>& thresholds) {
    std::vector<double> svals;
    for (int rep = 0; rep < replicas; ++rep) {
        auto model = boolean_build(window, lambda, seed, rep);
        const auto& pts = model.sites.points;
        std::vector<std::vector<int>> adj(pts.size());
        for (auto [a, b] : model.edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        // base sites sampled from the selected component, away from the rim
        Box<2> core = window.padded(-0.25 * std::fmin(window.side(0), window.side(1)));
        std::vector<int> base;
        Rng rng(seed ^ 0x57e7c4, rep);
        std::vector<int> candidates;
        for (size_t i = 0; i < pts.size(); ++i)
            if (model.in_largest[i] && core.contains(pts[i])) candidates.push_back((int)i);
        if (candidates.empty()) continue;
        for (int k = 0; k < base_per_replica; ++k)
            base.push_back(candidates[(size_t)(rng.uniform() * candidates.size())]);
        for (int src : base) {
            auto dists = graph_distances(pts, adj, src);
            double S = 0;
            for (double R : R_grid) {
                double worst = 0;
                for (size_t y = 0; y < pts.size(); ++y) {
                    if (!model.in_largest[y] || dists[y] == kInf) continue;
                    if (dist(pts[y], pts[src]) > R) continue;
                    worst = std::fmax(worst, dists[y] / R);
                }
                S = std::fmax(S, worst);
            }
            svals.push_back(S);
        }
    }
    StretchResult res;
    res.base_sites = svals.size();
    res.tail = make_tail(thresholds, svals, svals.size());
    res.tail.seed = seed;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < thresholds.size(); ++i) {
        if (res.tail.p_hat[i] > 0.002 && res.tail.p_hat[i] < 0.9) {
            xs.push_back(thresholds[i]);
            ys.push_back(std::log(res.tail.p_hat[i]));
        }
    }
    auto fit = linear_fit(xs, ys);
    res.fit_slope = fit[1];
    res.fit_r2 = fit[2];
    return res;
}

// ---------------------------------------------------------------------------
// Path overlay counts
// ---------------------------------------------------------------------------

struct OverlayResult {
    GridField<double> counts;
    double max_count = 0;
    bool zero_beyond_cutoff = true;
    double fitted_C = 0;  // counts dominated by C (R^d - (|x-y0|/2)^d)
};

/// Shortest site-paths from y0 to all component sites within B_R(y0); each
/// path sweeps a tube of radius r/16 and the per-node cover count is
/// compared against the C (R^d - (x/2)^d) profile and the 2R cutoff.
inline OverlayResult overlay_count(const std::vector<Vec2>& pts,
                                   const std::vector<std::vector<int>>& adj, int y0, double R,
                                   double rfrak, const Box<2>& grid_box, double h) {
    auto dists = graph_distances(pts, adj, y0);
    // predecessors along shortest paths
    std::vector<int> pred(pts.size(), -1);
    for (size_t u = 0; u < pts.size(); ++u) {
        if (dists[u] == kInf) continue;
        for (int w : adj[u])
            if (std::abs(dists[w] + dist(pts[u], pts[w]) - dists[u]) < 1e-9) {
                // w precedes u on a shortest path
                if (pred[u] == -1 || dists[w] < dists[pred[u]]) pred[u] = w;
            }
    }
    OverlayResult res;
    res.counts = GridField<double>::on_box(grid_box, h);
    double tube = rfrak / 16;
    size_t targets = 0;
    for (size_t t = 0; t < pts.size(); ++t) {
        if (dists[t] == kInf || dist(pts[t], pts[y0]) > R) continue;
        ++targets;
        // walk back to y0, stamping the tube of each segment
        int cur = (int)t;
        while (cur != y0 && pred[cur] != -1) {
            Vec2 a = pts[cur], b = pts[pred[cur]];
            int i0 = (int)std::floor((std::fmin(a.c[0], b.c[0]) - tube - res.counts.origin.c[0]) / h);
            int i1 = (int)std::ceil((std::fmax(a.c[0], b.c[0]) + tube - res.counts.origin.c[0]) / h);
            int j0 = (int)std::floor((std::fmin(a.c[1], b.c[1]) - tube - res.counts.origin.c[1]) / h);
            int j1 = (int)std::ceil((std::fmax(a.c[1], b.c[1]) + tube - res.counts.origin.c[1]) / h);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) {
                    if (!res.counts.in_range(i, j)) continue;
                    if (dist_point_segment(a, b, res.counts.node(i, j)) < tube)
                        res.counts.at(i, j) += 1.0;
                }
            cur = pred[cur];
        }
    }
    double C = 0;
    for (int j = 0; j < res.counts.ny; ++j)
        for (int i = 0; i < res.counts.nx; ++i) {
            double c = res.counts.at(i, j);
            if (c <= 0) continue;
            res.max_count = std::fmax(res.max_count, c);
            double r0 = dist(res.counts.node(i, j), pts[y0]);
            if (r0 > 2 * R + tube) res.zero_beyond_cutoff = false;
            double profile = R * R - (r0 / 2) * (r0 / 2);
            if (profile > 0) C = std::fmax(C, c / profile);
        }
    res.fitted_C = C;
    (void)targets;
    return res;
}

}  // namespace perfodom
