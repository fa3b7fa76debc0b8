#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "perfodom/domains.hpp"
#include "perfodom/regularity.hpp"
#include "perfodom/voronoi.hpp"

namespace perfodom {

struct CoverOptions {
    int K = 5;           // covering radii 2^{-K} rho_n
    double C_sep = 0.5;  // separation constant in (0,1)
    int n_grid = 4;      // cube subdivision per level
    double eta_floor = 0;  // samples with radius below this stay uncovered (reported)
};

/// Boundary covering by balls B_{eta~(p_i)}(p_i) with the comparability and
/// separation chain of the sweep construction, plus the inner balls of the
/// cusp lemma. A1 = B_{r_i}, A2 = B_{3 r_i}, A3 = B_{rho_hat_i}, and the
/// partition vanishing balls are B_{r_i/8}(p_i).
struct BoundaryCover {
    std::vector<int> sample_idx;       // profile sample index of each center
    std::vector<Vec2> centers;
    std::vector<Vec2> normals;         // outward at the center
    std::vector<double> radius;        // eta~_i = 2^{-K} rho_n
    std::vector<double> delta;         // delta_Delta(p_i)
    std::vector<double> rho_hat;       // rho_hat_{n,3}(p_i)   (A3 radius)
    std::vector<double> M_rho;         // M_{eta~_i}(p_i)
    std::vector<Vec2> inner_center;    // y_i
    std::vector<double> inner_radius;  // r_{n,alpha,i}
    std::vector<char> inner_shrunk;    // probing had to shrink below the formula radius
    int n_order = 0;
    double alpha = 0;
    CoverOptions opt;
    size_t below_floor = 0;  // samples excluded by the eta floor

    size_t size() const { return centers.size(); }
    double b_radius(size_t i) const { return radius[i] / 8; }  // vanishing ball
};

/// Largest 1-Lipschitz function below the sampled values (inf-convolution
/// with the cone |x|). The true scale functions are eta-regular, which is
/// equivalent to this Lipschitz property; the sample-based values can break
/// it near piece seams where the projection frame turns, and the covering
/// chain needs it restored. A smaller eta is always an admissible covering
/// scale.
inline std::vector<double> lipschitz_envelope(const std::vector<Vec2>& pts,
                                              const std::vector<double>& vals) {
    double vmax = 0;
    for (double v : vals) vmax = std::fmax(vmax, v);
    PointGrid<2> grid(pts, std::fmax(vmax, 1e-9));
    std::vector<double> out(vals.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        double best = vals[i];
        grid.for_neighbors(pts[i], best, [&](size_t q) {
            best = std::fmin(best, vals[q] + dist(pts[i], pts[q]));
        });
        out[i] = best;
    }
    return out;
}

/// Covering radius per sample: 2^{-K} rho_n(p) after the Lipschitz
/// regularization; rho_0 = delta_Delta.
inline std::vector<double> cover_radii(const RegularityProfile& prof, int n, int K) {
    std::vector<double> rho(prof.samples.size());
    std::vector<Vec2> pts(prof.samples.size());
    for (size_t i = 0; i < rho.size(); ++i) {
        double r = n == 0 ? prof.delta[i] : (prof.has_rho ? prof.rho[i][n] : -1.0);
        if (r < 0) throw std::invalid_argument("cover_radii: profile lacks rho for n >= 1");
        rho[i] = r;
        pts[i] = prof.samples[i].point;
    }
    std::vector<double> reg = lipschitz_envelope(pts, rho);
    for (double& v : reg) v *= std::pow(2.0, -K);
    return reg;
}

/// Cusp-ball lemma: y = p + (delta/4) inward, r = delta / (4 (1 + M^alpha)),
/// verified by the exact signed distance and shrunk by halves at most 3 times.
inline std::tuple<Vec2, double, bool> inner_ball(const Domain& domain, const Vec2& p,
                                                 const Vec2& outward_normal, double delta, double M,
                                                 double alpha) {
    Vec2 inward = -normalized(outward_normal);
    Vec2 y = p + inward * (delta / 4);
    double r = delta / (4 * (1 + std::pow(M, alpha)));
    bool shrunk = false;
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (domain.signed_distance(y) >= r * (1 - 1e-9)) return {y, r, shrunk};
        r /= 2;
        shrunk = true;
    }
    throw std::runtime_error("inner_ball: probing failed after 3 shrink steps");
}

/// Greedy dyadic-level sweep: levels eta_k = (1-d)^k descending, n_grid^d
/// shifted cube grids per level (lexicographic shift order), one uncovered
/// sample picked per cube (lowest index), its ball removed from the
/// uncovered set. Terminates with a complete cover of all samples above the
/// floor or throws.
inline BoundaryCover build_cover(const Domain& domain, const BoundaryProbe& probe,
                                 const RegularityProfile& prof, int n_order, double alpha,
                                 const CoverOptions& opt) {
    if (!(opt.C_sep > 0 && opt.C_sep < 1)) throw std::invalid_argument("build_cover: C_sep in (0,1)");
    if (opt.K < 2) throw std::invalid_argument("build_cover: K >= 2");
    double shift_frac = 1.0 - 1.0 / opt.n_grid;
    double slack = 1.0 - opt.C_sep / shift_frac;
    if (slack <= 0) throw std::invalid_argument("build_cover: C_sep too large for n_grid");
    double d_lvl = 0.5 * slack;

    const auto& samples = prof.samples;
    size_t n = samples.size();
    std::vector<double> eta = cover_radii(prof, n_order, opt.K);

    BoundaryCover cover;
    cover.n_order = n_order;
    cover.alpha = alpha;
    cover.opt = opt;

    double eta_max = 0, eta_min = kInf;
    for (size_t i = 0; i < n; ++i) {
        if (eta[i] < opt.eta_floor) {
            ++cover.below_floor;
            continue;
        }
        eta_max = std::fmax(eta_max, eta[i]);
        eta_min = std::fmin(eta_min, eta[i]);
    }
    if (!(eta_max > 0)) throw std::runtime_error("build_cover: no samples above the eta floor");

    std::vector<char> covered(n, 0);
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (const auto& s : samples) pts.push_back(s.point);
    PointGrid<2> grid(pts, eta_max);

    double level_hi = eta_max * (1 + 1e-12);
    int max_levels = (int)std::ceil(std::log(std::fmax(eta_min, opt.eta_floor) / level_hi) /
                                    std::log(1 - d_lvl)) +
                     2;
    for (int k = 1; k <= max_levels; ++k) {
        double eta_k = level_hi * std::pow(1 - d_lvl, k);
        double eta_km1 = level_hi * std::pow(1 - d_lvl, k - 1);
        // bucket candidates of this band by (shift, cube) cell
        std::map<std::tuple<int, int, int64_t, int64_t>, std::vector<size_t>> cubes;
        for (size_t i = 0; i < n; ++i) {
            if (covered[i] || eta[i] < opt.eta_floor) continue;
            if (!(eta[i] > eta_k && eta[i] <= eta_km1)) continue;
            double fx = pts[i].c[0] / eta_k, fy = pts[i].c[1] / eta_k;
            double frx = fx - std::floor(fx), fry = fy - std::floor(fy);
            int sx = std::min(opt.n_grid - 1, (int)(frx * opt.n_grid));
            int sy = std::min(opt.n_grid - 1, (int)(fry * opt.n_grid));
            cubes[{sx, sy, (int64_t)std::floor(fx), (int64_t)std::floor(fy)}].push_back(i);
        }
        // lexicographic shift order, then cube order; one pick per cube
        for (auto& [key, members] : cubes) {
            size_t pick = n;
            for (size_t i : members)
                if (!covered[i] && i < pick) pick = i;
            if (pick == n) continue;
            cover.sample_idx.push_back((int)pick);
            cover.centers.push_back(pts[pick]);
            cover.normals.push_back(samples[pick].normal);
            cover.radius.push_back(eta[pick]);
            grid.for_neighbors(pts[pick], eta[pick], [&](size_t j) {
                if (dist(pts[j], pts[pick]) < eta[pick]) covered[j] = 1;
            });
        }
    }
    for (size_t i = 0; i < n; ++i)
        if (!covered[i] && eta[i] >= opt.eta_floor)
            throw std::runtime_error("build_cover: sample above the floor left uncovered");

    // per-center quantities and inner balls
    size_t m = cover.size();
    cover.delta.resize(m);
    cover.rho_hat.resize(m);
    cover.M_rho.resize(m);
    cover.inner_center.resize(m);
    cover.inner_radius.resize(m);
    cover.inner_shrunk.assign(m, 0);
    for (size_t i = 0; i < m; ++i) {
        int si = cover.sample_idx[i];
        cover.delta[i] = prof.delta[si];
        if (prof.has_rho) {
            cover.rho_hat[i] = prof.rho_hat[si][n_order];
        } else {
            auto rr = probe.rho(cover.centers[i], cover.normals[i], prof.delta[si], prof.opt);
            cover.rho_hat[i] = BoundaryProbe::rho_hat(rr, n_order, prof.opt.rho_hat_K, prof.delta[si]);
        }
        double M = probe.M_r(cover.centers[i], cover.normals[i], cover.radius[i], prof.opt);
        if (std::isinf(M)) M = 1e6;
        cover.M_rho[i] = M;
        auto [y, r, shrunk] = inner_ball(domain, cover.centers[i], cover.normals[i],
                                         cover.radius[i] / 8, M, alpha);
        cover.inner_center[i] = y;
        cover.inner_radius[i] = r;
        cover.inner_shrunk[i] = shrunk;
    }
    return cover;
}

// ---------------------------------------------------------------------------
// Microscopic partition of unity
// ---------------------------------------------------------------------------

/// phi_{n,0} and phi_{n,i} built from radial mollifiers phi(|x-p|^2/rho~^2),
/// distance factors to the vanishing balls B_j, and the boundary-distance
/// weight phi~_0 = dist(x, dP u U B_j). Sum is 1 by construction; supports
/// and vanishing are exact.
class MicroPartition {
  public:
    MicroPartition(const Domain& domain, const BoundaryCover& cover)
        : domain_(&domain), cover_(&cover) {
        double rmax = 0;
        for (double r : cover.radius) rmax = std::fmax(rmax, r);
        rmax_ = rmax;
        grid_ = PointGrid<2>(cover.centers, std::fmax(rmax, 1e-9));
        step_.q = 0.9;
    }

    struct Term {
        int index;  // -1 for phi_0
        double weight;
        Vec2 gradient;
    };

    std::vector<Term> eval(const Vec2& x) const {
        struct Raw {
            int index;
            double val;
            Vec2 grad;
        };
        std::vector<Raw> raws;
        // phi~_k for covering balls near x
        std::vector<size_t> near;
        grid_.for_neighbors(x, rmax_, [&](size_t k) {
            if (dist(x, cover_->centers[k]) < cover_->radius[k]) near.push_back(k);
        });
        for (size_t k : near) {
            double rho = cover_->radius[k];
            Vec2 d = x - cover_->centers[k];
            double s = norm2(d) / (rho * rho);
            double hat = step_(s);
            Vec2 hat_grad = d * (step_.derivative(s) * 2.0 / (rho * rho));
            // distance factor to the other vanishing balls
            double df;
            Vec2 df_grad;
            ball_distance(x, (int)k, df, df_grad);
            raws.push_back({(int)k, hat * df, hat_grad * df + df_grad * hat});
        }
        // phi~_0 = dist(x, dP u U B_j)
        {
            Vec2 qb;
            double db = std::abs(domain_->signed_distance(x, &qb));
            double df;
            Vec2 df_grad;
            ball_distance(x, -1, df, df_grad);
            double val;
            Vec2 grad;
            if (db < df) {
                val = db;
                grad = db > 1e-300 ? (x - qb) * (1.0 / db) : v2(0, 0);
            } else {
                val = df;
                grad = df_grad;
            }
            raws.push_back({-1, val, grad});
        }
        double sum = 0;
        Vec2 gsum = v2(0, 0);
        for (const Raw& r : raws) {
            sum += r.val;
            gsum += r.grad;
        }
        std::vector<Term> out;
        if (sum < 1e-300) {
            // only possible on uncovered boundary below the eta floor
            out.push_back({-1, 1.0, v2(0, 0)});
            return out;
        }
        for (const Raw& r : raws) {
            Vec2 g = (r.grad * sum - gsum * r.val) * (1.0 / (sum * sum));
            out.push_back({r.index, r.val / sum, g});
        }
        return out;
    }

  private:
    /// Distance to the union of vanishing balls B_j (skipping ball `skip`),
    /// with its gradient.
    void ball_distance(const Vec2& x, int skip, double& val, Vec2& grad) const {
        val = kInf;
        grad = v2(0, 0);
        int best = -1;
        grid_.for_neighbors(x, rmax_, [&](size_t j) {
            if ((int)j == skip) return;
            double d = dist(x, cover_->centers[j]) - cover_->b_radius(j);
            if (d < val) {
                val = d;
                best = (int)j;
            }
        });
        if (best < 0) {
            // no ball nearby: distance is large; cap at the query radius scale
            val = rmax_;
            return;
        }
        if (val <= 0) {
            val = 0;
            return;
        }
        Vec2 d = x - cover_->centers[best];
        grad = d * (1.0 / norm(d));
    }

    const Domain* domain_;
    const BoundaryCover* cover_;
    double rmax_ = 0;
    PointGrid<2> grid_;
    SmoothStep step_;
};

// ---------------------------------------------------------------------------
// Cover verification
// ---------------------------------------------------------------------------

struct CoverCheck {
    size_t centers = 0;
    size_t intersecting_pairs = 0;
    size_t ratio_violations = 0;       // radii comparability
    size_t separation_violations = 0;  // C max <= |p_i - p_k| <= (2^K-1)/(2^{K-1}-1) min
    size_t inner_containment_failures = 0;
    size_t inner_disjointness_failures = 0;
    size_t completeness_failures = 0;
    int max_a1_overlap = 0;            // per-ball A1 intersection count
    int max_a1_multiplicity = 0;       // pointwise
    int max_a3_multiplicity = 0;
    double hat_d_fit = 0;              // fitted exponent of A3 multiplicity vs (1+M)
    bool pass() const {
        return ratio_violations == 0 && separation_violations == 0 &&
               inner_containment_failures == 0 && inner_disjointness_failures == 0 &&
               completeness_failures == 0;
    }
};

inline CoverCheck check_cover(const Domain& domain, const BoundaryCover& cover,
                              const RegularityProfile& prof, const std::vector<double>& eta) {
    CoverCheck chk;
    chk.centers = cover.size();
    size_t m = cover.size();
    double K = cover.opt.K;
    double ratio_hi = std::pow(2.0, K - 1) / (std::pow(2.0, K - 1) - 1);
    double sep_hi = (std::pow(2.0, K) - 1) / (std::pow(2.0, K - 1) - 1);
    double tol = 1e-6;

    double rmax = 0, arad = 0;
    for (double r : cover.radius) rmax = std::fmax(rmax, r);
    for (double r : cover.rho_hat) arad = std::fmax(arad, r);
    PointGrid<2> cgrid(cover.centers, std::fmax(rmax, 1e-9));

    for (size_t i = 0; i < m; ++i) {
        int overlap = 0;
        cgrid.for_neighbors(cover.centers[i], cover.radius[i] + rmax, [&](size_t j) {
            if (j == i) return;
            double d = dist(cover.centers[i], cover.centers[j]);
            double ri = cover.radius[i], rj = cover.radius[j];
            if (d >= ri + rj) return;
            ++overlap;
            if (j < i) return;  // count each pair once for the chain
            ++chk.intersecting_pairs;
            double rr = rj / ri;
            if (rr > ratio_hi * (1 + tol) || rr < 1.0 / ratio_hi * (1 - tol)) ++chk.ratio_violations;
            double mn = std::fmin(ri, rj), mx = std::fmax(ri, rj);
            if (d > sep_hi * mn * (1 + tol) || d < cover.opt.C_sep * mx * (1 - tol))
                ++chk.separation_violations;
        });
        chk.max_a1_overlap = std::max(chk.max_a1_overlap, overlap);
        // inner ball containment and formula radius
        double sd = domain.signed_distance(cover.inner_center[i]);
        if (sd < cover.inner_radius[i] * (1 - 1e-6)) ++chk.inner_containment_failures;
        if (dist(cover.inner_center[i], cover.centers[i]) + cover.inner_radius[i] >
            cover.radius[i] / 8 + 1e-12)
            ++chk.inner_containment_failures;
    }
    // inner ball disjointness at doubled radii
    std::vector<Vec2> ycenters = cover.inner_center;
    double yr = 0;
    for (double r : cover.inner_radius) yr = std::fmax(yr, r);
    PointGrid<2> ygrid(ycenters, std::fmax(4 * yr, 1e-9));
    for (size_t i = 0; i < m; ++i)
        ygrid.for_neighbors(ycenters[i], 4 * yr, [&](size_t j) {
            if (j <= i) return;
            if (dist(ycenters[i], ycenters[j]) <
                2 * cover.inner_radius[i] + 2 * cover.inner_radius[j] - 1e-12)
                ++chk.inner_disjointness_failures;
        });
    // completeness on every sample above the floor
    for (size_t s = 0; s < prof.samples.size(); ++s) {
        if (eta[s] < cover.opt.eta_floor) continue;
        bool cov = false;
        cgrid.for_neighbors(prof.samples[s].point, rmax, [&](size_t j) {
            if (!cov && dist(prof.samples[s].point, cover.centers[j]) < cover.radius[j]) cov = true;
        });
        if (!cov) ++chk.completeness_failures;
    }
    // pointwise multiplicities and the A3 exponent fit at the samples
    double num = 0, den = 0;
    for (size_t s = 0; s < prof.samples.size(); s += 3) {
        const Vec2& x = prof.samples[s].point;
        int m1 = 0, m3 = 0;
        double Mloc = 0;
        cgrid.for_neighbors(x, std::fmax(rmax, arad), [&](size_t j) {
            double d = dist(x, cover.centers[j]);
            if (d < cover.radius[j]) ++m1;
            if (d <= cover.rho_hat[j]) {
                ++m3;
                Mloc = std::fmax(Mloc, cover.M_rho[j]);
            }
        });
        chk.max_a1_multiplicity = std::max(chk.max_a1_multiplicity, m1);
        chk.max_a3_multiplicity = std::max(chk.max_a3_multiplicity, m3);
        if (m3 > 1 && cover.n_order > 0) {
            num += std::log((double)m3);
            den += cover.n_order * std::log(1 + Mloc);
        }
    }
    chk.hat_d_fit = den > 0 ? num / den : 0.0;
    return chk;
}

}  // namespace perfodom
