#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perfodom/domains.hpp"
#include "perfodom/grid.hpp"
#include "perfodom/solids.hpp"

namespace perfodom {

struct RegularityOptions {
    double r_frak = 0.25;      // cap for delta
    double delta_floor = 1e-3; // smallest tested scale
    double slope_cap = 1e6;    // slopes above this count as vertical overhang
    double bisect_rel_tol = 1e-6;
    double r_grid_ratio = std::pow(2.0, 1.0 / 8);
    int rho_hat_K = 3;
};

/// Graph-property probe over a fixed boundary sample set. The test projects
/// samples near p onto the tangent frame of (p, normal): the boundary is an
/// M-Lipschitz graph there iff no two samples share a base point with
/// separated heights, and M is the largest slope between t-consecutive
/// samples.
class BoundaryProbe {
  public:
    explicit BoundaryProbe(std::vector<BoundarySample> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw std::invalid_argument("BoundaryProbe: empty sample set");
        pts_.reserve(samples_.size());
        double mean_gap = 0;
        for (const auto& s : samples_) {
            pts_.push_back(s.point);
            mean_gap += s.local_gap;
        }
        mean_gap /= samples_.size();
        grid_ = PointGrid<2>(pts_, std::fmax(mean_gap * 8, 1e-9));
    }

    const std::vector<BoundarySample>& samples() const { return samples_; }
    const std::vector<Vec2>& points() const { return pts_; }

    /// Least Lipschitz slope of the boundary graph over the tangent frame at
    /// (p, normal) within radius r; +inf when the graph property fails.
    ///
    /// A boundary sheet that is the graph of a function with P below has all
    /// outward normals in the open upper half of the frame, and two stacked
    /// sheets over a common base must alternate orientation. Hence the graph
    /// property fails exactly when some sample's normal loses its positive
    /// frame component, and otherwise M is the largest local slope
    /// |n.tau| / (n.nu) over the samples (kinks included via the mean value
    /// theorem). low_density flags scales the sampling cannot resolve.
    double lipschitz_constant(const Vec2& p, const Vec2& normal, double r, double slope_cap = kInf,
                              bool* low_density = nullptr) const {
        Vec2 nu = normalized(normal);
        Vec2 tau = v2(nu.c[1], -nu.c[0]);
        double M = 0;
        bool fail = false;
        size_t seen = 0;
        double min_gap = kInf;
        grid_.for_neighbors(p, r, [&](size_t i) {
            if (fail) return;
            Vec2 w = samples_[i].point - p;
            double d2 = norm2(w);
            if (d2 >= r * r) return;
            ++seen;
            min_gap = std::fmin(min_gap, samples_[i].local_gap);
            if (d2 < 1e-28) return;
            double c = dot(samples_[i].normal, nu);
            if (c <= 1e-12) {
                fail = true;
                return;
            }
            M = std::fmax(M, std::abs(dot(samples_[i].normal, tau)) / c);
        });
        if (low_density) *low_density = seen < 3 && r > 2 * (min_gap == kInf ? r : min_gap);
        if (fail || M >= slope_cap) return kInf;
        return M;
    }

    /// Largest delta in (floor, r_frak] such that the boundary in B_delta(p)
    /// is a Lipschitz graph, halved (delta_Delta = Delta/2). Returns the
    /// floor/2 with `floored` set when the graph property fails everywhere.
    double delta_Delta(const Vec2& p, const Vec2& normal, const RegularityOptions& opt,
                       bool* floored = nullptr, double hint = 0) const {
        auto graph_ok = [&](double d) {
            return lipschitz_constant(p, normal, d, opt.slope_cap) < opt.slope_cap;
        };
        if (floored) *floored = false;
        double lo = opt.delta_floor, hi = opt.r_frak;
        if (hint > 0) {
            double hl = std::fmax(lo, 0.7 * hint), hh = std::fmin(hi, 1.4 * hint);
            if (hl < hh) {
                bool okl = graph_ok(hl), okh = graph_ok(hh);
                if (okl && !okh) {
                    lo = hl;
                    hi = hh;
                } else if (okh && hh >= hi * (1 - 1e-12)) {
                    return hi / 2;
                }
            }
        }
        if (lo == opt.delta_floor) {  // no usable hint bracket
            if (graph_ok(hi)) return hi / 2;
            if (!graph_ok(lo)) {
                if (floored) *floored = true;
                return lo / 2;
            }
        }
        while (hi - lo > opt.bisect_rel_tol * hi) {
            double mid = 0.5 * (lo + hi);
            if (graph_ok(mid))
                lo = mid;
            else
                hi = mid;
        }
        return lo / 2;
    }

    /// M_r(p): Lipschitz constant at scale r (right-continuous monotone).
    double M_r(const Vec2& p, const Vec2& normal, double r, const RegularityOptions& opt) const {
        return lipschitz_constant(p, normal, r, opt.slope_cap);
    }

    /// rho_n(p) = sup_{r < delta(p)} r (4 M_r(p)^2 + 2)^{-n/2} over the
    /// geometric r-grid, for n = 0..2; also returns the grid M values.
    struct RhoResult {
        std::array<double, 3> rho{};
        std::vector<double> grid_r, grid_M;
    };
    RhoResult rho(const Vec2& p, const Vec2& normal, double delta, const RegularityOptions& opt) const {
        RhoResult res;
        res.rho = {0, 0, 0};
        double r = delta * (1 - 1e-9);
        double r_min = delta * std::pow(2.0, -(opt.rho_hat_K + 4));
        while (r > r_min) {
            double M = lipschitz_constant(p, normal, r, opt.slope_cap);
            res.grid_r.push_back(r);
            res.grid_M.push_back(M);
            for (int n = 0; n < 3; ++n) {
                double val = std::isinf(M) ? 0.0 : r * std::pow(4 * M * M + 2, -n / 2.0);
                res.rho[n] = std::fmax(res.rho[n], val);
            }
            r /= opt.r_grid_ratio;
        }
        return res;
    }

    /// rho_hat_{n,K}(p) from the grid of the rho computation.
    static double rho_hat(const RhoResult& rr, int n, int K, double delta) {
        double target = std::pow(2.0, -K) * rr.rho[n];
        double best = delta;
        // descending delta' grid: the defining set always contains delta
        for (double dp : rr.grid_r) {
            double cap = std::pow(2.0, -K) * dp;
            double sup = 0;
            for (size_t i = 0; i < rr.grid_r.size(); ++i) {
                if (rr.grid_r[i] >= cap) continue;
                double M = rr.grid_M[i];
                if (std::isinf(M)) continue;
                sup = std::fmax(sup, rr.grid_r[i] * std::pow(4 * M * M + 2, -n / 2.0));
            }
            if (sup >= target * (1 - 1e-12)) best = std::fmin(best, dp);
        }
        return best;
    }

  private:
    std::vector<BoundarySample> samples_;
    std::vector<Vec2> pts_;
    PointGrid<2> grid_;
};

/// Per-point regularity quantities on a boundary sample set.
struct RegularityProfile {
    std::vector<BoundarySample> samples;
    std::vector<double> delta;          // delta_Delta
    std::vector<char> floored;
    std::vector<std::array<double, 3>> rho;      // rho_0, rho_1, rho_2 (when computed)
    std::vector<std::array<double, 3>> rho_hat;  // rho_hat_{n,K}
    bool has_rho = false;
    RegularityOptions opt;

    double rho_tilde(size_t i, int n) const { return std::pow(2.0, -5) * rho[i][n]; }
};

/// Computes delta_Delta for every sample (always) and the rho family when
/// `orders` is set. Consecutive samples of a piece share a bisection bracket,
/// which keeps the sweep near-linear.
inline RegularityProfile build_profile(const BoundaryProbe& probe, const RegularityOptions& opt,
                                       bool orders = false) {
    RegularityProfile prof;
    prof.samples = probe.samples();
    prof.opt = opt;
    size_t n = prof.samples.size();
    prof.delta.resize(n);
    prof.floored.assign(n, 0);
    if (orders) {
        prof.rho.resize(n);
        prof.rho_hat.resize(n);
        prof.has_rho = true;
    }
    double hint = 0;
    int last_piece = -1;
    for (size_t i = 0; i < n; ++i) {
        const BoundarySample& s = prof.samples[i];
        bool fl = false;
        if (s.piece != last_piece) hint = 0;
        prof.delta[i] = probe.delta_Delta(s.point, s.normal, opt, &fl, hint);
        prof.floored[i] = fl;
        hint = 2 * prof.delta[i];
        last_piece = s.piece;
        if (orders) {
            auto rr = probe.rho(s.point, s.normal, prof.delta[i], opt);
            prof.rho[i] = rr.rho;
            for (int k = 0; k < 3; ++k)
                prof.rho_hat[i][k] = BoundaryProbe::rho_hat(rr, k, opt.rho_hat_K, prof.delta[i]);
        }
    }
    return prof;
}

/// eta-regularity check: for all sample pairs with |p - q| < eps eta(p) the
/// chain (1-eps)/(1-2eps) eta(p) > eta(q) > eta(p) - |p-q| must hold.
struct EtaRegularityReport {
    size_t pairs_checked = 0;
    size_t violations = 0;
    std::vector<std::pair<int, int>> violating_pairs;  // capped at 64
};

inline EtaRegularityReport eta_regular_check(const std::vector<Vec2>& pts,
                                             const std::vector<double>& eta,
                                             const std::vector<double>& eps_grid,
                                             double slack = 1e-9) {
    if (pts.size() != eta.size()) throw std::invalid_argument("eta_regular_check: size mismatch");
    EtaRegularityReport rep;
    double max_eta = 0;
    for (double e : eta) max_eta = std::fmax(max_eta, e);
    PointGrid<2> grid(pts, std::fmax(max_eta, 1e-9));
    for (size_t i = 0; i < pts.size(); ++i) {
        for (double eps : eps_grid) {
            if (!(eps > 0 && eps < 0.5)) throw std::invalid_argument("eta_regular_check: eps in (0,1/2)");
            grid.for_neighbors(pts[i], eps * eta[i], [&](size_t j) {
                if (j == i) return;
                double d = dist(pts[i], pts[j]);
                if (d >= eps * eta[i]) return;
                ++rep.pairs_checked;
                bool upper = (1 - eps) / (1 - 2 * eps) * eta[i] > eta[j] * (1 - slack);
                bool lower = eta[j] > eta[i] - d - slack * eta[i];
                if (!(upper && lower)) {
                    ++rep.violations;
                    if (rep.violating_pairs.size() < 64) rep.violating_pairs.push_back({(int)i, (int)j});
                }
            });
        }
    }
    return rep;
}

/// Ambient extensions of boundary quantities (inf/sup over reaching samples,
/// zero on the empty set):
///   eta_[r](x) = min { eta(q) : |x-q| <  r(q) }
///   M_[r,eta](x) = max { M_{r(q)}(q) : |x-q| <= eta(q) }
struct AmbientFields {
    GridField<double> eta;
    GridField<double> M;
};

inline AmbientFields extend_to_ambient(const std::vector<Vec2>& pts, const std::vector<double>& eta,
                                       const std::vector<double>& reach_r,
                                       const std::vector<double>& M_at_r, const Box<2>& box, double h) {
    if (pts.size() != eta.size() || pts.size() != reach_r.size() || pts.size() != M_at_r.size())
        throw std::invalid_argument("extend_to_ambient: size mismatch");
    AmbientFields out;
    out.eta = GridField<double>::on_box(box, h);
    out.M = GridField<double>::on_box(box, h);
    double max_reach = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        max_reach = std::fmax(max_reach, std::fmax(reach_r[i], eta[i]));
    PointGrid<2> grid(pts, std::fmax(max_reach, h));
    for (int j = 0; j < out.eta.ny; ++j)
        for (int i = 0; i < out.eta.nx; ++i) {
            Vec2 x = out.eta.node(i, j);
            double emin = kInf, mmax = -kInf;
            grid.for_neighbors(x, max_reach, [&](size_t q) {
                double d = dist(x, pts[q]);
                if (d < reach_r[q]) emin = std::fmin(emin, eta[q]);
                if (d <= eta[q]) mmax = std::fmax(mmax, M_at_r[q]);
            });
            out.eta.at(i, j) = emin == kInf ? 0.0 : emin;
            out.M.at(i, j) = mmax == -kInf ? 0.0 : mmax;
        }
    return out;
}

}  // namespace perfodom
