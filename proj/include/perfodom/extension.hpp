#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perfodom/cover.hpp"
#include "perfodom/domains.hpp"
#include "perfodom/grid.hpp"
#include "perfodom/regularity.hpp"
#include "perfodom/voronoi.hpp"

namespace perfodom {

/// Boundary-local orthonormal frame (tangent, outward normal) with the graph
/// function phi over the tangent base, solved from the exact signed distance
/// (or closed-form for the reference domains). P lies below the graph.
struct LocalFrame {
    Vec2 p, tau, nu;  // nu outward
    double delta = 0; // graph validity scale
    double M = 0;     // Lipschitz constant at the working scale
    const Domain* domain = nullptr;
    std::function<double(double)> phi_analytic;  // optional closed form

    static LocalFrame at(const Domain& dom, const Vec2& p, const Vec2& outward, double delta,
                         double M) {
        LocalFrame f;
        f.p = p;
        f.nu = normalized(outward);
        f.tau = v2(f.nu.c[1], -f.nu.c[0]);
        f.delta = delta;
        f.M = M;
        f.domain = &dom;
        return f;
    }

    Vec2 world(double t, double s) const { return p + tau * t + nu * s; }
    std::pair<double, double> coords(const Vec2& x) const {
        Vec2 w = x - p;
        return {dot(w, tau), dot(w, nu)};
    }

    /// Graph height over base offset t, by scan + bisection on the signed
    /// distance along the vertical (single crossing inside the graph ball).
    double phi(double t) const {
        if (phi_analytic) return phi_analytic(t);
        double smax = delta;
        auto g = [&](double s) { return domain->signed_distance(world(t, s)); };
        const int N = 24;
        double prev_s = -smax, prev_g = g(prev_s);
        double best_lo = 0, best_hi = 0;
        bool found = false;
        for (int k = 1; k <= N; ++k) {
            double s = -smax + 2 * smax * k / N;
            double gs = g(s);
            if (prev_g > 0 && gs <= 0) {
                // nearest inside->outside crossing to s = 0 wins
                if (!found || std::abs(prev_s + s) < std::abs(best_lo + best_hi)) {
                    best_lo = prev_s;
                    best_hi = s;
                    found = true;
                }
            }
            prev_s = s;
            prev_g = gs;
        }
        if (!found) throw std::domain_error("LocalFrame::phi: no boundary crossing on vertical");
        double lo = best_lo, hi = best_hi;
        for (int it = 0; it < 52; ++it) {
            double mid = 0.5 * (lo + hi);
            if (g(mid) > 0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    /// Reflection across the graph: (t, s) -> (t, 2 phi(t) - s).
    Vec2 reflect(const Vec2& x) const {
        auto [t, s] = coords(x);
        return world(t, 2 * phi(t) - s);
    }

    bool above_graph(const Vec2& x) const {
        auto [t, s] = coords(x);
        return s > phi(t);
    }
};

/// Reflection extension onto the ball B_rho(p): values below the graph stay,
/// values above come from the reflected point by bilinear interpolation.
inline GridField<double> reflect_extend(const GridField<double>& u, const LocalFrame& frame,
                                        double rho) {
    // snap to the source grid so interior nodes copy exactly
    auto snap = [&](double v, double o) { return o + u.h * std::floor((v - o) / u.h); };
    Vec2 lo = v2(snap(frame.p.c[0] - rho, u.origin.c[0]), snap(frame.p.c[1] - rho, u.origin.c[1]));
    Box<2> box(lo, lo + v2(2 * rho + u.h, 2 * rho + u.h));
    GridField<double> out = GridField<double>::on_box(box, u.h);
    for (int j = 0; j < out.ny; ++j)
        for (int i = 0; i < out.nx; ++i) {
            Vec2 x = out.node(i, j);
            if (dist(x, frame.p) >= rho) {
                out.mask[out.idx(i, j)] = 0;
                continue;
            }
            Vec2 src = frame.above_graph(x) ? frame.reflect(x) : x;
            out.at(i, j) = u.interpolate(src, true);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Nitsche extension (symmetric-gradient preserving)
// ---------------------------------------------------------------------------

/// The unique affine weight on [1,2] with moments (1, 0).
inline double nitsche_psi(double t) { return 28.0 - 18.0 * t; }

/// Regularized distance to P for exterior points: the exact distance
/// mollified by a fixed disk rule of constant width per frame. A constant
/// width keeps the quadrature formula smooth across the ridge lines of the
/// distance function, so its gradient is the exact derivative of the
/// formula and the extension is stable under grid refinement. The Stein
/// factors c1, c2 are measured on the frame, never assumed.
struct RegularizedDistance {
    const Domain* domain;
    double width = 0.01;

    double value(const Vec2& x) const {
        double sum = 0;
        for (int k = 0; k < 12; ++k) sum += base(x + node(k) * width) / 12.0;
        return sum;
    }

    Vec2 gradient(const Vec2& x) const {
        Vec2 sum = v2(0, 0);
        for (int k = 0; k < 12; ++k) sum += base_grad(x + node(k) * width) * (1.0 / 12.0);
        return sum;
    }

  private:
    double base(const Vec2& x) const { return std::fmax(0.0, -domain->signed_distance(x)); }
    Vec2 base_grad(const Vec2& x) const {
        Vec2 q;
        double sd = domain->signed_distance(x, &q);
        if (sd >= 0) return v2(0, 0);
        Vec2 d = x - q;
        double n = norm(d);
        return n > 1e-300 ? d * (1.0 / n) : v2(0, 0);
    }
    static Vec2 node(int k) {
        // two rings of six, radii from the 2-point radial Gauss rule
        double r = k < 6 ? 0.4597008433809831 : 0.8880738339771153;
        double a = 2 * M_PI * ((k % 6) + (k < 6 ? 0.0 : 0.5)) / 6;
        return v2(r * std::cos(a), r * std::sin(a));
    }
};

/// Nitsche pullback extension of a vector field across the local graph:
///   u_i(x) = int psi(l) ( u_i(x_l) + l u_d(x_l) d_i d_PM(x) ) dl,
/// with x_l = x - l d_PM(x) nu and d_PM = 2 c2 sqrt(1+M^2) d_reg. Exact on
/// rigid motions by the moment conditions.
struct NitscheExtender {
    LocalFrame frame;
    RegularizedDistance dreg;
    double c1 = 1.0, c2 = 1.0;  // measured Stein factors (diagnostic)

    static NitscheExtender at(const Domain& dom, const LocalFrame& frame, double work_radius = 0) {
        NitscheExtender ne;
        ne.frame = frame;
        ne.dreg.domain = &dom;
        double rho = work_radius > 0 ? work_radius
                                     : frame.delta / std::sqrt(4 * frame.M * frame.M + 2);
        ne.dreg.width = rho / 8;
        // measure the Stein factors dist / (dreg + width) over the band used
        double lo = kInf, hi = 0;
        for (int kt = 0; kt < 9; ++kt)
            for (int ks = 1; ks <= 8; ++ks) {
                double t = rho * (-1.0 + 2.0 * kt / 8.0);
                double s = rho * 1.2 * ks / 8.0;
                Vec2 x = frame.world(t, frame.phi(t) + s);
                double d = std::fmax(0.0, -dom.signed_distance(x));
                double dr = ne.dreg.value(x) + ne.dreg.width;
                if (dr > 1e-12 && d > 1e-12) {
                    lo = std::fmin(lo, d / dr);
                    hi = std::fmax(hi, d / dr);
                }
            }
        ne.c1 = lo == kInf ? 1.0 : lo;
        ne.c2 = hi == 0 ? 1.0 : hi;
        return ne;
    }

    /// The exact distance is 1-Lipschitz, so dreg + width >= dist pointwise
    /// and the pullbacks always land strictly below the graph.
    double d_pm(const Vec2& x) const {
        return 2 * std::sqrt(1 + frame.M * frame.M) * (dreg.value(x) + dreg.width);
    }

    /// Extended value at exterior x; `sample` evaluates the input field.
    Vec2 extend(const std::function<Vec2(const Vec2&)>& sample, const Vec2& x) const {
        double d = d_pm(x);
        if (!(d > 0)) throw std::domain_error("NitscheExtender: nonpositive regularized distance");
        // the shallowest pullback must land inside P (hard precondition)
        if (!(dreg.domain->signed_distance(x - frame.nu * d) > 0))
            throw std::domain_error("NitscheExtender: pullback outside the defined region");
        Vec2 gd = dreg.gradient(x) * (2 * c2 * std::sqrt(1 + frame.M * frame.M));
        // frame components of the distance gradient
        double g_t = dot(gd, frame.tau), g_n = dot(gd, frame.nu);
        double xs[8], ws[8];
        gauss8(1.0, 2.0, xs, ws);
        double out_t = 0, out_n = 0;
        for (int q = 0; q < 8; ++q) {
            double lam = xs[q], w = ws[q] * nitsche_psi(lam);
            Vec2 xl = x - frame.nu * (lam * d);
            Vec2 ul = sample(xl);
            double ut = dot(ul, frame.tau), un = dot(ul, frame.nu);
            out_t += w * (ut + lam * un * g_t);
            out_n += w * (un + lam * un * g_n);
        }
        return frame.tau * out_t + frame.nu * out_n;
    }
};

// ---------------------------------------------------------------------------
// Averages
// ---------------------------------------------------------------------------

/// Mean of the interpolated field over a disk (works at any radius).
inline double quad_ball_mean(const GridField<double>& u, const Vec2& c, double r) {
    return disk_average_quadrature<double>([&](const Vec2& x) { return u.interpolate(x, true); }, c,
                                           r);
}

inline Vec2 quad_ball_mean(const GridField<Vec2>& u, const Vec2& c, double r) {
    return disk_average_quadrature<Vec2>([&](const Vec2& x) { return u.interpolate(x, true); }, c, r);
}

/// Affine map b + W (x - base) with antisymmetric W: the skew-corrected ball
/// average of a vector field.
struct AffineAverage {
    Vec2 base{};
    Vec2 value{};
    Mat2 skew{};

    Vec2 operator()(const Vec2& x) const { return value + skew * (x - base); }
};

/// M^s / tau^s: antisymmetric part of the averaged Jacobian plus the mean.
inline AffineAverage skew_average(const GridField<Vec2>& u, const Vec2& c, double r) {
    AffineAverage a;
    a.base = c;
    a.value = disk_average_quadrature<Vec2>([&](const Vec2& x) { return u.interpolate(x, true); }, c, r);
    Mat2 J = disk_average_quadrature<Mat2>([&](const Vec2& x) { return interp_jacobian(u, x); }, c, r);
    a.skew = J.skew();
    return a;
}

/// skew_average applied to an affine map reproduces it exactly (the
/// permutation identity tau^s M^s u = M^s u).
inline AffineAverage skew_average(const AffineAverage& v, const Vec2& c, double /*r*/) {
    AffineAverage a;
    a.base = c;
    a.value = v(c);
    a.skew = v.skew;
    return a;
}

// ---------------------------------------------------------------------------
// Convex splitting (zero-sum weights into pairwise differences)
// ---------------------------------------------------------------------------

struct ConvexSplitTerm {
    int i, j;
    double coeff;  // alpha_i |alpha_j| / alpha_plus
};

/// For sum alpha_i = 0: sum_i alpha_i u_i = sum_{i+} sum_{j-} coeff (u_i - u_j).
inline std::vector<ConvexSplitTerm> convex_split(const std::vector<double>& alpha) {
    double sum = 0, plus = 0;
    for (double a : alpha) {
        sum += a;
        if (a > 0) plus += a;
    }
    if (std::abs(sum) > 1e-12) throw std::invalid_argument("convex_split: weights must sum to zero");
    std::vector<ConvexSplitTerm> terms;
    if (plus <= 0) return terms;
    for (size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] > 0)) continue;
        for (size_t j = 0; j < alpha.size(); ++j) {
            if (!(alpha[j] < 0)) continue;
            terms.push_back({(int)i, (int)j, alpha[i] * std::abs(alpha[j]) / plus});
        }
    }
    return terms;
}

inline double convex_split_apply(const std::vector<ConvexSplitTerm>& terms,
                                 const std::vector<double>& values) {
    double s = 0;
    for (const auto& t : terms) s += t.coeff * (values[t.i] - values[t.j]);
    return s;
}

// ---------------------------------------------------------------------------
// Assembled extension operator
// ---------------------------------------------------------------------------

enum class ExtensionMode { gradient, symmetric };

struct ExtensionSetup {
    const Domain* domain;
    const BoundaryCover* cover;
    const MesoPartition* meso;
    const MicroPartition* micro;
    std::vector<LocalFrame> frames;        // one per cover ball
    std::vector<NitscheExtender> nitsche;  // symmetric mode only
    ExtensionMode mode;

    static ExtensionSetup build(const Domain& dom, const BoundaryCover& cover,
                                const MesoPartition& meso, const MicroPartition& micro,
                                ExtensionMode mode) {
        ExtensionSetup s{&dom, &cover, &meso, &micro, {}, {}, mode};
        s.frames.reserve(cover.size());
        for (size_t i = 0; i < cover.size(); ++i) {
            double M = cover.M_rho[i];
            s.frames.push_back(
                LocalFrame::at(dom, cover.centers[i], cover.normals[i], cover.delta[i], M));
            if (mode == ExtensionMode::symmetric)
                s.nitsche.push_back(NitscheExtender::at(dom, s.frames.back(), cover.radius[i]));
        }
        return s;
    }
};

/// Scalar (gradient mode) assembly:
///   on P: u; off P: sum_a Phi_a ( sum_{i!=0} phi_i (U_i(u - tau_i u) + tau_i u
///   - M_a u) + M_a u ), where the i = 0 weight falls to the cell average.
inline GridField<double> assemble_extension(const GridField<double>& u, const ExtensionSetup& setup,
                                            const Box<2>& out_box) {
    if (setup.mode != ExtensionMode::gradient)
        throw std::invalid_argument("assemble_extension: scalar field needs gradient mode");
    const Domain& dom = *setup.domain;
    const BoundaryCover& cover = *setup.cover;
    const Tessellation& tess = setup.meso->tessellation();

    GridField<double> out = GridField<double>::on_box(out_box, u.h);
    // cell averages M_a u = mean over B_{r/16}(x_a)
    double ra = setup.meso->r() / 16;
    std::vector<std::optional<double>> cell_avg(tess.size());
    auto get_cell_avg = [&](int a) -> double {
        if (!cell_avg[a]) {
            const Vec2& xa = tess.sites.points[a];
            cell_avg[a] = quad_ball_mean(u, xa, ra);
        }
        return *cell_avg[a];
    };

    for (int j = 0; j < out.ny; ++j)
        for (int i = 0; i < out.nx; ++i) {
            Vec2 x = out.node(i, j);
            if (dom.contains(x)) {
                out.at(i, j) = u.interpolate(x, true);
                continue;
            }
            auto micro_terms = setup.micro->eval(x);
            auto meso_terms = setup.meso->eval(x);
            // local extended values per covering ball reaching x
            double local_sum = 0;   // sum_i phi_i * (U_i(u - tau_i u) + tau_i u)
            double phi_cover = 0;   // sum_{i != 0} phi_i
            for (const auto& mt : micro_terms) {
                if (mt.index < 0 || mt.weight <= 0) continue;
                const LocalFrame& fr = setup.frames[mt.index];
                // U_i(u - tau_i u) + tau_i u = u o reflect_i: constants cancel
                Vec2 src = fr.above_graph(x) ? fr.reflect(x) : x;
                local_sum += mt.weight * u.interpolate(src, true);
                phi_cover += mt.weight;
            }
            double val = 0;
            for (const auto& ms : meso_terms) {
                if (ms.weight <= 0) continue;
                double Ma = get_cell_avg(ms.site);
                val += ms.weight * (local_sum + (1 - phi_cover) * Ma);
            }
            out.at(i, j) = val;
        }
    return out;
}

/// Vector (symmetric mode) assembly with tau^s / M^s and Nitsche local
/// extensions.
inline GridField<Vec2> assemble_extension_sym(const GridField<Vec2>& u, const ExtensionSetup& setup,
                                              const Box<2>& out_box) {
    if (setup.mode != ExtensionMode::symmetric)
        throw std::invalid_argument("assemble_extension_sym: needs symmetric mode");
    const Domain& dom = *setup.domain;
    const BoundaryCover& cover = *setup.cover;
    const Tessellation& tess = setup.meso->tessellation();

    GridField<Vec2> out = GridField<Vec2>::on_box(out_box, u.h);
    double ra = setup.meso->r() / 16;
    std::vector<std::optional<AffineAverage>> cell_avg(tess.size());
    auto get_cell_avg = [&](int a) -> const AffineAverage& {
        if (!cell_avg[a]) cell_avg[a] = skew_average(u, tess.sites.points[a], ra);
        return *cell_avg[a];
    };
    std::vector<std::optional<AffineAverage>> tau_cache(cover.size());
    auto get_tau = [&](int i) -> const AffineAverage& {
        if (!tau_cache[i]) tau_cache[i] = skew_average(u, cover.inner_center[i], cover.inner_radius[i]);
        return *tau_cache[i];
    };

    for (int j = 0; j < out.ny; ++j)
        for (int i = 0; i < out.nx; ++i) {
            Vec2 x = out.node(i, j);
            if (dom.contains(x)) {
                out.at(i, j) = u.interpolate(x, true);
                continue;
            }
            auto micro_terms = setup.micro->eval(x);
            auto meso_terms = setup.meso->eval(x);
            Vec2 local_sum = v2(0, 0);
            double phi_cover = 0;
            for (const auto& mt : micro_terms) {
                if (mt.index < 0 || mt.weight <= 0) continue;
                const AffineAverage& tau = get_tau(mt.index);
                const NitscheExtender& ne = setup.nitsche[mt.index];
                Vec2 ext = ne.extend(
                    [&](const Vec2& y) { return u.interpolate(y, true) - tau(y); }, x);
                local_sum += (ext + tau(x)) * mt.weight;
                phi_cover += mt.weight;
            }
            Vec2 val = v2(0, 0);
            for (const auto& ms : meso_terms) {
                if (ms.weight <= 0) continue;
                const AffineAverage& Ma = get_cell_avg(ms.site);
                val += (local_sum + Ma(x) * (1 - phi_cover)) * ms.weight;
            }
            out.at(i, j) = val;
        }
    return out;
}

}  // namespace perfodom
