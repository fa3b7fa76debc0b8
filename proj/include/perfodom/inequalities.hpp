#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "perfodom/cover.hpp"
#include "perfodom/extension.hpp"
#include "perfodom/grid.hpp"
#include "perfodom/regularity.hpp"
#include "perfodom/rng.hpp"

namespace perfodom {

// ---------------------------------------------------------------------------
// Random test fields: truncated trigonometric series with configurable
// smoothness decay, plus affine and bump atoms.
// ---------------------------------------------------------------------------

class FieldSampler {
  public:
    uint64_t seed = 1;
    int n_modes = 8;
    double kmax = 6.0;
    double smoothness = 1.0;
    bool with_affine = true;
    bool with_bumps = true;
    double domain_scale = 1.0;  // bump placement scale

    std::function<double(const Vec2&)> scalar(uint64_t index) const {
        auto modes = make_modes(index, 0);
        return [modes](const Vec2& x) { return eval_modes(modes, x); };
    }

    std::function<Vec2(const Vec2&)> vector(uint64_t index) const {
        auto m1 = make_modes(index, 1);
        auto m2 = make_modes(index, 2);
        return [m1, m2](const Vec2& x) { return v2(eval_modes(m1, x), eval_modes(m2, x)); };
    }

  private:
    struct Atom {
        int kind;  // 0 trig, 1 affine, 2 bump
        double a[6];
    };

    std::vector<Atom> make_modes(uint64_t index, uint64_t comp) const {
        Rng rng(seed ^ 0x5bf03635u, (index << 2) | comp);
        std::vector<Atom> atoms;
        for (int i = 0; i < n_modes; ++i) {
            Atom t{0, {}};
            double k1 = rng.uniform(-kmax, kmax), k2 = rng.uniform(-kmax, kmax);
            t.a[0] = rng.normal() / std::pow(1.0 + std::hypot(k1, k2), smoothness);
            t.a[1] = k1;
            t.a[2] = k2;
            t.a[3] = rng.uniform(0, 2 * M_PI);
            atoms.push_back(t);
        }
        if (with_affine) {
            Atom t{1, {}};
            t.a[0] = 0.3 * rng.normal();
            t.a[1] = 0.3 * rng.normal();
            t.a[2] = 0.3 * rng.normal();
            atoms.push_back(t);
        }
        if (with_bumps) {
            Atom t{2, {}};
            t.a[0] = rng.normal();
            t.a[1] = rng.uniform(-0.5, 0.5) * domain_scale;
            t.a[2] = rng.uniform(-0.5, 0.5) * domain_scale;
            t.a[3] = rng.uniform(0.1, 0.4) * domain_scale;
            atoms.push_back(t);
        }
        return atoms;
    }

    static double eval_modes(const std::vector<Atom>& atoms, const Vec2& x) {
        double s = 0;
        for (const Atom& t : atoms) {
            if (t.kind == 0)
                s += t.a[0] * std::cos(t.a[1] * x.c[0] + t.a[2] * x.c[1] + t.a[3]);
            else if (t.kind == 1)
                s += t.a[0] + t.a[1] * x.c[0] + t.a[2] * x.c[1];
            else {
                double d2 = norm2(x - v2(t.a[1], t.a[2]));
                s += t.a[0] * std::exp(-d2 / (2 * t.a[3] * t.a[3]));
            }
        }
        return s;
    }
};

/// Smooth cutoff equal to 1 deep inside the box and 0 on its boundary.
inline std::function<double(const Vec2&)> box_cutoff(const Box<2>& box, double width) {
    SmoothStep step;
    return [box, width, step](const Vec2& x) {
        double d = kInf;
        for (int i = 0; i < 2; ++i) {
            d = std::fmin(d, x.c[i] - box.lo.c[i]);
            d = std::fmin(d, box.hi.c[i] - x.c[i]);
        }
        if (d <= 0) return 0.0;
        return step(1.0 - d / width);
    };
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct TrialRow {
    double lhs = 0, rhs = 0, ratio = 0;
};

struct InequalityReport {
    std::string id;
    std::map<std::string, double> params;
    std::vector<TrialRow> trials;
    std::vector<std::string> flags;

    double max_ratio() const {
        double m = 0;
        for (const auto& t : trials) m = std::fmax(m, t.ratio);
        return m;
    }
    /// Fitted constant: max observed ratio, safety factor 1.
    double fitted_constant() const { return max_ratio(); }

    void add(double lhs, double rhs) {
        TrialRow row{lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
        trials.push_back(row);
    }
};

// ---------------------------------------------------------------------------
// Poincare trials
// ---------------------------------------------------------------------------

/// || u ||_p^p(B_R)  vs  R^p (R/r)^{d-1} || grad u ||^p + (R/r)^d || u ||^p(B_r(x)).
inline TrialRow poincare_ball_trial(double R, double r, const Vec2& xc,
                                    const std::function<double(const Vec2&)>& usample, double p,
                                    double h) {
    if (!(r > 0 && r < R)) throw std::invalid_argument("poincare_ball_trial: need 0 < r < R");
    if (dist(xc, v2(0, 0)) + r > R) throw std::invalid_argument("poincare_ball_trial: B_r(x) not in B_R");
    if (h > r / 3) throw std::invalid_argument("poincare_ball_trial: grid below resolution floor");
    auto f = GridField<double>::on_box(Box<2>::centered(2 * R), h);
    f.mask_by([&](const Vec2& y) { return norm(y) < R; });
    f.fill(usample);
    auto g = gradient(f);
    double lhs = lp_norm_p(f, p);
    double grad_term = std::pow(R, p) * std::pow(R / r, 1.0) * lp_norm_p(g, p);
    double ball_term = std::pow(R / r, 2.0) *
                       lp_norm_p(f, p, [&](int i, int j) { return dist(f.node(i, j), xc) < r; });
    TrialRow row{lhs, grad_term + ball_term, lhs / (grad_term + ball_term)};
    return row;
}

/// Zero-average variant: || u ||_p^p <= C R^p (r/R)^{1-d} (1 + (r/R)^{p-1}) || grad u ||^p.
inline TrialRow poincare_ball_zero_trial(double R, double r, const Vec2& xc,
                                         const std::function<double(const Vec2&)>& usample, double p,
                                         double h) {
    auto f = GridField<double>::on_box(Box<2>::centered(2 * R), h);
    f.mask_by([&](const Vec2& y) { return norm(y) < R; });
    f.fill(usample);
    // subtract the ball average so that the mean over B_r(x) vanishes
    double mean = ball_average(f, xc, r);
    for (size_t k = 0; k < f.values.size(); ++k)
        if (f.mask[k]) f.values[k] -= mean;
    auto g = gradient(f);
    double lhs = lp_norm_p(f, p);
    double rhs = std::pow(R, p) * std::pow(r / R, -1.0) * (1 + std::pow(r / R, p - 1)) * lp_norm_p(g, p);
    return {lhs, rhs, rhs > 0 ? lhs / rhs : 0.0};
}

struct CylinderTrial {
    TrialRow plain;     // eq. with the ball value term
    TrialRow zero_avg;  // zero average over B_r(x)
    TrialRow avg_diff;  // average difference across the cylinder
};

/// P_{L,r} = (0,L) x (-r,r); balls at both ends.
inline CylinderTrial poincare_cylinder_trial(double L, double r,
                                             const std::function<double(const Vec2&)>& usample,
                                             double p, double h) {
    if (!(r < L)) throw std::invalid_argument("poincare_cylinder_trial: need r < L");
    Box<2> box(v2(0, -r), v2(L, r));
    auto f = GridField<double>::on_box(box, h);
    f.fill(usample);
    Vec2 xa = v2(r, 0), xb = v2(L - r, 0);
    auto g = gradient(f);
    double up = lp_norm_p(f, p);
    double gp = lp_norm_p(g, p);
    CylinderTrial out;
    {
        double ball = lp_norm_p(f, p, [&](int i, int j) { return dist(f.node(i, j), xa) < r; });
        double rhs = std::pow(L, p) * gp + (L / r) * ball;
        out.plain = {up, rhs, rhs > 0 ? up / rhs : 0.0};
    }
    {
        auto f0 = f;
        double mean = ball_average(f, xa, r);
        for (size_t k = 0; k < f0.values.size(); ++k)
            if (f0.mask[k]) f0.values[k] -= mean;
        double lhs0 = lp_norm_p(f0, p);
        double gball = lp_norm_p(g, p, [&](int i, int j) { return dist(f.node(i, j), xa) < r; });
        double rhs = std::pow(L, p) * gp + L * std::pow(r, p - 1) * gball;
        out.zero_avg = {lhs0, rhs, rhs > 0 ? lhs0 / rhs : 0.0};
    }
    {
        double da = ball_average(f, xa, r), db = ball_average(f, xb, r);
        double lhs = std::pow(std::abs(db - da), p);
        double rhs = std::pow(L, p - 1) * std::pow(r, -1.0) * gp;
        out.avg_diff = {lhs, rhs, rhs > 0 ? lhs / rhs : 0.0};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Korn trials
// ---------------------------------------------------------------------------

enum class KornVariant {
    scaled_ball,        // |grad u| <= (|A|/r^d)^{1/p} (|grad^s u| + |grad u|_{B_r})
    zero_skew_ball,     // after skew normalization: (|A|/(S r^d))^{1/p} |grad^s u|
    korn_poincare_ball, // (R/r)^d |grad^s u|^p, zero mean and skew
    cylinder,           // (L/r)^p |grad^s|^p + (L/r) |grad u|^p_{B_r}
    cylinder_transport  // M^s average transport (probe form)
};

struct KornConfig {
    KornVariant variant = KornVariant::scaled_ball;
    double R = 1.0, r = 0.25, L = 4.0, delta = 0.2;
    double p = 2.0;
    double h = 1.0 / 64;
    Vec2 probe = v2(0.5, 0);
};

/// One Korn-type trial; rigid-motion input in raw variants is rejected
/// (zero RHS) unless the normalization makes LHS vanish too.
inline TrialRow korn_trial(const KornConfig& cfg, const std::function<Vec2(const Vec2&)>& usample) {
    const double p = cfg.p;
    if (cfg.variant == KornVariant::cylinder || cfg.variant == KornVariant::cylinder_transport) {
        Box<2> box(v2(0, -cfg.r), v2(cfg.L, cfg.r));
        auto f = GridField<Vec2>::on_box(box, cfg.h);
        f.fill(usample);
        auto J = jacobian(f);
        if (cfg.variant == KornVariant::cylinder) {
            Vec2 xa = v2(cfg.r, 0);
            double lhs = lp_norm_p(J, p);
            double sym = 0, ball = 0;
            double w = cfg.h * cfg.h;
            for (int j = 0; j < J.ny; ++j)
                for (int i = 0; i < J.nx; ++i) {
                    if (!J.on(i, j)) continue;
                    sym += w * std::pow(J.at(i, j).sym().frobenius2(), p / 2);
                    if (dist(J.node(i, j), xa) < cfg.r)
                        ball += w * std::pow(J.at(i, j).frobenius2(), p / 2);
                }
            double rhs = std::pow(cfg.L / cfg.r, p) * sym + (cfg.L / cfg.r) * ball;
            return {lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
        }
        // transport: |M^s_a u(x) - M^s_b u(x)|^p vs C |x-a|^p |a-b|^{2p}/delta^{p+d} * int |grad^s|^p
        Vec2 a = v2(cfg.delta, 0), b = v2(cfg.L - cfg.delta, 0);
        auto Ma = skew_average(f, a, cfg.delta);
        auto Mb = skew_average(f, b, cfg.delta);
        Vec2 x = cfg.probe;
        double lhs = std::pow(norm(Ma(x) - Mb(x)), p);
        double sym = 0;
        double w = cfg.h * cfg.h;
        for (int j = 0; j < J.ny; ++j)
            for (int i = 0; i < J.nx; ++i) {
                if (!J.on(i, j)) continue;
                // convex hull of the two balls within the cylinder
                sym += w * std::pow(J.at(i, j).sym().frobenius2(), p / 2);
            }
        double rhs = std::pow(norm(x - a), p) * std::pow(dist(a, b), 2 * p) /
                     std::pow(cfg.delta, p + 2) * sym;
        return {lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
    }
    // ball domains
    auto f = GridField<Vec2>::on_box(Box<2>::centered(2 * cfg.R), cfg.h);
    f.mask_by([&](const Vec2& y) { return norm(y) < cfg.R; });
    f.fill(usample);
    Vec2 xc = cfg.probe;
    if (cfg.variant != KornVariant::scaled_ball) {
        // subtract the skew-mean rigid motion on B_r(x): kernel exactness
        auto aff = skew_average(f, xc, cfg.r);
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i)
                if (f.on(i, j)) f.at(i, j) = f.at(i, j) - aff(f.node(i, j));
    }
    auto J = jacobian(f);
    double grad = lp_norm_p(J, p);
    double sym = 0, ball = 0;
    double w = cfg.h * cfg.h;
    for (int j = 0; j < J.ny; ++j)
        for (int i = 0; i < J.nx; ++i) {
            if (!J.on(i, j)) continue;
            sym += w * std::pow(J.at(i, j).sym().frobenius2(), p / 2);
            if (dist(J.node(i, j), xc) < cfg.r) ball += w * std::pow(J.at(i, j).frobenius2(), p / 2);
        }
    double area = M_PI * cfg.R * cfg.R;
    if (cfg.variant == KornVariant::scaled_ball) {
        double factor = std::pow(area / std::pow(cfg.r, 2.0), 1.0 / p);
        double rhs = factor * (std::pow(sym, 1.0 / p) + std::pow(ball, 1.0 / p));
        double lhs = std::pow(grad, 1.0 / p);
        return {lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
    }
    if (cfg.variant == KornVariant::zero_skew_ball) {
        double factor = std::pow(area / (2 * M_PI * cfg.r * cfg.r), 1.0 / p);
        double rhs = factor * std::pow(sym, 1.0 / p);
        double lhs = std::pow(grad, 1.0 / p);
        return {lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
    }
    // korn_poincare_ball
    double rhs = std::pow(cfg.R / cfg.r, 2.0) * sym;
    return {grad, rhs, rhs > 0 ? grad / rhs : (grad == 0 ? 0.0 : kInf)};
}

// ---------------------------------------------------------------------------
// Trace trial
// ---------------------------------------------------------------------------

struct TraceConfig {
    double p = 4.0;
    double r_exp = 2.0;  // trace norm exponent, r < p0 < p
    double h = 0.02;
    double boundary_gap = 0.02;
    double hat_d = 1.0;  // overlap exponent, d-1 by default
};

struct TraceResult {
    TrialRow row;
    double boundary_norm = 0;  // (sum w |u|^r)^{1/r}
    double constant_part = 0;  // the profile-assembled constant C
};

/// Discrete boundary norm (arclength-weighted nearest-node sampling) against
/// the profile-assembled right-hand side of the trace theorem.
inline TraceResult trace_trial(const Domain& dom, const BoundaryProbe& probe,
                               const RegularityProfile& prof, const Box<2>& Q,
                               const std::function<double(const Vec2&)>& usample,
                               const TraceConfig& cfg) {
    if (!prof.has_rho) throw std::invalid_argument("trace_trial: profile needs rho quantities");
    double p = cfg.p, r = cfg.r_exp;
    if (!(r < p)) throw std::invalid_argument("trace_trial: need r < p");
    double p0 = 0.5 * (r + p);
    double rfrak = prof.opt.r_frak;

    auto f = GridField<double>::on_box(Q.padded(rfrak / 4), cfg.h);
    f.mask_by([&](const Vec2& x) { return dom.contains(x); });
    f.fill(usample);
    auto g = gradient(f);

    // LHS: arclength-weighted boundary norm over Q (nearest node values)
    double lhs = 0;
    auto bsamples = dom.boundary_samples(cfg.boundary_gap);
    double min_rho = kInf;
    for (const auto& s : bsamples) {
        if (!Q.contains(s.point)) continue;
        int i = (int)std::llround((s.point.c[0] - f.origin.c[0]) / f.h);
        int j = (int)std::llround((s.point.c[1] - f.origin.c[1]) / f.h);
        // nearest defined node
        double best = kInf, val = 0;
        for (int dj = -2; dj <= 2; ++dj)
            for (int di = -2; di <= 2; ++di) {
                if (!f.on(i + di, j + dj)) continue;
                double d = dist(f.node(i + di, j + dj), s.point);
                if (d < best) {
                    best = d;
                    val = f.at(i + di, j + dj);
                }
            }
        if (best == kInf) continue;
        lhs += s.local_gap * std::pow(std::abs(val), r);
    }
    lhs /= Q.volume();

    // constant from the profile: boundary integral of rho~^{-1/(p0-r)} and
    // volume integral of (1 + M_[delta/32])^{(1/p0+1+hat_d) p/(p-p0)}
    double cb = 0;
    for (size_t i = 0; i < prof.samples.size(); ++i) {
        const auto& s = prof.samples[i];
        if (!Q.padded(rfrak / 4).contains(s.point)) continue;
        double rho_t = prof.rho_tilde(i, 1);
        min_rho = std::fmin(min_rho, rho_t);
        cb += s.local_gap * std::pow(rho_t, -1.0 / (p0 - r));
    }
    cb = std::pow(cb / Q.volume(), (p0 - r) / p0);
    if (cfg.boundary_gap > 8 * min_rho)
        throw std::runtime_error("trace_trial: boundary sampling too coarse for min rho~");
    // ambient M field with reach delta/32
    std::vector<Vec2> pts;
    std::vector<double> eta, reach, Mv;
    for (size_t i = 0; i < prof.samples.size(); ++i) {
        pts.push_back(prof.samples[i].point);
        double d32 = prof.delta[i] / 32;
        eta.push_back(d32);
        reach.push_back(d32);
        Mv.push_back(probe.M_r(prof.samples[i].point, prof.samples[i].normal, d32, prof.opt));
    }
    auto fields = extend_to_ambient(pts, eta, reach, Mv, Q.padded(rfrak / 4), cfg.h);
    double cv = 0;
    double wq = cfg.h * cfg.h;
    for (int j = 0; j < fields.M.ny; ++j)
        for (int i = 0; i < fields.M.nx; ++i) {
            Vec2 x = fields.M.node(i, j);
            if (!dom.contains(x)) continue;
            double ex = (1.0 / p0 + 1 + cfg.hat_d) * p / (p - p0);
            cv += wq * std::pow(1 + fields.M.at(i, j), ex);
        }
    cv = std::pow(cv / Q.volume(), (p - p0) / (p0 * p));
    double C = cb * cv;

    double vol = 0;
    double w = cfg.h * cfg.h;
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            if (!f.on(i, j)) continue;
            double gv = g.on(i, j) ? norm2(g.at(i, j)) : 0.0;
            vol += w * (std::pow(std::abs(f.at(i, j)), p) + std::pow(gv, p / 2));
        }
    double rhs = C * std::pow(vol / Q.volume(), r / p);
    TraceResult res;
    res.boundary_norm = std::pow(lhs * Q.volume(), 1.0 / r);
    res.constant_part = C;
    res.row = {lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
    return res;
}

// ---------------------------------------------------------------------------
// Assembled extension estimate trials
// ---------------------------------------------------------------------------

struct ExtensionTrialConfig {
    double p = 4.0;
    double r = 2.0;
    double h = 0.025;
    int cover_K = 3;
    double boundary_gap = 0.01;
    double refine_floor = 1e-3;
    double support_beta = 0.5;
    bool check_support = true;
};

struct ExtensionTrialResult {
    TrialRow row;
    bool support_contained = false;
    double support_radius = 0;  // m^{1-beta}
    std::vector<std::string> flags;
};

/// Thm-style ratio for the pipe model on the window m Q:
///   (avg_{mQ} |grad U u|^r) / ( (1/m^d) int_{P cap B_r(mQ)} |grad u|^p )^{r/p}.
inline ExtensionTrialResult pipe_extension_trial(const PipeParams& params, const Box<2>& Q, int m,
                                                 uint64_t seed, uint64_t replica,
                                                 const FieldSampler& sampler,
                                                 const ExtensionTrialConfig& cfg) {
    Box<2> mQ = Q.scaled(m);
    double support_radius = std::pow((double)m, 1.0 - cfg.support_beta);
    Box<2> outbox = cfg.check_support ? mQ.padded(support_radius + 2 * params.r_frak) : mQ;
    Box<2> genbox = outbox.padded(params.r_frak);

    auto net = pipe_build(genbox, params, seed, replica);
    auto samples = net.domain.boundary_samples(cfg.boundary_gap, cfg.refine_floor);
    BoundaryProbe probe(samples);
    RegularityOptions ro;
    ro.r_frak = params.r_frak;
    ro.delta_floor = cfg.refine_floor / 2;
    auto prof = build_profile(probe, ro, false);
    CoverOptions copt;
    copt.K = cfg.cover_K;
    copt.eta_floor = 4 * cfg.refine_floor;
    auto cover = build_cover(net.domain, probe, prof, 0, 0.0, copt);
    MesoPartition meso(net.tess, params.r_frak);
    MicroPartition micro(net.domain, cover);
    auto setup = ExtensionSetup::build(net.domain, cover, meso, micro, ExtensionMode::gradient);

    auto u = GridField<double>::on_box(genbox.padded(net.pad), cfg.h);
    u.mask_by([&](const Vec2& x) { return net.domain.contains(x); });
    auto base = sampler.scalar(replica);
    auto cut = box_cutoff(mQ, 0.25 * std::fmin(Q.side(0), Q.side(1)));
    u.fill([&](const Vec2& x) { return base(x) * cut(x); });

    auto ext = assemble_extension(u, setup, outbox);
    auto gext = gradient(ext);
    auto gu = gradient(u);

    double r = cfg.r, p = cfg.p;
    double lhs = lp_norm_p(gext, r, [&](int i, int j) { return mQ.contains(gext.node(i, j)); }) /
                 mQ.volume();
    Box<2> rhs_box = mQ.padded(params.r_frak);
    double rhs_int = lp_norm_p(gu, p, [&](int i, int j) { return rhs_box.contains(gu.node(i, j)); });
    double md = std::pow((double)m, 2.0);
    double rhs = std::pow(rhs_int / md, r / p);

    ExtensionTrialResult res;
    res.row = {lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
    res.support_radius = support_radius;
    if (cfg.check_support) {
        double tol = 1e-9;
        double peak = 0;
        for (size_t k = 0; k < ext.values.size(); ++k) peak = std::fmax(peak, std::abs(ext.values[k]));
        res.support_contained = true;
        for (int j = 0; j < ext.ny && res.support_contained; ++j)
            for (int i = 0; i < ext.nx; ++i) {
                if (std::abs(ext.at(i, j)) <= tol * (1 + peak)) continue;
                Vec2 x = ext.node(i, j);
                double dx = 0;
                for (int ax = 0; ax < 2; ++ax) {
                    double lo = mQ.lo.c[ax] - x.c[ax], hi = x.c[ax] - mQ.hi.c[ax];
                    dx = std::fmax(dx, std::fmax(lo, hi));
                }
                if (dx > support_radius) {
                    res.support_contained = false;
                    break;
                }
            }
    }
    return res;
}

/// Boolean union, symmetric mode; flags the excluded regime r >= (d+2)/2.
inline ExtensionTrialResult boolean_extension_trial(double lambda, const Box<2>& Q, int m,
                                                    uint64_t seed, uint64_t replica,
                                                    const FieldSampler& sampler,
                                                    const ExtensionTrialConfig& cfg) {
    ExtensionTrialResult res;
    if (cfg.r >= 2.0) res.flags.push_back("excluded-regime: r >= (d+2)/2 = 2 in d = 2");
    Box<2> mQ = Q.scaled(m);
    Box<2> outbox = mQ;
    Box<2> genbox = outbox.padded(1.0);
    auto model = boolean_build(genbox, lambda, seed, replica);
    const Domain& dom = model.domain_largest;
    double rfrak = 0.25;
    auto samples = dom.boundary_samples(cfg.boundary_gap, cfg.refine_floor);
    BoundaryProbe probe(samples);
    RegularityOptions ro;
    ro.r_frak = rfrak;
    ro.delta_floor = cfg.refine_floor / 2;
    auto prof = build_profile(probe, ro, false);
    CoverOptions copt;
    copt.K = cfg.cover_K;
    copt.eta_floor = 4 * cfg.refine_floor;
    auto cover = build_cover(dom, probe, prof, 0, 0.0, copt);
    // lattice process inside the percolating component for the tessellation
    auto inner = [&](const Vec2& z, double r) { return inner_hull(dom, r, z); };
    auto lat = lattice_process<2>(inner, rfrak, genbox);
    if (lat.size() < 3) throw std::runtime_error("boolean_extension_trial: percolation cluster too small");
    auto tess = build_voronoi(lat, 2 * rfrak);
    MesoPartition meso(tess, rfrak);
    MicroPartition micro(dom, cover);
    auto setup = ExtensionSetup::build(dom, cover, meso, micro, ExtensionMode::symmetric);

    auto u = GridField<Vec2>::on_box(genbox.padded(1.0), cfg.h);
    u.mask_by([&](const Vec2& x) { return dom.contains(x); });
    auto base = sampler.vector(replica);
    auto cut = box_cutoff(mQ, 0.25 * std::fmin(Q.side(0), Q.side(1)));
    u.fill([&](const Vec2& x) { return base(x) * cut(x); });

    auto ext = assemble_extension_sym(u, setup, outbox);
    auto Jext = jacobian(ext);
    auto Ju = jacobian(u);
    double r = cfg.r, p = cfg.p;
    double w = cfg.h * cfg.h;
    double lhs = 0;
    for (int j = 0; j < Jext.ny; ++j)
        for (int i = 0; i < Jext.nx; ++i)
            if (Jext.on(i, j) && mQ.contains(Jext.node(i, j)))
                lhs += w * std::pow(Jext.at(i, j).sym().frobenius2(), r / 2);
    lhs /= mQ.volume();
    Box<2> rhs_box = mQ.padded(rfrak);
    double rhs_int = 0;
    for (int j = 0; j < Ju.ny; ++j)
        for (int i = 0; i < Ju.nx; ++i)
            if (Ju.on(i, j) && rhs_box.contains(Ju.node(i, j)))
                rhs_int += w * std::pow(Ju.at(i, j).sym().frobenius2(), p / 2);
    double rhs = std::pow(rhs_int / std::pow((double)m, 2.0), r / p);
    res.row = {lhs, rhs, rhs > 0 ? lhs / rhs : (lhs == 0 ? 0.0 : kInf)};
    return res;
}

}  // namespace perfodom
