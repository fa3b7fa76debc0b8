#include <gtest/gtest.h>

#include <cmath>

#include "perfodom/regularity.hpp"
#include "perfodom/rng.hpp"

using namespace perfodom;

namespace {

RegularityOptions opts(double rfrak, double floor_ = 1e-3) {
    RegularityOptions o;
    o.r_frak = rfrak;
    o.delta_floor = floor_;
    return o;
}

}  // namespace

TEST(Lipschitz, HalfPlaneIsFlat) {
    Box<2> w = Box<2>::cube(-2, 2);
    Domain hp = make_halfplane(w);
    BoundaryProbe probe(hp.boundary_samples(0.01));
    for (double r : {0.05, 0.2, 0.8})
        EXPECT_NEAR(probe.lipschitz_constant(v2(0.25, 0), v2(0, 1), r), 0.0, 1e-12);
}

TEST(Lipschitz, WedgeSlopeAtApex) {
    for (double m : {0.5, 1.0, 2.0}) {
        Domain wd = make_wedge(m, Box<2>::cube(-2, 2));
        BoundaryProbe probe(wd.boundary_samples(0.005));
        double M = probe.lipschitz_constant(v2(0, 0), v2(0, 1), 0.3);
        EXPECT_NEAR(M, m, 0.02 * m);
    }
}

TEST(Lipschitz, BooleanLensFormula) {
    // two unit circles, centers 2x apart: at the lens vertex M = x/sqrt(1-x^2)
    for (double x : {0.5, 0.7, 0.9}) {
        auto su = std::make_shared<SolidUnion>();
        su->add_disk(v2(0, 0), 1.0);
        su->add_disk(v2(2 * x, 0), 1.0);
        su->build();
        Domain dom(DomainTag::boolean_union, su, Box<2>::cube(-3, 3), false);
        BoundaryProbe probe(dom.boundary_samples(0.01, 1e-5));
        double y = std::sqrt(1 - x * x);
        double want = x / y;
        double M = probe.lipschitz_constant(v2(x, y), v2(0, 1), 0.05);
        EXPECT_NEAR(M, want, 0.05 * want + 0.01) << "x = " << x;
    }
}

TEST(Lipschitz, OverhangDetected) {
    // pipe of half-width 0.1: the opposite wall enters at delta = 0.2
    auto su = std::make_shared<SolidUnion>();
    ConvexPolygon rect;
    rect.v = {v2(-2, -0.1), v2(2, -0.1), v2(2, 0.1), v2(-2, 0.1)};
    su->add_polygon(rect);
    su->build();
    Domain dom(DomainTag::pipe_network, su, Box<2>::cube(-1.5, 1.5), false);
    BoundaryProbe probe(dom.boundary_samples(0.004));
    Vec2 p = v2(0, 0.1);
    EXPECT_LT(probe.lipschitz_constant(p, v2(0, 1), 0.15), 1e-9);
    EXPECT_TRUE(std::isinf(probe.lipschitz_constant(p, v2(0, 1), 0.30)));
}

TEST(DeltaDelta, HalfPlaneCappedByRfrak) {
    Domain hp = make_halfplane(Box<2>::cube(-2, 2));
    BoundaryProbe probe(hp.boundary_samples(0.01));
    auto o = opts(0.5);
    EXPECT_NEAR(probe.delta_Delta(v2(0, 0), v2(0, 1), o), 0.25, 1e-9);
}

TEST(DeltaDelta, PipeWallEqualsHalfWidth) {
    double de = 0.12;
    auto su = std::make_shared<SolidUnion>();
    ConvexPolygon rect;
    rect.v = {v2(-3, -de), v2(3, -de), v2(3, de), v2(-3, de)};
    su->add_polygon(rect);
    su->build();
    Domain dom(DomainTag::pipe_network, su, Box<2>::cube(-2, 2), false);
    BoundaryProbe probe(dom.boundary_samples(0.003));
    auto o = opts(0.5);
    double got = probe.delta_Delta(v2(0.3, de), v2(0, 1), o);
    EXPECT_NEAR(got, de, 0.02 * de);
}

TEST(DeltaDelta, CircleWithSmallRfrak) {
    auto su = std::make_shared<SolidUnion>();
    su->add_disk(v2(0, 0), 1.0);
    su->build();
    Domain dom(DomainTag::boolean_union, su, Box<2>::cube(-2, 2), false);
    BoundaryProbe probe(dom.boundary_samples(0.002));
    auto o = opts(0.125);
    // circle is a graph at every scale below 1, so the cap binds
    double got = probe.delta_Delta(v2(1, 0), v2(1, 0), o);
    EXPECT_NEAR(got, 0.0625, 1e-4);
}

TEST(Rho, FlatAndConstantSlope) {
    Domain hp = make_halfplane(Box<2>::cube(-2, 2));
    BoundaryProbe probe(hp.boundary_samples(0.004));
    auto o = opts(0.4);
    double delta = probe.delta_Delta(v2(0, 0), v2(0, 1), o);
    auto rr = probe.rho(v2(0, 0), v2(0, 1), delta, o);
    EXPECT_NEAR(rr.rho[0], delta, 1e-6);
    EXPECT_NEAR(rr.rho[1], delta / std::sqrt(2.0), 1e-6);
    EXPECT_NEAR(rr.rho[2], delta / 2, 1e-6);

    double m = 1.5;
    Domain wd = make_wedge(m, Box<2>::cube(-2, 2));
    BoundaryProbe wprobe(wd.boundary_samples(0.002));
    double wdelta = wprobe.delta_Delta(v2(0, 0), v2(0, 1), o);
    auto wr = wprobe.rho(v2(0, 0), v2(0, 1), wdelta, o);
    EXPECT_NEAR(wr.rho[1], wdelta / std::sqrt(4 * m * m + 2), 0.02 * wdelta);
}

TEST(Rho, DenseGridOracleOnLens) {
    auto su = std::make_shared<SolidUnion>();
    su->add_disk(v2(0, 0), 1.0);
    su->add_disk(v2(1.2, 0), 1.0);
    su->build();
    Domain dom(DomainTag::boolean_union, su, Box<2>::cube(-3, 3), false);
    BoundaryProbe probe(dom.boundary_samples(0.002, 1e-5));
    auto o = opts(0.25);
    double x = 0.6, y = std::sqrt(1 - 0.36);
    double ang = std::atan2(y, x) + 0.15;
    Vec2 p = v2(std::cos(ang), std::sin(ang));
    double delta = probe.delta_Delta(p, p, o);
    auto rr = probe.rho(p, p, delta, o);
    RegularityOptions dense = o;
    dense.r_grid_ratio = std::pow(2.0, 1.0 / 64);
    auto rr2 = probe.rho(p, p, delta, dense);
    EXPECT_NEAR(rr.rho[1], rr2.rho[1], 0.02 * rr2.rho[1]);
    for (int n = 0; n < 3; ++n) {
        EXPECT_LE(rr.rho[n], delta * (1 + 1e-9));
        double rh = BoundaryProbe::rho_hat(rr, n, 3, delta);
        EXPECT_LE(rh, delta * (1 + 1e-9));
        EXPECT_GT(rh, 0.0);
    }
}

TEST(Rho, MonotoneMInGridRadii) {
    auto su = std::make_shared<SolidUnion>();
    su->add_disk(v2(0, 0), 1.0);
    su->add_disk(v2(1.3, 0.2), 1.0);
    su->add_disk(v2(0.4, 1.4), 1.0);
    su->build();
    Domain dom(DomainTag::boolean_union, su, Box<2>::cube(-3, 3), false);
    BoundaryProbe probe(dom.boundary_samples(0.004, 1e-5));
    auto o = opts(0.25);
    auto samples = dom.boundary_samples(0.21);
    for (size_t i = 0; i < samples.size(); i += 7) {
        const auto& s = samples[i];
        double delta = probe.delta_Delta(s.point, s.normal, o);
        auto rr = probe.rho(s.point, s.normal, delta, o);
        for (size_t k = 1; k < rr.grid_M.size(); ++k) {
            double prev = std::isinf(rr.grid_M[k - 1]) ? 1e300 : rr.grid_M[k - 1];
            double cur = std::isinf(rr.grid_M[k]) ? 1e300 : rr.grid_M[k];
            EXPECT_LE(cur, prev * (1 + 1e-6) + 1e-9);
        }
    }
}

TEST(EtaRegular, HalfPlaneAndCircleNoViolations) {
    Domain hp = make_halfplane(Box<2>::cube(-2, 2));
    BoundaryProbe probe(hp.boundary_samples(0.02));
    auto prof = build_profile(probe, opts(0.4));
    std::vector<Vec2> pts;
    for (const auto& s : prof.samples) pts.push_back(s.point);
    auto rep = eta_regular_check(pts, prof.delta, {0.1, 0.25, 0.4});
    EXPECT_GT(rep.pairs_checked, 100u);
    EXPECT_EQ(rep.violations, 0u);

    auto su = std::make_shared<SolidUnion>();
    su->add_disk(v2(0, 0), 1.0);
    su->build();
    Domain circ(DomainTag::boolean_union, su, Box<2>::cube(-2, 2), false);
    BoundaryProbe cprobe(circ.boundary_samples(0.01));
    auto cprof = build_profile(cprobe, opts(0.125));
    pts.clear();
    for (const auto& s : cprof.samples) pts.push_back(s.point);
    auto crep = eta_regular_check(pts, cprof.delta, {0.1, 0.3});
    EXPECT_EQ(crep.violations, 0u);
}

TEST(EtaRegular, AdversarialJumpDetected) {
    std::vector<Vec2> pts;
    std::vector<double> eta;
    for (int i = 0; i < 100; ++i) {
        pts.push_back(v2(i * 0.01, 0));
        eta.push_back(i == 50 ? 0.02 : 0.5);
    }
    auto rep = eta_regular_check(pts, eta, {0.3});
    EXPECT_GT(rep.violations, 0u);
}

TEST(AmbientFields, EmptySetConventionAndBounds) {
    Domain hp = make_halfplane(Box<2>::cube(-1, 1));
    auto samples = hp.boundary_samples(0.01);
    std::vector<Vec2> pts;
    std::vector<double> eta, reach, M;
    for (const auto& s : samples) {
        pts.push_back(s.point);
        eta.push_back(0.2);
        reach.push_back(0.2 / 8);
        M.push_back(0.0);
    }
    auto fields = extend_to_ambient(pts, eta, reach, M, Box<2>::cube(-1, 1), 0.05);
    for (int j = 0; j < fields.eta.ny; ++j)
        for (int i = 0; i < fields.eta.nx; ++i) {
            Vec2 x = fields.eta.node(i, j);
            double want = std::abs(x.c[1]) < 0.2 / 8 - 1e-12 ? 0.2 : 0.0;
            if (std::abs(std::abs(x.c[1]) - 0.2 / 8) < 0.011) continue;  // sampling edge
            EXPECT_NEAR(fields.eta.at(i, j), want, 1e-12);
        }
}

TEST(AmbientFields, BruteForceAgreement) {
    Rng rng(44);
    std::vector<Vec2> pts;
    std::vector<double> eta, reach, M;
    for (int i = 0; i < 300; ++i) {
        pts.push_back(v2(rng.uniform(-1, 1), rng.uniform(-1, 1)));
        eta.push_back(rng.uniform(0.05, 0.3));
        reach.push_back(rng.uniform(0.02, 0.2));
        M.push_back(rng.uniform(0, 5));
    }
    auto fields = extend_to_ambient(pts, eta, reach, M, Box<2>::cube(-1, 1), 0.1);
    for (int j = 0; j < fields.eta.ny; ++j)
        for (int i = 0; i < fields.eta.nx; ++i) {
            Vec2 x = fields.eta.node(i, j);
            double emin = kInf, mmax = 0;
            bool any = false;
            for (size_t q = 0; q < pts.size(); ++q) {
                double d = dist(x, pts[q]);
                if (d < reach[q]) emin = std::fmin(emin, eta[q]);
                if (d <= eta[q]) {
                    mmax = std::fmax(mmax, M[q]);
                    any = true;
                }
            }
            EXPECT_DOUBLE_EQ(fields.eta.at(i, j), emin == kInf ? 0.0 : emin);
            EXPECT_DOUBLE_EQ(fields.M.at(i, j), any ? mmax : 0.0);
        }
}

TEST(AmbientFields, NearBoundaryExtension) {
    // x within the reach band of a flat boundary: eta(p) >= eta~(x) > (3/4) eta(p)
    Domain hp = make_halfplane(Box<2>::cube(-1, 1));
    auto samples = hp.boundary_samples(0.005);
    std::vector<Vec2> pts;
    std::vector<double> eta, reach, M;
    for (const auto& s : samples) {
        pts.push_back(s.point);
        eta.push_back(0.16);
        reach.push_back(0.02);
        M.push_back(0.0);
    }
    auto fields = extend_to_ambient(pts, eta, reach, M, Box<2>::cube(-1, 1), 0.004);
    int tested = 0;
    for (int j = 0; j < fields.eta.ny; ++j)
        for (int i = 0; i < fields.eta.nx; ++i) {
            Vec2 x = fields.eta.node(i, j);
            if (std::abs(x.c[1]) < 0.02 - 0.006 && std::abs(x.c[0]) < 0.9) {
                double et = fields.eta.at(i, j);
                EXPECT_GT(et, 0.75 * 0.16 - 1e-12);
                EXPECT_LE(et, 0.16 + 1e-12);
                ++tested;
            }
        }
    EXPECT_GT(tested, 100);
}

TEST(Profile, BuildOnPipeAndInvariants) {
    PipeParams params;
    params.r_frak = 0.25;
    params.lambda = 1.0;
    params.hardcore = 0.5;
    params.law = DeltaLaw::exp_tail;
    params.a = 0.5;
    auto net = pipe_build(Box<2>::centered(8), params, 2024);
    auto samples = net.domain.boundary_samples(0.02, 2e-3);
    BoundaryProbe probe(samples);
    auto o = opts(params.r_frak, 5e-4);
    auto prof = build_profile(probe, o, true);
    size_t checked = 0;
    for (size_t i = 0; i < prof.samples.size(); ++i) {
        EXPECT_GT(prof.delta[i], 0.0);
        if (prof.has_rho)
            for (int n = 0; n < 3; ++n) {
                EXPECT_LE(prof.rho[i][n], prof.delta[i] * (1 + 1e-9));
                EXPECT_LE(prof.rho_hat[i][n], prof.delta[i] * (1 + 1e-9));
            }
        ++checked;
    }
    EXPECT_GT(checked, 100u);
    // pipe interior walls: delta_Delta equals the pipe half width, provided
    // no other solid's boundary reaches into the 2 delta ball
    const auto& pieces = net.domain.solids().pieces();
    int wall_checked = 0;
    for (size_t k = 0; k < net.edges.size(); ++k) {
        const auto& e = net.edges[k];
        Vec2 xa = net.sites.points[e.a], xb = net.sites.points[e.b];
        if (dist(xa, xb) < 3.5 * params.r_frak) continue;
        Vec2 mid = (xa + xb) * 0.5;
        Vec2 nrm = normalized(perp(xa - xb));
        Vec2 p = mid + nrm * e.delta;
        if (!Box<2>::centered(7.0).contains(p)) continue;
        if (std::abs(net.domain.signed_distance(p)) > 1e-9) continue;  // overlapped wall
        int own_solid = (int)net.sites.points.size() + (int)k;
        double d_other = kInf;
        for (const auto& s : samples)
            if (pieces[s.piece].solid != own_solid) d_other = std::fmin(d_other, dist(p, s.point));
        if (d_other < 2.2 * e.delta) continue;  // another structure interferes
        bool fl = false;
        double d = probe.delta_Delta(p, nrm, o, &fl);
        if (fl) continue;
        double want = std::fmin(e.delta, params.r_frak / 2);  // Delta = min(2 delta_e, r)
        EXPECT_NEAR(d, want, 0.05 * want + 2e-3) << "edge " << e.a << "-" << e.b;
        ++wall_checked;
    }
    EXPECT_GE(wall_checked, 3);
}
