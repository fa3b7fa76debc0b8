#include <gtest/gtest.h>

#include <cmath>

#include "perfodom/stats.hpp"

using namespace perfodom;

TEST(Wilson, BasicProperties) {
    auto [lo, hi] = wilson_interval(50, 100);
    EXPECT_LT(lo, 0.5);
    EXPECT_GT(hi, 0.5);
    auto [lo0, hi0] = wilson_interval(0, 100);
    EXPECT_DOUBLE_EQ(lo0, 0.0);
    EXPECT_LT(hi0, 0.05);
    auto [lo1, hi1] = wilson_interval(100, 100);
    EXPECT_GT(lo1, 0.95);
    EXPECT_DOUBLE_EQ(hi1, 1.0);
}

TEST(VoidProbability, PoissonMatchesClosedForm) {
    auto est = void_probability(ProcessKind::poisson, 1.0, 0.0, Box<2>::cube(0, 1), 20000, 99);
    double se = std::sqrt(est.theory * (1 - est.theory) / est.replicas);
    EXPECT_NEAR(est.p_hat, std::exp(-1.0), 3.5 * se);
    EXPECT_NEAR(est.theory, std::exp(-1.0), 1e-12);
}

TEST(VoidProbability, MaternMatchesFormula) {
    auto est = void_probability(ProcessKind::matern, 1.0, 0.5, Box<2>::cube(0, 1), 20000, 77);
    double se = std::sqrt(est.theory * (1 - est.theory) / est.replicas);
    EXPECT_NEAR(est.p_hat, est.theory, 4 * se);
}

TEST(DiameterTail, MaternSurvivalAndExponent) {
    std::vector<double> th;
    for (double d = 0.8; d <= 5.0; d += 0.3) th.push_back(d);
    auto res = voronoi_diameter_tail(1.0, 0.25, 0.5, Box<2>::centered(14), 60, 4242, th);
    EXPECT_GT(res.interior_cells, 1000u);
    EXPECT_TRUE(res.tail.monotone());
    EXPECT_TRUE(res.tail.dominated()) << "decaying overlay must dominate the empirical survival";
    // exponent consistent with D^d, d = 2
    EXPECT_GT(res.fitted_exponent, 1.3);
    EXPECT_LT(res.fitted_exponent, 2.9);
    EXPECT_FALSE(res.tail.flags.empty());
}

TEST(Mesoscopic, FullAndEmptyDomains) {
    Box<2> w = Box<2>::centered(10);
    auto full_factory = [&](uint64_t) {
        auto su = std::make_shared<SolidUnion>();
        su->add_disk(v2(0, 0), 100.0);  // effectively the whole plane
        su->build();
        return Domain(DomainTag::boolean_union, su, w, false);
    };
    auto f_full = mesoscopic_f(full_factory, {2.0, 3.0}, 0.25, 10, 5);
    for (double p : f_full.p_hat) EXPECT_DOUBLE_EQ(p, 0.0);
    auto empty_factory = [&](uint64_t) {
        auto su = std::make_shared<SolidUnion>();
        su->add_disk(v2(500, 500), 0.5);  // far away: window effectively empty
        su->build();
        return Domain(DomainTag::boolean_union, su, w, false);
    };
    auto f_empty = mesoscopic_f(empty_factory, {2.0, 3.0}, 0.25, 10, 5);
    for (double p : f_empty.p_hat) EXPECT_DOUBLE_EQ(p, 1.0);
}

TEST(Mesoscopic, BooleanDecreasingTrend) {
    Box<2> w = Box<2>::centered(24);
    auto factory = [&](uint64_t rep) {
        return boolean_build(w, 0.7, 3131, rep).domain;
    };
    auto f = mesoscopic_f(factory, {2.0, 4.0, 8.0}, 0.25, 30, 3131);
    EXPECT_GE(f.p_hat[0] + 1e-12, f.p_hat[2]);  // decreasing in R
}

TEST(ConeMixing, LatticeDeterministicAndEmpty) {
    // full lattice: success at all R >= pitch/sin(alpha)
    double pitch = 1.0, alpha = 0.6;
    auto lattice_factory = [&](uint64_t) {
        PointCloud<2> c;
        c.window = Box<2>::centered(30);
        for (int i = -15; i <= 15; ++i)
            for (int j = -15; j <= 15; ++j)
                if (i || j) c.points.push_back(v2(i * pitch, j * pitch));
        return c;
    };
    double Rbig = pitch / std::sin(alpha) + pitch + 1;
    auto t = cone_mixing_check(lattice_factory, alpha, {Rbig, 2 * Rbig}, 3, 1);
    for (double p : t.p_hat) EXPECT_DOUBLE_EQ(p, 1.0);
    auto empty_factory = [&](uint64_t) {
        PointCloud<2> c;
        c.window = Box<2>::centered(30);
        return c;
    };
    auto te = cone_mixing_check(empty_factory, alpha, {Rbig}, 3, 1);
    EXPECT_DOUBLE_EQ(te.p_hat[0], 0.0);
}

TEST(ConeMixing, MaternTrendsUp) {
    auto factory = [&](uint64_t rep) {
        return sample_matern<2>(Box<2>::centered(30), 1.0, 0.5, 2020, rep);
    };
    auto t = cone_mixing_check(factory, 0.5, {1.0, 3.0, 8.0}, 60, 2020);
    EXPECT_LE(t.p_hat[0], t.p_hat[1] + 1e-12);
    EXPECT_LE(t.p_hat[1], t.p_hat[2] + 1e-12);
    EXPECT_GT(t.p_hat[2], 0.9);
}

TEST(BMoment, UnitCellsTileAndBound) {
    BMomentConfig cfg;  // n = s = 1, eta = xi = zeta = 0
    auto res = b_moment_sum(1.0, 0.25, Box<2>::centered(8), 5, 11, cfg);
    // b = multiplicity of the Voronoi tiling = 1 a.e.
    EXPECT_NEAR(res.spatial_average, 1.0, 1e-9);
    EXPECT_TRUE(res.dominated);
    // doubled cells: overlap count still bounded and dominated
    BMomentConfig cfg2 = cfg;
    cfg2.n_const = 2.0;
    auto res2 = b_moment_sum(1.0, 0.25, Box<2>::centered(8), 5, 11, cfg2);
    EXPECT_GT(res2.spatial_average, 1.0);
    double cap = 4.0 * M_PI * std::pow(2 + 1, 2.0) / (0.25 * 0.25);  // sketchy multiplicity cap
    EXPECT_LT(res2.spatial_average, std::pow(cap, cfg.p));
    EXPECT_TRUE(res2.dominated);
}

TEST(AngleDiameter, EquilateralAndEnsemble) {
    auto res = angle_diameter_bound(1.0, 0.25, Box<2>::centered(12), 25, 808);
    EXPECT_GT(res.sites, 200u);
    EXPECT_GT(res.fitted_C, 0.0);
}

TEST(Stretch, ChainIsNearOne) {
    // straight chain of touching balls: S ~ 1
    std::vector<Vec2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(v2(1.9 * i, 0.0));
    std::vector<std::vector<int>> adj(pts.size());
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        adj[i].push_back((int)i + 1);
        adj[i + 1].push_back((int)i);
    }
    auto d = graph_distances(pts, adj, 0);
    for (size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(d[i], 1.9 * i, 1e-12);
    double S = 0;
    double R = 1.9 * 11;
    for (size_t i = 0; i < pts.size(); ++i) S = std::fmax(S, d[i] / R);
    EXPECT_NEAR(S, 1.0, 1e-9);
}

TEST(Stretch, BooleanTailHasNegativeSlope) {
    std::vector<double> th;
    for (double s = 1.0; s <= 2.6; s += 0.1) th.push_back(s);
    auto res = stretch_factor(0.7, Box<2>::centered(30), 25, 606, {3.0, 6.0, 9.0}, 6, th);
    EXPECT_GT(res.base_sites, 100u);
    EXPECT_LT(res.fit_slope, 0.0);
    EXPECT_GT(res.fit_r2, 0.7);
}

TEST(Overlay, ChainCountsAndCutoff) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(v2(1.0 * i, 0.0));
    std::vector<std::vector<int>> adj(pts.size());
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        adj[i].push_back((int)i + 1);
        adj[i + 1].push_back((int)i);
    }
    auto res = overlay_count(pts, adj, 0, 9.5, 0.8, Box<2>(v2(-1, -1), v2(10, 1)), 0.05);
    EXPECT_TRUE(res.zero_beyond_cutoff);
    // counts decrease along the chain: near the source every path passes
    int i_near = (int)std::llround((0.5 - res.counts.origin.c[0]) / res.counts.h);
    int j_mid = (int)std::llround((0.0 - res.counts.origin.c[1]) / res.counts.h);
    int i_far = (int)std::llround((8.5 - res.counts.origin.c[0]) / res.counts.h);
    EXPECT_GT(res.counts.at(i_near, j_mid), res.counts.at(i_far, j_mid));
    // R smaller than the nearest neighbor: only the source itself
    auto res0 = overlay_count(pts, adj, 0, 0.5, 0.8, Box<2>(v2(-1, -1), v2(10, 1)), 0.05);
    EXPECT_LE(res0.max_count, 1.0 + 1e-12);
}

TEST(Ergodic, SpatialAverageVarianceShrinks) {
    // variance across replicas of the mean interior cell diameter shrinks
    // from a 10x10 to a 40x40 window
    auto var_of = [&](double side) {
        std::vector<double> means;
        for (int rep = 0; rep < 12; ++rep) {
            auto cloud = sample_matern<2>(Box<2>::centered(side + 6), 1.0, 0.5, 515, rep);
            auto tess = build_voronoi(cloud, 3.0);
            double s = 0;
            size_t n = 0;
            Box<2> w = Box<2>::centered(side);
            for (size_t i = 0; i < tess.size(); ++i)
                if (!tess.clipped[i] && w.contains(tess.sites.points[i])) {
                    s += tess.diameters[i];
                    ++n;
                }
            means.push_back(s / std::fmax<size_t>(n, 1));
        }
        double m = 0, v = 0;
        for (double x : means) m += x;
        m /= means.size();
        for (double x : means) v += (x - m) * (x - m);
        return v / means.size();
    };
    EXPECT_LT(var_of(40), var_of(10));
}

TEST(Determinism, EstimatorsRepeatExactly) {
    auto a = void_probability(ProcessKind::poisson, 1.0, 0, Box<2>::cube(0, 1), 2000, 5);
    auto b = void_probability(ProcessKind::poisson, 1.0, 0, Box<2>::cube(0, 1), 2000, 5);
    EXPECT_DOUBLE_EQ(a.p_hat, b.p_hat);
    std::vector<double> th{1.0, 2.0};
    auto t1 = voronoi_diameter_tail(1.0, 0.25, 0.5, Box<2>::centered(8), 5, 6, th);
    auto t2 = voronoi_diameter_tail(1.0, 0.25, 0.5, Box<2>::centered(8), 5, 6, th);
    EXPECT_EQ(t1.tail.p_hat, t2.tail.p_hat);
}
