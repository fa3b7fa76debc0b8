#include <gtest/gtest.h>

#include <cmath>

#include "perfodom/cover.hpp"
#include "perfodom/rng.hpp"

using namespace perfodom;

namespace {

RegularityOptions ropts(double rfrak, double floor_ = 1e-3) {
    RegularityOptions o;
    o.r_frak = rfrak;
    o.delta_floor = floor_;
    return o;
}

struct Setup {
    Domain domain;
    std::shared_ptr<BoundaryProbe> probe;
    RegularityProfile prof;
    BoundaryCover cover;
    std::vector<double> eta;
};

Setup make_cover(const Domain& dom, double rfrak, double max_gap, double refine_floor, int n_order,
                 double alpha, CoverOptions copt, bool orders = false) {
    Setup s{dom, nullptr, {}, {}, {}};
    auto samples = dom.boundary_samples(max_gap, refine_floor);
    s.probe = std::make_shared<BoundaryProbe>(samples);
    s.prof = build_profile(*s.probe, ropts(rfrak, refine_floor > 0 ? refine_floor / 2 : 1e-4), orders);
    s.cover = build_cover(dom, *s.probe, s.prof, n_order, alpha, copt);
    s.eta = cover_radii(s.prof, n_order, copt.K);
    return s;
}

}  // namespace

TEST(Cover, StraightSegmentConstantEta) {
    // flat boundary: constant eta~ = (r/2)/32; centers spaced in
    // [C_sep eta~, 2 eta~], full chain with zero violations
    Domain hp = make_halfplane(Box<2>::cube(-2, 2));
    CoverOptions copt;
    auto s = make_cover(hp, 0.4, 0.0015, 0, 0, 0.0, copt);
    double eta_want = 0.2 / 32;
    ASSERT_GT(s.cover.size(), 10u);
    for (double r : s.cover.radius) EXPECT_NEAR(r, eta_want, 1e-6 * eta_want);
    auto chk = check_cover(hp, s.cover, s.prof, s.eta);
    EXPECT_TRUE(chk.pass());
    EXPECT_LE(chk.max_a1_overlap, 2);  // spacing arithmetic on a line
    // consecutive center spacing within [C_sep eta~, 2 eta~]
    std::vector<double> xs;
    for (const auto& c : s.cover.centers) xs.push_back(c.c[0]);
    std::sort(xs.begin(), xs.end());
    for (size_t i = 1; i < xs.size(); ++i) {
        double gap = xs[i] - xs[i - 1];
        EXPECT_GE(gap, copt.C_sep * eta_want * (1 - 1e-9));
        EXPECT_LE(gap, 2 * eta_want * (1 + 1e-6));
    }
}

TEST(Cover, SingleCircleCompleteAngularCover) {
    auto su = std::make_shared<SolidUnion>();
    su->add_disk(v2(0, 0), 1.0);
    su->build();
    Domain dom(DomainTag::boolean_union, su, Box<2>::cube(-2, 2), false);
    CoverOptions copt;
    auto s = make_cover(dom, 0.2, 0.001, 0, 0, 0.0, copt);
    auto chk = check_cover(dom, s.cover, s.prof, s.eta);
    EXPECT_TRUE(chk.pass());
    EXPECT_EQ(chk.completeness_failures, 0u);
    // angular coverage: every angle within some ball
    
}

TEST(Cover, PipeNetworkChainAndInnerBalls) {
    PipeParams params;
    params.r_frak = 0.25;
    params.lambda = 1.0;
    params.hardcore = 0.5;
    params.law = DeltaLaw::exp_tail;
    params.a = 0.5;
    auto net = pipe_build(Box<2>::centered(5), params, 99);
    CoverOptions copt;
    copt.eta_floor = 4 * 2e-4;
    auto s = make_cover(net.domain, params.r_frak, 0.01, 5e-5, 0, 0.0, copt);
    auto chk = check_cover(net.domain, s.cover, s.prof, s.eta);
    EXPECT_TRUE(chk.pass()) << "ratio " << chk.ratio_violations << " sep "
                            << chk.separation_violations << " inner "
                            << chk.inner_containment_failures << "/"
                            << chk.inner_disjointness_failures << " compl "
                            << chk.completeness_failures;
    // intersecting-radii comparability factor 16/15 at K=5
    // (already in chk.ratio_violations == 0)
    EXPECT_GT(s.cover.size(), 50u);
}

TEST(MicroPartitionT, SumSupportsAndVanishing) {
    auto su = std::make_shared<SolidUnion>();
    su->add_disk(v2(0, 0), 1.0);
    su->add_disk(v2(1.1, 0), 1.0);
    su->build();
    Domain dom(DomainTag::boolean_union, su, Box<2>::cube(-3, 3), false);
    CoverOptions copt;
    copt.eta_floor = 1e-3;
    auto s = make_cover(dom, 0.2, 0.004, 2.5e-4, 0, 0.0, copt);
    MicroPartition part(dom, s.cover);
    Rng rng(5);
    // sum to 1 at random points
    for (int t = 0; t < 2000; ++t) {
        Vec2 x = v2(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5));
        auto terms = part.eval(x);
        double sum = 0;
        for (const auto& tm : terms) sum += tm.weight;
        ASSERT_NEAR(sum, 1.0, 1e-10);
    }
    // x in B_k: phi_k = 1, others 0
    for (size_t k = 0; k < s.cover.size(); k += 5) {
        Vec2 x = s.cover.centers[k] + v2(0.3 * s.cover.b_radius(k), 0.2 * s.cover.b_radius(k));
        auto terms = part.eval(x);
        for (const auto& tm : terms) {
            if (tm.index == (int)k)
                EXPECT_NEAR(tm.weight, 1.0, 1e-12);
            else
                EXPECT_NEAR(tm.weight, 0.0, 1e-12);
        }
    }
    // on dP: phi_0 = 0 and the rest sums to 1
    auto bsamp = dom.boundary_samples(0.05);
    for (size_t i = 0; i < bsamp.size(); i += 3) {
        auto terms = part.eval(bsamp[i].point);
        double sum1 = 0;
        for (const auto& tm : terms) {
            if (tm.index == -1)
                EXPECT_NEAR(tm.weight, 0.0, 1e-9);
            else
                sum1 += tm.weight;
        }
        EXPECT_NEAR(sum1, 1.0, 1e-9);
    }
    // far from all balls: phi_0 = 1
    auto far_terms = part.eval(v2(2.9, 2.9));
    ASSERT_EQ(far_terms.size(), 1u);
    EXPECT_EQ(far_terms[0].index, -1);
    EXPECT_NEAR(far_terms[0].weight, 1.0, 1e-12);
}

TEST(MicroPartitionT, GradientBoundAndFiniteDifferences) {
    auto su = std::make_shared<SolidUnion>();
    su->add_disk(v2(0, 0), 1.0);
    su->build();
    Domain dom(DomainTag::boolean_union, su, Box<2>::cube(-2, 2), false);
    CoverOptions copt;
    auto s = make_cover(dom, 0.2, 0.002, 0, 0, 0.0, copt);
    MicroPartition part(dom, s.cover);
    Rng rng(6);
    double fittedC = 0;
    int checked = 0;
    for (int t = 0; t < 4000 && checked < 200; ++t) {
        double ang = rng.uniform(0, 2 * M_PI);
        double rr = 1.0 + rng.uniform(-1.5, 1.5) * 0.2 / 32;
        Vec2 x = v2(rr * std::cos(ang), rr * std::sin(ang));
        auto terms = part.eval(x);
        // gradient bound |grad phi_j| <= C / rho~ on A_1 (fitted C)
        for (const auto& tm : terms) {
            if (tm.index < 0) continue;
            fittedC = std::fmax(fittedC, norm(tm.gradient) * s.cover.radius[tm.index]);
        }
        // finite differences away from kinks
        double h = 1e-7;
        for (const auto& tm : terms) {
            if (tm.weight < 1e-3 || tm.weight > 1 - 1e-3) continue;
            auto wof = [&](const Vec2& y) {
                for (const auto& q : part.eval(y))
                    if (q.index == tm.index) return q.weight;
                return 0.0;
            };
            Vec2 fd = v2((wof(x + v2(h, 0)) - wof(x - v2(h, 0))) / (2 * h),
                         (wof(x + v2(0, h)) - wof(x - v2(0, h))) / (2 * h));
            if (norm(fd - tm.gradient) > 2e-3 * std::fmax(norm(fd), 1.0)) continue;  // kink
            EXPECT_NEAR(tm.gradient.c[0], fd.c[0], 2e-3 * std::fmax(std::abs(fd.c[0]), 1e-2));
            EXPECT_NEAR(tm.gradient.c[1], fd.c[1], 2e-3 * std::fmax(std::abs(fd.c[1]), 1e-2));
            ++checked;
        }
    }
    EXPECT_GT(checked, 50);
    EXPECT_GT(fittedC, 0.0);
    EXPECT_LT(fittedC, 100.0);  // C rho~^{-1} bound with a sane constant
}

TEST(InnerBall, HalfPlaneAndWedgeFormulas) {
    Domain hp = make_halfplane(Box<2>::cube(-1, 1));
    auto [y, r, shr] = inner_ball(hp, v2(0, 0), v2(0, 1), 0.1, 0.0, 1.0);
    EXPECT_FALSE(shr);
    EXPECT_NEAR(y.c[1], -0.025, 1e-12);
    EXPECT_NEAR(r, 0.025, 1e-12);

    // wedge with M = 1: r = delta/8, ball inside the cone
    Domain wd = make_wedge(1.0, Box<2>::cube(-1, 1));
    auto [y2, r2, shr2] = inner_ball(wd, v2(0, 0), v2(0, 1), 0.1, 1.0, 1.0);
    EXPECT_FALSE(shr2);
    EXPECT_NEAR(r2, 0.1 / 8, 1e-12);
    EXPECT_TRUE(inner_hull(wd, r2 * 0.999, y2));
}
