#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfodom/geometry.hpp"
#include "perfodom/rng.hpp"

namespace perfodom {

enum class ProcessKind { poisson, matern, lattice };

inline const char* to_string(ProcessKind k) {
    switch (k) {
        case ProcessKind::poisson: return "poisson";
        case ProcessKind::matern: return "matern";
        case ProcessKind::lattice: return "lattice";
    }
    return "?";
}

template <int D>
struct PointCloud {
    std::vector<Vec<D>> points;
    Box<D> window;
    ProcessKind process = ProcessKind::poisson;
    uint64_t seed = 0;
    double intensity = 0;         // poisson / matern
    double hardcore_distance = 0; // matern

    size_t size() const { return points.size(); }
};

/// Homogeneous Poisson process: N ~ Poisson(lambda |window|), positions
/// i.i.d. uniform. The replica index selects an independent substream.
template <int D>
PointCloud<D> sample_poisson(const Box<D>& window, double lambda, uint64_t seed, uint64_t replica = 0) {
    if (!(lambda > 0)) throw std::invalid_argument("sample_poisson: lambda must be positive");
    double mean = lambda * window.volume();
    if (mean > 1e8) throw std::invalid_argument("sample_poisson: lambda*volume exceeds resource guard 1e8");
    Rng rng(seed, replica);
    uint64_t n = rng.poisson(mean);
    PointCloud<D> cloud;
    cloud.window = window;
    cloud.process = ProcessKind::poisson;
    cloud.seed = seed;
    cloud.intensity = lambda;
    cloud.points.reserve(n);
    for (uint64_t k = 0; k < n; ++k) {
        Vec<D> p;
        for (int i = 0; i < D; ++i) p.c[i] = rng.uniform(window.lo.c[i], window.hi.c[i]);
        cloud.points.push_back(p);
    }
    return cloud;
}

/// Matern-I thinning: every point whose nearest neighbor in the original
/// cloud is closer than min_dist is removed (both members of a close pair die).
template <int D>
PointCloud<D> matern_thin(const PointCloud<D>& cloud, double min_dist) {
    if (!(min_dist > 0)) throw std::invalid_argument("matern_thin: min_dist must be positive");
    const auto& pts = cloud.points;
    std::vector<char> dead(pts.size(), 0);
    PointGrid<D> grid(pts, min_dist);
    for (size_t i = 0; i < pts.size(); ++i) {
        grid.for_neighbors(pts[i], min_dist, [&](size_t j) {
            if (j == i) return;
            if (dist(pts[i], pts[j]) < min_dist) {
                dead[i] = 1;
                dead[j] = 1;
            }
        });
    }
    PointCloud<D> out;
    out.window = cloud.window;
    out.process = ProcessKind::matern;
    out.seed = cloud.seed;
    out.intensity = cloud.intensity;
    out.hardcore_distance = min_dist;
    for (size_t i = 0; i < pts.size(); ++i)
        if (!dead[i]) out.points.push_back(pts[i]);
    return out;
}

template <int D>
PointCloud<D> sample_matern(const Box<D>& window, double lambda, double min_dist, uint64_t seed,
                            uint64_t replica = 0) {
    return matern_thin(sample_poisson<D>(window, lambda, seed, replica), min_dist);
}

/// Lattice process X_r = 2r Z^d intersected with the inner hull P_{-r},
/// restricted to the window. `inner` must answer "does the closed r-ball
/// around z lie in P".
template <int D, typename InnerHull>
PointCloud<D> lattice_process(InnerHull&& inner, double r, const Box<D>& window, uint64_t seed = 0) {
    if (!(r > 0)) throw std::invalid_argument("lattice_process: r must be positive");
    double pitch = 2 * r;
    std::array<int64_t, D> lo, hi;
    for (int i = 0; i < D; ++i) {
        lo[i] = (int64_t)std::ceil(window.lo.c[i] / pitch - 1e-12);
        hi[i] = (int64_t)std::floor(window.hi.c[i] / pitch + 1e-12);
    }
    PointCloud<D> out;
    out.window = window;
    out.process = ProcessKind::lattice;
    out.seed = seed;
    out.hardcore_distance = pitch;
    std::array<int64_t, D> it = lo;
    for (int i = 0; i < D; ++i)
        if (lo[i] > hi[i]) return out;
    while (true) {
        Vec<D> z;
        for (int i = 0; i < D; ++i) z.c[i] = it[i] * pitch;
        if (inner(z, r)) out.points.push_back(z);
        int d = 0;
        while (d < D) {
            if (++it[d] <= hi[d]) break;
            it[d] = lo[d];
            ++d;
        }
        if (d == D) break;
    }
    return out;
}

/// Smallest pairwise distance; +inf for fewer than two points.
template <int D>
double min_pairwise_distance(const PointCloud<D>& cloud) {
    const auto& pts = cloud.points;
    if (pts.size() < 2) return kInf;
    // probe radius grows until some neighbor is seen
    double probe = std::pow(cloud.window.volume() / pts.size(), 1.0 / D) * 2 + 1e-9;
    double best = kInf;
    PointGrid<D> grid(pts, probe);
    for (size_t i = 0; i < pts.size(); ++i) {
        grid.for_neighbors(pts[i], probe, [&](size_t j) {
            if (j != i) best = std::fmin(best, dist(pts[i], pts[j]));
        });
    }
    if (best < kInf) return best;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) best = std::fmin(best, dist(pts[i], pts[j]));
    return best;
}

template <int D>
size_t nearest_site_index(const std::vector<Vec<D>>& sites, const Vec<D>& x) {
    if (sites.empty()) throw std::invalid_argument("nearest_site_index: no sites");
    size_t best = 0;
    double bd = norm2(x - sites[0]);
    for (size_t i = 1; i < sites.size(); ++i) {
        double d = norm2(x - sites[i]);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

}  // namespace perfodom
