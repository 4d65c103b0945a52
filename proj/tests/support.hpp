#pragma once
// Independent oracles and fixtures shared by the unit and acceptance tests.
// Nothing here calls into the code under test except for data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "cloudtrack/clustering.hpp"
#include "cloudtrack/geometry.hpp"
#include "cloudtrack/partition.hpp"
#include "cloudtrack/random.hpp"

namespace testing {

using namespace cloudtrack;

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

/// Label of each element = smallest member of its class.
inline std::vector<std::size_t> canonical(UnionFind& uf) {
    std::vector<std::size_t> out(uf.parent.size());
    std::vector<std::size_t> first(uf.parent.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t r = uf.find(i);
        if (first[r] == std::numeric_limits<std::size_t>::max()) first[r] = i;
        out[i] = first[r];
    }
    return out;
}

/// O(M^2) single linkage with strict threshold.
inline std::vector<std::size_t> brute_single_linkage(const std::vector<Point3>& pts, double threshold) {
    UnionFind uf(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (distance(pts[i], pts[j]) < threshold) uf.unite(i, j);
    return canonical(uf);
}

inline std::vector<std::size_t> partition_labels(const std::vector<Cluster>& clusters, std::size_t n) {
    std::vector<std::size_t> out(n, std::numeric_limits<std::size_t>::max());
    for (const auto& c : clusters)
        for (auto p : c.points) out[p] = c.points.front();
    return out;
}

inline std::vector<Point3> uniform_points(std::size_t n, double extent, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point3> pts(n);
    for (auto& p : pts) p = {rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
    return pts;
}

/// Gaussian blobs of `per` points around random centres.
inline std::vector<Point3> blob_points(std::size_t blobs, std::size_t per, double extent, double sigma,
                                       std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point3> pts;
    for (std::size_t b = 0; b < blobs; ++b) {
        const Point3 c{rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
        for (std::size_t k = 0; k < per; ++k)
            pts.push_back(c + Vec3{rng.normal(), rng.normal(), rng.normal()} * sigma);
    }
    return pts;
}

inline std::vector<std::uint32_t> brute_range(const std::vector<Point3>& pts, const Point3& p, double r) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (distance(pts[i], p) <= r) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

inline double brute_nn_median(const std::vector<Point3>& pts) {
    std::vector<double> nn;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i) best = std::min(best, distance(pts[i], pts[j]));
        nn.push_back(best);
    }
    std::sort(nn.begin(), nn.end());
    return nn[(nn.size() - 1) / 2];
}

/// Direct evaluation of H over an explicit weight list.
inline double direct_energy(std::size_t n, const std::vector<WeightEntry>& w, const std::vector<std::int8_t>& x) {
    (void)n;
    double h = 0.0;
    for (const auto& e : w) h -= e.w * x[e.i] * x[e.j];
    return h;
}

/// Minimum of H over all 2^n labelings.
inline double brute_min_energy(std::size_t n, const std::vector<WeightEntry>& w) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::int8_t> x(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? 1 : -1;
        best = std::min(best, direct_energy(n, w, x));
    }
    return best;
}

/// Random mixed-sign instance over n nodes with edge probability `density`.
inline std::vector<WeightEntry> random_weights(std::size_t n, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<WeightEntry> w;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (rng.uniform01() < density) w.push_back({i, j, rng.uniform(-1.0, 1.0)});
    return w;
}

/// Static and dynamic weights written out independently.
inline double oracle_static(double d, double r1, double r0, double beta) {
    const double attract = std::exp(-std::pow(d / r1, beta));
    const double over = (d - r0) / r1;
    return attract - (d > r0 ? over * over : 0.0);
}
inline double oracle_dynamic(double D, double r1) { return std::exp(-D / r1); }

}  // namespace testing
