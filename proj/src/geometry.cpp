#include "cloudtrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cloudtrack/kernels.hpp"

namespace cloudtrack {

Point3 mean_of(std::span<const Point3> points) {
    Point3 sum;
    for (const auto& p : points) sum += p;
    return points.empty() ? sum : sum / static_cast<double>(points.size());
}

double median_lower(std::vector<double> values) {
    if (values.empty()) throw Error("median of empty list");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

std::vector<double> nearest_neighbor_distances(std::span<const Point3> points) {
    const std::size_t n = points.size();
    std::vector<double> result(n, std::numeric_limits<double>::infinity());
    if (n < 2) return result;

    Point3 lo = points[0], hi = points[0];
    for (const auto& p : points) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const Point3 ext = hi - lo;
    const double longest = std::max({ext.x, ext.y, ext.z});
    if (longest == 0.0) {
        std::fill(result.begin(), result.end(), 0.0);
        return result;
    }
    // Start from the uniform mean spacing; flat or clustered clouds may need
    // far smaller cells but never larger ones to find most neighbours.
    const double volume = std::max(ext.x, longest * 1e-6) * std::max(ext.y, longest * 1e-6) *
                          std::max(ext.z, longest * 1e-6);
    double cell = std::cbrt(volume / static_cast<double>(n));

    // Any point whose nearest candidate within the 27 cells is at distance
    // <= cell has found its true nearest neighbour; the rest retry with
    // doubled cells.
    std::vector<std::uint32_t> pending(n);
    std::iota(pending.begin(), pending.end(), 0u);
    while (!pending.empty()) {
        GridIndex grid(points, cell);
        std::vector<std::uint32_t> next;
        for (std::uint32_t i : pending) {
            double best = std::numeric_limits<double>::infinity();
            grid.visit_candidates(points[i], [&](std::uint32_t j, double d2) {
                if (j != i && d2 < best) best = d2;
            });
            if (best <= cell * cell) {
                result[i] = std::sqrt(best);
            } else {
                next.push_back(i);
            }
        }
        pending.swap(next);
        cell *= 2.0;
    }
    return result;
}

double compute_r1(std::span<const Point3> points) {
    if (points.size() < 2) throw Error("insufficient points for scale");
    return median_lower(nearest_neighbor_distances(points));
}

double compute_r1(const FrameCloud& cloud) { return compute_r1(std::span<const Point3>(cloud.points)); }

double diameter(std::span<const Point3> points) {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            best = std::max(best, squared_distance(points[i], points[j]));
        }
    }
    return std::sqrt(best);
}

double compute_r0(std::span<const std::vector<Point3>> clusters) {
    std::vector<double> sizes;
    sizes.reserve(clusters.size());
    for (const auto& c : clusters) {
        if (c.empty()) throw Error("empty cluster in scale computation");
        sizes.push_back(diameter(c));
    }
    if (sizes.empty()) throw Error("no clusters for scale");
    return median_lower(std::move(sizes));
}

GridIndex::GridIndex(std::span<const Point3> points, double cell) : cell_(cell), points_(points) {
    if (!(cell > 0.0) || !std::isfinite(cell)) throw Error("grid cell size must be positive");
    const std::size_t n = points.size();
    std::vector<CellKey> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = cell_of(points[i]);
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
        const CellKey& ka = keys[a];
        const CellKey& kb = keys[b];
        if (ka.i != kb.i) return ka.i < kb.i;
        if (ka.j != kb.j) return ka.j < kb.j;
        if (ka.k != kb.k) return ka.k < kb.k;
        return a < b;
    });
    xs_.resize(n);
    ys_.resize(n);
    zs_.resize(n);
    cells_.reserve(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        const Point3& p = points[order_[s]];
        xs_[s] = p.x;
        ys_[s] = p.y;
        zs_[s] = p.z;
        auto [it, inserted] = cells_.try_emplace(keys[order_[s]], Range{s, 0});
        it->second.count += 1;
    }
}

CellKey GridIndex::cell_of(const Point3& p) const {
    if (!p.finite()) throw Error("non-finite coordinate in grid");
    return CellKey{static_cast<std::int64_t>(std::floor(p.x / cell_)),
                   static_cast<std::int64_t>(std::floor(p.y / cell_)),
                   static_cast<std::int64_t>(std::floor(p.z / cell_))};
}

void GridIndex::gather(const Point3& p, double radius, bool strict, std::optional<std::uint32_t> skip,
                       std::vector<std::uint32_t>& out) const {
    if (radius > cell_) throw Error("radius exceeds grid guarantee");
    const auto& k = kernels::active();
    thread_local std::vector<double> scratch;
    const CellKey c = cell_of(p);
    for (std::int64_t di = -1; di <= 1; ++di) {
        for (std::int64_t dj = -1; dj <= 1; ++dj) {
            for (std::int64_t dk = -1; dk <= 1; ++dk) {
                const auto it = cells_.find(CellKey{c.i + di, c.j + dj, c.k + dk});
                if (it == cells_.end()) continue;
                const Range r = it->second;
                scratch.resize(r.count);
                k.squared_distances(p.x, p.y, p.z, xs_.data() + r.begin, ys_.data() + r.begin,
                                    zs_.data() + r.begin, r.count, scratch.data());
                for (std::uint32_t s = 0; s < r.count; ++s) {
                    // Compare distances, not squares, so ties agree with distance().
                    const double d = std::sqrt(scratch[s]);
                    if (strict ? d < radius : d <= radius) {
                        const std::uint32_t idx = order_[r.begin + s];
                        if (!skip || *skip != idx) out.push_back(idx);
                    }
                }
            }
        }
    }
}

std::vector<std::uint32_t> GridIndex::query(const Point3& p, double radius) const {
    std::vector<std::uint32_t> out;
    gather(p, radius, false, std::nullopt, out);
    return out;
}

std::vector<std::uint32_t> GridIndex::neighbors(std::uint32_t i, double radius) const {
    std::vector<std::uint32_t> out;
    gather(points_[i], radius, false, i, out);
    return out;
}

void GridIndex::for_each_strictly_within(const Point3& p, double radius,
                                         std::vector<std::uint32_t>& out) const {
    out.clear();
    gather(p, radius, true, std::nullopt, out);
}

GridIndex grid_build(const FrameCloud& cloud, double cell) { return GridIndex(cloud.points, cell); }

std::vector<std::uint32_t> grid_neighbors(const GridIndex& index, const Point3& p, double radius,
                                          std::optional<std::uint32_t> self) {
    if (self) return index.neighbors(*self, radius);
    return index.query(p, radius);
}

}  // namespace cloudtrack
