#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cloudtrack {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }
    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

// Positions and displacements share one representation; the alias names the role.
using Point3 = Vec3;

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }
inline double squared_distance(const Point3& a, const Point3& b) { return (a - b).squared_norm(); }

Point3 mean_of(std::span<const Point3> points);

/// All points detected at one time step. Point indices are positions in `points`.
struct FrameCloud {
    int frame = 0;
    std::vector<Point3> points;
};

using Sequence = std::vector<FrameCloud>;

struct ScaleStats {
    double r1 = 0.0;  // median point nearest-neighbour distance
    double r0 = 0.0;  // median cluster diameter
};

/// Lower-central element for even counts. Throws on empty input.
double median_lower(std::vector<double> values);

/// Median over points of the distance to the nearest other point of the same frame.
double compute_r1(const FrameCloud& cloud);
double compute_r1(std::span<const Point3> points);

/// Per-point nearest-neighbour distance (exact), in point order.
std::vector<double> nearest_neighbor_distances(std::span<const Point3> points);

/// Maximum pairwise distance; zero for one point.
double diameter(std::span<const Point3> points);

/// Median diameter over clusters, each given as its member coordinates.
double compute_r0(std::span<const std::vector<Point3>> clusters);

struct CellKey {
    std::int64_t i = 0;
    std::int64_t j = 0;
    std::int64_t k = 0;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& c) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(c.i) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(c.j) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(c.k) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

/// Uniform spatial hash over a borrowed point span, which must outlive it.
/// Each indexed point lives in exactly one cell, floor(coordinate / cell) per
/// axis. Coordinates are stored cell-sorted in structure-of-arrays form so
/// range queries run over contiguous memory.
class GridIndex {
public:
    GridIndex(std::span<const Point3> points, double cell);

    double cell_size() const { return cell_; }
    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }
    CellKey cell_of(const Point3& p) const;

    /// Indices of points within the 27 cells around `p` with distance <= radius.
    /// Requires radius <= cell size.
    std::vector<std::uint32_t> query(const Point3& p, double radius) const;

    /// Same as query on the coordinates of indexed point `i`, excluding `i`.
    std::vector<std::uint32_t> neighbors(std::uint32_t i, double radius) const;

    /// Strict variant used by single-linkage: distance < radius.
    void for_each_strictly_within(const Point3& p, double radius,
                                  std::vector<std::uint32_t>& out) const;

    /// Calls `fn(index, squared_distance)` for every point in the 27 cells around p.
    template <class Fn>
    void visit_candidates(const Point3& p, Fn&& fn) const;

    const Point3& point(std::uint32_t i) const { return points_[i]; }

private:
    struct Range {
        std::uint32_t begin = 0;
        std::uint32_t count = 0;
    };

    void gather(const Point3& p, double radius, bool strict, std::optional<std::uint32_t> skip,
                std::vector<std::uint32_t>& out) const;

    double cell_;
    std::span<const Point3> points_;
    std::vector<std::uint32_t> order_;  // original indices, cell-sorted
    std::vector<double> xs_, ys_, zs_;  // coordinates in `order_` order
    std::unordered_map<CellKey, Range, CellKeyHash> cells_;
};

GridIndex grid_build(const FrameCloud& cloud, double cell);

/// Points within `radius` of `p`, excluding indexed points coincident with `p`
/// only when `self` names them. Throws when radius exceeds the cell size.
std::vector<std::uint32_t> grid_neighbors(const GridIndex& index, const Point3& p, double radius,
                                          std::optional<std::uint32_t> self = std::nullopt);

}  // namespace cloudtrack

#include "cloudtrack/detail/grid_inl.hpp"
