#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cloudtrack/geometry.hpp"

namespace cloudtrack {

using ClusterId = std::uint32_t;

/// Connected dense subset of one frame's cloud.
struct Cluster {
    int frame = 0;
    ClusterId id = 0;
    std::vector<std::uint32_t> points;  // ascending indices into the frame cloud
    Point3 baricenter;
};

/// Single-linkage clustering: points joined by a chain of pairs each strictly
/// closer than `threshold` share a cluster. Expected O(M) through a grid with
/// cell size `threshold`. Clusters come out ordered by their smallest point
/// index, with ids first_id, first_id + 1, ...
std::vector<Cluster> cluster_frame(const FrameCloud& cloud, double threshold, ClusterId first_id = 0);

/// Coordinates of a cluster's points.
std::vector<Point3> member_points(const FrameCloud& cloud, const Cluster& cluster);

/// Median cluster diameter of one frame.
double compute_r0(const FrameCloud& cloud, const std::vector<Cluster>& clusters);

enum class ScaleMode { per_frame, global };

struct ClusteringOptions {
    double alpha = 6.0;  // merge threshold multiplier on r1
    ScaleMode scale_mode = ScaleMode::per_frame;
    unsigned threads = 1;
};

/// Every frame clustered, with the scales that were used.
struct ClusteredSequence {
    const Sequence* clouds = nullptr;
    std::vector<std::vector<Cluster>> clusters;  // parallel to *clouds
    std::vector<ScaleStats> scales;              // parallel to *clouds
    ScaleStats global;                           // medians over frames
    std::size_t cluster_count = 0;

    const FrameCloud& cloud(std::size_t f) const { return (*clouds)[f]; }
};

/// Clusters every frame. Ids are unique across the sequence in (frame, min
/// point index) order. The result references `clouds`, which must outlive it.
ClusteredSequence cluster_sequence(const Sequence& clouds, const ClusteringOptions& options);

/// Debug dump: `frame,cluster_id,point_index` rows.
void write_cluster_dump(std::ostream& out, const ClusteredSequence& seq);

}  // namespace cloudtrack
