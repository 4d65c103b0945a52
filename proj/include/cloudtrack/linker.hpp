#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cloudtrack/clustering.hpp"
#include "cloudtrack/geometry.hpp"

namespace cloudtrack {

/// Directed time edge between clusters of consecutive frames.
struct ClusterLink {
    ClusterId source = 0;
    ClusterId target = 0;
    Vec3 velocity;           // m/frame
    std::uint32_t support = 0;  // point links behind it; 0 for assignment links
    Point3 arrival;          // baricenter of the target-side sub-cluster
};

/// source point at frame t -> target point at frame t + 1.
struct PointLink {
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    friend bool operator==(const PointLink&, const PointLink&) = default;
    friend auto operator<=>(const PointLink&, const PointLink&) = default;
};

struct LinkerOptions {
    double gate_multiplier = 5.0;    // assignment gate G = multiplier * r0
    double radius_multiplier = 1.0;  // point-link radius = multiplier * r1
};

/// Gated baricenter assignment between two frames. Unmatched clusters get no link.
std::vector<ClusterLink> bootstrap_links(std::span<const Cluster> from, std::span<const Cluster> to,
                                         double gate);

/// Member coordinates translated by one frame of `velocity`.
std::vector<Point3> predict_points(const FrameCloud& cloud, const Cluster& cluster, const Vec3& velocity);

/// A link from every predicted source to every point of `next` within
/// distance <= radius. `sources[k]` is the frame-t index of `predicted[k]`.
/// Output sorted by (source, target).
std::vector<PointLink> link_points(std::span<const Point3> predicted, std::span<const std::uint32_t> sources,
                                   const FrameCloud& next, double radius);

/// Groups point links by (source cluster, target cluster). Velocity is the
/// displacement between the baricenters of the participating sub-clusters.
std::vector<ClusterLink> lift_links(std::span<const PointLink> links, const FrameCloud& cloud,
                                    std::span<const Cluster> clusters, const FrameCloud& next,
                                    std::span<const Cluster> next_clusters);

/// Gated assignment between clusters at t without outbound links and
/// clusters at t + 1 without inbound links.
std::vector<ClusterLink> match_unlinked(std::span<const Cluster> from, std::span<const Cluster> to,
                                        std::span<const ClusterLink> existing, double gate);

/// Clusters as nodes (node index == cluster id) plus time links.
struct ClusterGraph {
    const Sequence* clouds = nullptr;
    std::vector<Cluster> nodes;
    std::vector<std::uint32_t> slot;  // node -> position in *clouds
    std::vector<ClusterLink> links;   // sorted by (source, target)
    std::vector<std::vector<std::uint32_t>> outbound;  // link indices per node
    std::vector<std::vector<std::uint32_t>> inbound;

    const FrameCloud& cloud_of(ClusterId id) const { return (*clouds)[slot[id]]; }
    void index_links();
};

/// Links the whole sequence. Frames whose numbers are not consecutive are
/// not linked.
ClusterGraph build_graph(const ClusteredSequence& clustered, const LinkerOptions& options);

/// `frame,source_cluster,target_cluster,vx,vy,vz,support` rows.
void write_graph_dump(std::ostream& out, const ClusterGraph& graph);

}  // namespace cloudtrack
