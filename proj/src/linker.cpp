#include "cloudtrack/linker.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "cloudtrack/io.hpp"
#include "cloudtrack/munkres.hpp"

namespace cloudtrack {

std::vector<ClusterLink> bootstrap_links(std::span<const Cluster> from, std::span<const Cluster> to, double gate) {
    CostMatrix cost(from.size(), to.size());
    for (std::size_t i = 0; i < from.size(); ++i)
        for (std::size_t j = 0; j < to.size(); ++j) cost(i, j) = distance(from[i].baricenter, to[j].baricenter);
    const Assignment a = solve_assignment(cost, gate);
    std::vector<ClusterLink> links;
    for (std::size_t i = 0; i < from.size(); ++i) {
        const long j = a.row_to_col[i];
        if (j < 0) continue;
        const Cluster& t = to[static_cast<std::size_t>(j)];
        links.push_back({from[i].id, t.id, t.baricenter - from[i].baricenter, 0, t.baricenter});
    }
    return links;
}

std::vector<Point3> predict_points(const FrameCloud& cloud, const Cluster& cluster, const Vec3& velocity) {
    std::vector<Point3> out;
    out.reserve(cluster.points.size());
    for (auto idx : cluster.points) out.push_back(cloud.points[idx] + velocity);
    return out;
}

std::vector<PointLink> link_points(std::span<const Point3> predicted, std::span<const std::uint32_t> sources,
                                   const FrameCloud& next, double radius) {
    if (!(radius > 0.0)) throw Error("link radius must be positive");
    if (predicted.size() != sources.size()) throw Error("predicted points and source indices differ in length");
    std::vector<PointLink> out;
    if (next.points.empty()) return out;
    const GridIndex grid(next.points, radius);
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        for (std::uint32_t j : grid.query(predicted[k], radius)) out.push_back({sources[k], j});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

std::vector<std::uint32_t> owner_of_points(const FrameCloud& cloud, std::span<const Cluster> clusters) {
    std::vector<std::uint32_t> owner(cloud.points.size(), UINT32_MAX);
    for (std::uint32_t c = 0; c < clusters.size(); ++c)
        for (auto idx : clusters[c].points) owner[idx] = c;
    return owner;
}

Point3 mean_at(const FrameCloud& cloud, const std::vector<std::uint32_t>& idx) {
    Point3 s;
    for (auto i : idx) s += cloud.points[i];
    return s / static_cast<double>(idx.size());
}

}  // namespace

std::vector<ClusterLink> lift_links(std::span<const PointLink> links, const FrameCloud& cloud,
                                    std::span<const Cluster> clusters, const FrameCloud& next,
                                    std::span<const Cluster> next_clusters) {
    const auto src_owner = owner_of_points(cloud, clusters);
    const auto dst_owner = owner_of_points(next, next_clusters);
    struct Group {
        std::vector<std::uint32_t> src, dst;
        std::uint32_t support = 0;
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, Group> groups;
    for (const auto& l : links) {
        const std::uint32_t a = src_owner.at(l.source), b = dst_owner.at(l.target);
        if (a == UINT32_MAX || b == UINT32_MAX) throw Error("point link to an unclustered point");
        Group& g = groups[{a, b}];
        g.src.push_back(l.source);
        g.dst.push_back(l.target);
        ++g.support;
    }
    std::vector<ClusterLink> out;
    out.reserve(groups.size());
    for (auto& [key, g] : groups) {
        std::sort(g.src.begin(), g.src.end());
        g.src.erase(std::unique(g.src.begin(), g.src.end()), g.src.end());
        std::sort(g.dst.begin(), g.dst.end());
        g.dst.erase(std::unique(g.dst.begin(), g.dst.end()), g.dst.end());
        const Point3 arrival = mean_at(next, g.dst);
        out.push_back({clusters[key.first].id, next_clusters[key.second].id, arrival - mean_at(cloud, g.src), g.support,
                       arrival});
    }
    return out;
}

std::vector<ClusterLink> match_unlinked(std::span<const Cluster> from, std::span<const Cluster> to,
                                        std::span<const ClusterLink> existing, double gate) {
    std::vector<Cluster> free_from, free_to;
    for (const auto& c : from) {
        const bool linked = std::any_of(existing.begin(), existing.end(), [&](const ClusterLink& l) { return l.source == c.id; });
        if (!linked) free_from.push_back(c);
    }
    for (const auto& c : to) {
        const bool linked = std::any_of(existing.begin(), existing.end(), [&](const ClusterLink& l) { return l.target == c.id; });
        if (!linked) free_to.push_back(c);
    }
    return bootstrap_links(free_from, free_to, gate);
}

void ClusterGraph::index_links() {
    std::sort(links.begin(), links.end(), [](const ClusterLink& a, const ClusterLink& b) {
        return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    outbound.assign(nodes.size(), {});
    inbound.assign(nodes.size(), {});
    for (std::uint32_t k = 0; k < links.size(); ++k) {
        if (k > 0 && links[k].source == links[k - 1].source && links[k].target == links[k - 1].target)
            throw Error("duplicate cluster link");
        outbound[links[k].source].push_back(k);
        inbound[links[k].target].push_back(k);
    }
}

ClusterGraph build_graph(const ClusteredSequence& clustered, const LinkerOptions& options) {
    if (!(options.gate_multiplier > 0.0) || !(options.radius_multiplier > 0.0))
        throw Error("linker multipliers must be positive");
    ClusterGraph g;
    g.clouds = clustered.clouds;
    g.nodes.resize(clustered.cluster_count);
    g.slot.resize(clustered.cluster_count);
    for (std::size_t f = 0; f < clustered.clusters.size(); ++f) {
        for (const auto& c : clustered.clusters[f]) {
            g.nodes[c.id] = c;
            g.slot[c.id] = static_cast<std::uint32_t>(f);
        }
    }

    // Inbound links of the frame being extended, keyed by target cluster.
    std::map<ClusterId, std::vector<ClusterLink>> arriving;
    for (std::size_t f = 0; f + 1 < clustered.clusters.size(); ++f) {
        const FrameCloud& cloud = clustered.cloud(f);
        const FrameCloud& next = clustered.cloud(f + 1);
        const auto& cs = clustered.clusters[f];
        const auto& ns = clustered.clusters[f + 1];
        if (next.frame != cloud.frame + 1) {
            arriving.clear();
            continue;
        }
        const double gate = options.gate_multiplier * clustered.scales[f].r0;
        std::vector<ClusterLink> step;
        if (f == 0 || arriving.empty()) {
            step = bootstrap_links(cs, ns, gate);
        } else {
            const double radius = options.radius_multiplier * clustered.scales[f + 1].r1;
            std::vector<Point3> predicted;
            std::vector<std::uint32_t> sources;
            for (const auto& c : cs) {
                const auto it = arriving.find(c.id);
                for (auto idx : c.points) {
                    Vec3 v;
                    if (it != arriving.end()) {
                        // Nearest arriving sub-cluster supplies the velocity.
                        const ClusterLink* best = &it->second.front();
                        double bd = squared_distance(cloud.points[idx], best->arrival);
                        for (const auto& l : it->second) {
                            const double d = squared_distance(cloud.points[idx], l.arrival);
                            if (d < bd) {
                                bd = d;
                                best = &l;
                            }
                        }
                        v = best->velocity;
                    }
                    predicted.push_back(cloud.points[idx] + v);
                    sources.push_back(idx);
                }
            }
            const auto pl = link_points(predicted, sources, next, radius);
            step = lift_links(pl, cloud, cs, next, ns);
            const auto extra = match_unlinked(cs, ns, step, gate);
            step.insert(step.end(), extra.begin(), extra.end());
        }
        arriving.clear();
        for (const auto& l : step) arriving[l.target].push_back(l);
        g.links.insert(g.links.end(), step.begin(), step.end());
    }
    g.index_links();
    return g;
}

void write_graph_dump(std::ostream& out, const ClusterGraph& graph) {
    out << "# frame,source_cluster,target_cluster,vx,vy,vz,support\n";
    for (const auto& l : graph.links) {
        out << graph.nodes[l.source].frame << ',' << l.source << ',' << l.target << ',' << format_real(l.velocity.x)
            << ',' << format_real(l.velocity.y) << ',' << format_real(l.velocity.z) << ',' << l.support << '\n';
    }
}

}  // namespace cloudtrack
