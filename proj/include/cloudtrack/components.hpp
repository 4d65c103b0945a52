#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cloudtrack/linker.hpp"

namespace cloudtrack {

enum class ComponentClass { chain, x_shape, y_shape, complex };

const char* class_name(ComponentClass c);

struct Component {
    std::uint32_t id = 0;
    std::vector<ClusterId> nodes;  // sorted by (frame, id)
    ComponentClass classification = ComponentClass::chain;
    int first_frame = 0;
    int last_frame = 0;
};

/// Mutable copy of one component. Nodes may be split and links rewired
/// without touching the shared cluster graph.
struct ComponentGraph {
    struct Node {
        int frame = 0;
        std::uint32_t slot = 0;  // cloud position in the sequence
        std::vector<std::uint32_t> points;
        Point3 baricenter;
        ClusterId origin = 0;    // cluster the points came from
        bool derived = false;    // created by a split or a merge
        bool alive = true;
    };
    struct Edge {
        std::uint32_t to = 0;
        std::uint32_t support = 0;
        Vec3 velocity;
    };

    const Sequence* clouds = nullptr;
    std::vector<Node> nodes;
    std::vector<std::vector<Edge>> succ;
    std::vector<std::vector<std::uint32_t>> pred;

    static ComponentGraph extract(const ClusterGraph& graph, const Component& component);

    std::size_t in_degree(std::uint32_t n) const { return pred[n].size(); }
    std::size_t out_degree(std::uint32_t n) const { return succ[n].size(); }
    bool junction(std::uint32_t n) const { return in_degree(n) >= 2 || out_degree(n) >= 2; }
    const FrameCloud& cloud_of(std::uint32_t n) const { return (*clouds)[nodes[n].slot]; }
    const Edge* edge(std::uint32_t from, std::uint32_t to) const;

    std::uint32_t add_node(Node node);
    void add_edge(std::uint32_t from, std::uint32_t to, std::uint32_t support, const Vec3& velocity);
    void remove_edge(std::uint32_t from, std::uint32_t to);
    /// Removes every link touching n and marks it dead.
    void remove_node(std::uint32_t n);
    std::vector<std::uint32_t> alive_nodes() const;
};

/// Undirected reachability classes by breadth-first search, ordered by
/// smallest member id, each classified with the given thresholds.
std::vector<Component> connected_components(const ClusterGraph& graph, int ghost_min = 10, int bridge_frames = 40);

/// Maximal run of one-to-one nodes, in time order.
struct Branch {
    std::vector<std::uint32_t> nodes;
    bool free_end = false;  // starts with a birth (entering) or ends with a death (exiting)
};

struct OcclusionEvent {
    std::vector<std::uint32_t> core;  // junctions plus short bridges between them
    int first_frame = 0;
    int last_frame = 0;
    std::vector<Branch> entering;     // oldest node first
    std::vector<Branch> exiting;
};

/// Junctions joined through one-to-one runs of at most `bridge_frames` nodes
/// form one event. Events are ordered by first frame.
std::vector<OcclusionEvent> find_events(const ComponentGraph& graph, int bridge_frames);

/// Branch ending at a junction from the past (`entering`) or leaving one.
Branch trace_branch(const ComponentGraph& graph, std::uint32_t start, bool backward);

/// chain  : every node one-to-one.
/// y-shape: a single junction, joined on its two-link side by a short branch
///          with a free end (or its time mirror).
/// x-shape: a single event with two entering and two exiting branches.
ComponentClass classify(const ComponentGraph& graph, int ghost_min, int bridge_frames);

struct WindowNode {
    int frame = 0;
    std::uint32_t point = 0;
    std::uint32_t node = 0;  // ComponentGraph node
    int branch = -1;         // index into entering then exiting, -1 for core
    Point3 position;
    Vec3 displacement;       // predicted motion to the next frame
};

struct OcclusionWindow {
    int first_frame = 0;
    int last_frame = 0;
    int occlusion_first = 0;
    int occlusion_last = 0;
    std::size_t entering = 0;
    std::size_t exiting = 0;
    bool unresolvable = false;
    std::vector<WindowNode> nodes;  // sorted by (frame, point)
};

/// Points of the event's core and branches within [first - pad, last + pad],
/// clipped to [seq_first, seq_last]. Each branch point moves with its
/// branch's least-squares velocity; each core point takes the velocity of the
/// branch whose extrapolated centre is nearest.
OcclusionWindow occlusion_window(const ComponentGraph& graph, const OcclusionEvent& event, int pad,
                                 int seq_first, int seq_last);

/// Events of a complex component with matching entering and exiting counts
/// of at least two; others are returned in `irreducible`.
struct Decomposition {
    std::vector<OcclusionEvent> problems;
    std::vector<OcclusionEvent> irreducible;
};
Decomposition decompose_complex(const ComponentGraph& graph, int bridge_frames);

/// `component_id,classification,first_frame,last_frame,n_clusters` rows.
void write_component_report(std::ostream& out, std::span<const Component> components);

}  // namespace cloudtrack
