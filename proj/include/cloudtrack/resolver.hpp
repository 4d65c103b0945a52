#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cloudtrack/components.hpp"
#include "cloudtrack/partition.hpp"

namespace cloudtrack {

struct ResolveOptions {
    int pad = 3;
    int ghost_min = 10;
    int bridge_frames = 40;
    double beta = 2.2;
    SdpOptions sdp;
    bool repair_degenerate = true;  // relabel one-sided frames from the side tracks
    unsigned threads = 1;
};

/// Link removed by a Y cut, in original cluster ids.
struct CutLink {
    ClusterId source = 0;
    ClusterId target = 0;
    friend bool operator==(const CutLink&, const CutLink&) = default;
    friend auto operator<=>(const CutLink&, const CutLink&) = default;
};

struct ChainSample {
    int frame = 0;
    Point3 baricenter;
    ClusterId origin = 0;
};

/// One identity-consistent run of nodes after resolution.
struct Chain {
    std::uint32_t component = 0;
    std::vector<ChainSample> samples;
};

struct ResolveStats {
    std::size_t y_cuts = 0;
    std::size_t merges_collapsed = 0;     // one-in/one-out events folded into one node per frame
    std::size_t occlusions_solved = 0;
    std::size_t exact_solves = 0;
    std::size_t sdp_solves = 0;
    std::size_t not_converged = 0;
    std::size_t identity_ambiguity = 0;
    std::size_t degenerate_split = 0;
    std::size_t degenerate_repaired = 0;  // splits that needed one-sided frames relabeled
    std::size_t unresolvable_window = 0;
    std::size_t irreducible = 0;          // events left to greedy link pruning
    std::size_t links_pruned = 0;

    ResolveStats& operator+=(const ResolveStats& o);
};

struct Resolution {
    std::vector<Chain> chains;      // ordered by (first frame, component, creation)
    std::vector<CutLink> cut_links; // sorted
    ResolveStats stats;
};

/// Cuts short free-ended spurs off junctions (and their time mirror), unless
/// the free end lies on the sequence boundary. Returns the removed links.
std::vector<CutLink> cut_y_spurs(ComponentGraph& graph, int ghost_min, int seq_first, int seq_last);

/// Splits one event of `graph` by energy partition. Returns false (and
/// counts the reason) when the event is left unchanged.
bool resolve_event(ComponentGraph& graph, const OcclusionEvent& event, std::span<const ScaleStats> scales,
                   int seq_first, int seq_last, const ResolveOptions& options, ResolveStats& stats);

/// Keeps links by descending support so every node ends one-to-one.
std::size_t prune_to_chains(ComponentGraph& graph);

/// Maximal one-to-one paths of alive nodes, ordered by first node.
std::vector<Chain> extract_chains(const ComponentGraph& graph, std::uint32_t component);

/// Full resolution of every component; components run in parallel and the
/// result does not depend on the thread count.
Resolution resolve_components(const ClusterGraph& graph, std::span<const Component> components,
                              std::span<const ScaleStats> scales, const ResolveOptions& options);

}  // namespace cloudtrack
