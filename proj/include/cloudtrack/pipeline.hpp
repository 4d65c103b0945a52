#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cloudtrack/clustering.hpp"
#include "cloudtrack/components.hpp"
#include "cloudtrack/linker.hpp"
#include "cloudtrack/multicam.hpp"
#include "cloudtrack/resolver.hpp"
#include "cloudtrack/trajectory.hpp"

namespace cloudtrack {

struct PipelineConfig {
    ClusteringOptions clustering;
    LinkerOptions linker;
    ResolveOptions resolve;
    double metric_gate = 0.3;  // meters
    ReconstructionParams recon;
    unsigned threads = 1;
    std::uint64_t seed = 1;

    /// Pushes `threads` and `seed` into the stage options.
    void propagate();
};

/// `key = value` lines with `#` comments. Unknown keys and bad values throw
/// ParseError.
PipelineConfig read_pipeline_config(std::istream& in, const std::string& source = "<stream>");
PipelineConfig read_pipeline_config_file(const std::string& path);
void write_pipeline_config(std::ostream& out, const PipelineConfig& config);

struct TrackResult {
    std::vector<Trajectory> trajectories;
    std::vector<Component> components;
    std::vector<CutLink> cut_links;
    ResolveStats stats;
    std::size_t frames = 0;
    std::size_t points = 0;
    std::size_t clusters = 0;
    std::size_t links = 0;
    std::size_t ghosts_removed = 0;
    ScaleStats global_scales;
    std::vector<std::pair<std::string, double>> timings;  // stage, seconds
};

/// Clustering, linking, components, occlusion solving, ghost removal.
/// Identities are numbered 0, 1, ... by first frame.
TrackResult run_track(const Sequence& clouds, const PipelineConfig& config);

/// Structured `key: value` run report, thresholds included.
void write_run_report(std::ostream& out, const TrackResult& result, const PipelineConfig& config);

}  // namespace cloudtrack
