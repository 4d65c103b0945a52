#include "cloudtrack/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cloudtrack/io.hpp"

namespace cloudtrack {

void PipelineConfig::propagate() {
    clustering.threads = threads;
    resolve.threads = threads;
    recon.threads = threads;
    resolve.sdp.seed = seed;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

PipelineConfig read_pipeline_config(std::istream& in, const std::string& source) {
    PipelineConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(source, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto real = [&] { return parse_real(val, source, lineno); };
        auto integer = [&] { return parse_integer(val, source, lineno); };
        auto positive = [&] {
            const double v = real();
            if (!(v > 0.0)) throw ParseError(source, lineno, key + " must be positive");
            return v;
        };
        auto at_least = [&](long long lo) {
            const long long v = integer();
            if (v < lo) throw ParseError(source, lineno, key + " must be at least " + std::to_string(lo));
            return v;
        };
        if (key == "alpha") c.clustering.alpha = positive();
        else if (key == "scale_mode") {
            if (val == "per_frame") c.clustering.scale_mode = ScaleMode::per_frame;
            else if (val == "global") c.clustering.scale_mode = ScaleMode::global;
            else throw ParseError(source, lineno, "scale_mode must be per_frame or global");
        }
        else if (key == "gate_multiplier") c.linker.gate_multiplier = positive();
        else if (key == "radius_multiplier") c.linker.radius_multiplier = positive();
        else if (key == "pad") c.resolve.pad = static_cast<int>(at_least(0));
        else if (key == "ghost_min") c.resolve.ghost_min = static_cast<int>(at_least(0));
        else if (key == "bridge_frames") c.resolve.bridge_frames = static_cast<int>(at_least(0));
        else if (key == "beta") c.resolve.beta = positive();
        else if (key == "sdp_rank") c.resolve.sdp.rank = static_cast<int>(at_least(2));
        else if (key == "sdp_iterations") c.resolve.sdp.iterations = static_cast<int>(at_least(1));
        else if (key == "sdp_tolerance") c.resolve.sdp.tolerance = positive();
        else if (key == "sdp_restarts") c.resolve.sdp.restarts = static_cast<int>(at_least(1));
        else if (key == "sdp_hyperplanes") c.resolve.sdp.hyperplanes = static_cast<int>(at_least(0));
        else if (key == "repair_degenerate") c.resolve.repair_degenerate = at_least(0) != 0;
        else if (key == "metric_gate") c.metric_gate = positive();
        else if (key == "seg_threshold") c.recon.segment.threshold = static_cast<int>(at_least(0));
        else if (key == "seg_window") c.recon.segment.window = static_cast<int>(at_least(3));
        else if (key == "max_error") c.recon.match.max_error = positive();
        else if (key == "band_factor") c.recon.match.band_factor = positive();
        else if (key == "threads") c.threads = static_cast<unsigned>(at_least(1));
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(at_least(0));
        else throw ParseError(source, lineno, "unknown key '" + key + "'");
    }
    if (c.recon.segment.window % 2 == 0) throw ParseError(source, lineno, "seg_window must be odd");
    c.propagate();
    return c;
}

PipelineConfig read_pipeline_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_pipeline_config(in, path);
}

void write_pipeline_config(std::ostream& out, const PipelineConfig& c) {
    out << "alpha = " << format_real(c.clustering.alpha) << '\n'
        << "scale_mode = " << (c.clustering.scale_mode == ScaleMode::global ? "global" : "per_frame") << '\n'
        << "gate_multiplier = " << format_real(c.linker.gate_multiplier) << '\n'
        << "radius_multiplier = " << format_real(c.linker.radius_multiplier) << '\n'
        << "pad = " << c.resolve.pad << '\n'
        << "ghost_min = " << c.resolve.ghost_min << '\n'
        << "bridge_frames = " << c.resolve.bridge_frames << '\n'
        << "beta = " << format_real(c.resolve.beta) << '\n'
        << "sdp_rank = " << c.resolve.sdp.rank << '\n'
        << "sdp_iterations = " << c.resolve.sdp.iterations << '\n'
        << "sdp_tolerance = " << format_real(c.resolve.sdp.tolerance) << '\n'
        << "sdp_restarts = " << c.resolve.sdp.restarts << '\n'
        << "sdp_hyperplanes = " << c.resolve.sdp.hyperplanes << '\n'
        << "repair_degenerate = " << (c.resolve.repair_degenerate ? 1 : 0) << '\n'
        << "metric_gate = " << format_real(c.metric_gate) << '\n'
        << "seg_threshold = " << c.recon.segment.threshold << '\n'
        << "seg_window = " << c.recon.segment.window << '\n'
        << "max_error = " << format_real(c.recon.match.max_error) << '\n'
        << "band_factor = " << format_real(c.recon.match.band_factor) << '\n'
        << "threads = " << c.threads << '\n'
        << "seed = " << c.seed << '\n';
}

TrackResult run_track(const Sequence& clouds, const PipelineConfig& config) {
    using clock = std::chrono::steady_clock;
    TrackResult r;
    r.frames = clouds.size();
    for (const auto& c : clouds) r.points += c.points.size();
    if (clouds.empty()) return r;

    auto t0 = clock::now();
    auto lap = [&](const char* stage) {
        const auto t1 = clock::now();
        r.timings.emplace_back(stage, std::chrono::duration<double>(t1 - t0).count());
        t0 = t1;
    };

    const ClusteredSequence clustered = cluster_sequence(clouds, config.clustering);
    r.clusters = clustered.cluster_count;
    r.global_scales = clustered.global;
    lap("clustering");

    const ClusterGraph graph = build_graph(clustered, config.linker);
    r.links = graph.links.size();
    lap("linking");

    r.components = connected_components(graph, config.resolve.ghost_min, config.resolve.bridge_frames);
    lap("components");

    Resolution res = resolve_components(graph, r.components, clustered.scales, config.resolve);
    r.cut_links = std::move(res.cut_links);
    r.stats = res.stats;
    lap("occlusions");

    GhostRemoval g = remove_ghosts(build_trajectories(res.chains), config.resolve.ghost_min);
    r.ghosts_removed = g.removed;
    r.trajectories = std::move(g.kept);
    for (std::size_t i = 0; i < r.trajectories.size(); ++i) r.trajectories[i].identity = static_cast<int>(i);
    lap("trajectories");
    return r;
}

void write_run_report(std::ostream& out, const TrackResult& r, const PipelineConfig& c) {
    std::size_t by_class[4] = {0, 0, 0, 0};
    for (const auto& comp : r.components) ++by_class[static_cast<int>(comp.classification)];
    out << "frames: " << r.frames << '\n'
        << "points: " << r.points << '\n'
        << "clusters: " << r.clusters << '\n'
        << "links: " << r.links << '\n'
        << "r1_global: " << format_real(r.global_scales.r1) << '\n'
        << "r0_global: " << format_real(r.global_scales.r0) << '\n'
        << "components: " << r.components.size() << '\n'
        << "components_chain: " << by_class[0] << '\n'
        << "components_x_shape: " << by_class[1] << '\n'
        << "components_y_shape: " << by_class[2] << '\n'
        << "components_complex: " << by_class[3] << '\n'
        << "y_cuts: " << r.stats.y_cuts << '\n'
        << "merges_collapsed: " << r.stats.merges_collapsed << '\n'
        << "occlusions_solved: " << r.stats.occlusions_solved << '\n'
        << "exact_solves: " << r.stats.exact_solves << '\n'
        << "sdp_solves: " << r.stats.sdp_solves << '\n'
        << "sdp_not_converged: " << r.stats.not_converged << '\n'
        << "flag_identity_ambiguity: " << r.stats.identity_ambiguity << '\n'
        << "flag_degenerate_split: " << r.stats.degenerate_split << '\n'
        << "degenerate_repaired: " << r.stats.degenerate_repaired << '\n'
        << "flag_unresolvable_window: " << r.stats.unresolvable_window << '\n'
        << "irreducible_events: " << r.stats.irreducible << '\n'
        << "links_pruned: " << r.stats.links_pruned << '\n'
        << "ghosts_removed: " << r.ghosts_removed << '\n'
        << "trajectories: " << r.trajectories.size() << '\n';
    for (const auto& [stage, sec] : r.timings) out << "time_" << stage << "_s: " << format_real(sec) << '\n';
    out << "# thresholds\n";
    std::ostringstream cfg;
    write_pipeline_config(cfg, c);
    std::istringstream lines(cfg.str());
    for (std::string l; std::getline(lines, l);) {
        const auto eq = l.find(" = ");
        out << "config_" << l.substr(0, eq) << ": " << l.substr(eq + 3) << '\n';
    }
}

}  // namespace cloudtrack
