#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cloudtrack {

/// Options shared by every subcommand.
struct CommonOptions {
    std::string config;  // empty: defaults
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

struct TrackArgs {
    std::string input;
    std::optional<int> pad;
    std::optional<int> ghost_min;
    bool dump_cuts = false;
};

struct EvalArgs {
    std::string ground_truth;
    std::string hypotheses;
    std::optional<double> gate;
    bool frame_tallies = false;
};

struct GenArgs {
    bool images = false;
    double noise = 0.0;  // pixels
};

struct ReconArgs {
    std::array<std::string, 3> camera_dirs;
    std::string calibration;
    std::optional<int> threshold;
    std::optional<int> window;
    std::optional<double> max_error;
};

/// Writes trajectories.csv, components.csv, run_report.txt and, with
/// dump_cuts, cut_links.csv into `out`.
int cmd_track(const CommonOptions& common, const TrackArgs& args, std::ostream& log, std::ostream& warn);

/// Prints the report and writes mot_report.txt (and mot_frames.csv).
int cmd_eval(const CommonOptions& common, const EvalArgs& args, std::ostream& log, std::ostream& warn);

/// `--config` names a scene file here. Writes scene.cfg, truth.csv,
/// clouds.csv, labels.csv, ghosts.csv and optionally cam1..3 + calibration.txt.
int cmd_gen(const CommonOptions& common, const GenArgs& args, std::ostream& log, std::ostream& warn);

/// Writes clouds.csv and recon_report.csv.
int cmd_recon(const CommonOptions& common, const ReconArgs& args, std::ostream& log, std::ostream& warn);

}  // namespace cloudtrack
