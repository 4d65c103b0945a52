// cloudtrack: track | eval | gen | recon

#include <CLI11.hpp>

#include <iostream>

#include "cloudtrack/commands.hpp"

using namespace cloudtrack;

int main(int argc, char** argv) {
    CLI::App app{"multi-target 3D tracking from point-cloud sequences"};
    app.require_subcommand(1);
    CommonOptions common;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "configuration file");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { common.seed = v; }, "random seed");
        sub->add_option_function<unsigned>(
               "--threads", [&](unsigned v) { common.threads = v; }, "worker threads")
            ->check(CLI::PositiveNumber);
    };

    TrackArgs ta;
    auto* track = app.add_subcommand("track", "point clouds to trajectories");
    add_common(track);
    track->add_option("input", ta.input, "FrameCloud CSV")->required()->check(CLI::ExistingFile);
    track->add_option_function<int>("--pad", [&](int v) { ta.pad = v; }, "occlusion window pad in frames")
        ->check(CLI::NonNegativeNumber);
    track->add_option_function<int>("--ghost-min", [&](int v) { ta.ghost_min = v; }, "minimum trajectory span in frames")
        ->check(CLI::NonNegativeNumber);
    track->add_flag("--dump-cuts", ta.dump_cuts, "write removed Y links");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "CLEAR-MOT evaluation");
    add_common(eval);
    eval->add_option("ground_truth", ea.ground_truth, "ground-truth trajectories")->required()->check(CLI::ExistingFile);
    eval->add_option("hypotheses", ea.hypotheses, "tracked trajectories")->required()->check(CLI::ExistingFile);
    eval->add_option_function<double>("--gate", [&](double v) { ea.gate = v; }, "match gate in meters")
        ->check(CLI::PositiveNumber);
    eval->add_flag("--frames", ea.frame_tallies, "write per-frame tallies");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "synthetic scene");
    add_common(gen);
    gen->add_flag("--images", ga.images, "render three camera sequences");
    gen->add_option("--noise", ga.noise, "pixel jitter standard deviation")->check(CLI::NonNegativeNumber);

    ReconArgs ra;
    auto* recon = app.add_subcommand("recon", "three-camera reconstruction");
    add_common(recon);
    recon->add_option("cam1", ra.camera_dirs[0], "camera 1 frames")->required()->check(CLI::ExistingDirectory);
    recon->add_option("cam2", ra.camera_dirs[1], "camera 2 frames")->required()->check(CLI::ExistingDirectory);
    recon->add_option("cam3", ra.camera_dirs[2], "camera 3 frames")->required()->check(CLI::ExistingDirectory);
    recon->add_option("--calibration", ra.calibration, "camera matrices")->required()->check(CLI::ExistingFile);
    recon->add_option_function<int>("--threshold", [&](int v) { ra.threshold = v; }, "segmentation threshold (0-255)")
        ->check(CLI::Range(0, 255));
    recon->add_option_function<int>("--window", [&](int v) { ra.window = v; }, "background window length (odd)");
    recon->add_option_function<double>("--max-error", [&](double v) { ra.max_error = v; }, "reprojection gate in pixels")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*track) return cmd_track(common, ta, std::cout, std::cerr);
        if (*eval) return cmd_eval(common, ea, std::cout, std::cerr);
        if (*gen) return cmd_gen(common, ga, std::cout, std::cerr);
        if (*recon) return cmd_recon(common, ra, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
