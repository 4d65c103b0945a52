#include "cloudtrack/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "cloudtrack/io.hpp"
#include "cloudtrack/metrics.hpp"
#include "cloudtrack/pipeline.hpp"
#include "cloudtrack/synthetic.hpp"

namespace fs = std::filesystem;

namespace cloudtrack {

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    return f;
}

PipelineConfig load_config(const CommonOptions& c) {
    PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : read_pipeline_config_file(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    cfg.propagate();
    return cfg;
}

}  // namespace

int cmd_track(const CommonOptions& c, const TrackArgs& args, std::ostream& log, std::ostream& warn) {
    PipelineConfig cfg = load_config(c);
    if (args.pad) cfg.resolve.pad = *args.pad;
    if (args.ghost_min) cfg.resolve.ghost_min = *args.ghost_min;
    const Sequence clouds = read_frame_clouds_file(args.input);
    const TrackResult r = run_track(clouds, cfg);
    const fs::path out(c.out);
    fs::create_directories(out);
    {
        auto f = open_out(out / "trajectories.csv");
        write_trajectories(f, r.trajectories);
    }
    {
        auto f = open_out(out / "components.csv");
        write_component_report(f, r.components);
    }
    {
        auto f = open_out(out / "run_report.txt");
        f << "input: " << args.input << '\n';
        write_run_report(f, r, cfg);
    }
    if (args.dump_cuts) {
        auto f = open_out(out / "cut_links.csv");
        f << "# source_cluster,target_cluster\n";
        for (const auto& l : r.cut_links) f << l.source << ',' << l.target << '\n';
    }
    const auto& s = r.stats;
    const std::size_t flagged = s.identity_ambiguity + s.degenerate_split + s.unresolvable_window + s.irreducible;
    if (flagged > 0)
        warn << "warning: " << flagged << " occlusion events left to greedy link pruning (see run report)\n";
    log << "trajectories: " << r.trajectories.size() << "\nghosts_removed: " << r.ghosts_removed
        << "\nocclusions_solved: " << s.occlusions_solved << '\n';
    return 0;
}

int cmd_eval(const CommonOptions& c, const EvalArgs& args, std::ostream& log, std::ostream&) {
    PipelineConfig cfg = load_config(c);
    if (args.gate) cfg.metric_gate = *args.gate;
    const auto gt = read_trajectories_file(args.ground_truth);
    const auto hyp = read_trajectories_file(args.hypotheses);
    const MotReport rep = evaluate(gt, hyp, cfg.metric_gate);
    write_report(log, rep);
    const fs::path out(c.out);
    fs::create_directories(out);
    {
        auto f = open_out(out / "mot_report.txt");
        write_report(f, rep);
    }
    if (args.frame_tallies) {
        auto f = open_out(out / "mot_frames.csv");
        write_frame_tallies(f, rep);
    }
    return 0;
}

int cmd_gen(const CommonOptions& c, const GenArgs& args, std::ostream& log, std::ostream& warn) {
    SceneConfig sc = c.config.empty() ? SceneConfig{} : read_scene_config_file(c.config);
    if (c.seed) sc.seed = *c.seed;
    const Scene scene = generate(sc);
    const fs::path out(c.out);
    fs::create_directories(out);
    {
        auto f = open_out(out / "scene.cfg");
        write_scene_config(f, sc);
    }
    {
        auto f = open_out(out / "truth.csv");
        write_trajectories(f, scene.truth);
    }
    write_frame_clouds_file((out / "clouds.csv").string(), scene.clouds);
    {
        auto f = open_out(out / "labels.csv");
        f << "# frame,point_index,label\n";
        for (std::size_t t = 0; t < scene.labels.size(); ++t)
            for (std::size_t i = 0; i < scene.labels[t].size(); ++i)
                f << scene.clouds[t].frame << ',' << i << ',' << scene.labels[t][i] << '\n';
    }
    {
        auto f = open_out(out / "ghosts.csv");
        f << "# label,host,first_frame,last_frame\n";
        for (const auto& g : scene.ghosts)
            f << g.label << ',' << g.host << ',' << g.first_frame << ',' << g.last_frame << '\n';
    }
    if (args.images) {
        const Point3 centre = (sc.arena_min + sc.arena_max) * 0.5;
        const Vec3 extent = sc.arena_max - sc.arena_min;
        const double radius = 2.0 * std::max({extent.x, extent.y, extent.z});
        const auto cams = ring_rig(centre, radius, 0.25 * extent.z, 800.0, 640, 480);
        RenderOptions ro;
        ro.noise = args.noise;
        ro.seed = sc.seed;
        const RenderedScene rendered = render(scene.clouds, cams, ro);
        for (std::size_t k = 0; k < cams.size(); ++k) {
            const fs::path dir = out / ("cam" + std::to_string(k + 1));
            fs::create_directories(dir);
            for (const auto& img : rendered.images[k]) write_pgm((dir / frame_filename(img.frame)).string(), img);
        }
        auto f = open_out(out / "calibration.txt");
        write_calibration(f, cams);
        if (!rendered.warnings.empty())
            warn << "warning: " << rendered.warnings.size() << " point projections fell outside a camera\n";
    }
    log << "targets: " << sc.targets << "\nframes: " << sc.frames << "\nghosts: " << scene.ghosts.size() << '\n';
    return 0;
}

int cmd_recon(const CommonOptions& c, const ReconArgs& args, std::ostream& log, std::ostream& warn) {
    PipelineConfig cfg = load_config(c);
    if (args.threshold) cfg.recon.segment.threshold = *args.threshold;
    if (args.window) cfg.recon.segment.window = *args.window;
    if (args.max_error) cfg.recon.match.max_error = *args.max_error;
    const auto cams = read_calibration_file(args.calibration);
    std::array<std::vector<Image>, 3> images;
    for (std::size_t k = 0; k < 3; ++k) images[k] = read_pgm_sequence(args.camera_dirs[k]);
    const Reconstruction rec = reconstruct_sequence(images, cams, cfg.recon);
    const fs::path out(c.out);
    fs::create_directories(out);
    write_frame_clouds_file((out / "clouds.csv").string(), rec.clouds);
    auto f = open_out(out / "recon_report.csv");
    f << "# frame,active_1,active_2,active_3,triplets,low_confidence_rejected,truncated_window\n";
    std::size_t truncated = 0;
    for (const auto& s : rec.stats) {
        f << s.frame << ',' << s.active_pixels[0] << ',' << s.active_pixels[1] << ',' << s.active_pixels[2] << ','
          << s.triplets << ',' << s.low_confidence_rejected << ',' << (s.truncated_window ? 1 : 0) << '\n';
        truncated += s.truncated_window;
    }
    if (truncated > 0) warn << "warning: " << truncated << " frames used a truncated background window\n";
    log << "frames: " << rec.clouds.size() << '\n';
    return 0;
}

}  // namespace cloudtrack
