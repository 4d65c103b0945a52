#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cloudtrack/geometry.hpp"
#include "cloudtrack/multicam.hpp"
#include "cloudtrack/trajectory.hpp"

namespace cloudtrack {

struct ScriptedCrossing {
    int first = 0;           // target index
    int second = 0;          // target index
    int frame = 0;           // frame of closest approach
    double approach = 0.0;   // centre distance at that frame, meters
};

struct SceneConfig {
    int targets = 10;
    int frames = 100;
    Point3 arena_min{-10.0, -10.0, -10.0};
    Point3 arena_max{10.0, 10.0, 10.0};
    double speed_min = 0.03;  // m/frame
    double speed_max = 0.05;
    int segment_frames = 6;   // frames between heading changes
    double max_turn = 0.1;    // radians per heading change
    int points_per_target = 30;
    double spread = 0.05;     // standard deviation of each target's isotropic point cloud
    double min_separation = 0.8;  // between unrelated target centres, all frames
    double crossing_angle_min = 1.0;  // radians, between crossing velocities
    double crossing_angle_max = 2.0;
    std::vector<ScriptedCrossing> crossings;
    double ghost_rate = 0.0;  // injected ghosts per target
    int ghost_min_frames = 3;
    int ghost_max_frames = 8;
    int ghost_points = 10;
    double ghost_spread = 0.03;
    double ghost_closing_speed = 0.3;  // m/frame, relative to the host
    int placement_attempts = 200;
    std::uint64_t seed = 1;
};

/// Parses `key = value` lines (`#` comments). Crossings are given as
/// `crossing = first second frame approach`, one per line. Unknown keys throw.
SceneConfig read_scene_config(std::istream& in, const std::string& source = "<stream>");
SceneConfig read_scene_config_file(const std::string& path);
void write_scene_config(std::ostream& out, const SceneConfig& config);

/// Schedules `count` crossings over disjoint target pairs at seeded frames.
std::vector<ScriptedCrossing> random_crossings(int targets, int frames, int count, double approach,
                                               int margin, std::uint64_t seed);

inline constexpr int kGhostLabelBase = 1'000'000;

/// A spurious short-lived cluster that ends next to a real target, so the
/// linker joins it to the host with one wrong link.
struct InjectedGhost {
    int label = 0;        // kGhostLabelBase + ordinal
    int host = 0;         // target index
    int first_frame = 0;  // ghost alive in [first_frame, last_frame]
    int last_frame = 0;
};

struct Scene {
    std::vector<Trajectory> truth;             // identity = target index, one sample per frame
    Sequence clouds;                           // one cloud per frame, frames 0..frames-1
    std::vector<std::vector<int>> labels;      // per frame, per point: target index or ghost label
    std::vector<InjectedGhost> ghosts;
    std::vector<std::vector<Point3>> centers;  // [target][frame]
};

/// Deterministic given config.seed. Each target follows a piecewise-constant
/// velocity path and emits fresh Gaussian points about its centre every frame.
Scene generate(const SceneConfig& config);

struct RenderOptions {
    double noise = 0.0;     // pixel jitter standard deviation
    double disc_radius = 1.0;  // pixels; 0 lights only the nearest pixel
    std::uint8_t foreground = 255;
    std::uint8_t background = 0;
    std::uint64_t seed = 1;
};

struct RenderWarning {
    int frame = 0;
    int camera = 0;
    std::size_t point = 0;
};

struct RenderedScene {
    std::vector<std::vector<Image>> images;  // [camera][frame]
    std::vector<RenderWarning> warnings;     // points outside a camera frustum
};

/// Splats every point of every cloud as a bright disc in each camera.
RenderedScene render(const Sequence& clouds, const std::vector<CameraModel>& cams,
                     const RenderOptions& options);

/// Three cameras on a ring around `target`, looking at it; used by tests and `gen`.
std::vector<CameraModel> ring_rig(const Point3& target, double radius, double height, double focal,
                                  int width, int height_px);

}  // namespace cloudtrack
