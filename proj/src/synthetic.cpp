#include "cloudtrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "cloudtrack/io.hpp"
#include "cloudtrack/random.hpp"

namespace cloudtrack {
namespace {

// Stream tags for counter-based seed derivation.
enum Stream : std::uint64_t {
    kPathStream = 1,
    kPointStream = 2,
    kShuffleStream = 3,
    kGhostStream = 4,
    kCrossingStream = 5,
    kRenderStream = 6,
};

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Vec3 unit(const Vec3& v) { return v / v.norm(); }

Vec3 any_perpendicular(const Vec3& v, Rng& rng) {
    for (;;) {
        const Vec3 r = rng.unit_vector();
        const Vec3 p = r - v * (r.dot(v) / v.squared_norm());
        if (p.norm() > 1e-6) return unit(p);
    }
}

/// Rodrigues rotation of v about unit axis k by angle.
Vec3 rotate(const Vec3& v, const Vec3& k, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return v * c + cross(k, v) * s + k * (k.dot(v) * (1.0 - c));
}

Vec3 turn(const Vec3& v, double max_turn, Rng& rng) {
    if (max_turn <= 0.0) return v;
    const Vec3 axis = any_perpendicular(v, rng);
    return rotate(v, axis, rng.uniform(0.0, max_turn));
}

/// Integrates a path with velocity `v_anchor` on the step anchor -> anchor+1.
/// Headings change on steps where floor((t - phase) / segment) changes.
std::vector<Point3> integrate_path(const SceneConfig& cfg, int anchor, const Point3& at_anchor,
                                   const Vec3& v_anchor, int phase, Rng& rng) {
    const int n = cfg.frames;
    const int seg = std::max(1, cfg.segment_frames);
    auto segment_of = [&](int t) {
        const int d = t - phase;
        return d >= 0 ? d / seg : -((-d + seg - 1) / seg);
    };
    std::vector<Vec3> vel(static_cast<std::size_t>(std::max(n - 1, 0)));
    std::vector<Point3> c(static_cast<std::size_t>(n));
    const int a = std::clamp(anchor, 0, n - 1);
    if (a < n - 1) vel[static_cast<std::size_t>(a)] = v_anchor;
    Vec3 v = v_anchor;
    for (int t = a + 1; t < n - 1; ++t) {
        if (segment_of(t) != segment_of(t - 1)) v = turn(v, cfg.max_turn, rng);
        vel[static_cast<std::size_t>(t)] = v;
    }
    v = v_anchor;
    for (int t = a - 1; t >= 0; --t) {
        if (segment_of(t) != segment_of(t + 1)) v = turn(v, cfg.max_turn, rng);
        vel[static_cast<std::size_t>(t)] = v;
    }
    c[static_cast<std::size_t>(a)] = at_anchor;
    for (int t = a + 1; t < n; ++t) c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t - 1)] + vel[static_cast<std::size_t>(t - 1)];
    for (int t = a - 1; t >= 0; --t) c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t + 1)] - vel[static_cast<std::size_t>(t)];
    return c;
}

Vec3 random_velocity(const SceneConfig& cfg, Rng& rng) {
    return rng.unit_vector() * rng.uniform(cfg.speed_min, cfg.speed_max);
}

Point3 random_in_arena(const SceneConfig& cfg, Rng& rng) {
    return {rng.uniform(cfg.arena_min.x, cfg.arena_max.x), rng.uniform(cfg.arena_min.y, cfg.arena_max.y),
            rng.uniform(cfg.arena_min.z, cfg.arena_max.z)};
}

Point3 gaussian_around(const Point3& c, double sigma, Rng& rng) {
    return c + Vec3{rng.normal(), rng.normal(), rng.normal()} * sigma;
}

struct Interval {
    int lo = 0;
    int hi = -1;
    bool contains(int t) const { return t >= lo && t <= hi; }
};

/// True when the two paths keep `sep` apart on every frame outside `exempt`.
bool separated(const std::vector<Point3>& a, const std::vector<Point3>& b, double sep, Interval exempt,
               int lo = 0, int hi = -1) {
    const double s2 = sep * sep;
    const int n = static_cast<int>(std::min(a.size(), b.size()));
    if (hi < 0) hi = n - 1;
    for (int t = std::max(lo, 0); t <= std::min(hi, n - 1); ++t) {
        if (exempt.contains(t)) continue;
        if (squared_distance(a[static_cast<std::size_t>(t)], b[static_cast<std::size_t>(t)]) < s2) return false;
    }
    return true;
}

void validate(const SceneConfig& cfg) {
    if (cfg.targets < 0 || cfg.frames < 1) throw Error("scene needs a positive frame count");
    if (!(cfg.speed_min > 0.0) || cfg.speed_max < cfg.speed_min) throw Error("invalid speed range");
    if (cfg.points_per_target < 1 || !(cfg.spread > 0.0)) throw Error("invalid target cloud");
    if (!(cfg.min_separation > 2.0 * cfg.spread)) throw Error("min_separation must exceed target size");
    if (cfg.arena_max.x <= cfg.arena_min.x || cfg.arena_max.y <= cfg.arena_min.y ||
        cfg.arena_max.z <= cfg.arena_min.z)
        throw Error("invalid arena bounds");
    if (cfg.ghost_rate < 0.0 || cfg.ghost_min_frames < 1 || cfg.ghost_max_frames < cfg.ghost_min_frames)
        throw Error("invalid ghost settings");
    if (cfg.crossing_angle_min < 0.0 || cfg.crossing_angle_max < cfg.crossing_angle_min ||
        cfg.crossing_angle_max > std::numbers::pi)
        throw Error("invalid crossing angle range");
    std::set<int> used;
    for (const auto& x : cfg.crossings) {
        if (x.first < 0 || x.first >= cfg.targets || x.second < 0 || x.second >= cfg.targets ||
            x.first == x.second)
            throw Error("unsatisfiable occlusion script: invalid target pair");
        if (!used.insert(x.first).second || !used.insert(x.second).second)
            throw Error("unsatisfiable occlusion script: target scripted twice");
        if (x.frame < 0 || x.frame >= cfg.frames)
            throw Error("unsatisfiable occlusion script: crossing frame outside sequence");
        if (x.approach < 0.0) throw Error("unsatisfiable occlusion script: negative approach");
    }
}

}  // namespace

Scene generate(const SceneConfig& cfg) {
    validate(cfg);
    const int nt = cfg.targets;
    const int nf = cfg.frames;
    const int seg = std::max(1, cfg.segment_frames);

    std::vector<int> partner(static_cast<std::size_t>(nt), -1);
    std::vector<const ScriptedCrossing*> script(static_cast<std::size_t>(nt), nullptr);
    for (const auto& x : cfg.crossings) {
        partner[static_cast<std::size_t>(x.first)] = x.second;
        partner[static_cast<std::size_t>(x.second)] = x.first;
        script[static_cast<std::size_t>(x.first)] = &x;
        script[static_cast<std::size_t>(x.second)] = &x;
    }

    std::vector<std::vector<Point3>> centers(static_cast<std::size_t>(nt));
    std::vector<bool> placed(static_cast<std::size_t>(nt), false);
    std::vector<Interval> exempt(static_cast<std::size_t>(nt));

    auto clear_of_placed = [&](const std::vector<Point3>& path, int self, int other) {
        for (int j = 0; j < nt; ++j) {
            if (!placed[static_cast<std::size_t>(j)] || j == self || j == other) continue;
            if (!separated(path, centers[static_cast<std::size_t>(j)], cfg.min_separation, {})) return false;
        }
        return true;
    };

    for (int i = 0; i < nt; ++i) {
        if (placed[static_cast<std::size_t>(i)]) continue;
        const ScriptedCrossing* x = script[static_cast<std::size_t>(i)];
        Rng rng(derive_seed(cfg.seed, kPathStream, static_cast<std::uint64_t>(i)));
        bool ok = false;
        for (int attempt = 0; attempt < cfg.placement_attempts && !ok; ++attempt) {
            if (!x) {
                auto path = integrate_path(cfg, 0, random_in_arena(cfg, rng), random_velocity(cfg, rng),
                                           static_cast<int>(rng.below(static_cast<std::uint64_t>(seg))), rng);
                if (clear_of_placed(path, i, -1)) {
                    centers[static_cast<std::size_t>(i)] = std::move(path);
                    ok = true;
                }
                continue;
            }
            // Both members of a scripted pair are placed together. Headings
            // stay fixed on the steps around the crossing frame.
            const int f = x->frame;
            const int phase = f + seg / 2 + 1;
            const Vec3 va = random_velocity(cfg, rng);
            const Point3 meet = random_in_arena(cfg, rng);
            const auto path_a = integrate_path(cfg, f, meet, va, phase, rng);
            const Vec3 axis = any_perpendicular(va, rng);
            const double angle = rng.uniform(cfg.crossing_angle_min, cfg.crossing_angle_max);
            const Vec3 vb = unit(rotate(va, axis, angle)) * rng.uniform(cfg.speed_min, cfg.speed_max);
            const Vec3 dv = vb - va;
            const Vec3 offset = any_perpendicular(dv, rng) * x->approach;
            const auto path_b = integrate_path(cfg, f, meet + offset, vb, phase, rng);
            const double rel = std::max(dv.norm(), 1e-9);
            const int w = static_cast<int>(std::ceil(cfg.min_separation / rel)) + 2;
            const Interval near_crossing{f - w, f + w};
            if (!separated(path_a, path_b, cfg.min_separation, near_crossing)) continue;
            if (!clear_of_placed(path_a, x->first, x->second) || !clear_of_placed(path_b, x->first, x->second))
                continue;
            const std::size_t a = static_cast<std::size_t>(x->first), b = static_cast<std::size_t>(x->second);
            centers[a] = path_a;
            centers[b] = path_b;
            placed[a] = placed[b] = true;
            exempt[a] = exempt[b] = near_crossing;
            ok = true;
        }
        if (!ok) {
            if (x) throw Error("unsatisfiable occlusion script: could not place crossing pair");
            throw Error("could not place target " + std::to_string(i) + " with the requested separation");
        }
        placed[static_cast<std::size_t>(i)] = true;
    }

    Scene scene;
    scene.centers = centers;

    // Ghosts: a small cloud that closes on its host at a fixed relative speed
    // and vanishes one frame before it would overlap.
    const int ghost_count = static_cast<int>(std::lround(cfg.ghost_rate * nt));
    std::vector<std::vector<Point3>> ghost_paths;
    if (ghost_count > 0 && nt > 0) {
        Rng rng(derive_seed(cfg.seed, kGhostStream, 0));
        std::vector<std::vector<Interval>> busy(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t) busy[static_cast<std::size_t>(t)].push_back(exempt[static_cast<std::size_t>(t)]);
        for (int g = 0; g < ghost_count; ++g) {
            bool ok = false;
            for (int attempt = 0; attempt < cfg.placement_attempts && !ok; ++attempt) {
                const int host = static_cast<int>(rng.below(static_cast<std::uint64_t>(nt)));
                const int len = cfg.ghost_min_frames +
                                static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.ghost_max_frames - cfg.ghost_min_frames + 1)));
                const int lo_end = len + 12, hi_end = nf - 14;
                if (hi_end < lo_end) break;
                const int end = lo_end + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi_end - lo_end + 1)));
                const int first = end - len + 1;
                const Vec3 u = rng.unit_vector();
                const Interval life{first - 8, end + 8};
                bool clash = false;
                for (const auto& iv : busy[static_cast<std::size_t>(host)])
                    clash = clash || (iv.hi >= life.lo && iv.lo <= life.hi);
                if (clash) continue;
                std::vector<Point3> path(static_cast<std::size_t>(nf), Point3{1e300, 1e300, 1e300});
                for (int t = first; t <= end; ++t)
                    path[static_cast<std::size_t>(t)] = centers[static_cast<std::size_t>(host)][static_cast<std::size_t>(t)] +
                                                        u * (cfg.ghost_closing_speed * (end + 1 - t));
                bool clear = true;
                for (int j = 0; j < nt && clear; ++j) {
                    if (j == host) continue;
                    clear = separated(path, centers[static_cast<std::size_t>(j)], cfg.min_separation, {}, first, end);
                }
                for (const auto& other : ghost_paths)
                    clear = clear && separated(path, other, cfg.min_separation, {}, first, end);
                if (!clear) continue;
                busy[static_cast<std::size_t>(host)].push_back(life);
                ghost_paths.push_back(std::move(path));
                scene.ghosts.push_back(InjectedGhost{kGhostLabelBase + g, host, first, end});
                ok = true;
            }
        }
    }

    scene.truth.resize(static_cast<std::size_t>(nt));
    for (int i = 0; i < nt; ++i) {
        auto& tr = scene.truth[static_cast<std::size_t>(i)];
        tr.identity = i;
        for (int t = 0; t < nf; ++t) tr.samples.push_back({t, centers[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]});
    }

    scene.clouds.resize(static_cast<std::size_t>(nf));
    scene.labels.resize(static_cast<std::size_t>(nf));
    for (int t = 0; t < nf; ++t) {
        std::vector<std::pair<Point3, int>> pts;
        for (int i = 0; i < nt; ++i) {
            Rng rng(derive_seed(cfg.seed, kPointStream, static_cast<std::uint64_t>(i) * 1'000'003ull + static_cast<std::uint64_t>(t)));
            for (int k = 0; k < cfg.points_per_target; ++k)
                pts.emplace_back(gaussian_around(centers[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)], cfg.spread, rng), i);
        }
        for (std::size_t g = 0; g < scene.ghosts.size(); ++g) {
            const auto& gh = scene.ghosts[g];
            if (t < gh.first_frame || t > gh.last_frame) continue;
            Rng rng(derive_seed(cfg.seed, kGhostStream, (g + 1) * 1'000'003ull + static_cast<std::uint64_t>(t)));
            for (int k = 0; k < cfg.ghost_points; ++k)
                pts.emplace_back(gaussian_around(ghost_paths[g][static_cast<std::size_t>(t)], cfg.ghost_spread, rng), gh.label);
        }
        Rng shuffle(derive_seed(cfg.seed, kShuffleStream, static_cast<std::uint64_t>(t)));
        for (std::size_t k = pts.size(); k > 1; --k) std::swap(pts[k - 1], pts[shuffle.below(k)]);
        auto& cloud = scene.clouds[static_cast<std::size_t>(t)];
        cloud.frame = t;
        for (auto& [p, label] : pts) {
            cloud.points.push_back(p);
            scene.labels[static_cast<std::size_t>(t)].push_back(label);
        }
    }
    return scene;
}

std::vector<ScriptedCrossing> random_crossings(int targets, int frames, int count, double approach, int margin,
                                               std::uint64_t seed) {
    if (count < 0 || 2 * count > targets) throw Error("not enough targets for the requested crossings");
    if (frames - 2 * margin < 1) throw Error("sequence too short for crossing margin");
    Rng rng(derive_seed(seed, kCrossingStream, 0));
    std::vector<int> order(static_cast<std::size_t>(targets));
    for (int i = 0; i < targets; ++i) order[static_cast<std::size_t>(i)] = i;
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    std::vector<ScriptedCrossing> out;
    for (int c = 0; c < count; ++c) {
        const int a = order[static_cast<std::size_t>(2 * c)], b = order[static_cast<std::size_t>(2 * c + 1)];
        const int f = margin + static_cast<int>(rng.below(static_cast<std::uint64_t>(frames - 2 * margin)));
        out.push_back({std::min(a, b), std::max(a, b), f, approach});
    }
    return out;
}

namespace {

Point3 parse_point(const std::string& v, const std::string& source, std::size_t line) {
    std::istringstream ss(v);
    std::string a, b, c, extra;
    if (!(ss >> a >> b >> c) || (ss >> extra)) throw ParseError(source, line, "expected three numbers");
    return {parse_real(a, source, line), parse_real(b, source, line), parse_real(c, source, line)};
}

}  // namespace

SceneConfig read_scene_config(std::istream& in, const std::string& source) {
    SceneConfig cfg;
    cfg.crossings.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(source, lineno, "expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto real = [&] { return parse_real(val, source, lineno); };
        auto integer = [&] { return static_cast<int>(parse_integer(val, source, lineno)); };
        if (key == "targets") cfg.targets = integer();
        else if (key == "frames") cfg.frames = integer();
        else if (key == "arena_min") cfg.arena_min = parse_point(val, source, lineno);
        else if (key == "arena_max") cfg.arena_max = parse_point(val, source, lineno);
        else if (key == "speed_min") cfg.speed_min = real();
        else if (key == "speed_max") cfg.speed_max = real();
        else if (key == "segment_frames") cfg.segment_frames = integer();
        else if (key == "max_turn") cfg.max_turn = real();
        else if (key == "points_per_target") cfg.points_per_target = integer();
        else if (key == "spread") cfg.spread = real();
        else if (key == "min_separation") cfg.min_separation = real();
        else if (key == "crossing_angle_min") cfg.crossing_angle_min = real();
        else if (key == "crossing_angle_max") cfg.crossing_angle_max = real();
        else if (key == "ghost_rate") cfg.ghost_rate = real();
        else if (key == "ghost_min_frames") cfg.ghost_min_frames = integer();
        else if (key == "ghost_max_frames") cfg.ghost_max_frames = integer();
        else if (key == "ghost_points") cfg.ghost_points = integer();
        else if (key == "ghost_spread") cfg.ghost_spread = real();
        else if (key == "ghost_closing_speed") cfg.ghost_closing_speed = real();
        else if (key == "placement_attempts") cfg.placement_attempts = integer();
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(val, source, lineno));
        else if (key == "crossing") {
            std::istringstream ss(val);
            std::string a, b, f, d, extra;
            if (!(ss >> a >> b >> f >> d) || (ss >> extra))
                throw ParseError(source, lineno, "crossing expects: first second frame approach");
            cfg.crossings.push_back({static_cast<int>(parse_integer(a, source, lineno)),
                                     static_cast<int>(parse_integer(b, source, lineno)),
                                     static_cast<int>(parse_integer(f, source, lineno)), parse_real(d, source, lineno)});
        } else if (key == "random_crossings") {
            // random_crossings = count approach margin
            std::istringstream ss(val);
            std::string c, d, m, extra;
            if (!(ss >> c >> d >> m) || (ss >> extra))
                throw ParseError(source, lineno, "random_crossings expects: count approach margin");
            auto more = random_crossings(cfg.targets, cfg.frames, static_cast<int>(parse_integer(c, source, lineno)),
                                         parse_real(d, source, lineno),
                                         static_cast<int>(parse_integer(m, source, lineno)), cfg.seed);
            cfg.crossings.insert(cfg.crossings.end(), more.begin(), more.end());
        } else {
            throw ParseError(source, lineno, "unknown key '" + key + "'");
        }
    }
    validate(cfg);
    return cfg;
}

SceneConfig read_scene_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_scene_config(in, path);
}

void write_scene_config(std::ostream& out, const SceneConfig& c) {
    auto pt = [](const Point3& p) { return format_real(p.x) + " " + format_real(p.y) + " " + format_real(p.z); };
    out << "targets = " << c.targets << "\nframes = " << c.frames << "\narena_min = " << pt(c.arena_min)
        << "\narena_max = " << pt(c.arena_max) << "\nspeed_min = " << format_real(c.speed_min)
        << "\nspeed_max = " << format_real(c.speed_max) << "\nsegment_frames = " << c.segment_frames
        << "\nmax_turn = " << format_real(c.max_turn) << "\npoints_per_target = " << c.points_per_target
        << "\nspread = " << format_real(c.spread) << "\nmin_separation = " << format_real(c.min_separation)
        << "\ncrossing_angle_min = " << format_real(c.crossing_angle_min)
        << "\ncrossing_angle_max = " << format_real(c.crossing_angle_max)
        << "\nghost_rate = " << format_real(c.ghost_rate) << "\nghost_min_frames = " << c.ghost_min_frames
        << "\nghost_max_frames = " << c.ghost_max_frames << "\nghost_points = " << c.ghost_points
        << "\nghost_spread = " << format_real(c.ghost_spread)
        << "\nghost_closing_speed = " << format_real(c.ghost_closing_speed)
        << "\nplacement_attempts = " << c.placement_attempts << "\nseed = " << c.seed << '\n';
    for (const auto& x : c.crossings)
        out << "crossing = " << x.first << ' ' << x.second << ' ' << x.frame << ' ' << format_real(x.approach) << '\n';
}

RenderedScene render(const Sequence& clouds, const std::vector<CameraModel>& cams, const RenderOptions& opt) {
    RenderedScene out;
    out.images.resize(cams.size());
    for (std::size_t c = 0; c < cams.size(); ++c) {
        const auto& cam = cams[c];
        for (const auto& cloud : clouds) {
            Image img(cloud.frame, cam.width(), cam.height(), opt.background);
            Rng rng(derive_seed(opt.seed, kRenderStream, static_cast<std::uint64_t>(c) * 1'000'003ull +
                                                             static_cast<std::uint64_t>(cloud.frame)));
            for (std::size_t i = 0; i < cloud.points.size(); ++i) {
                const Point3& p = cloud.points[i];
                if (!cam.in_frustum(p)) {
                    out.warnings.push_back({cloud.frame, static_cast<int>(c), i});
                    continue;
                }
                Eigen::Vector2d uv = cam.project(p);
                if (opt.noise > 0.0) {
                    uv.x() += opt.noise * rng.normal();
                    uv.y() += opt.noise * rng.normal();
                }
                const double r = opt.disc_radius;
                if (r <= 0.0) {
                    const int col = static_cast<int>(std::lround(uv.x()));
                    const int row = static_cast<int>(std::lround(uv.y()));
                    if (col >= 0 && col < img.width && row >= 0 && row < img.height) img.at(row, col) = opt.foreground;
                    continue;
                }
                const int c0 = std::max(0, static_cast<int>(std::floor(uv.x() - r)));
                const int c1 = std::min(img.width - 1, static_cast<int>(std::ceil(uv.x() + r)));
                const int r0 = std::max(0, static_cast<int>(std::floor(uv.y() - r)));
                const int r1 = std::min(img.height - 1, static_cast<int>(std::ceil(uv.y() + r)));
                for (int row = r0; row <= r1; ++row) {
                    for (int col = c0; col <= c1; ++col) {
                        const double dx = col - uv.x(), dy = row - uv.y();
                        if (dx * dx + dy * dy <= r * r) img.at(row, col) = opt.foreground;
                    }
                }
            }
            out.images[c].push_back(std::move(img));
        }
    }
    return out;
}

std::vector<CameraModel> ring_rig(const Point3& target, double radius, double height, double focal, int width,
                                  int height_px) {
    std::vector<CameraModel> cams;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0 + 0.3;
        const Point3 c = target + Point3{radius * std::cos(a), radius * std::sin(a), height + 0.25 * k};
        cams.push_back(CameraModel::look_at(c, target, {0.0, 0.0, 1.0}, focal, width / 2.0, height_px / 2.0, width,
                                            height_px));
    }
    return cams;
}

}  // namespace cloudtrack
