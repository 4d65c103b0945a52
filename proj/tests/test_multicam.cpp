#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "cloudtrack/multicam.hpp"
#include "cloudtrack/synthetic.hpp"
#include "support.hpp"

using namespace cloudtrack;

namespace {

std::vector<CameraModel> test_rig() {
    return {CameraModel::look_at({-3, 0, -10}, {0, 0, 0}, {0, 1, 0}, 800, 320, 240, 640, 480),
            CameraModel::look_at({3, 0, -10}, {0, 0, 0}, {0, 1, 0}, 800, 320, 240, 640, 480),
            CameraModel::look_at({0, 4, -10}, {0, 0, 0}, {0, 1, 0}, 800, 320, 240, 640, 480)};
}

Pixel to_pixel(const Eigen::Vector2d& uv) { return {uv.x(), uv.y()}; }

std::vector<Image> blob_sequence(int frames, std::uint8_t bg, std::uint8_t fg) {
    std::vector<Image> seq;
    for (int f = 0; f < frames; ++f) {
        Image img(f, 40, 20, bg);
        for (int r = 8; r < 11; ++r)
            for (int c = 3 + 5 * f; c < 6 + 5 * f; ++c) img.at(r, c) = fg;
        seq.push_back(img);
    }
    return seq;
}

}  // namespace

TEST_CASE("static scene segments to nothing") {
    const std::vector<Image> seq(5, Image(0, 16, 16, 90));
    CHECK(segment(seq, 2, SegmentParams{5, 20}).pixels.empty());
}

TEST_CASE("a moving blob segments to exactly its pixels") {
    const auto seq = blob_sequence(5, 30, 200);
    const PixelSet ps = segment(seq, 2, SegmentParams{5, 20}, 1);
    CHECK(ps.camera == 1);
    CHECK(ps.frame == 2);
    CHECK(!ps.truncated_window);
    std::set<std::pair<int, int>> got, want;
    for (const auto& p : ps.pixels) got.insert({static_cast<int>(p.row), static_cast<int>(p.col)});
    for (int r = 8; r < 11; ++r)
        for (int c = 13; c < 16; ++c) want.insert({r, c});
    CHECK(got == want);
}

TEST_CASE("contrast below the threshold is invisible") {
    const auto seq = blob_sequence(5, 30, 45);
    CHECK(segment(seq, 2, SegmentParams{5, 20}).pixels.empty());
}

TEST_CASE("segmentation ignores a global intensity offset") {
    auto seq = blob_sequence(7, 30, 120);
    Rng rng(2);
    for (auto& img : seq)
        for (auto& v : img.pixels) v = static_cast<std::uint8_t>(v + rng.below(8));
    auto shifted = seq;
    for (auto& img : shifted)
        for (auto& v : img.pixels) v = static_cast<std::uint8_t>(v + 60);
    for (std::size_t k = 0; k < seq.size(); ++k) {
        CHECK(segment_sequence_frame(seq, k, SegmentParams{5, 20}).pixels ==
              segment_sequence_frame(shifted, k, SegmentParams{5, 20}).pixels);
    }
}

TEST_CASE("windows at the sequence ends are truncated and flagged") {
    const auto seq = blob_sequence(7, 30, 200);
    CHECK(segment_sequence_frame(seq, 0, SegmentParams{5, 20}).truncated_window);
    CHECK(!segment_sequence_frame(seq, 3, SegmentParams{5, 20}).truncated_window);
    CHECK_THROWS(segment(seq, 0, SegmentParams{4, 20}));
}

TEST_CASE("triangulation recovers noiseless points") {
    const auto cams = test_rig();
    const Point3 p{0, 0, 10};
    std::vector<Pixel> px;
    const auto far = std::vector<CameraModel>{
        CameraModel::look_at({-3, 0, -10}, {0, 0, 10}, {0, 1, 0}, 800, 320, 240, 640, 480),
        CameraModel::look_at({3, 0, -10}, {0, 0, 10}, {0, 1, 0}, 800, 320, 240, 640, 480),
        CameraModel::look_at({0, 4, -10}, {0, 0, 10}, {0, 1, 0}, 800, 320, 240, 640, 480)};
    for (const auto& c : far) px.push_back(to_pixel(c.project(p)));
    const Triangulation t = triangulate_dlt(px, far);
    CHECK(distance(t.point, p) < 1e-6);
    CHECK(t.rms_error < 1e-6);
    CHECK(!t.low_confidence);

    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        const Point3 q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        std::vector<Pixel> qs;
        for (const auto& c : cams) qs.push_back(to_pixel(c.project(q)));
        CHECK(distance(triangulate_dlt(qs, cams).point, q) < 1e-6);
    }
}

TEST_CASE("half-pixel noise gives sub-pixel reprojection error") {
    const auto cams = test_rig();
    Rng rng(6);
    double worst = 0.0, sum = 0.0;
    for (int k = 0; k < 500; ++k) {
        const Point3 q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        std::vector<Pixel> qs;
        for (const auto& c : cams) {
            auto uv = c.project(q);
            qs.push_back({uv.x() + 0.5 * rng.normal(), uv.y() + 0.5 * rng.normal()});
        }
        const auto t = triangulate_dlt(qs, cams);
        sum += t.rms_error;
        worst = std::max(worst, distance(t.point, q));
    }
    CHECK(sum / 500 <= 0.5);
    CHECK(worst < 0.05);  // 1 px at 10 m with f = 800 is about 1.3 cm
}

TEST_CASE("coincident rays are low confidence and degenerate rigs are rejected") {
    const auto c = CameraModel::look_at({0, 0, -10}, {0, 0, 0}, {0, 1, 0}, 800, 320, 240, 640, 480);
    const std::vector<CameraModel> same{c, c, c};
    const std::vector<Pixel> px{{320, 240}, {320, 240}, {320, 240}};
    CHECK(triangulate_dlt(px, same).low_confidence);
    CHECK_THROWS(validate_rig(same));
    const std::vector<CameraModel> line{
        CameraModel::look_at({-1, 0, -10}, {0, 0, 0}, {0, 1, 0}, 800, 320, 240, 640, 480),
        CameraModel::look_at({0, 0, -10}, {0, 0, 0}, {0, 1, 0}, 800, 320, 240, 640, 480),
        CameraModel::look_at({1, 0, -10}, {0, 0, 0}, {0, 1, 0}, 800, 320, 240, 640, 480)};
    CHECK_THROWS(validate_rig(line));
    CHECK_NOTHROW(validate_rig(test_rig()));
}

TEST_CASE("one point seen by three cameras gives one triplet") {
    const auto cams = test_rig();
    const Point3 p{0.2, -0.1, 0.3};
    std::array<PixelSet, 3> sets;
    for (int k = 0; k < 3; ++k) {
        sets[static_cast<std::size_t>(k)].camera = k;
        sets[static_cast<std::size_t>(k)].pixels.push_back(to_pixel(cams[static_cast<std::size_t>(k)].project(p)));
    }
    const auto t = match_pixels(sets[0], sets[1], sets[2], cams, MatchParams{});
    REQUIRE(t.size() == 1);
    CHECK(t[0].rms_error < 1e-6);
    CHECK(distance(t[0].point, p) < 1e-6);
}

TEST_CASE("two points in a shared epipolar plane give two ghosts with two views only") {
    const auto cams = test_rig();
    // Camera centres 1 and 2 both lie in y = 0, so any two points there are
    // mutually epipolar for that pair.
    const Point3 P{-0.5, 0, 0}, Q{0.5, 0, 0.5};
    std::array<PixelSet, 3> sets;
    for (std::size_t k = 0; k < 3; ++k) {
        sets[k].camera = static_cast<int>(k);
        sets[k].pixels = {to_pixel(cams[k].project(P)), to_pixel(cams[k].project(Q))};
    }
    const auto pairs = match_pairs(sets[0], sets[1], cams[0], cams[1], MatchParams{});
    CHECK(pairs.size() == 4);
    std::size_t ghosts = 0;
    for (const auto& p : pairs)
        if (distance(p.point, P) > 1e-3 && distance(p.point, Q) > 1e-3) ++ghosts;
    CHECK(ghosts == 2);
    const auto triplets = match_pixels(sets[0], sets[1], sets[2], cams, MatchParams{});
    REQUIRE(triplets.size() == 2);
    for (const auto& t : triplets) CHECK(std::min(distance(t.point, P), distance(t.point, Q)) < 1e-6);
}

TEST_CASE("matched triplets satisfy the reprojection gate and recall true points") {
    const auto cams = test_rig();
    Rng rng(10);
    std::vector<Point3> pts;
    for (int k = 0; k < 50; ++k) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    std::array<PixelSet, 3> sets;
    std::array<std::vector<std::uint32_t>, 3> where;  // point -> index in camera list
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<std::uint32_t> order(pts.size());
        std::iota(order.begin(), order.end(), 0u);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        where[k].resize(pts.size());
        for (std::uint32_t slot = 0; slot < order.size(); ++slot) {
            const auto uv = cams[k].project(pts[order[slot]]);
            sets[k].pixels.push_back({uv.x() + 0.3 * rng.normal(), uv.y() + 0.3 * rng.normal()});
            where[k][order[slot]] = slot;
        }
    }
    MatchParams mp;
    const auto triplets = match_pixels(sets[0], sets[1], sets[2], cams, mp);
    std::set<std::array<std::uint32_t, 3>> found;
    for (const auto& t : triplets) {
        found.insert(t.index);
        std::vector<Pixel> px;
        for (std::size_t k = 0; k < 3; ++k) px.push_back(sets[k].pixels[t.index[k]]);
        double sum = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto uv = cams[k].project(t.point);
            sum += (uv.x() - px[k].col) * (uv.x() - px[k].col) + (uv.y() - px[k].row) * (uv.y() - px[k].row);
        }
        CHECK(std::sqrt(sum / 3.0) < mp.max_error);
    }
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) hit += found.count({where[0][i], where[1][i], where[2][i]});
    CHECK(hit >= 48);
}

TEST_CASE("rendered swarm reconstructs near every target") {
    SceneConfig sc;
    sc.targets = 6;
    sc.frames = 12;
    sc.arena_min = {-1.5, -1.5, -1.5};
    sc.arena_max = {1.5, 1.5, 1.5};
    sc.min_separation = 0.6;
    sc.speed_min = 0.05;
    sc.speed_max = 0.08;
    sc.points_per_target = 8;
    sc.spread = 0.03;
    const Scene scene = generate(sc);
    const auto cams = ring_rig({0, 0, 0}, 8.0, 1.0, 800.0, 640, 480);
    const RenderedScene rs = render(scene.clouds, cams, RenderOptions{});
    CHECK(rs.warnings.empty());
    ReconstructionParams rp;
    rp.segment.window = 9;
    std::array<std::vector<Image>, 3> imgs{rs.images[0], rs.images[1], rs.images[2]};
    const Reconstruction rec = reconstruct_sequence(imgs, cams, rp);
    REQUIRE(rec.clouds.size() == 12);
    std::size_t covered = 0, total = 0;
    for (std::size_t f = 0; f < 12; ++f)
        for (std::size_t t = 0; t < 6; ++t) {
            ++total;
            const Point3 c = scene.centers[t][f];
            covered += std::any_of(rec.clouds[f].points.begin(), rec.clouds[f].points.end(),
                                   [&](const Point3& p) { return distance(p, c) < 0.15; });
        }
    CHECK(covered >= 0.95 * static_cast<double>(total));

    std::array<std::vector<Image>, 3> blank;
    for (auto& b : blank) b.assign(5, Image(0, 64, 48, 0));
    for (auto& b : blank)
        for (int f = 0; f < 5; ++f) b[static_cast<std::size_t>(f)].frame = f;
    const auto cams64 = ring_rig({0, 0, 0}, 8.0, 1.0, 80.0, 64, 48);
    for (const auto& c : reconstruct_sequence(blank, cams64, rp).clouds) CHECK(c.points.empty());
}

TEST_CASE("image and calibration files round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "cloudtrack_unit_pgm";
    std::filesystem::create_directories(dir);
    Image img(3, 5, 4, 7);
    img.at(2, 3) = 250;
    write_pgm((dir / frame_filename(3)).string(), img);
    write_pgm((dir / frame_filename(1)).string(), Image(1, 5, 4, 1));
    const auto seq = read_pgm_sequence(dir.string());
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].frame == 1);
    CHECK(seq[1].pixels == img.pixels);
    std::filesystem::remove_all(dir);

    const auto cams = test_rig();
    std::stringstream ss;
    write_calibration(ss, cams);
    const auto back = read_calibration(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(back[k].projection() == cams[k].projection());
    CHECK(frame_filename(42) == "frame_000042.pgm");
}
