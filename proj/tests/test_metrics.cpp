#include <doctest.h>

#include <sstream>

#include "cloudtrack/metrics.hpp"
#include "cloudtrack/synthetic.hpp"
#include "support.hpp"

using namespace cloudtrack;

namespace {

Trajectory path(int id, int first, int last, Point3 (*at)(int)) {
    Trajectory t;
    t.identity = id;
    for (int f = first; f <= last; ++f) t.samples.push_back({f, at(f)});
    return t;
}

Point3 along_x(int f) { return {static_cast<double>(f - 5), 0, 0}; }
Point3 along_y(int f) { return {0, static_cast<double>(f - 5), 0}; }

}  // namespace

TEST_CASE("perfect tracker") {
    const std::vector<Trajectory> gt{path(0, 0, 9, along_x), path(1, 0, 9, along_y)};
    const MotReport r = evaluate(gt, gt, 0.3);
    CHECK(r.mota == 100.0);
    CHECK(r.ids == 0);
    CHECK(r.mt == 100.0);
    CHECK(r.ml == 0.0);
    CHECK(r.fm == 0);
    CHECK(r.gt_samples == 20);
}

TEST_CASE("two missed frames cost twenty percent and one fragmentation") {
    const std::vector<Trajectory> gt{path(0, 0, 9, along_x)};
    Trajectory h = gt[0];
    h.samples.erase(h.samples.begin() + 4, h.samples.begin() + 6);
    const MotReport r = evaluate(gt, {h}, 0.3);
    CHECK(r.mota == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(r.fm == 1);
    CHECK(r.ids == 0);
    CHECK(r.misses == 2);
}

TEST_CASE("identity swap at a crossing counts once per target") {
    const std::vector<Trajectory> gt{path(0, 0, 9, along_x), path(1, 0, 9, along_y)};
    Trajectory h0, h1;
    h0.identity = 0;
    h1.identity = 1;
    for (int f = 0; f <= 9; ++f) {
        h0.samples.push_back({f, f <= 5 ? along_x(f) : along_y(f)});
        h1.samples.push_back({f, f <= 5 ? along_y(f) : along_x(f)});
    }
    const MotReport r = evaluate(gt, {h0, h1}, 0.3);
    CHECK(r.ids == 2);
    CHECK(r.mota == doctest::Approx(100.0 * (1.0 - 2.0 / 20.0)).epsilon(1e-12));
}

TEST_CASE("false positives, empty inputs and gate validation") {
    const std::vector<Trajectory> gt{path(0, 0, 9, along_x)};
    Trajectory far = path(7, 0, 9, along_y);
    for (auto& s : far.samples) s.position.z = 50.0;
    const MotReport r = evaluate(gt, {gt[0], far}, 0.3);
    CHECK(r.false_positives == 10);
    CHECK(r.mota == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(evaluate({}, {}, 0.3).mota == 100.0);
    CHECK(evaluate(gt, {}, 0.3).ml == 100.0);
    CHECK_THROWS(evaluate(gt, gt, 0.0));
}

TEST_CASE("MOTA is invariant under relabeling hypotheses") {
    SceneConfig sc;
    sc.targets = 6;
    sc.frames = 40;
    sc.crossings = random_crossings(6, 40, 2, 0.0, 10, 3);
    const Scene s = generate(sc);
    std::vector<Trajectory> hyp = s.truth;
    for (auto& t : hyp)
        for (auto& p : t.samples) p.position += Vec3{0.05, 0, 0};
    hyp.erase(hyp.begin() + 2);
    const MotReport a = evaluate(s.truth, hyp, 0.3);
    auto relabeled = hyp;
    for (auto& t : relabeled) t.identity = 100 - t.identity;
    std::reverse(relabeled.begin(), relabeled.end());
    const MotReport b = evaluate(s.truth, relabeled, 0.3);
    CHECK(a.mota == b.mota);
    CHECK(a.ids == b.ids);
    for (const auto& f : a.frames) CHECK(f.misses + f.matches == f.ground_truth);
}

TEST_CASE("ground truth against itself is perfect for any gate") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SceneConfig sc;
        sc.targets = 12;
        sc.frames = 60;
        sc.seed = seed;
        sc.crossings = random_crossings(12, 60, 3, 0.0, 10, seed);
        const Scene s = generate(sc);
        for (double gate : {0.01, 0.3, 5.0}) {
            const MotReport r = evaluate(s.truth, s.truth, gate);
            CHECK(r.mota == 100.0);
            CHECK(r.ids == 0);
            CHECK(r.fm == 0);
            CHECK(r.mt == 100.0);
        }
    }
}

TEST_CASE("report text") {
    const std::vector<Trajectory> gt{path(0, 0, 3, along_x)};
    std::stringstream ss;
    write_report(ss, evaluate(gt, gt, 0.3));
    CHECK(ss.str().find("mota: 100\n") != std::string::npos);
    CHECK(ss.str().find("ids: 0\n") != std::string::npos);
    std::stringstream tf;
    write_frame_tallies(tf, evaluate(gt, gt, 0.3));
    CHECK(tf.str().find("3,1,1,1,0,0,0") != std::string::npos);
}
