#include <doctest.h>

#include <map>

#include "cloudtrack/linker.hpp"
#include "support.hpp"

using namespace cloudtrack;

namespace {

Cluster make_cluster(int frame, ClusterId id, std::vector<std::uint32_t> pts, const FrameCloud& cloud) {
    Cluster c{frame, id, std::move(pts), {}};
    Point3 s;
    for (auto p : c.points) s += cloud.points[p];
    c.baricenter = s / static_cast<double>(c.points.size());
    return c;
}

std::vector<std::uint32_t> iota_u32(std::size_t n) {
    std::vector<std::uint32_t> v(n);
    std::iota(v.begin(), v.end(), 0u);
    return v;
}

}  // namespace

TEST_CASE("bootstrap prefers the cheap diagonal") {
    FrameCloud a{0, {{0, 0, 0}, {9, 0, 0}}}, b{1, {{1, 0, 0}, {10, 0, 0}}};
    std::vector<Cluster> ca{make_cluster(0, 0, {0}, a), make_cluster(0, 1, {1}, a)};
    std::vector<Cluster> cb{make_cluster(1, 2, {0}, b), make_cluster(1, 3, {1}, b)};
    const auto links = bootstrap_links(ca, cb, 5.0);
    REQUIRE(links.size() == 2);
    CHECK(links[0].source == 0);
    CHECK(links[0].target == 2);
    CHECK(links[0].velocity == Vec3{1, 0, 0});
    CHECK(links[1].source == 1);
    CHECK(links[1].target == 3);
}

TEST_CASE("single cluster pair inside the gate links with its displacement") {
    FrameCloud a{0, {{0, 0, 0}, {0, 1, 0}}}, b{1, {{0.5, 0, 0}, {0.5, 1, 0}}};
    std::vector<Cluster> ca{make_cluster(0, 0, {0, 1}, a)}, cb{make_cluster(1, 1, {0, 1}, b)};
    const auto links = bootstrap_links(ca, cb, 1.0);
    REQUIRE(links.size() == 1);
    CHECK(links[0].velocity == Vec3{0.5, 0, 0});
    CHECK(bootstrap_links(ca, cb, 0.4).empty());
    CHECK(bootstrap_links({}, cb, 1.0).empty());
}

TEST_CASE("point prediction is a translation") {
    FrameCloud a{0, {{1, 0, 0}}};
    const Cluster c = make_cluster(0, 0, {0}, a);
    CHECK(predict_points(a, c, {0.5, 0, 0}) == std::vector<Point3>{{1.5, 0, 0}});
    CHECK(predict_points(a, c, {}) == std::vector<Point3>{{1, 0, 0}});

    FrameCloud r{0, testing::uniform_points(30, 1.0, 3)};
    const Cluster rc = make_cluster(0, 0, iota_u32(30), r);
    const auto moved = predict_points(r, rc, {0.3, -0.2, 0.7});
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 30; ++j)
            CHECK(distance(moved[i], moved[j]) == doctest::Approx(distance(r.points[i], r.points[j])).epsilon(1e-12));
}

TEST_CASE("point links") {
    FrameCloud next{1, {{1, 0, 0}, {5, 0, 0}}};
    const std::vector<Point3> pred{{1, 0, 0}, {3, 0, 0}};
    const std::vector<std::uint32_t> src{4, 7};
    const auto links = link_points(pred, src, next, 0.5);
    CHECK(links == std::vector<PointLink>{{4, 0}});
}

TEST_CASE("point links equal a brute-force range oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        FrameCloud next{1, testing::uniform_points(400, 1.0, seed)};
        const auto pred = testing::uniform_points(300, 1.0, seed + 100);
        const auto src = iota_u32(pred.size());
        const double radius = 0.08;
        std::vector<PointLink> oracle;
        for (std::uint32_t i = 0; i < pred.size(); ++i)
            for (auto j : testing::brute_range(next.points, pred[i], radius)) oracle.push_back({i, j});
        CHECK(link_points(pred, src, next, radius) == oracle);
    }
}

TEST_CASE("lifting: all links into one cluster") {
    FrameCloud a{0, {{0, 0, 0}, {1, 0, 0}}}, b{1, {{0.5, 0, 0}, {1.5, 0, 0}}};
    std::vector<Cluster> ca{make_cluster(0, 0, {0, 1}, a)}, cb{make_cluster(1, 1, {0, 1}, b)};
    const std::vector<PointLink> pl{{0, 0}, {1, 1}};
    const auto links = lift_links(pl, a, ca, b, cb);
    REQUIRE(links.size() == 1);
    CHECK(links[0].velocity == Vec3{0.5, 0, 0});
    CHECK(links[0].support == 2);
}

TEST_CASE("lifting: one cluster splitting in two gets both links") {
    // C0 = four points, two go up into C1, two go down into C2.
    FrameCloud a{0, {{0, 0.1, 0}, {1, 0.1, 0}, {0, -0.1, 0}, {1, -0.1, 0}}};
    FrameCloud b{1, {{0, 1, 0}, {1, 1, 0}, {0, -1, 0}, {1, -1, 0}}};
    std::vector<Cluster> ca{make_cluster(0, 0, {0, 1, 2, 3}, a)};
    std::vector<Cluster> cb{make_cluster(1, 1, {0, 1}, b), make_cluster(1, 2, {2, 3}, b)};
    const std::vector<PointLink> pl{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    const auto links = lift_links(pl, a, ca, b, cb);
    REQUIRE(links.size() == 2);
    CHECK(links[0].target == 1);
    CHECK(links[0].velocity.y == doctest::Approx(0.9));
    CHECK(links[1].target == 2);
    CHECK(links[1].velocity.y == doctest::Approx(-0.9));
    CHECK(links[0].arrival == Point3{0.5, 1, 0});
}

TEST_CASE("lifting equals grouping the point links by cluster pair") {
    const auto pa = testing::blob_points(6, 15, 1.0, 0.05, 8);
    auto pb = pa;
    Rng rng(9);
    for (auto& p : pb) p += Vec3{rng.normal(), rng.normal(), rng.normal()} * 0.01;
    FrameCloud a{0, pa}, b{1, pb};
    std::vector<Cluster> ca, cb;
    for (std::uint32_t k = 0; k < 6; ++k) {
        std::vector<std::uint32_t> idx(15);
        std::iota(idx.begin(), idx.end(), k * 15);
        ca.push_back(make_cluster(0, k, idx, a));
        cb.push_back(make_cluster(1, 6 + k, idx, b));
    }
    std::vector<PointLink> pl;
    for (std::uint32_t i = 0; i < pa.size(); ++i)
        for (auto j : testing::brute_range(pb, pa[i], 0.3)) pl.push_back({i, j});
    const auto links = lift_links(pl, a, ca, b, cb);
    std::map<std::pair<ClusterId, ClusterId>, std::uint32_t> oracle;
    for (const auto& l : pl) ++oracle[{l.source / 15, 6 + l.target / 15}];
    REQUIRE(links.size() == oracle.size());
    for (const auto& l : links) CHECK(oracle.at({l.source, l.target}) == l.support);

    // Translating the whole scene leaves links and velocities unchanged.
    FrameCloud ta = a, tb = b;
    for (auto& p : ta.points) p += Vec3{3, -2, 5};
    for (auto& p : tb.points) p += Vec3{3, -2, 5};
    auto tca = ca, tcb = cb;
    for (auto& c : tca) c.baricenter += Vec3{3, -2, 5};
    for (auto& c : tcb) c.baricenter += Vec3{3, -2, 5};
    const auto moved = lift_links(pl, ta, tca, tb, tcb);
    REQUIRE(moved.size() == links.size());
    for (std::size_t k = 0; k < links.size(); ++k) {
        CHECK(moved[k].source == links[k].source);
        CHECK(moved[k].target == links[k].target);
        CHECK(distance(moved[k].velocity, links[k].velocity) < 1e-12);
    }
}

TEST_CASE("unlinked matching skips linked clusters and leaves births alone") {
    FrameCloud a{0, {{0, 0, 0}, {5, 0, 0}}}, b{1, {{0.1, 0, 0}, {5.1, 0, 0}, {20, 0, 0}}};
    std::vector<Cluster> ca{make_cluster(0, 0, {0}, a), make_cluster(0, 1, {1}, a)};
    std::vector<Cluster> cb{make_cluster(1, 2, {0}, b), make_cluster(1, 3, {1}, b), make_cluster(1, 4, {2}, b)};
    const std::vector<ClusterLink> existing{{0, 2, {}, 1, {}}};
    const auto links = match_unlinked(ca, cb, existing, 1.0);
    REQUIRE(links.size() == 1);
    CHECK(links[0].source == 1);
    CHECK(links[0].target == 3);
}

TEST_CASE("well separated constant-velocity targets give pure chains") {
    Sequence s;
    Rng rng(12);
    std::vector<Point3> centres;
    std::vector<Vec3> vel;
    for (int t = 0; t < 8; ++t) {
        centres.push_back({3.0 * t, 0, 0});
        vel.push_back(rng.unit_vector() * 0.04);
    }
    for (int f = 0; f < 30; ++f) {
        FrameCloud c{f, {}};
        for (int t = 0; t < 8; ++t)
            for (int k = 0; k < 20; ++k)
                c.points.push_back(centres[static_cast<std::size_t>(t)] + vel[static_cast<std::size_t>(t)] * f +
                                   Vec3{rng.normal(), rng.normal(), rng.normal()} * 0.05);
        s.push_back(std::move(c));
    }
    const ClusteredSequence cs = cluster_sequence(s, ClusteringOptions{});
    const ClusterGraph g = build_graph(cs, LinkerOptions{});
    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
        const int f = g.nodes[n].frame;
        CHECK(g.outbound[n].size() == (f < 29 ? 1u : 0u));
        CHECK(g.inbound[n].size() == (f > 0 ? 1u : 0u));
    }
    for (const auto& l : g.links) {
        CHECK(g.nodes[l.target].frame == g.nodes[l.source].frame + 1);
        // Same target: point indices share the block of 20.
        CHECK(g.nodes[l.source].points.front() / 20 == g.nodes[l.target].points.front() / 20);
    }
}
