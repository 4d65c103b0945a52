#include "cloudtrack/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "cloudtrack/kernels.hpp"
#include "cloudtrack/parallel.hpp"

namespace cloudtrack {
namespace {

struct DisjointSets {
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);
        parent[b] = a;  // root is always the smallest member
    }

    std::vector<std::uint32_t> parent;
};

}  // namespace

std::vector<Cluster> cluster_frame(const FrameCloud& cloud, double threshold, ClusterId first_id) {
    if (!(threshold > 0.0)) throw Error("clustering threshold must be positive");
    const std::size_t n = cloud.points.size();
    if (n == 0) return {};

    // Cells of side `threshold`, sorted by (i, j, k). A run of equal (i, j) is
    // a row; linked points lie in the same or an adjacent cell.
    struct Keyed {
        std::int64_t i, j, k;
        std::uint32_t idx;
    };
    std::vector<Keyed> e(n);
    for (std::uint32_t p = 0; p < n; ++p) {
        const Point3& q = cloud.points[p];
        if (!q.finite()) throw Error("non-finite coordinate in grid");
        e[p] = {static_cast<std::int64_t>(std::floor(q.x / threshold)),
                static_cast<std::int64_t>(std::floor(q.y / threshold)),
                static_cast<std::int64_t>(std::floor(q.z / threshold)), p};
    }
    std::sort(e.begin(), e.end(), [](const Keyed& a, const Keyed& b) {
        if (a.i != b.i) return a.i < b.i;
        if (a.j != b.j) return a.j < b.j;
        if (a.k != b.k) return a.k < b.k;
        return a.idx < b.idx;
    });
    std::vector<double> xs(n), ys(n), zs(n);
    std::vector<std::uint32_t> pos(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        const Point3& q = cloud.points[e[s].idx];
        xs[s] = q.x;
        ys[s] = q.y;
        zs[s] = q.z;
        pos[e[s].idx] = s;
    }
    struct Row {
        std::int64_t i, j;
        std::uint32_t begin, end;
    };
    std::vector<Row> rows;
    for (std::uint32_t s = 0; s < n; ++s) {
        if (rows.empty() || rows.back().i != e[s].i || rows.back().j != e[s].j)
            rows.push_back({e[s].i, e[s].j, s, s});
        rows.back().end = s + 1;
    }

    const auto& kern = kernels::active();
    DisjointSets sets(n);
    std::vector<double> d2;
    auto scan = [&](std::uint32_t a, std::uint32_t lo, std::uint32_t hi) {
        if (lo >= hi) return;
        d2.resize(hi - lo);
        kern.squared_distances(xs[a], ys[a], zs[a], xs.data() + lo, ys.data() + lo, zs.data() + lo, hi - lo,
                               d2.data());
        // Compare distances, not squares, so ties agree with distance().
        for (std::uint32_t t = 0; t < hi - lo; ++t)
            if (std::sqrt(d2[t]) < threshold) sets.unite(a, lo + t);
    };
    // Self row, then the forward neighbour rows: each unordered cell pair once.
    constexpr std::int64_t offsets[4][2] = {{0, 1}, {1, -1}, {1, 0}, {1, 1}};
    std::size_t cursor[4] = {0, 0, 0, 0};
    for (const Row& r : rows) {
        std::uint32_t hi = r.begin;
        for (std::uint32_t a = r.begin; a < r.end; ++a) {
            while (hi < r.end && e[hi].k <= e[a].k + 1) ++hi;
            scan(a, a + 1, hi);
        }
        for (int o = 0; o < 4; ++o) {
            const std::int64_t ti = r.i + offsets[o][0], tj = r.j + offsets[o][1];
            std::size_t& q = cursor[o];
            while (q < rows.size() && (rows[q].i < ti || (rows[q].i == ti && rows[q].j < tj))) ++q;
            if (q == rows.size() || rows[q].i != ti || rows[q].j != tj) continue;
            const Row& b = rows[q];
            std::uint32_t lo = b.begin, top = b.begin;
            for (std::uint32_t a = r.begin; a < r.end; ++a) {
                while (lo < b.end && e[lo].k < e[a].k - 1) ++lo;
                if (top < lo) top = lo;
                while (top < b.end && e[top].k <= e[a].k + 1) ++top;
                scan(a, lo, top);
            }
        }
    }

    // Clusters in ascending order of their smallest original index.
    std::vector<std::int64_t> slot(n, -1);
    std::vector<Cluster> clusters;
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t root = sets.find(pos[i]);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::int64_t>(clusters.size());
            clusters.push_back(Cluster{cloud.frame, 0, {}, {}});
        }
        clusters[static_cast<std::size_t>(slot[root])].points.push_back(i);
    }
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        auto& cl = clusters[c];
        cl.id = first_id + static_cast<ClusterId>(c);
        Point3 sum;
        for (auto idx : cl.points) sum += cloud.points[idx];
        cl.baricenter = sum / static_cast<double>(cl.points.size());
    }
    return clusters;
}

std::vector<Point3> member_points(const FrameCloud& cloud, const Cluster& cluster) {
    std::vector<Point3> pts;
    pts.reserve(cluster.points.size());
    for (auto idx : cluster.points) pts.push_back(cloud.points[idx]);
    return pts;
}

double compute_r0(const FrameCloud& cloud, const std::vector<Cluster>& clusters) {
    std::vector<std::vector<Point3>> members;
    members.reserve(clusters.size());
    for (const auto& c : clusters) members.push_back(member_points(cloud, c));
    return compute_r0(std::span<const std::vector<Point3>>(members));
}

ClusteredSequence cluster_sequence(const Sequence& clouds, const ClusteringOptions& options) {
    if (!(options.alpha > 0.0)) throw Error("clustering multiplier must be positive");
    for (std::size_t f = 1; f < clouds.size(); ++f) {
        if (clouds[f].frame <= clouds[f - 1].frame) throw Error("frame indices not strictly increasing");
    }
    ClusteredSequence out;
    out.clouds = &clouds;
    const std::size_t nf = clouds.size();
    out.clusters.resize(nf);
    out.scales.assign(nf, ScaleStats{});

    std::vector<double> r1s(nf, 0.0);
    parallel_for(nf, options.threads, [&](std::size_t f) {
        if (clouds[f].points.size() >= 2) r1s[f] = compute_r1(clouds[f]);
    });
    std::vector<double> valid;
    for (double r : r1s)
        if (r > 0.0) valid.push_back(r);
    if (valid.empty()) throw Error("insufficient points for scale");
    out.global.r1 = median_lower(valid);
    for (std::size_t f = 0; f < nf; ++f) {
        const bool use_frame = options.scale_mode == ScaleMode::per_frame && r1s[f] > 0.0;
        out.scales[f].r1 = use_frame ? r1s[f] : out.global.r1;
    }

    parallel_for(nf, options.threads, [&](std::size_t f) {
        out.clusters[f] = cluster_frame(clouds[f], options.alpha * out.scales[f].r1);
    });

    std::vector<double> r0s;
    ClusterId next = 0;
    for (std::size_t f = 0; f < nf; ++f) {
        for (auto& c : out.clusters[f]) c.id = next++;
        if (!out.clusters[f].empty()) {
            out.scales[f].r0 = compute_r0(clouds[f], out.clusters[f]);
            r0s.push_back(out.scales[f].r0);
        }
    }
    out.cluster_count = next;
    out.global.r0 = r0s.empty() ? 0.0 : median_lower(r0s);
    if (!(out.global.r0 > 0.0)) out.global.r0 = out.global.r1;
    for (std::size_t f = 0; f < nf; ++f) {
        if (options.scale_mode == ScaleMode::global || !(out.scales[f].r0 > 0.0))
            out.scales[f].r0 = out.global.r0;
    }
    return out;
}

void write_cluster_dump(std::ostream& out, const ClusteredSequence& seq) {
    out << "# frame,cluster_id,point_index\n";
    for (const auto& frame : seq.clusters) {
        for (const auto& c : frame) {
            for (auto idx : c.points) out << c.frame << ',' << c.id << ',' << idx << '\n';
        }
    }
}

}  // namespace cloudtrack
