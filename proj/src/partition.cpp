#include "cloudtrack/partition.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cloudtrack/io.hpp"
#include "cloudtrack/kernels.hpp"
#include "cloudtrack/random.hpp"

namespace cloudtrack {

double static_weight(double d, double r1, double r0, double beta) {
    if (!(r1 > 0.0) || !(r0 > 0.0)) throw Error("static weight scales must be positive");
    if (!(d >= 0.0)) throw Error("distance must be non-negative");
    const double attract = std::exp(-std::pow(d / r1, beta));
    if (d <= r0) return attract;
    const double x = (d - r0) / r1;
    return attract - x * x;
}

double dynamic_weight(double extrapolation_distance, double r1) {
    if (!(r1 > 0.0)) throw Error("dynamic weight scale must be positive");
    return std::exp(-extrapolation_distance / r1);
}

double dynamic_weight(const Point3& xi, const Vec3& displacement, const Point3& xj, double r1) {
    return dynamic_weight(distance(xi + displacement, xj), r1);
}

double sparse_static_weight(double d, const WeightParams& p) {
    const double dmax = p.d_max();
    if (d > p.drop_factor * dmax) return 0.0;
    return static_weight(std::min(d, dmax), p.r1, p.r0, p.beta);
}

// ---------------------------------------------------------------------------
// Problem construction

void PartitionProblem::finalize() {
    const std::size_t n = size();
    for (auto& e : weights) {
        if (e.i == e.j) throw Error("self-weight in partition problem");
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.j >= n) throw Error("weight references a missing node");
        if (!std::isfinite(e.w)) throw Error("non-finite weight");
    }
    std::sort(weights.begin(), weights.end(),
              [](const WeightEntry& a, const WeightEntry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    for (std::size_t k = 1; k < weights.size(); ++k)
        if (weights[k].i == weights[k - 1].i && weights[k].j == weights[k - 1].j)
            throw Error("duplicate weight in partition problem");

    std::vector<std::uint32_t> degree(n, 0);
    for (const auto& e : weights) {
        ++degree[e.i];
        ++degree[e.j];
    }
    offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + degree[i];
    columns.assign(offsets[n], 0);
    values.assign(offsets[n], 0.0);
    std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
    // Rows come out sorted by column because weights are sorted by (i, j).
    for (const auto& e : weights) {
        columns[fill[e.j]] = e.i;
        values[fill[e.j]++] = e.w;
    }
    for (const auto& e : weights) {
        columns[fill[e.i]] = e.j;
        values[fill[e.i]++] = e.w;
    }
}

PartitionProblem make_problem(std::size_t n, std::vector<WeightEntry> weights) {
    PartitionProblem p;
    p.tags.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.tags[i].point = static_cast<std::uint32_t>(i);
    p.weights = std::move(weights);
    p.finalize();
    return p;
}

PartitionProblem build_problem(const OcclusionWindow& window, const WeightParams& params) {
    if (!(params.r1 > 0.0) || !(params.r0 > 0.0)) throw Error("partition scales must be positive");
    const auto& nodes = window.nodes;
    if (nodes.empty()) throw Error("empty occlusion window");
    if (nodes.front().frame == nodes.back().frame) throw Error("window too short");

    PartitionProblem p;
    p.r1 = params.r1;
    p.r0 = params.r0;
    p.beta = params.beta;
    p.tags.reserve(nodes.size());
    for (const auto& n : nodes) p.tags.push_back({n.frame, n.point, n.node, n.branch});

    // Frame runs in the sorted node list.
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (i == 0 || nodes[i].frame != nodes[i - 1].frame) starts.push_back(i);
    starts.push_back(nodes.size());

    const double static_radius = params.drop_factor * params.d_max();
    const double dynamic_radius = params.dynamic_cut_r1 * params.r1;
    std::vector<Point3> now, next;
    for (std::size_t f = 0; f + 1 < starts.size(); ++f) {
        const std::size_t a = starts[f], b = starts[f + 1];
        now.clear();
        for (std::size_t i = a; i < b; ++i) now.push_back(nodes[i].position);
        const GridIndex grid(now, static_radius);
        for (std::size_t i = a; i < b; ++i) {
            for (std::uint32_t k : grid.query(nodes[i].position, static_radius)) {
                const std::size_t j = a + k;
                if (j <= i) continue;
                const double w = sparse_static_weight(distance(nodes[i].position, nodes[j].position), params);
                if (w != 0.0) p.weights.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
            }
        }
        if (f + 2 >= starts.size() || nodes[starts[f + 1]].frame != nodes[a].frame + 1) continue;
        const std::size_t c = starts[f + 2];
        next.clear();
        for (std::size_t j = b; j < c; ++j) next.push_back(nodes[j].position);
        const GridIndex ngrid(next, dynamic_radius);
        for (std::size_t i = a; i < b; ++i) {
            const Point3 predicted = nodes[i].position + nodes[i].displacement;
            for (std::uint32_t k : ngrid.query(predicted, dynamic_radius)) {
                const std::size_t j = b + k;
                const double w = dynamic_weight(distance(predicted, nodes[j].position), params.r1);
                p.weights.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
            }
        }
    }
    p.finalize();
    return p;
}

double energy(const PartitionProblem& p, std::span<const std::int8_t> labels) {
    if (labels.size() != p.size()) throw Error("labels do not cover the problem");
    double h = 0.0;
    for (const auto& e : p.weights) h -= e.w * labels[e.i] * labels[e.j];
    return h;
}

namespace {

void canonical_sign(std::vector<std::int8_t>& labels) {
    if (!labels.empty() && labels[0] < 0)
        for (auto& x : labels) x = static_cast<std::int8_t>(-x);
}

}  // namespace

// ---------------------------------------------------------------------------
// Exact enumeration

PartitionSolution solve_exact(const PartitionProblem& p) {
    const std::size_t n = p.size();
    if (n > kExactLimit) throw Error("exact solver size limit");
    PartitionSolution s;
    s.solver = SolverKind::exact;
    if (n == 0) return s;

    std::vector<double> w(n * n, 0.0);
    double scale = 1.0;
    for (const auto& e : p.weights) {
        w[e.i * n + e.j] = w[e.j * n + e.i] = e.w;
        scale += std::abs(e.w);
    }
    const double tol = 1e-9 * scale;

    // Start at x = (+1, -1, ..., -1) and walk a Gray code over x_1..x_{n-1}.
    std::vector<std::int8_t> x(n, -1);
    x[0] = 1;
    std::vector<double> field(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) field[i] += w[i * n + j] * x[j];
    double h = energy(p, x);

    std::vector<std::int8_t> best = x;
    double best_h = h;
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    for (std::uint64_t k = 1; k < count; ++k) {
        const std::size_t b = static_cast<std::size_t>(std::countr_zero(k)) + 1;
        h += 2.0 * x[b] * field[b];
        x[b] = static_cast<std::int8_t>(-x[b]);
        const double delta = 2.0 * x[b];
        const double* row = &w[b * n];
        for (std::size_t j = 0; j < n; ++j) field[j] += delta * row[j];
        if (h < best_h - tol) {
            best_h = h;
            best = x;
        } else if (h <= best_h + tol && std::lexicographical_compare(x.begin(), x.end(), best.begin(), best.end())) {
            best_h = std::min(best_h, h);
            best = x;
        }
    }
    s.labels = std::move(best);
    s.energy = energy(p, s.labels);
    s.iterations = count;
    return s;
}

// ---------------------------------------------------------------------------
// Low-rank relaxation

void flip_descent(const PartitionProblem& p, std::vector<std::int8_t>& x) {
    const std::size_t n = p.size();
    std::vector<double> field(n, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t k = p.offsets[i]; k < p.offsets[i + 1]; ++k) {
            field[i] += p.values[k] * x[p.columns[k]];
            scale = std::max(scale, std::abs(p.values[k]));
        }
    }
    const double eps = 1e-12 * std::max(scale, 1.0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            // Flipping i changes H by 2 x_i h_i.
            if (x[i] * field[i] >= -eps) continue;
            x[i] = static_cast<std::int8_t>(-x[i]);
            const double delta = 2.0 * x[i];
            for (std::uint32_t k = p.offsets[i]; k < p.offsets[i + 1]; ++k) field[p.columns[k]] += delta * p.values[k];
            changed = true;
        }
    }
}

bool frame_flip_descent(const PartitionProblem& p, std::vector<std::int8_t>& x) {
    const std::size_t n = p.size();
    if (n == 0) return false;
    // Frames are non-decreasing along the node order for window problems.
    for (std::size_t i = 1; i < n; ++i)
        if (p.tags[i].frame < p.tags[i - 1].frame) return false;
    std::vector<std::size_t> start;
    for (std::size_t i = 1; i < n; ++i)
        if (p.tags[i].frame != p.tags[i - 1].frame) start.push_back(i);
    bool improved = false;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t s : start) {
            // Flipping every label from s on changes only pairs straddling s.
            double cross = 0.0, scale = 0.0;
            for (const auto& e : p.weights) {
                if (e.i < s && e.j >= s) {
                    cross -= e.w * x[e.i] * x[e.j];
                    scale = std::max(scale, std::abs(e.w));
                }
            }
            if (cross <= 1e-12 * std::max(scale, 1.0)) continue;
            for (std::size_t i = s; i < n; ++i) x[i] = static_cast<std::int8_t>(-x[i]);
            changed = improved = true;
        }
    }
    return improved;
}

namespace {

constexpr std::size_t W = kernels::kSpinWidth;

struct Relaxed {
    std::vector<double> v;  // n x W
    double energy = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t rank = 0;
    std::vector<double> full;  // rows before rank reduction
    std::size_t full_rank = 0;
};

/// acc = W V and the relaxed energy -1/2 sum_i v_i . acc_i.
double relaxed_energy(const PartitionProblem& p, const kernels::Table& kt, const std::vector<double>& v,
                      std::vector<double>& acc, std::vector<double>& dots) {
    const std::size_t n = p.size();
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t a = p.offsets[i], b = p.offsets[i + 1];
        kt.gather_axpy8(p.values.data() + a, p.columns.data() + a, b - a, v.data(), acc.data() + i * W);
    }
    kt.row_dots8(v.data(), acc.data(), n, dots.data());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += dots[i];
    return -0.5 * s;
}

void normalize_rows(std::vector<double>& v, std::size_t n, std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        double* r = v.data() + i * W;
        double s = 0.0;
        for (std::size_t d = 0; d < m; ++d) s += r[d] * r[d];
        s = std::sqrt(s);
        if (s > 0.0) {
            for (std::size_t d = 0; d < m; ++d) r[d] /= s;
        } else {
            r[0] = 1.0;
        }
    }
}

/// Projected gradient from the current rows of r.v, restricted to the first m coordinates.
void descend(const PartitionProblem& p, std::size_t m, const SdpOptions& opt, Relaxed& r) {
    const std::size_t n = p.size();
    const kernels::Table& kt = kernels::active();
    std::vector<double> acc(n * W), dots(n), grad(n * W), trial(n * W), trial_acc(n * W), trial_dots(n);
    double f = relaxed_energy(p, kt, r.v, acc, dots);
    double row_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::uint32_t k = p.offsets[i]; k < p.offsets[i + 1]; ++k) s += std::abs(p.values[k]);
        row_max = std::max(row_max, s);
    }
    r.converged = false;
    if (!(row_max > 0.0)) {
        r.energy = f;
        r.converged = true;
        return;
    }
    double step = 1.0 / row_max;

    for (int it = 0; it < opt.iterations; ++it) {
        ++r.iterations;
        // Riemannian gradient of -1/2 v^T W v on the product of spheres.
        double gnorm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < m; ++d) {
                const double g = -acc[i * W + d] + dots[i] * r.v[i * W + d];
                grad[i * W + d] = g;
                gnorm2 += g * g;
            }
        }
        if (gnorm2 <= 1e-24) {
            r.converged = true;
            break;
        }
        double f_new = f;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t k = 0; k < n * W; ++k) trial[k] = r.v[k] - step * grad[k];
            normalize_rows(trial, n, m);
            f_new = relaxed_energy(p, kt, trial, trial_acc, trial_dots);
            if (f_new <= f - 1e-4 * step * gnorm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            r.converged = true;
            break;
        }
        const double change = std::abs(f - f_new);
        r.v.swap(trial);
        acc.swap(trial_acc);
        dots.swap(trial_dots);
        f = f_new;
        step *= 1.5;
        if (change <= opt.tolerance * std::max(1.0, std::abs(f))) {
            r.converged = true;
            break;
        }
    }
    r.energy = f;
}

/// Principal axes of the rows (first m coordinates), strongest first.
Eigen::MatrixXd principal_axes(const std::vector<double>& v, std::size_t n, std::size_t m) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += v[i * W + a] * v[i * W + b];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    return es.eigenvectors().rowwise().reverse();
}

/// Rewrites rows in the principal basis keeping the first k axes.
void project_rows(std::vector<double>& v, std::size_t n, std::size_t m, std::size_t k) {
    const Eigen::MatrixXd axes = principal_axes(v, n, m);
    double tmp[W];
    for (std::size_t i = 0; i < n; ++i) {
        double* r = v.data() + i * W;
        for (std::size_t a = 0; a < k; ++a) {
            double s = 0.0;
            for (std::size_t d = 0; d < m; ++d) s += r[d] * axes(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(a));
            tmp[a] = s;
        }
        for (std::size_t d = 0; d < W; ++d) r[d] = d < k ? tmp[d] : 0.0;
    }
    normalize_rows(v, n, k);
}

/// Relaxation at rank m, then at successively halved ranks starting from the
/// principal projection of the previous stage.
Relaxed relax(const PartitionProblem& p, std::size_t m, const SdpOptions& opt, std::uint64_t seed) {
    const std::size_t n = p.size();
    Rng rng(seed);
    Relaxed r;
    r.v.assign(n * W, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < m; ++d) r.v[i * W + d] = rng.normal();
    normalize_rows(r.v, n, m);
    descend(p, m, opt, r);
    const bool full = r.converged;
    r.full = r.v;
    r.full_rank = m;
    for (std::size_t k = m / 2; opt.rank_reduction && k >= 2; k /= 2) {
        project_rows(r.v, n, m, k);
        m = k;
        descend(p, m, opt, r);
    }
    r.converged = full;
    r.rank = m;
    return r;
}

std::vector<std::int8_t> round_principal(const std::vector<double>& v, std::size_t n, std::size_t m) {
    const Eigen::MatrixXd axes = principal_axes(v, n, m);
    std::vector<std::int8_t> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < m; ++d) s += v[i * W + d] * axes(static_cast<Eigen::Index>(d), 0);
        x[i] = s >= 0.0 ? 1 : -1;
    }
    return x;
}

}  // namespace

PartitionSolution solve_sdp(const PartitionProblem& p, const SdpOptions& opt) {
    if (opt.rank < 2 || opt.rank > static_cast<int>(W)) throw Error("sdp rank must be in [2, 8]");
    if (opt.iterations < 1 || opt.restarts < 1 || !(opt.tolerance > 0.0)) throw Error("invalid sdp options");
    const std::size_t n = p.size();
    if (n == 0) throw Error("empty partition problem");
    if (p.offsets.size() != n + 1) throw Error("partition problem not finalized");
    PartitionSolution best;
    best.solver = SolverKind::sdp;
    if (n == 1) {
        best.labels = {1};
        return best;
    }
    const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(opt.rank));
    bool have = false;
    for (int r = 0; r < opt.restarts; ++r) {
        const Relaxed relaxed = relax(p, m, opt, derive_seed(opt.seed, 0x5d9, static_cast<std::uint64_t>(r)));
        best.iterations += relaxed.iterations;
        auto keep = [&](std::vector<std::int8_t> x) {
            do flip_descent(p, x);
            while (frame_flip_descent(p, x));
            canonical_sign(x);
            const double h = energy(p, x);
            if (!have || h < best.energy) {
                best.labels = std::move(x);
                best.energy = h;
                best.converged = relaxed.converged;
                have = true;
            }
        };
        keep(round_principal(relaxed.v, n, relaxed.rank));
        // Seeded random hyperplanes through the full-rank relaxation.
        Rng rng(derive_seed(opt.seed, 0x9a1, static_cast<std::uint64_t>(r)));
        const std::size_t fm = relaxed.full_rank;
        for (int h = 0; h < opt.hyperplanes; ++h) {
            double g[W] = {};
            for (std::size_t d = 0; d < fm; ++d) g[d] = rng.normal();
            std::vector<std::int8_t> x(n);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t d = 0; d < fm; ++d) s += relaxed.full[i * W + d] * g[d];
                x[i] = s >= 0.0 ? 1 : -1;
            }
            keep(std::move(x));
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Dumps

void write_problem(std::ostream& out, const PartitionProblem& p) {
    out << p.size() << ' ' << format_real(p.r1) << ' ' << format_real(p.r0) << ' ' << format_real(p.beta) << '\n';
    for (const auto& e : p.weights) out << e.i << ' ' << e.j << ' ' << format_real(e.w) << '\n';
    for (const auto& t : p.tags) out << "tag " << t.frame << ' ' << t.point << ' ' << t.cluster << ' ' << t.branch << '\n';
}

PartitionProblem read_problem(std::istream& in, const std::string& source) {
    PartitionProblem p;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::vector<std::string> f;
        for (std::string t; ss >> t;) f.push_back(t);
        if (f.empty() || f[0][0] == '#') continue;
        if (!header) {
            if (f.size() != 4) throw ParseError(source, lineno, "expected header: n_nodes r1 r0 beta");
            n = static_cast<std::size_t>(parse_integer(f[0], source, lineno));
            p.r1 = parse_real(f[1], source, lineno);
            p.r0 = parse_real(f[2], source, lineno);
            p.beta = parse_real(f[3], source, lineno);
            header = true;
        } else if (f[0] == "tag") {
            if (f.size() != 5) throw ParseError(source, lineno, "expected: tag frame point cluster branch");
            p.tags.push_back({static_cast<int>(parse_integer(f[1], source, lineno)),
                              static_cast<std::uint32_t>(parse_integer(f[2], source, lineno)),
                              static_cast<std::uint32_t>(parse_integer(f[3], source, lineno)),
                              static_cast<int>(parse_integer(f[4], source, lineno))});
        } else {
            if (f.size() != 3) throw ParseError(source, lineno, "expected: i j w");
            p.weights.push_back({static_cast<std::uint32_t>(parse_integer(f[0], source, lineno)),
                                 static_cast<std::uint32_t>(parse_integer(f[1], source, lineno)),
                                 parse_real(f[2], source, lineno)});
        }
    }
    if (!header) throw ParseError(source, lineno, "missing problem header");
    if (p.tags.empty()) p.tags.resize(n);
    if (p.tags.size() != n) throw ParseError(source, lineno, "tag count does not match n_nodes");
    p.finalize();
    return p;
}

void write_solution(std::ostream& out, const PartitionSolution& s) {
    for (std::size_t i = 0; i < s.labels.size(); ++i) out << i << ' ' << static_cast<int>(s.labels[i]) << '\n';
}

}  // namespace cloudtrack
