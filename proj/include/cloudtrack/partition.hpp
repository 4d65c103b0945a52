#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cloudtrack/components.hpp"
#include "cloudtrack/geometry.hpp"

namespace cloudtrack {

/// Same-frame weight: exp(-(d/r1)^beta) - ((d - r0)/r1)^2 * step(d - r0),
/// with step(0) = 0. Throws on non-positive scales.
double static_weight(double d, double r1, double r0, double beta);

/// Consecutive-frame weight exp(-D/r1), D the distance between the
/// extrapolated position of i and the position of j.
double dynamic_weight(double extrapolation_distance, double r1);
double dynamic_weight(const Point3& xi, const Vec3& displacement, const Point3& xj, double r1);

struct WeightParams {
    double r1 = 0.0;
    double r0 = 0.0;
    double beta = 2.2;
    double cap_r1 = 3.0;       // static weights saturate beyond d_max = r0 + cap_r1 * r1
    double drop_factor = 2.0;  // ... and vanish beyond drop_factor * d_max
    double dynamic_cut_r1 = 5.0;  // dynamic pairs with D > dynamic_cut_r1 * r1 are dropped

    double d_max() const { return r0 + cap_r1 * r1; }
};

/// Static weight with the saturation and drop cutoffs applied; 0 when dropped.
double sparse_static_weight(double d, const WeightParams& params);

struct NodeTag {
    int frame = 0;
    std::uint32_t point = 0;
    std::uint32_t cluster = 0;
    int branch = -1;
};

struct WeightEntry {
    std::uint32_t i = 0;  // i < j
    std::uint32_t j = 0;
    double w = 0.0;
};

/// Symmetric sparse Ising instance; neighbours are kept in CSR form.
struct PartitionProblem {
    std::vector<NodeTag> tags;
    std::vector<WeightEntry> weights;  // sorted by (i, j)
    double r1 = 0.0;
    double r0 = 0.0;
    double beta = 0.0;

    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> columns;
    std::vector<double> values;

    std::size_t size() const { return tags.size(); }
    /// Sorts and validates `weights`, then rebuilds the CSR arrays.
    void finalize();
};

/// Plain instance over n untagged nodes, e.g. for solver tests.
PartitionProblem make_problem(std::size_t n, std::vector<WeightEntry> weights);

/// Static entries for same-frame pairs within the drop radius, dynamic entries
/// for consecutive-frame pairs within the dynamic cutoff.
PartitionProblem build_problem(const OcclusionWindow& window, const WeightParams& params);

/// H = -sum_{i<j} w_ij x_i x_j.
double energy(const PartitionProblem& problem, std::span<const std::int8_t> labels);

enum class SolverKind { exact, sdp };

struct PartitionSolution {
    std::vector<std::int8_t> labels;  // +1 / -1, labels[0] == +1
    double energy = 0.0;
    SolverKind solver = SolverKind::exact;
    bool converged = true;
    std::size_t iterations = 0;
};

inline constexpr std::size_t kExactLimit = 20;

/// Enumerates the 2^(n-1) labelings with x_0 = +1. Among global minima the
/// lexicographically smallest label vector (-1 before +1) wins.
PartitionSolution solve_exact(const PartitionProblem& problem);

struct SdpOptions {
    int rank = 8;             // at most kernels::kSpinWidth
    int iterations = 400;     // per restart
    double tolerance = 1e-7;  // relative energy change
    int restarts = 1;
    bool rank_reduction = true;  // re-optimise at halved ranks before rounding
    int hyperplanes = 16;        // extra seeded random-hyperplane roundings per restart
    std::uint64_t seed = 1;
};

/// Low-rank relaxation: unit vectors on the (m-1)-sphere, projected gradient
/// with backtracking, rounding along the leading principal direction (plus
/// seeded random hyperplanes), single-flip descent and frame-suffix flips. The lowest energy over
/// all restarts and roundings is kept.
PartitionSolution solve_sdp(const PartitionProblem& problem, const SdpOptions& options);

/// Lowers H by single label flips until none helps.
void flip_descent(const PartitionProblem& problem, std::vector<std::int8_t>& labels);

/// Lowers H by negating every label from some frame onward. Needs node tags
/// in non-decreasing frame order; returns whether anything changed.
bool frame_flip_descent(const PartitionProblem& problem, std::vector<std::int8_t>& labels);

/// Header `n_nodes r1 r0 beta`, then `i j w` rows, then `tag frame point cluster branch` rows.
void write_problem(std::ostream& out, const PartitionProblem& problem);
PartitionProblem read_problem(std::istream& in, const std::string& source = "<stream>");
/// `node_index label` rows.
void write_solution(std::ostream& out, const PartitionSolution& solution);

}  // namespace cloudtrack
