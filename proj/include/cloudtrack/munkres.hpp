#pragma once

#include <cstddef>
#include <vector>

namespace cloudtrack {

/// Row-major rows x cols cost matrix.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    CostMatrix() = default;
    CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct Assignment {
    std::vector<long> row_to_col;  // -1 when unmatched
    std::vector<long> col_to_row;
    double total = 0.0;            // sum over accepted pairs
    std::size_t matched = 0;
};

/// Gated rectangular assignment. Entries above `gate` (or non-finite) are
/// forbidden; the matrix is padded to square with forbidden entries. The
/// result has the largest possible number of allowed pairs and, among those,
/// the least total cost.
Assignment solve_assignment(const CostMatrix& cost, double gate);

}  // namespace cloudtrack
