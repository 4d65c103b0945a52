#include "cloudtrack/munkres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cloudtrack/geometry.hpp"

namespace cloudtrack {

Assignment solve_assignment(const CostMatrix& cost, double gate) {
    if (!(gate > 0.0)) throw Error("assignment gate must be positive");
    if (cost.values.size() != cost.rows * cost.cols) throw Error("cost matrix shape mismatch");

    Assignment out;
    out.row_to_col.assign(cost.rows, -1);
    out.col_to_row.assign(cost.cols, -1);
    const std::size_t n = std::max(cost.rows, cost.cols);
    if (cost.rows == 0 || cost.cols == 0) return out;

    // A forbidden entry costs more than any full set of allowed ones, so the
    // optimum first maximises the number of allowed pairs.
    const double forbidden = gate * static_cast<double>(n + 1) + 1.0;
    auto at = [&](std::size_t r, std::size_t c) {
        if (r >= cost.rows || c >= cost.cols) return forbidden;
        const double v = cost(r, c);
        return std::isfinite(v) && v <= gate ? v : forbidden;
    };

    // Shortest augmenting path with row/column potentials, 1-based, O(n^3).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t r = p[j] - 1, c = j - 1;
        if (r >= cost.rows || c >= cost.cols) continue;
        const double val = cost(r, c);
        if (!std::isfinite(val) || val > gate) continue;
        out.row_to_col[r] = static_cast<long>(c);
        out.col_to_row[c] = static_cast<long>(r);
        out.total += val;
        ++out.matched;
    }
    return out;
}

}  // namespace cloudtrack
