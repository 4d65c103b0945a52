#pragma once

// Inline template members of GridIndex.

namespace cloudtrack {

template <class Fn>
void GridIndex::visit_candidates(const Point3& p, Fn&& fn) const {
    const CellKey c = cell_of(p);
    for (std::int64_t di = -1; di <= 1; ++di) {
        for (std::int64_t dj = -1; dj <= 1; ++dj) {
            for (std::int64_t dk = -1; dk <= 1; ++dk) {
                const auto it = cells_.find(CellKey{c.i + di, c.j + dj, c.k + dk});
                if (it == cells_.end()) continue;
                const Range r = it->second;
                for (std::uint32_t s = r.begin; s < r.begin + r.count; ++s) {
                    const double dx = xs_[s] - p.x;
                    const double dy = ys_[s] - p.y;
                    const double dz = zs_[s] - p.z;
                    fn(order_[s], (dx * dx + dy * dy) + dz * dz);
                }
            }
        }
    }
}

}  // namespace cloudtrack
