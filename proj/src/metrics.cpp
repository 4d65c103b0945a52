#include "cloudtrack/metrics.hpp"

#include <map>
#include <ostream>
#include <set>

#include "cloudtrack/io.hpp"
#include "cloudtrack/munkres.hpp"

namespace cloudtrack {

namespace {

struct Present {
    std::size_t object;  // index into the trajectory list
    Point3 position;
};

std::map<int, std::vector<Present>> by_frame(const std::vector<Trajectory>& trajectories) {
    std::map<int, std::vector<Present>> out;
    for (std::size_t i = 0; i < trajectories.size(); ++i)
        for (const auto& s : trajectories[i].samples) out[s.frame].push_back({i, s.position});
    return out;
}

}  // namespace

MotReport evaluate(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& hyp, double gate) {
    if (!(gate > 0.0)) throw Error("metric gate must be positive");
    MotReport r;
    r.gate = gate;
    r.gt_trajectories = gt.size();

    const auto gt_frames = by_frame(gt);
    const auto hyp_frames = by_frame(hyp);
    std::set<int> frames;
    for (const auto& [f, v] : gt_frames) frames.insert(f);
    for (const auto& [f, v] : hyp_frames) frames.insert(f);

    constexpr long kNone = -1;
    std::vector<long> current(gt.size(), kNone);  // hypothesis matched in the previous frame
    std::vector<long> last(gt.size(), kNone);     // last hypothesis ever matched
    std::vector<char> was_matched(gt.size(), 0);
    std::vector<std::size_t> tracked(gt.size(), 0), samples(gt.size(), 0);
    const std::vector<Present> none;

    for (int f : frames) {
        const auto git = gt_frames.find(f);
        const auto hit = hyp_frames.find(f);
        const auto& g = git == gt_frames.end() ? none : git->second;
        const auto& h = hit == hyp_frames.end() ? none : hit->second;
        FrameTally tally{f, g.size(), h.size(), 0, 0, 0, 0};

        std::map<std::size_t, std::size_t> hyp_slot;  // hypothesis object -> index in h
        for (std::size_t j = 0; j < h.size(); ++j) hyp_slot[h[j].object] = j;
        std::vector<long> match(g.size(), kNone);
        std::vector<char> hyp_used(h.size(), 0);

        for (std::size_t i = 0; i < g.size(); ++i) {
            const long prev = current[g[i].object];
            if (prev == kNone) continue;
            const auto it = hyp_slot.find(static_cast<std::size_t>(prev));
            if (it == hyp_slot.end() || hyp_used[it->second]) continue;
            if (distance(g[i].position, h[it->second].position) <= gate) {
                match[i] = static_cast<long>(it->second);
                hyp_used[it->second] = 1;
            }
        }

        std::vector<std::size_t> free_g, free_h;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (match[i] == kNone) free_g.push_back(i);
        for (std::size_t j = 0; j < h.size(); ++j)
            if (!hyp_used[j]) free_h.push_back(j);
        if (!free_g.empty() && !free_h.empty()) {
            CostMatrix cost(free_g.size(), free_h.size());
            for (std::size_t a = 0; a < free_g.size(); ++a)
                for (std::size_t b = 0; b < free_h.size(); ++b)
                    cost(a, b) = distance(g[free_g[a]].position, h[free_h[b]].position);
            const Assignment asg = solve_assignment(cost, gate);
            for (std::size_t a = 0; a < free_g.size(); ++a) {
                if (asg.row_to_col[a] < 0) continue;
                const std::size_t j = free_h[static_cast<std::size_t>(asg.row_to_col[a])];
                match[free_g[a]] = static_cast<long>(j);
                hyp_used[j] = 1;
            }
        }

        std::vector<long> next(gt.size(), kNone);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const std::size_t obj = g[i].object;
            ++samples[obj];
            if (match[i] == kNone) {
                ++tally.misses;
                if (was_matched[obj]) ++r.fm;
                was_matched[obj] = 0;
                continue;
            }
            const long hobj = static_cast<long>(h[static_cast<std::size_t>(match[i])].object);
            ++tally.matches;
            ++tracked[obj];
            if (last[obj] != kNone && last[obj] != hobj) ++tally.ids;
            last[obj] = hobj;
            next[obj] = hobj;
            was_matched[obj] = 1;
        }
        current = std::move(next);
        for (std::size_t j = 0; j < h.size(); ++j)
            if (!hyp_used[j]) ++tally.false_positives;

        r.gt_samples += tally.ground_truth;
        r.matches += tally.matches;
        r.misses += tally.misses;
        r.false_positives += tally.false_positives;
        r.ids += tally.ids;
        r.frames.push_back(tally);
    }

    const double errors = static_cast<double>(r.misses + r.false_positives + r.ids);
    r.mota = r.gt_samples == 0 ? (errors == 0.0 ? 100.0 : -100.0 * errors)
                               : 100.0 * (1.0 - errors / static_cast<double>(r.gt_samples));
    std::size_t mt = 0, ml = 0;
    for (std::size_t k = 0; k < gt.size(); ++k) {
        if (samples[k] == 0) continue;
        const double coverage = static_cast<double>(tracked[k]) / static_cast<double>(samples[k]);
        if (coverage > 0.8) ++mt;
        if (coverage < 0.2) ++ml;
    }
    if (!gt.empty()) {
        r.mt = 100.0 * static_cast<double>(mt) / static_cast<double>(gt.size());
        r.ml = 100.0 * static_cast<double>(ml) / static_cast<double>(gt.size());
    }
    return r;
}

void write_report(std::ostream& out, const MotReport& r) {
    out << "gate: " << format_real(r.gate) << '\n'
        << "mota: " << format_real(r.mota) << '\n'
        << "ids: " << r.ids << '\n'
        << "mt: " << format_real(r.mt) << '\n'
        << "ml: " << format_real(r.ml) << '\n'
        << "fm: " << r.fm << '\n'
        << "misses: " << r.misses << '\n'
        << "false_positives: " << r.false_positives << '\n'
        << "matches: " << r.matches << '\n'
        << "gt_samples: " << r.gt_samples << '\n'
        << "gt_trajectories: " << r.gt_trajectories << '\n';
}

void write_frame_tallies(std::ostream& out, const MotReport& r) {
    out << "# frame,ground_truth,hypotheses,matches,misses,false_positives,ids\n";
    for (const auto& t : r.frames)
        out << t.frame << ',' << t.ground_truth << ',' << t.hypotheses << ',' << t.matches << ',' << t.misses << ','
            << t.false_positives << ',' << t.ids << '\n';
}

}  // namespace cloudtrack
