#include "cloudtrack/resolver.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cloudtrack/parallel.hpp"
#include "cloudtrack/random.hpp"

namespace cloudtrack {

namespace {

constexpr std::uint32_t kResolvedSupport = 1u << 30;

bool frame_order(const ComponentGraph& g, std::uint32_t a, std::uint32_t b) {
    return g.nodes[a].frame != g.nodes[b].frame ? g.nodes[a].frame < g.nodes[b].frame : a < b;
}

Point3 mean_of(const FrameCloud& cloud, const std::vector<std::uint32_t>& idx) {
    Point3 s;
    for (auto i : idx) s += cloud.points[i];
    return s / static_cast<double>(idx.size());
}

void link_if_adjacent(ComponentGraph& g, std::uint32_t from, std::uint32_t to) {
    if (g.nodes[to].frame != g.nodes[from].frame + 1) return;
    g.add_edge(from, to, kResolvedSupport, g.nodes[to].baricenter - g.nodes[from].baricenter);
}

/// New node holding `points` of frame slot `slot`; origin is the contributing
/// node with the most points.
std::uint32_t make_derived(ComponentGraph& g, int frame, std::uint32_t slot, std::vector<std::uint32_t> points,
                           const std::map<std::uint32_t, std::size_t>& contributions) {
    ClusterId origin = 0;
    std::size_t most = 0;
    for (auto [n, count] : contributions) {
        if (count > most || (count == most && g.nodes[n].origin < origin)) {
            most = count;
            origin = g.nodes[n].origin;
        }
    }
    std::sort(points.begin(), points.end());
    ComponentGraph::Node node;
    node.frame = frame;
    node.slot = slot;
    node.baricenter = mean_of((*g.clouds)[slot], points);
    node.points = std::move(points);
    node.origin = origin;
    node.derived = true;
    return g.add_node(std::move(node));
}

/// Folds a one-in/one-out event into one node per frame.
void collapse(ComponentGraph& g, const OcclusionEvent& ev) {
    std::map<int, std::vector<std::uint32_t>> by_frame;
    for (auto c : ev.core) by_frame[g.nodes[c].frame].push_back(c);
    std::vector<std::uint32_t> merged;
    for (auto& [frame, members] : by_frame) {
        std::vector<std::uint32_t> points;
        std::map<std::uint32_t, std::size_t> contrib;
        for (auto c : members) {
            points.insert(points.end(), g.nodes[c].points.begin(), g.nodes[c].points.end());
            contrib[c] = g.nodes[c].points.size();
        }
        merged.push_back(make_derived(g, frame, g.nodes[members.front()].slot, std::move(points), contrib));
    }
    for (auto c : ev.core) g.remove_node(c);
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) link_if_adjacent(g, merged[i], merged[i + 1]);
    if (!ev.entering.empty()) link_if_adjacent(g, ev.entering.front().nodes.back(), merged.front());
    if (!ev.exiting.empty()) link_if_adjacent(g, merged.back(), ev.exiting.front().nodes.front());
}

double lower_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

enum class SplitFailure { none, ambiguity, degenerate };

/// Frames of the window where the labeling leaves one side empty or with
/// under a quarter of the points are relabeled from the two side tracks: the labels after each run are flipped
/// when that continues both tracks better, and run points go to the nearer
/// interpolated centre. Returns true when anything was repaired.
bool repair_runs(const std::vector<WindowNode>& nodes, std::vector<std::int8_t>& labels) {
    std::vector<int> frames;
    std::vector<std::size_t> start;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (i == 0 || nodes[i].frame != nodes[i - 1].frame) {
            frames.push_back(nodes[i].frame);
            start.push_back(i);
        }
    start.push_back(nodes.size());
    const std::size_t nf = frames.size();

    auto centres = [&](std::size_t f, Point3& minus, Point3& plus) {
        Point3 sum[2];
        std::size_t count[2] = {0, 0};
        for (std::size_t i = start[f]; i < start[f + 1]; ++i) {
            const int s = labels[i] > 0;
            sum[s] += nodes[i].position;
            ++count[s];
        }
        if (count[0] == 0 || count[1] == 0) return false;
        const bool balanced = 4 * std::min(count[0], count[1]) >= count[0] + count[1];
        minus = sum[0] / static_cast<double>(count[0]);
        plus = sum[1] / static_cast<double>(count[1]);
        return balanced;
    };

    std::vector<char> good(nf);
    std::vector<Point3> cm(nf), cp(nf);
    bool any_bad = false, any_good = false;
    for (std::size_t f = 0; f < nf; ++f) {
        good[f] = centres(f, cm[f], cp[f]);
        any_bad = any_bad || !good[f];
        any_good = any_good || good[f];
    }
    if (!any_bad || !any_good) return false;

    constexpr std::size_t kFit = 8;
    std::size_t f = 0;
    while (f < nf) {
        if (good[f]) {
            ++f;
            continue;
        }
        std::size_t g = f;
        while (g < nf && !good[g]) ++g;  // run is [f, g)
        std::vector<std::size_t> before, after;
        for (std::size_t k = f; k-- > 0 && before.size() < kFit;)
            if (good[k]) before.insert(before.begin(), k);
        for (std::size_t k = g; k < nf && after.size() < kFit; ++k)
            if (good[k]) after.push_back(k);

        // Least-squares line through the side centres of the given frames.
        auto predict = [&](const std::vector<std::size_t>& idx, const std::vector<Point3>& c, int frame) {
            double mt = 0.0;
            Point3 mp;
            for (auto k : idx) {
                mt += frames[k];
                mp += c[k];
            }
            mt /= static_cast<double>(idx.size());
            mp = mp / static_cast<double>(idx.size());
            double stt = 0.0;
            Vec3 stp;
            for (auto k : idx) {
                const double dt = frames[k] - mt;
                stt += dt * dt;
                stp += (c[k] - mp) * dt;
            }
            const Vec3 v = stt > 0.0 ? stp / stt : Vec3{};
            return mp + v * (frame - mt);
        };

        if (!before.empty() && !after.empty()) {
            const std::size_t b = before.back(), a = after.front();
            const double keep = distance(predict(before, cm, frames[a]), cm[a]) +
                                distance(predict(before, cp, frames[a]), cp[a]) +
                                distance(predict(after, cm, frames[b]), cm[b]) +
                                distance(predict(after, cp, frames[b]), cp[b]);
            const double flip = distance(predict(before, cm, frames[a]), cp[a]) +
                                distance(predict(before, cp, frames[a]), cm[a]) +
                                distance(predict(after, cp, frames[b]), cm[b]) +
                                distance(predict(after, cm, frames[b]), cp[b]);
            if (flip < keep) {
                for (std::size_t i = start[g]; i < nodes.size(); ++i) labels[i] = static_cast<std::int8_t>(-labels[i]);
                for (std::size_t k = g; k < nf; ++k) std::swap(cm[k], cp[k]);
            }
        }

        for (std::size_t k = f; k < g; ++k) {
            Point3 m, p;
            const int frame = frames[k];
            if (!before.empty() && !after.empty()) {
                const std::size_t b = before.back(), a = after.front();
                const double t = static_cast<double>(frame - frames[b]) / static_cast<double>(frames[a] - frames[b]);
                m = cm[b] + (cm[a] - cm[b]) * t;
                p = cp[b] + (cp[a] - cp[b]) * t;
            } else {
                const auto& idx = before.empty() ? after : before;
                m = predict(idx, cm, frame);
                p = predict(idx, cp, frame);
            }
            Vec3 axis = p - m;
            if (axis.squared_norm() == 0.0) axis = {1.0, 0.0, 0.0};
            const Point3 mid = (m + p) * 0.5;
            std::size_t lo = start[k], hi = start[k];
            double plo = 0.0, phi = 0.0;
            int count_plus = 0;
            for (std::size_t i = start[k]; i < start[k + 1]; ++i) {
                const double proj = (nodes[i].position - mid).dot(axis);
                labels[i] = proj > 0.0 ? 1 : -1;
                count_plus += labels[i] > 0;
                if (i == start[k] || proj < plo) { plo = proj; lo = i; }
                if (i == start[k] || proj > phi) { phi = proj; hi = i; }
            }
            const int size = static_cast<int>(start[k + 1] - start[k]);
            if (size >= 2 && count_plus == 0) labels[hi] = 1;
            if (size >= 2 && count_plus == size) labels[lo] = -1;
            good[k] = centres(k, cm[k], cp[k]);
        }
        f = g;
    }
    return true;
}

struct Leaf {
    int entering = -1;  // window branch index
    int exiting = -1;
    std::vector<std::size_t> core;  // indices into the window's nodes
};

struct Splitter {
    const OcclusionWindow& window;
    const WeightParams& params;
    const ResolveOptions& options;
    ResolveStats& stats;
    std::uint64_t seed;
    std::vector<Leaf> leaves;
    int calls = 0;

    SplitFailure run(const std::vector<std::size_t>& subset, std::vector<int> ins, std::vector<int> outs) {
        if (ins.size() == 1 && outs.size() == 1) {
            Leaf leaf{ins.front(), outs.front(), {}};
            for (auto i : subset)
                if (window.nodes[i].branch < 0) leaf.core.push_back(i);
            leaves.push_back(std::move(leaf));
            return SplitFailure::none;
        }
        OcclusionWindow sub;
        sub.first_frame = window.first_frame;
        sub.last_frame = window.last_frame;
        sub.occlusion_first = window.occlusion_first;
        sub.occlusion_last = window.occlusion_last;
        sub.entering = ins.size();
        sub.exiting = outs.size();
        for (auto i : subset) sub.nodes.push_back(window.nodes[i]);
        const PartitionProblem problem = build_problem(sub, params);

        PartitionSolution sol;
        if (problem.size() <= kExactLimit) {
            sol = solve_exact(problem);
            ++stats.exact_solves;
        } else {
            SdpOptions sdp = options.sdp;
            sdp.seed = derive_seed(seed, 0x51d, static_cast<std::uint64_t>(calls++));
            sol = solve_sdp(problem, sdp);
            ++stats.sdp_solves;
            if (!sol.converged) ++stats.not_converged;
        }

        if (options.repair_degenerate && repair_runs(sub.nodes, sol.labels)) ++stats.degenerate_repaired;

        std::map<int, long> votes;
        for (std::size_t k = 0; k < subset.size(); ++k) {
            const int b = sub.nodes[k].branch;
            if (b >= 0) votes[b] += sol.labels[k];
        }
        std::vector<int> ins_p, ins_m, outs_p, outs_m;
        auto assign = [&](const std::vector<int>& ids, std::vector<int>& plus, std::vector<int>& minus) {
            for (int b : ids) {
                const long v = votes[b];
                if (v == 0) return false;
                (v > 0 ? plus : minus).push_back(b);
            }
            return true;
        };
        if (!assign(ins, ins_p, ins_m) || !assign(outs, outs_p, outs_m)) return SplitFailure::ambiguity;
        if (ins_p.empty() || ins_m.empty() || ins_p.size() != outs_p.size() || ins_m.size() != outs_m.size())
            return SplitFailure::ambiguity;

        std::set<int> core_frames, plus_frames, minus_frames;
        std::vector<std::size_t> plus, minus;
        for (std::size_t k = 0; k < subset.size(); ++k) {
            const WindowNode& wn = sub.nodes[k];
            bool positive;
            if (wn.branch >= 0) {
                positive = std::find(ins_p.begin(), ins_p.end(), wn.branch) != ins_p.end() ||
                           std::find(outs_p.begin(), outs_p.end(), wn.branch) != outs_p.end();
            } else {
                positive = sol.labels[k] > 0;
                core_frames.insert(wn.frame);
                (positive ? plus_frames : minus_frames).insert(wn.frame);
            }
            (positive ? plus : minus).push_back(subset[k]);
        }
        if (plus_frames != core_frames || minus_frames != core_frames) return SplitFailure::degenerate;
        if (auto f = run(plus, ins_p, outs_p); f != SplitFailure::none) return f;
        return run(minus, ins_m, outs_m);
    }
};

bool shared_branch_nodes(const OcclusionEvent& ev) {
    std::set<std::uint32_t> seen;
    for (const auto* side : {&ev.entering, &ev.exiting})
        for (const auto& b : *side)
            for (auto n : b.nodes)
                if (!seen.insert(n).second) return true;
    return false;
}

}  // namespace

ResolveStats& ResolveStats::operator+=(const ResolveStats& o) {
    y_cuts += o.y_cuts;
    merges_collapsed += o.merges_collapsed;
    occlusions_solved += o.occlusions_solved;
    exact_solves += o.exact_solves;
    sdp_solves += o.sdp_solves;
    not_converged += o.not_converged;
    identity_ambiguity += o.identity_ambiguity;
    degenerate_split += o.degenerate_split;
    degenerate_repaired += o.degenerate_repaired;
    unresolvable_window += o.unresolvable_window;
    irreducible += o.irreducible;
    links_pruned += o.links_pruned;
    return *this;
}

std::vector<CutLink> cut_y_spurs(ComponentGraph& g, int ghost_min, int seq_first, int seq_last) {
    std::vector<CutLink> cuts;
    auto spur = [&](std::uint32_t start, bool backward) {
        if (g.junction(start)) return false;
        const Branch b = trace_branch(g, start, backward);
        if (!b.free_end || static_cast<int>(b.nodes.size()) >= ghost_min) return false;
        const int end = g.nodes[backward ? b.nodes.front() : b.nodes.back()].frame;
        return end != (backward ? seq_first : seq_last);
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::uint32_t n = 0; n < g.nodes.size(); ++n) {
            if (!g.nodes[n].alive) continue;
            if (g.in_degree(n) >= 2) {
                const auto preds = g.pred[n];
                for (auto p : preds) {
                    if (g.in_degree(n) < 2 || !spur(p, true)) continue;
                    g.remove_edge(p, n);
                    cuts.push_back({g.nodes[p].origin, g.nodes[n].origin});
                    changed = true;
                }
            }
            if (g.out_degree(n) >= 2) {
                std::vector<std::uint32_t> succs;
                for (const auto& e : g.succ[n]) succs.push_back(e.to);
                for (auto s : succs) {
                    if (g.out_degree(n) < 2 || !spur(s, false)) continue;
                    g.remove_edge(n, s);
                    cuts.push_back({g.nodes[n].origin, g.nodes[s].origin});
                    changed = true;
                }
            }
        }
    }
    return cuts;
}

bool resolve_event(ComponentGraph& g, const OcclusionEvent& ev, std::span<const ScaleStats> scales, int seq_first,
                   int seq_last, const ResolveOptions& options, ResolveStats& stats) {
    if (ev.entering.size() <= 1 && ev.exiting.size() <= 1) {
        collapse(g, ev);
        ++stats.merges_collapsed;
        return true;
    }
    if (ev.entering.size() != ev.exiting.size() || shared_branch_nodes(ev)) {
        ++stats.irreducible;
        return false;
    }
    const OcclusionWindow window = occlusion_window(g, ev, options.pad, seq_first, seq_last);
    if (window.unresolvable) {
        ++stats.unresolvable_window;
        return false;
    }

    std::set<std::uint32_t> slots;
    for (const auto& wn : window.nodes) slots.insert(g.nodes[wn.node].slot);
    std::vector<double> r1s, r0s;
    for (auto s : slots) {
        r1s.push_back(scales[s].r1);
        r0s.push_back(scales[s].r0);
    }
    WeightParams params;
    params.r1 = lower_median(r1s);
    params.r0 = lower_median(r0s);
    params.beta = options.beta;
    if (!(params.r1 > 0.0) || !(params.r0 > 0.0)) {
        ++stats.degenerate_split;
        return false;
    }

    const int k = static_cast<int>(ev.entering.size());
    std::vector<int> ins, outs;
    for (int b = 0; b < k; ++b) {
        ins.push_back(b);
        outs.push_back(k + b);
    }
    std::vector<std::size_t> all(window.nodes.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    Splitter splitter{window, params, options, stats,
                      derive_seed(options.sdp.seed, g.nodes[ev.core.front()].origin, 0), {}, 0};
    const SplitFailure failure = splitter.run(all, ins, outs);
    if (failure == SplitFailure::ambiguity) {
        ++stats.identity_ambiguity;
        return false;
    }
    if (failure == SplitFailure::degenerate) {
        ++stats.degenerate_split;
        return false;
    }

    // Rewire: one chain of sub-nodes per leaf through the core span.
    struct Pending {
        const Leaf* leaf;
        std::vector<std::uint32_t> nodes;
    };
    std::vector<Pending> pending;
    for (const auto& leaf : splitter.leaves) {
        std::map<int, std::vector<std::uint32_t>> points;
        std::map<int, std::map<std::uint32_t, std::size_t>> contrib;
        std::map<int, std::uint32_t> slot;
        for (auto i : leaf.core) {
            const WindowNode& wn = window.nodes[i];
            points[wn.frame].push_back(wn.point);
            ++contrib[wn.frame][wn.node];
            slot[wn.frame] = g.nodes[wn.node].slot;
        }
        Pending p{&leaf, {}};
        for (auto& [frame, pts] : points)
            p.nodes.push_back(make_derived(g, frame, slot[frame], std::move(pts), contrib[frame]));
        pending.push_back(std::move(p));
    }
    for (auto c : ev.core) g.remove_node(c);
    for (const auto& p : pending) {
        for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) link_if_adjacent(g, p.nodes[i], p.nodes[i + 1]);
        const Branch& in = ev.entering[static_cast<std::size_t>(p.leaf->entering)];
        const Branch& out = ev.exiting[static_cast<std::size_t>(p.leaf->exiting - k)];
        link_if_adjacent(g, in.nodes.back(), p.nodes.front());
        link_if_adjacent(g, p.nodes.back(), out.nodes.front());
    }
    ++stats.occlusions_solved;
    return true;
}

std::size_t prune_to_chains(ComponentGraph& g) {
    struct Candidate {
        std::uint32_t from, to, support;
    };
    std::vector<Candidate> all;
    bool conflict = false;
    for (std::uint32_t n = 0; n < g.nodes.size(); ++n) {
        if (!g.nodes[n].alive) continue;
        conflict = conflict || g.junction(n);
        for (const auto& e : g.succ[n]) all.push_back({n, e.to, e.support});
    }
    if (!conflict) return 0;
    std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
        if (a.support != b.support) return a.support > b.support;
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    std::vector<char> has_out(g.nodes.size(), 0), has_in(g.nodes.size(), 0);
    std::size_t removed = 0;
    for (const auto& c : all) {
        if (!has_out[c.from] && !has_in[c.to]) {
            has_out[c.from] = has_in[c.to] = 1;
        } else {
            g.remove_edge(c.from, c.to);
            ++removed;
        }
    }
    return removed;
}

std::vector<Chain> extract_chains(const ComponentGraph& g, std::uint32_t component) {
    auto starts = g.alive_nodes();
    starts.erase(std::remove_if(starts.begin(), starts.end(), [&](std::uint32_t n) { return g.in_degree(n) != 0; }),
                 starts.end());
    std::sort(starts.begin(), starts.end(), [&](std::uint32_t a, std::uint32_t b) { return frame_order(g, a, b); });
    std::vector<Chain> out;
    for (auto s : starts) {
        Chain c{component, {}};
        for (std::uint32_t n = s;;) {
            if (g.out_degree(n) > 1 || g.in_degree(n) > 1) throw Error("chain extraction on an unresolved node");
            c.samples.push_back({g.nodes[n].frame, g.nodes[n].baricenter, g.nodes[n].origin});
            if (g.succ[n].empty()) break;
            n = g.succ[n].front().to;
        }
        out.push_back(std::move(c));
    }
    return out;
}

Resolution resolve_components(const ClusterGraph& graph, std::span<const Component> components,
                              std::span<const ScaleStats> scales, const ResolveOptions& options) {
    Resolution res;
    if (components.empty()) return res;
    const int seq_first = graph.clouds->front().frame;
    const int seq_last = graph.clouds->back().frame;

    struct Local {
        std::vector<Chain> chains;
        std::vector<CutLink> cuts;
        ResolveStats stats;
    };
    std::vector<Local> local(components.size());
    parallel_for(components.size(), options.threads, [&](std::size_t i) {
        const Component& comp = components[i];
        Local& out = local[i];
        ComponentGraph g = ComponentGraph::extract(graph, comp);
        if (comp.classification != ComponentClass::chain) {
            if (comp.classification != ComponentClass::x_shape) {
                out.cuts = cut_y_spurs(g, options.ghost_min, seq_first, seq_last);
                out.stats.y_cuts = out.cuts.size();
            }
            for (const auto& ev : find_events(g, options.bridge_frames))
                resolve_event(g, ev, scales, seq_first, seq_last, options, out.stats);
            out.stats.links_pruned = prune_to_chains(g);
        }
        out.chains = extract_chains(g, comp.id);
    });

    for (auto& l : local) {
        res.chains.insert(res.chains.end(), std::make_move_iterator(l.chains.begin()),
                          std::make_move_iterator(l.chains.end()));
        res.cut_links.insert(res.cut_links.end(), l.cuts.begin(), l.cuts.end());
        res.stats += l.stats;
    }
    std::stable_sort(res.chains.begin(), res.chains.end(), [](const Chain& a, const Chain& b) {
        const int fa = a.samples.front().frame, fb = b.samples.front().frame;
        return fa != fb ? fa < fb : a.component < b.component;
    });
    std::sort(res.cut_links.begin(), res.cut_links.end());
    return res;
}

}  // namespace cloudtrack
