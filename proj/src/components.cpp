#include "cloudtrack/components.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace cloudtrack {

const char* class_name(ComponentClass c) {
    switch (c) {
        case ComponentClass::chain: return "chain";
        case ComponentClass::x_shape: return "x-shape";
        case ComponentClass::y_shape: return "y-shape";
        case ComponentClass::complex: return "complex";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ComponentGraph

ComponentGraph ComponentGraph::extract(const ClusterGraph& graph, const Component& component) {
    ComponentGraph g;
    g.clouds = graph.clouds;
    std::unordered_map<ClusterId, std::uint32_t> local;
    local.reserve(component.nodes.size());
    for (ClusterId id : component.nodes) {
        const Cluster& c = graph.nodes[id];
        local.emplace(id, g.add_node(Node{c.frame, graph.slot[id], c.points, c.baricenter, id, false, true}));
    }
    for (ClusterId id : component.nodes) {
        for (std::uint32_t k : graph.outbound[id]) {
            const ClusterLink& l = graph.links[k];
            g.add_edge(local.at(l.source), local.at(l.target), l.support, l.velocity);
        }
    }
    return g;
}

const ComponentGraph::Edge* ComponentGraph::edge(std::uint32_t from, std::uint32_t to) const {
    for (const auto& e : succ[from])
        if (e.to == to) return &e;
    return nullptr;
}

std::uint32_t ComponentGraph::add_node(Node node) {
    nodes.push_back(std::move(node));
    succ.emplace_back();
    pred.emplace_back();
    return static_cast<std::uint32_t>(nodes.size() - 1);
}

void ComponentGraph::add_edge(std::uint32_t from, std::uint32_t to, std::uint32_t support, const Vec3& velocity) {
    if (nodes[to].frame != nodes[from].frame + 1) throw Error("link must join consecutive frames");
    if (edge(from, to)) return;
    succ[from].push_back({to, support, velocity});
    pred[to].push_back(from);
    std::sort(succ[from].begin(), succ[from].end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
    std::sort(pred[to].begin(), pred[to].end());
}

void ComponentGraph::remove_edge(std::uint32_t from, std::uint32_t to) {
    auto& s = succ[from];
    s.erase(std::remove_if(s.begin(), s.end(), [&](const Edge& e) { return e.to == to; }), s.end());
    auto& p = pred[to];
    p.erase(std::remove(p.begin(), p.end(), from), p.end());
}

void ComponentGraph::remove_node(std::uint32_t n) {
    while (!succ[n].empty()) remove_edge(n, succ[n].front().to);
    while (!pred[n].empty()) remove_edge(pred[n].front(), n);
    nodes[n].alive = false;
}

std::vector<std::uint32_t> ComponentGraph::alive_nodes() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].alive) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// Components

std::vector<Component> connected_components(const ClusterGraph& graph, int ghost_min, int bridge_frames) {
    const std::size_t n = graph.nodes.size();
    std::vector<char> seen(n, 0);
    std::vector<Component> out;
    std::deque<ClusterId> queue;
    for (ClusterId start = 0; start < n; ++start) {
        if (seen[start]) continue;
        Component comp;
        comp.id = static_cast<std::uint32_t>(out.size());
        seen[start] = 1;
        queue.push_back(start);
        while (!queue.empty()) {
            const ClusterId u = queue.front();
            queue.pop_front();
            comp.nodes.push_back(u);
            auto visit = [&](ClusterId v) {
                if (!seen[v]) {
                    seen[v] = 1;
                    queue.push_back(v);
                }
            };
            for (auto k : graph.outbound[u]) visit(graph.links[k].target);
            for (auto k : graph.inbound[u]) visit(graph.links[k].source);
        }
        std::sort(comp.nodes.begin(), comp.nodes.end(), [&](ClusterId a, ClusterId b) {
            const int fa = graph.nodes[a].frame, fb = graph.nodes[b].frame;
            return fa != fb ? fa < fb : a < b;
        });
        comp.first_frame = graph.nodes[comp.nodes.front()].frame;
        comp.last_frame = graph.nodes[comp.nodes.back()].frame;
        out.push_back(std::move(comp));
    }
    for (auto& c : out) {
        bool simple = true;
        for (ClusterId id : c.nodes) simple = simple && graph.inbound[id].size() <= 1 && graph.outbound[id].size() <= 1;
        if (!simple) c.classification = classify(ComponentGraph::extract(graph, c), ghost_min, bridge_frames);
    }
    return out;
}

Branch trace_branch(const ComponentGraph& g, std::uint32_t start, bool backward) {
    Branch b;
    std::uint32_t cur = start;
    b.nodes.push_back(cur);
    for (;;) {
        if (backward) {
            if (g.in_degree(cur) == 0) {
                b.free_end = true;
                break;
            }
            const std::uint32_t p = g.pred[cur].front();
            if (g.junction(p)) break;
            cur = p;
        } else {
            if (g.out_degree(cur) == 0) {
                b.free_end = true;
                break;
            }
            const std::uint32_t s = g.succ[cur].front().to;
            if (g.junction(s)) break;
            cur = s;
        }
        b.nodes.push_back(cur);
    }
    if (backward) std::reverse(b.nodes.begin(), b.nodes.end());
    return b;
}

std::vector<OcclusionEvent> find_events(const ComponentGraph& g, int bridge_frames) {
    const auto alive = g.alive_nodes();
    std::vector<std::uint32_t> parent(g.nodes.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    std::vector<char> is_junction(g.nodes.size(), 0);
    for (auto n : alive) is_junction[n] = g.junction(n);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> bridges;  // (node, junction it joins)
    for (auto j : alive) {
        if (!is_junction[j]) continue;
        for (const auto& e : g.succ[j]) {
            std::vector<std::uint32_t> path;
            std::uint32_t p = e.to;
            while (!is_junction[p] && static_cast<int>(path.size()) < bridge_frames && g.out_degree(p) == 1) {
                path.push_back(p);
                p = g.succ[p].front().to;
            }
            if (!is_junction[p]) continue;
            unite(j, p);
            for (auto b : path) bridges.emplace_back(b, j);
        }
    }

    std::map<std::uint32_t, OcclusionEvent> groups;
    std::vector<char> in_core(g.nodes.size(), 0);
    for (auto n : alive)
        if (is_junction[n]) {
            groups[find(n)].core.push_back(n);
            in_core[n] = 1;
        }
    for (auto [b, j] : bridges) {
        if (in_core[b]) continue;
        groups[find(j)].core.push_back(b);
        in_core[b] = 1;
    }

    std::vector<OcclusionEvent> out;
    for (auto& [root, ev] : groups) {
        std::sort(ev.core.begin(), ev.core.end(), [&](std::uint32_t a, std::uint32_t b) {
            return g.nodes[a].frame != g.nodes[b].frame ? g.nodes[a].frame < g.nodes[b].frame : a < b;
        });
        ev.first_frame = g.nodes[ev.core.front()].frame;
        ev.last_frame = g.nodes[ev.core.back()].frame;
        for (auto c : ev.core) {
            for (auto p : g.pred[c])
                if (!in_core[p]) ev.entering.push_back(trace_branch(g, p, true));
            for (const auto& e : g.succ[c])
                if (!in_core[e.to]) ev.exiting.push_back(trace_branch(g, e.to, false));
        }
        out.push_back(std::move(ev));
    }
    std::sort(out.begin(), out.end(), [&](const OcclusionEvent& a, const OcclusionEvent& b) {
        return a.first_frame != b.first_frame ? a.first_frame < b.first_frame : a.core.front() < b.core.front();
    });
    return out;
}

ComponentClass classify(const ComponentGraph& g, int ghost_min, int bridge_frames) {
    std::vector<std::uint32_t> junctions;
    for (auto n : g.alive_nodes())
        if (g.junction(n)) junctions.push_back(n);
    if (junctions.empty()) return ComponentClass::chain;

    if (junctions.size() == 1) {
        const std::uint32_t j = junctions.front();
        auto short_spur = [&](const Branch& b) {
            return b.free_end && static_cast<int>(b.nodes.size()) < ghost_min;
        };
        if (g.in_degree(j) == 2 && g.out_degree(j) <= 1) {
            for (auto p : g.pred[j])
                if (short_spur(trace_branch(g, p, true))) return ComponentClass::y_shape;
        }
        if (g.out_degree(j) == 2 && g.in_degree(j) <= 1) {
            for (const auto& e : g.succ[j])
                if (short_spur(trace_branch(g, e.to, false))) return ComponentClass::y_shape;
        }
    }
    const auto events = find_events(g, bridge_frames);
    if (events.size() == 1 && events.front().entering.size() == 2 && events.front().exiting.size() == 2)
        return ComponentClass::x_shape;
    return ComponentClass::complex;
}

// ---------------------------------------------------------------------------
// Windows

namespace {

struct Kinematics {
    Point3 origin;  // fitted centre at frame 0
    Vec3 velocity;
    Point3 at(int frame) const { return origin + velocity * static_cast<double>(frame); }
};

/// Least-squares line through baricenters of up to five nodes next to the core.
Kinematics branch_kinematics(const ComponentGraph& g, const Branch& b, bool entering) {
    const std::size_t k = std::min<std::size_t>(5, b.nodes.size());
    std::vector<std::uint32_t> use;
    if (entering)
        use.assign(b.nodes.end() - static_cast<std::ptrdiff_t>(k), b.nodes.end());
    else
        use.assign(b.nodes.begin(), b.nodes.begin() + static_cast<std::ptrdiff_t>(k));
    Kinematics kin;
    if (use.size() == 1) {
        const std::uint32_t n = use.front();
        const ComponentGraph::Edge* e = nullptr;
        if (entering) {
            if (!g.succ[n].empty()) e = &g.succ[n].front();
            if (!e && !g.pred[n].empty()) e = g.edge(g.pred[n].front(), n);
        } else {
            if (!g.pred[n].empty()) e = g.edge(g.pred[n].front(), n);
            if (!e && !g.succ[n].empty()) e = &g.succ[n].front();
        }
        kin.velocity = e ? e->velocity : Vec3{};
        kin.origin = g.nodes[n].baricenter - kin.velocity * static_cast<double>(g.nodes[n].frame);
        return kin;
    }
    double mt = 0.0;
    Point3 mp;
    for (auto n : use) {
        mt += g.nodes[n].frame;
        mp += g.nodes[n].baricenter;
    }
    mt /= static_cast<double>(use.size());
    mp = mp / static_cast<double>(use.size());
    double stt = 0.0;
    Vec3 stp;
    for (auto n : use) {
        const double dt = g.nodes[n].frame - mt;
        stt += dt * dt;
        stp += (g.nodes[n].baricenter - mp) * dt;
    }
    kin.velocity = stp / stt;
    kin.origin = mp - kin.velocity * mt;
    return kin;
}

}  // namespace

OcclusionWindow occlusion_window(const ComponentGraph& g, const OcclusionEvent& ev, int pad, int seq_first,
                                 int seq_last) {
    if (pad < 0) throw Error("occlusion pad must be non-negative");
    OcclusionWindow w;
    w.occlusion_first = ev.first_frame;
    w.occlusion_last = ev.last_frame;
    w.first_frame = std::max(ev.first_frame - pad, seq_first);
    w.last_frame = std::min(ev.last_frame + pad, seq_last);
    w.entering = ev.entering.size();
    w.exiting = ev.exiting.size();
    w.unresolvable = ev.entering.empty() || ev.exiting.empty();

    std::vector<Kinematics> kin;
    for (const auto& b : ev.entering) kin.push_back(branch_kinematics(g, b, true));
    for (const auto& b : ev.exiting) kin.push_back(branch_kinematics(g, b, false));

    auto emit = [&](std::uint32_t n, int branch) {
        const auto& node = g.nodes[n];
        if (node.frame < w.first_frame || node.frame > w.last_frame) return;
        const FrameCloud& cloud = g.cloud_of(n);
        for (auto idx : node.points) {
            WindowNode wn{node.frame, idx, n, branch, cloud.points[idx], {}};
            if (branch >= 0) {
                wn.displacement = kin[static_cast<std::size_t>(branch)].velocity;
            } else if (!kin.empty()) {
                std::size_t best = 0;
                double bd = squared_distance(wn.position, kin[0].at(node.frame));
                for (std::size_t k = 1; k < kin.size(); ++k) {
                    const double d = squared_distance(wn.position, kin[k].at(node.frame));
                    if (d < bd) {
                        bd = d;
                        best = k;
                    }
                }
                wn.displacement = kin[best].velocity;
            }
            w.nodes.push_back(wn);
        }
    };
    for (auto c : ev.core) emit(c, -1);
    int index = 0;
    for (const auto& b : ev.entering) {
        for (auto n : b.nodes) emit(n, index);
        ++index;
    }
    for (const auto& b : ev.exiting) {
        for (auto n : b.nodes) emit(n, index);
        ++index;
    }
    std::sort(w.nodes.begin(), w.nodes.end(), [](const WindowNode& a, const WindowNode& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.point < b.point;
    });
    return w;
}

Decomposition decompose_complex(const ComponentGraph& g, int bridge_frames) {
    Decomposition d;
    for (auto& ev : find_events(g, bridge_frames)) {
        if (ev.entering.size() == ev.exiting.size() && ev.entering.size() >= 2)
            d.problems.push_back(std::move(ev));
        else
            d.irreducible.push_back(std::move(ev));
    }
    return d;
}

void write_component_report(std::ostream& out, std::span<const Component> components) {
    out << "# component_id,classification,first_frame,last_frame,n_clusters\n";
    for (const auto& c : components)
        out << c.id << ',' << class_name(c.classification) << ',' << c.first_frame << ',' << c.last_frame << ','
            << c.nodes.size() << '\n';
}

}  // namespace cloudtrack
