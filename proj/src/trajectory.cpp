#include "cloudtrack/trajectory.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "cloudtrack/io.hpp"
#include "cloudtrack/resolver.hpp"

namespace cloudtrack {

std::vector<Trajectory> read_trajectories(std::istream& in, const std::string& source) {
    std::map<long long, Trajectory> by_id;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw ParseError(source, lineno, "expected identity,frame,x,y,z");
        const long long id = parse_integer(fields[0], source, lineno);
        const long long frame = parse_integer(fields[1], source, lineno);
        Trajectory& t = by_id[id];
        t.identity = static_cast<int>(id);
        t.samples.push_back({static_cast<int>(frame),
                             {parse_real(fields[2], source, lineno), parse_real(fields[3], source, lineno),
                              parse_real(fields[4], source, lineno)}});
    }
    std::vector<Trajectory> out;
    for (auto& [id, t] : by_id) {
        std::stable_sort(t.samples.begin(), t.samples.end(),
                         [](const TrajectorySample& a, const TrajectorySample& b) { return a.frame < b.frame; });
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            if (t.samples[i].frame == t.samples[i - 1].frame)
                throw ParseError(source, 0, "identity " + std::to_string(id) + " has two samples in frame " +
                                                std::to_string(t.samples[i].frame));
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Trajectory> read_trajectories_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_trajectories(in, path);
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories) {
    std::vector<const Trajectory*> order;
    for (const auto& t : trajectories) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(),
                     [](const Trajectory* a, const Trajectory* b) { return a->identity < b->identity; });
    out << "# identity,frame,x,y,z\n";
    for (const Trajectory* t : order)
        for (const auto& s : t->samples)
            out << t->identity << ',' << s.frame << ',' << format_real(s.position.x) << ','
                << format_real(s.position.y) << ',' << format_real(s.position.z) << '\n';
}

void write_trajectories_file(const std::string& path, const std::vector<Trajectory>& trajectories) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_trajectories(out, trajectories);
}

GhostRemoval remove_ghosts(std::vector<Trajectory> trajectories, int min_length) {
    if (min_length < 0) throw Error("ghost threshold must be non-negative");
    GhostRemoval r;
    for (auto& t : trajectories) {
        if (t.span() < min_length)
            ++r.removed;
        else
            r.kept.push_back(std::move(t));
    }
    return r;
}

std::vector<Trajectory> build_trajectories(const std::vector<Chain>& chains) {
    std::vector<Trajectory> out;
    out.reserve(chains.size());
    for (const auto& c : chains) {
        Trajectory t;
        t.identity = static_cast<int>(out.size());
        for (const auto& s : c.samples) {
            if (!t.samples.empty() && s.frame != t.samples.back().frame + 1)
                throw Error("chain frames are not contiguous");
            t.samples.push_back({s.frame, s.baricenter});
            t.provenance.push_back(s.origin);
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace cloudtrack
