#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cloudtrack/clustering.hpp"
#include "cloudtrack/geometry.hpp"

namespace cloudtrack {

struct TrajectorySample {
    int frame = 0;
    Point3 position;
};

struct Trajectory {
    int identity = 0;
    std::vector<TrajectorySample> samples;  // strictly increasing, contiguous frames
    std::vector<ClusterId> provenance;      // one per sample when built from clusters

    int first_frame() const { return samples.empty() ? 0 : samples.front().frame; }
    int last_frame() const { return samples.empty() ? -1 : samples.back().frame; }
    /// Life span in frames, endpoints inclusive.
    int span() const { return samples.empty() ? 0 : last_frame() - first_frame() + 1; }
};

/// Reads `identity,frame,x,y,z` rows; samples of one identity need not be adjacent.
std::vector<Trajectory> read_trajectories(std::istream& in, const std::string& source = "<stream>");
std::vector<Trajectory> read_trajectories_file(const std::string& path);

/// Writes rows sorted by (identity, frame).
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories);
void write_trajectories_file(const std::string& path, const std::vector<Trajectory>& trajectories);

struct GhostRemoval {
    std::vector<Trajectory> kept;
    std::size_t removed = 0;
};

/// Drops trajectories whose span is below `min_length` frames.
GhostRemoval remove_ghosts(std::vector<Trajectory> trajectories, int min_length);

struct Chain;

/// One trajectory per chain, identities 0, 1, ... in chain order.
std::vector<Trajectory> build_trajectories(const std::vector<Chain>& chains);

}  // namespace cloudtrack
