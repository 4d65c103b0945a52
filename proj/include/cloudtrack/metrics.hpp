#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "cloudtrack/trajectory.hpp"

namespace cloudtrack {

struct FrameTally {
    int frame = 0;
    std::size_t ground_truth = 0;
    std::size_t hypotheses = 0;
    std::size_t matches = 0;
    std::size_t misses = 0;
    std::size_t false_positives = 0;
    std::size_t ids = 0;
};

struct MotReport {
    double mota = 100.0;  // percent, may be negative
    std::size_t ids = 0;
    double mt = 0.0;      // percent of ground-truth trajectories
    double ml = 0.0;
    std::size_t fm = 0;
    std::size_t misses = 0;
    std::size_t false_positives = 0;
    std::size_t matches = 0;
    std::size_t gt_samples = 0;
    std::size_t gt_trajectories = 0;
    double gate = 0.3;
    std::vector<FrameTally> frames;
};

/// CLEAR-MOT evaluation with a 3D distance gate. Correspondences persist
/// while within the gate; remaining objects are assigned by least total
/// distance.
MotReport evaluate(const std::vector<Trajectory>& ground_truth, const std::vector<Trajectory>& hypotheses,
                   double gate);

/// `key: value` lines.
void write_report(std::ostream& out, const MotReport& report);
/// `frame,ground_truth,hypotheses,matches,misses,false_positives,ids` rows.
void write_frame_tallies(std::ostream& out, const MotReport& report);

}  // namespace cloudtrack
