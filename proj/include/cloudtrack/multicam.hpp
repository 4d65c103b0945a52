#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cloudtrack/geometry.hpp"

namespace cloudtrack {

using Matrix34 = Eigen::Matrix<double, 3, 4>;

/// Finite pinhole camera: homogeneous world point -> homogeneous pixel (col, row, 1).
class CameraModel {
public:
    CameraModel() = default;
    CameraModel(const Matrix34& projection, int width, int height);

    const Matrix34& projection() const { return projection_; }
    int width() const { return width_; }
    int height() const { return height_; }

    Eigen::Vector2d project(const Point3& p) const;
    /// Positive for points in front of the camera (assuming a positively scaled P).
    double depth(const Point3& p) const;
    bool in_frustum(const Point3& p) const;
    Point3 center() const;

    /// K [R | -R c] from focal length, principal point, camera centre and look-at target.
    static CameraModel look_at(const Point3& center, const Point3& target, const Vec3& up, double focal,
                               double cx, double cy, int width, int height);

private:
    Matrix34 projection_ = Matrix34::Zero();
    int width_ = 0;
    int height_ = 0;
};

/// Throws on collinear or coincident camera centres.
void validate_rig(std::span<const CameraModel> cams);

/// 8-bit grayscale raster, row-major.
struct Image {
    int frame = 0;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int frame_, int width_, int height_, std::uint8_t fill = 0)
        : frame(frame_), width(width_), height(height_),
          pixels(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), fill) {}

    std::uint8_t at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
    }
    std::uint8_t& at(int row, int col) {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
    }
};

/// Pixel-plane coordinate. Segmentation yields pixel centres (integer values);
/// projections and noisy detections may be fractional.
struct Pixel {
    double col = 0.0;
    double row = 0.0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct PixelSet {
    int frame = 0;
    int camera = 0;
    std::vector<Pixel> pixels;
    bool truncated_window = false;
};

struct SegmentParams {
    int window = 21;     // odd, >= 3
    int threshold = 20;  // intensity levels out of 255
};

/// Sliding-window background subtraction. Background = per-pixel median over
/// the frames of `window` (the whole span is the window; index `center` is the
/// frame being segmented). Active pixels differ from it by more than the
/// threshold. `params.window` is the requested length; a shorter span sets
/// `truncated_window`.
PixelSet segment(std::span<const Image> window, std::size_t center, const SegmentParams& params,
                 int camera = 0);

/// Segments frame `index` of a sequence, truncating the window at the ends.
PixelSet segment_sequence_frame(std::span<const Image> sequence, std::size_t index,
                                const SegmentParams& params, int camera = 0);

struct Triangulation {
    Point3 point;
    double rms_error = 0.0;  // pixels, over the views used
    bool low_confidence = false;
};

/// Linear triangulation from the cross-product form of each projection,
/// solved by the right singular vector of the smallest singular value.
Triangulation triangulate_dlt(std::span<const Pixel> pixels, std::span<const CameraModel> cams);

struct PixelTriplet {
    std::array<std::uint32_t, 3> index{};  // into each camera's pixel list
    Point3 point;
    double rms_error = 0.0;
};

struct PixelPair {
    std::array<std::uint32_t, 2> index{};
    Point3 point;
    double rms_error = 0.0;
};

struct MatchParams {
    double max_error = 1.5;      // RMS reprojection gate, pixels
    double band_factor = 3.0;    // epipolar band half-width = band_factor * max_error
};

/// Two-view candidates: pairs whose triangulation reprojects within the gate.
std::vector<PixelPair> match_pairs(const PixelSet& p1, const PixelSet& p2, const CameraModel& c1,
                                   const CameraModel& c2, const MatchParams& params);

/// Three-view matching. Candidates walk epipolar bands from camera 1 into
/// cameras 2 and 3; a triplet is kept when its DLT point reprojects with RMS
/// error below the gate. Triplets are not forced one-to-one.
std::vector<PixelTriplet> match_pixels(const PixelSet& p1, const PixelSet& p2, const PixelSet& p3,
                                       std::span<const CameraModel> cams, const MatchParams& params);

struct ReconstructionParams {
    SegmentParams segment;
    MatchParams match;
    unsigned threads = 1;
};

struct FrameReconstructionStats {
    int frame = 0;
    std::array<std::size_t, 3> active_pixels{};
    std::size_t triplets = 0;
    std::size_t low_confidence_rejected = 0;
    bool truncated_window = false;
};

struct Reconstruction {
    Sequence clouds;
    std::vector<FrameReconstructionStats> stats;
};

/// images[c][f]: camera c, frame f. All three sequences must have equal length
/// and matching frame indices.
Reconstruction reconstruct_sequence(const std::array<std::vector<Image>, 3>& images,
                                    std::span<const CameraModel> cams, const ReconstructionParams& params);

// Files.
Image read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Image& image);
std::string frame_filename(int frame);  // frame_%06d.pgm
/// Loads every frame_*.pgm under `dir`, sorted by frame.
std::vector<Image> read_pgm_sequence(const std::string& dir);

/// Calibration text: one camera per non-comment line, 12 projection entries
/// in row-major order followed by width and height.
std::vector<CameraModel> read_calibration(std::istream& in, const std::string& source = "<stream>");
std::vector<CameraModel> read_calibration_file(const std::string& path);
void write_calibration(std::ostream& out, std::span<const CameraModel> cams);

}  // namespace cloudtrack
