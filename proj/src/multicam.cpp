#include "cloudtrack/multicam.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include "cloudtrack/io.hpp"
#include "cloudtrack/parallel.hpp"

namespace cloudtrack {

CameraModel::CameraModel(const Matrix34& projection, int width, int height)
    : projection_(projection), width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw Error("camera image size must be positive");
    if (!projection.allFinite()) throw Error("camera projection has non-finite entries");
    const Eigen::Matrix3d m = projection.leftCols<3>();
    const double scale = m.norm();
    if (!(scale > 0.0) || std::abs(m.determinant()) <= 1e-12 * scale * scale * scale)
        throw Error("camera projection is not a finite camera (singular 3x3 block)");
}

Eigen::Vector2d CameraModel::project(const Point3& p) const {
    const Eigen::Vector3d h = projection_ * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
    return {h.x() / h.z(), h.y() / h.z()};
}

double CameraModel::depth(const Point3& p) const {
    const Eigen::Vector3d h = projection_ * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
    const Eigen::Matrix3d m = projection_.leftCols<3>();
    const double sign = m.determinant() > 0.0 ? 1.0 : -1.0;
    return sign * h.z() / m.row(2).norm();
}

bool CameraModel::in_frustum(const Point3& p) const {
    if (!(depth(p) > 0.0)) return false;
    const Eigen::Vector2d uv = project(p);
    return uv.x() >= -0.5 && uv.x() < width_ - 0.5 && uv.y() >= -0.5 && uv.y() < height_ - 0.5;
}

Point3 CameraModel::center() const {
    const Eigen::Matrix3d m = projection_.leftCols<3>();
    const Eigen::Vector3d c = -m.partialPivLu().solve(projection_.col(3));
    return {c.x(), c.y(), c.z()};
}

CameraModel CameraModel::look_at(const Point3& center, const Point3& target, const Vec3& up, double focal,
                                 double cx, double cy, int width, int height) {
    const Eigen::Vector3d c(center.x, center.y, center.z);
    const Eigen::Vector3d fwd = (Eigen::Vector3d(target.x, target.y, target.z) - c).normalized();
    Eigen::Vector3d right = fwd.cross(Eigen::Vector3d(up.x, up.y, up.z));
    if (right.norm() < 1e-9) throw Error("look_at: up vector parallel to viewing direction");
    right.normalize();
    const Eigen::Vector3d down = fwd.cross(right);
    Eigen::Matrix3d r;
    r.row(0) = right;
    r.row(1) = down;
    r.row(2) = fwd;
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = k(1, 1) = focal;
    k(0, 2) = cx;
    k(1, 2) = cy;
    Matrix34 rt;
    rt.leftCols<3>() = r;
    rt.col(3) = -r * c;
    return CameraModel(k * rt, width, height);
}

void validate_rig(std::span<const CameraModel> cams) {
    if (cams.size() != 3) throw Error("camera rig needs exactly three cameras");
    const Point3 a = cams[0].center(), b = cams[1].center(), c = cams[2].center();
    const double scale = std::max({distance(a, b), distance(a, c), distance(b, c)});
    if (!(scale > 0.0) || std::min({distance(a, b), distance(a, c), distance(b, c)}) <= 1e-9 * scale)
        throw Error("degenerate camera configuration: coincident camera centres");
    const Vec3 u = b - a, v = c - a;
    const Vec3 n{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
    if (n.norm() <= 1e-9 * scale * scale) throw Error("degenerate camera configuration: collinear camera centres");
}

// ---------------------------------------------------------------------------
// Segmentation

PixelSet segment(std::span<const Image> window, std::size_t center, const SegmentParams& params, int camera) {
    if (params.window < 3 || params.window % 2 == 0) throw Error("segmentation window must be odd and >= 3");
    if (params.threshold <= 0) throw Error("segmentation threshold must be positive");
    if (window.empty() || center >= window.size()) throw Error("segmentation window does not contain its centre");
    const Image& mid = window[center];
    for (const auto& img : window)
        if (img.width != mid.width || img.height != mid.height) throw Error("segmentation window has mixed image sizes");

    PixelSet out;
    out.frame = mid.frame;
    out.camera = camera;
    out.truncated_window = window.size() < static_cast<std::size_t>(params.window);
    const std::size_t n = window.size();
    std::vector<std::uint8_t> column(n);
    const std::size_t lower = (n - 1) / 2;
    for (int r = 0; r < mid.height; ++r) {
        for (int c = 0; c < mid.width; ++c) {
            for (std::size_t k = 0; k < n; ++k) column[k] = window[k].at(r, c);
            std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(lower), column.end());
            const int bg = column[lower];
            if (std::abs(static_cast<int>(mid.at(r, c)) - bg) > params.threshold)
                out.pixels.push_back({static_cast<double>(c), static_cast<double>(r)});
        }
    }
    return out;
}

PixelSet segment_sequence_frame(std::span<const Image> sequence, std::size_t index, const SegmentParams& params,
                                int camera) {
    if (index >= sequence.size()) throw Error("segmentation frame index out of range");
    const std::size_t half = static_cast<std::size_t>(params.window / 2);
    const std::size_t lo = index >= half ? index - half : 0;
    const std::size_t hi = std::min(sequence.size() - 1, index + half);
    return segment(sequence.subspan(lo, hi - lo + 1), index - lo, params, camera);
}

// ---------------------------------------------------------------------------
// Triangulation

namespace {

double reprojection_rms(const Point3& p, std::span<const Pixel> pixels, std::span<const CameraModel> cams) {
    double sum = 0.0;
    for (std::size_t v = 0; v < pixels.size(); ++v) {
        const Eigen::Vector2d uv = cams[v].project(p);
        const double dc = uv.x() - pixels[v].col, dr = uv.y() - pixels[v].row;
        sum += dc * dc + dr * dr;
    }
    return std::sqrt(sum / static_cast<double>(pixels.size()));
}

}  // namespace

Triangulation triangulate_dlt(std::span<const Pixel> pixels, std::span<const CameraModel> cams) {
    if (pixels.size() < 2 || pixels.size() != cams.size()) throw Error("triangulation needs >= 2 matching views");
    Eigen::MatrixXd a(2 * pixels.size(), 4);
    for (std::size_t v = 0; v < pixels.size(); ++v) {
        const Matrix34& p = cams[v].projection();
        a.row(static_cast<Eigen::Index>(2 * v)) = pixels[v].col * p.row(2) - p.row(0);
        a.row(static_cast<Eigen::Index>(2 * v + 1)) = pixels[v].row * p.row(2) - p.row(1);
    }
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const double n = a.row(r).norm();
        if (n > 0.0) a.row(r) /= n;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::Vector4d s = svd.singularValues().head<4>();
    const Eigen::Vector4d x = svd.matrixV().col(3);

    Triangulation t;
    const double w = x(3);
    t.low_confidence = !(s(2) > 1e-8 * s(0)) || std::abs(w) <= 1e-12 * x.head<3>().norm();
    if (w == 0.0) {
        t.point = {x(0), x(1), x(2)};
        t.rms_error = std::numeric_limits<double>::infinity();
        t.low_confidence = true;
        return t;
    }
    t.point = {x(0) / w, x(1) / w, x(2) / w};
    t.rms_error = reprojection_rms(t.point, pixels, cams);
    for (const auto& cam : cams) t.low_confidence = t.low_confidence || !(cam.depth(t.point) > 0.0);
    return t;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

using Matrix3 = Eigen::Matrix3d;

/// F with x2^T F x1 = 0 for corresponding pixels of cameras a -> b.
Matrix3 fundamental(const CameraModel& a, const CameraModel& b) {
    const Point3 c = a.center();
    const Eigen::Vector3d e = b.projection() * Eigen::Vector4d(c.x, c.y, c.z, 1.0);
    Matrix3 ex;
    ex << 0, -e.z(), e.y(), e.z(), 0, -e.x(), -e.y(), e.x(), 0;
    const Matrix34& pa = a.projection();
    const Eigen::Matrix<double, 4, 3> pinv = pa.transpose() * (pa * pa.transpose()).inverse();
    return ex * b.projection() * pinv;
}

/// Normalised line a*col + b*row + d = 0 with a^2 + b^2 = 1.
Eigen::Vector3d epipolar_line(const Matrix3& f, const Pixel& p) {
    Eigen::Vector3d l = f * Eigen::Vector3d(p.col, p.row, 1.0);
    const double n = std::hypot(l.x(), l.y());
    return n > 0.0 ? Eigen::Vector3d(l / n) : Eigen::Vector3d(0.0, 0.0, 1.0);
}

double line_distance(const Eigen::Vector3d& l, const Pixel& p) {
    return std::abs(l.x() * p.col + l.y() * p.row + l.z());
}

/// Bucketed pixel list supporting band queries along a line.
class PixelGrid {
public:
    PixelGrid(const std::vector<Pixel>& pixels, double cell) : pixels_(pixels), cell_(std::max(cell, 1.0)) {
        for (std::uint32_t i = 0; i < pixels.size(); ++i) {
            const auto key = key_of(static_cast<std::int64_t>(std::floor(pixels[i].col / cell_)),
                                    static_cast<std::int64_t>(std::floor(pixels[i].row / cell_)));
            buckets_[key].push_back(i);
            min_c_ = std::min(min_c_, pixels[i].col);
            max_c_ = std::max(max_c_, pixels[i].col);
            min_r_ = std::min(min_r_, pixels[i].row);
            max_r_ = std::max(max_r_, pixels[i].row);
        }
    }

    /// Pixels within `band` of the line, ascending index.
    std::vector<std::uint32_t> band(const Eigen::Vector3d& l, double band) const {
        std::vector<std::uint32_t> out;
        if (pixels_.empty()) return out;
        const double a = l.x(), b = l.y(), d = l.z();
        const bool by_column = std::abs(b) >= std::abs(a);
        // Walk cells along the dominant axis; on each slab the line covers an
        // interval of the other axis, widened by the band.
        const double lo = by_column ? min_c_ : min_r_, hi = by_column ? max_c_ : max_r_;
        const double olo = by_column ? min_r_ : min_c_, ohi = by_column ? max_r_ : max_c_;
        const double den = by_column ? b : a, slope = by_column ? a : b;
        const double widen = band / std::abs(den);
        const auto s0 = static_cast<std::int64_t>(std::floor(lo / cell_));
        const auto s1 = static_cast<std::int64_t>(std::floor(hi / cell_));
        for (std::int64_t s = s0; s <= s1; ++s) {
            const double x0 = s * cell_, x1 = (s + 1) * cell_;
            double y0 = -(slope * x0 + d) / den, y1 = -(slope * x1 + d) / den;
            if (y0 > y1) std::swap(y0, y1);
            y0 = std::max(y0 - widen, olo);
            y1 = std::min(y1 + widen, ohi);
            if (y0 > y1) continue;
            const auto t0 = static_cast<std::int64_t>(std::floor(y0 / cell_));
            const auto t1 = static_cast<std::int64_t>(std::floor(y1 / cell_));
            for (std::int64_t t = t0; t <= t1; ++t) {
                const auto it = buckets_.find(by_column ? key_of(s, t) : key_of(t, s));
                if (it == buckets_.end()) continue;
                for (std::uint32_t i : it->second)
                    if (line_distance(l, pixels_[i]) <= band) out.push_back(i);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    static CellKey key_of(std::int64_t c, std::int64_t r) { return {c, r, 0}; }

    const std::vector<Pixel>& pixels_;
    double cell_;
    double min_c_ = 1e300, max_c_ = -1e300, min_r_ = 1e300, max_r_ = -1e300;
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> buckets_;
};

void check_match_params(const MatchParams& params) {
    if (!(params.max_error > 0.0)) throw Error("max_error must be positive");
    if (!(params.band_factor > 0.0)) throw Error("band_factor must be positive");
}

}  // namespace

std::vector<PixelPair> match_pairs(const PixelSet& p1, const PixelSet& p2, const CameraModel& c1,
                                   const CameraModel& c2, const MatchParams& params) {
    check_match_params(params);
    if (p1.frame != p2.frame) throw Error("pixel sets belong to different frames");
    const double band = params.band_factor * params.max_error;
    const Matrix3 f12 = fundamental(c1, c2);
    const PixelGrid grid(p2.pixels, band);
    const std::array<CameraModel, 2> cams{c1, c2};
    std::vector<PixelPair> out;
    for (std::uint32_t i = 0; i < p1.pixels.size(); ++i) {
        for (std::uint32_t j : grid.band(epipolar_line(f12, p1.pixels[i]), band)) {
            const std::array<Pixel, 2> px{p1.pixels[i], p2.pixels[j]};
            const Triangulation t = triangulate_dlt(px, cams);
            if (t.low_confidence || !(t.rms_error < params.max_error)) continue;
            out.push_back({{i, j}, t.point, t.rms_error});
        }
    }
    return out;
}

std::vector<PixelTriplet> match_pixels(const PixelSet& p1, const PixelSet& p2, const PixelSet& p3,
                                       std::span<const CameraModel> cams, const MatchParams& params) {
    check_match_params(params);
    validate_rig(cams);
    if (p1.frame != p2.frame || p1.frame != p3.frame) throw Error("pixel sets belong to different frames");
    const double band = params.band_factor * params.max_error;
    const Matrix3 f12 = fundamental(cams[0], cams[1]);
    const Matrix3 f13 = fundamental(cams[0], cams[2]);
    const Matrix3 f23 = fundamental(cams[1], cams[2]);
    const PixelGrid g2(p2.pixels, band), g3(p3.pixels, band);
    std::vector<PixelTriplet> out;
    for (std::uint32_t i = 0; i < p1.pixels.size(); ++i) {
        const auto c2 = g2.band(epipolar_line(f12, p1.pixels[i]), band);
        if (c2.empty()) continue;
        const auto c3 = g3.band(epipolar_line(f13, p1.pixels[i]), band);
        for (std::uint32_t j : c2) {
            const Eigen::Vector3d l23 = epipolar_line(f23, p2.pixels[j]);
            for (std::uint32_t k : c3) {
                if (line_distance(l23, p3.pixels[k]) > band) continue;
                const std::array<Pixel, 3> px{p1.pixels[i], p2.pixels[j], p3.pixels[k]};
                const Triangulation t = triangulate_dlt(px, cams);
                if (t.low_confidence || !(t.rms_error < params.max_error)) continue;
                out.push_back({{i, j, k}, t.point, t.rms_error});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sequence reconstruction

Reconstruction reconstruct_sequence(const std::array<std::vector<Image>, 3>& images,
                                    std::span<const CameraModel> cams, const ReconstructionParams& params) {
    validate_rig(cams);
    const std::size_t n = images[0].size();
    if (images[1].size() != n || images[2].size() != n)
        throw Error("camera sequences differ in length");
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t f = 0; f < n; ++f) {
            const Image& img = images[c][f];
            if (img.frame != images[0][f].frame)
                throw Error("camera sequences are not synchronized at position " + std::to_string(f));
            if (img.width != cams[c].width() || img.height != cams[c].height())
                throw Error("frame " + std::to_string(img.frame) + ": image size does not match camera " +
                            std::to_string(c));
        }
    }
    Reconstruction out;
    out.clouds.resize(n);
    out.stats.resize(n);
    parallel_for(n, params.threads, [&](std::size_t f) {
        const int frame = images[0][f].frame;
        try {
            std::array<PixelSet, 3> sets;
            for (std::size_t c = 0; c < 3; ++c)
                sets[c] = segment_sequence_frame(images[c], f, params.segment, static_cast<int>(c));
            const auto triplets = match_pixels(sets[0], sets[1], sets[2], cams, params.match);
            FrameReconstructionStats& st = out.stats[f];
            st.frame = frame;
            for (std::size_t c = 0; c < 3; ++c) st.active_pixels[c] = sets[c].pixels.size();
            st.truncated_window = sets[0].truncated_window;
            st.triplets = triplets.size();
            FrameCloud& cloud = out.clouds[f];
            cloud.frame = frame;
            cloud.points.reserve(triplets.size());
            for (const auto& t : triplets) cloud.points.push_back(t.point);
        } catch (const std::exception& e) {
            throw Error("frame " + std::to_string(frame) + ": " + e.what());
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Files

namespace {

std::string next_token(std::istream& in, const std::string& path) {
    std::string tok;
    for (;;) {
        int ch = in.peek();
        while (ch != EOF && std::isspace(ch)) {
            in.get();
            ch = in.peek();
        }
        if (ch == '#') {
            std::string skip;
            std::getline(in, skip);
            continue;
        }
        break;
    }
    if (!(in >> tok)) throw Error(path + ": truncated PGM header");
    return tok;
}

int header_int(std::istream& in, const std::string& path) {
    const std::string tok = next_token(in, path);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0) throw Error(path + ": bad PGM header value");
    return v;
}

}  // namespace

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    if (next_token(in, path) != "P5") throw Error(path + ": not a binary PGM (P5) file");
    const int w = header_int(in, path), h = header_int(in, path), maxval = header_int(in, path);
    if (maxval > 255) throw Error(path + ": only 8-bit PGM is supported");
    in.get();  // single whitespace before the raster
    Image img(0, w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) throw Error(path + ": truncated PGM raster");
    return img;
}

void write_pgm(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw Error("write failed: " + path);
}

std::string frame_filename(int frame) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06d.pgm", frame);
    return buf;
}

std::vector<Image> read_pgm_sequence(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
    static const std::regex pattern(R"(frame_(\d+)\.pgm)");
    std::vector<std::pair<int, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, pattern))
            files.emplace_back(std::stoi(m[1].str()), entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Image> out;
    for (const auto& [frame, path] : files) {
        Image img = read_pgm(path.string());
        img.frame = frame;
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<CameraModel> read_calibration(std::istream& in, const std::string& source) {
    std::vector<CameraModel> cams;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<std::string> fields;
        for (std::string tok; ss >> tok;) fields.push_back(tok);
        if (fields.empty()) continue;
        if (fields.size() != 14) throw ParseError(source, lineno, "expected 12 projection entries plus width and height");
        Matrix34 p;
        for (int k = 0; k < 12; ++k) p(k / 4, k % 4) = parse_real(fields[static_cast<std::size_t>(k)], source, lineno);
        const auto w = parse_integer(fields[12], source, lineno), h = parse_integer(fields[13], source, lineno);
        try {
            cams.emplace_back(p, static_cast<int>(w), static_cast<int>(h));
        } catch (const Error& e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    return cams;
}

std::vector<CameraModel> read_calibration_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_calibration(in, path);
}

void write_calibration(std::ostream& out, std::span<const CameraModel> cams) {
    out << "# p00 p01 p02 p03 p10 p11 p12 p13 p20 p21 p22 p23 width height\n";
    for (const auto& cam : cams) {
        const Matrix34& p = cam.projection();
        for (int k = 0; k < 12; ++k) out << format_real(p(k / 4, k % 4)) << ' ';
        out << cam.width() << ' ' << cam.height() << '\n';
    }
}

}  // namespace cloudtrack
