#include "cloudtrack/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace cloudtrack {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_real(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_real(const std::string& field, const std::string& source, std::size_t line) {
    double value = 0.0;
    const char* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end || field.empty())
        throw ParseError(source, line, "invalid number '" + field + "'");
    if (!std::isfinite(value)) throw ParseError(source, line, "non-finite value '" + field + "'");
    return value;
}

long long parse_integer(const std::string& field, const std::string& source, std::size_t line) {
    long long value = 0;
    const char* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end || field.empty())
        throw ParseError(source, line, "invalid integer '" + field + "'");
    return value;
}

Sequence read_frame_clouds(std::istream& in, const std::string& source) {
    Sequence clouds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[line.find_first_not_of(" \t")] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) throw ParseError(source, lineno, "expected frame,x,y,z");
        const long long frame = parse_integer(fields[0], source, lineno);
        if (frame < 0) throw ParseError(source, lineno, "negative frame index");
        const Point3 p{parse_real(fields[1], source, lineno), parse_real(fields[2], source, lineno),
                       parse_real(fields[3], source, lineno)};
        if (clouds.empty() || clouds.back().frame < frame) {
            clouds.push_back(FrameCloud{static_cast<int>(frame), {}});
        } else if (clouds.back().frame > frame) {
            throw ParseError(source, lineno, "frames not sorted");
        }
        clouds.back().points.push_back(p);
    }
    return clouds;
}

Sequence read_frame_clouds_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_frame_clouds(in, path);
}

void write_frame_clouds(std::ostream& out, const Sequence& clouds) {
    out << "# frame,x,y,z\n";
    for (const auto& c : clouds) {
        for (const auto& p : c.points) {
            out << c.frame << ',' << format_real(p.x) << ',' << format_real(p.y) << ','
                << format_real(p.z) << '\n';
        }
    }
}

void write_frame_clouds_file(const std::string& path, const Sequence& clouds) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_frame_clouds(out, clouds);
}

}  // namespace cloudtrack
