#pragma once

#include <iosfwd>
#include <string>

#include "cloudtrack/geometry.hpp"

namespace cloudtrack {

/// Error raised while parsing a text input; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads `frame,x,y,z` lines. `#` lines and blank lines are skipped. Frames
/// must be non-decreasing; each frame's points keep their file order.
Sequence read_frame_clouds(std::istream& in, const std::string& source = "<stream>");
Sequence read_frame_clouds_file(const std::string& path);

void write_frame_clouds(std::ostream& out, const Sequence& clouds);
void write_frame_clouds_file(const std::string& path, const Sequence& clouds);

/// Shortest round-trip decimal representation of a double.
std::string format_real(double value);

/// Splits on commas and trims surrounding whitespace from each field.
std::vector<std::string> split_csv_line(const std::string& line);

double parse_real(const std::string& field, const std::string& source, std::size_t line);
long long parse_integer(const std::string& field, const std::string& source, std::size_t line);

}  // namespace cloudtrack
