#pragma once

#include <stdexcept>
#include <string>

namespace cxg {

// Malformed input file. line is 1-based; 0 means "not line-addressable".
struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(const std::string& what, std::size_t line_no = 0)
        : std::runtime_error(line_no ? what + " (line " + std::to_string(line_no) + ")" : what),
          line(line_no) {}
};

// Input is well-formed but too small for the requested computation.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cxg
