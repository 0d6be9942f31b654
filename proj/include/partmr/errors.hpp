#ifndef PARTMR_ERRORS_HPP
#define PARTMR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace partmr {

// Malformed input files, bad CLI values, invalid configurations. Exit code 1.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Syntax errors with a position (byte offset for structured files, column
// for one-line property strings).
struct parse_error : input_error {
    parse_error(const std::string& msg, std::size_t position)
        : input_error(msg + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

// Solver breakdowns: singular steady-state systems, non-finite rates. Exit code 2.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace partmr

#endif
