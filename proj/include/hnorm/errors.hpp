#pragma once

#include <stdexcept>
#include <string>

namespace hnorm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text; carries the offending line number when known.
struct ParseError : Error {
    int line;
    ParseError(const std::string& msg, int line_no = 0)
        : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg), line(line_no) {}
};

struct ValidationError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct MeshError : Error {
    int cell;
    MeshError(const std::string& msg, int cell_id = -1)
        : Error(cell_id >= 0 ? msg + " (cell " + std::to_string(cell_id) + ")" : msg), cell(cell_id) {}
};

struct SolverError : Error {
    double residual;
    SolverError(const std::string& msg, double res)
        : Error(msg + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

}  // namespace hnorm
