#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fanbeam {

/// Coarse failure category. The CLI prints it verbatim so scripts can branch on it.
enum class ErrorKind {
    InvalidArgument,
    ShapeMismatch,
    InvalidGeometry,
    NonFinite,
    Degenerate,
    Io,
    Format,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::ShapeMismatch: return "shape_mismatch";
    case ErrorKind::InvalidGeometry: return "invalid_geometry";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}

} // namespace fanbeam
