#pragma once

#include <stdexcept>
#include <string>

namespace latcorr {

// Validation errors: the request itself is malformed (CLI exit code 1).
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Runtime errors: the request was well-formed but cannot be satisfied (CLI exit code 2).
struct RuntimeError : std::runtime_error {
    explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateBasis : ValidationError {
    explicit DegenerateBasis(const std::string& msg) : ValidationError(msg) {}
};

struct UnknownField : ValidationError {
    explicit UnknownField(const std::string& msg) : ValidationError(msg) {}
};

struct ZeroElement : ValidationError {
    explicit ZeroElement(const std::string& msg) : ValidationError(msg) {}
};

struct WindowTooLarge : ValidationError {
    explicit WindowTooLarge(const std::string& msg) : ValidationError(msg) {}
};

struct WeightMismatch : ValidationError {
    explicit WeightMismatch(const std::string& msg) : ValidationError(msg) {}
};

struct InvalidTolerance : ValidationError {
    explicit InvalidTolerance(const std::string& msg) : ValidationError(msg) {}
};

struct BoundTooSmall : RuntimeError {
    explicit BoundTooSmall(const std::string& msg) : RuntimeError(msg) {}
};

struct GeometryMismatch : RuntimeError {
    explicit GeometryMismatch(const std::string& msg) : RuntimeError(msg) {}
};

struct OverflowError : RuntimeError {
    explicit OverflowError(const std::string& msg) : RuntimeError(msg) {}
};

} // namespace latcorr
