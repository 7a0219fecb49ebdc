#pragma once

#include <stdexcept>
#include <string>

namespace ugcl {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveFocal : Error {
    explicit NonPositiveFocal(const std::string& what = "focal length must be positive") : Error(what) {}
};

struct PointAtInfinity : Error {
    explicit PointAtInfinity(const std::string& what = "homogeneous depth is zero") : Error(what) {}
};

struct ZeroDisparity : Error {
    explicit ZeroDisparity(const std::string& what = "disparity must be positive") : Error(what) {}
};

struct DivisionByZero : Error {
    explicit DivisionByZero(const std::string& what = "division by zero on tape") : Error(what) {}
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& what = "vector lengths differ") : Error(what) {}
};

struct UnknownParameter : Error {
    explicit UnknownParameter(const std::string& what = "unknown parameter id") : Error(what) {}
};

struct EmptyRange : Error {
    explicit EmptyRange(const std::string& what = "empty sampling interval") : Error(what) {}
};

struct Unfillable : Error {
    explicit Unfillable(const std::string& what = "rejection sampler gave up") : Error(what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what = "i/o failure") : Error(what) {}
};

struct SchemaVersionMismatch : Error {
    explicit SchemaVersionMismatch(const std::string& what = "unsupported dataset schema") : Error(what) {}
};

struct ChecksumMismatch : Error {
    explicit ChecksumMismatch(const std::string& what = "dataset checksum mismatch") : Error(what) {}
};

struct AlignmentMismatch : Error {
    explicit AlignmentMismatch(const std::string& what = "predictions not aligned to samples") : Error(what) {}
};

struct NonFiniteLoss : Error {
    explicit NonFiniteLoss(const std::string& what = "loss became non-finite") : Error(what) {}
};

}  // namespace ugcl
