#pragma once

#include <stdexcept>
#include <string>

namespace fsd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// data / input errors
struct ValidationError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct BatchTooSmall : Error { using Error::Error; };
struct DegenerateLabels : Error { using Error::Error; };
struct FeatureModeMismatch : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };

// numerics errors
struct ShapeError : Error { using Error::Error; };
struct NonScalarLoss : Error { using Error::Error; };
struct SeqTooLong : Error { using Error::Error; };

// file / serialization errors
struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct VersionError : Error { using Error::Error; };
struct ChecksumError : Error { using Error::Error; };

} // namespace fsd
