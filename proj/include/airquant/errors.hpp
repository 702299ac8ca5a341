#pragma once

#include <stdexcept>
#include <string>

namespace airquant {

// Error taxonomy: each class maps to a distinct CLI exit code (see tools/).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File-content problems in the NIfTI reader. Subclasses so tests and callers
// can distinguish the failure mode.
struct FormatError : IoError {
    using IoError::IoError;
};
struct BadMagicError : FormatError {
    using FormatError::FormatError;
};
struct UnsupportedDtypeError : FormatError {
    using FormatError::FormatError;
};
struct TruncatedFileError : FormatError {
    using FormatError::FormatError;
};

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degenerate inputs: empty masks where foreground is required, zero-variance
// samples, single-group cohorts and the like.
struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace airquant
