#pragma once

#include <stdexcept>
#include <string>

namespace fddw {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor / operation contract violations.
struct ShapeMismatch : Error {
  using Error::Error;
};
struct OddSpatialDim : Error {
  using Error::Error;
};
struct UnsupportedSpec : Error {
  using Error::Error;
};

// Graph construction and evaluation.
struct InvalidClassCount : Error {
  using Error::Error;
};
struct BadInputShape : Error {
  using Error::Error;
};

// Training.
struct TapeMismatch : Error {
  using Error::Error;
};
struct LabelOutOfRange : Error {
  using Error::Error;
};

// Metrics.
struct EmptyMatrix : Error {
  using Error::Error;
};

// Weight archive.
struct BadMagic : Error {
  using Error::Error;
};
struct VersionUnsupported : Error {
  using Error::Error;
};
struct ChecksumMismatch : Error {
  using Error::Error;
};
struct ShapeMismatchOnLoad : Error {
  using Error::Error;
};

// Image i/o.
struct UnsupportedFormat : Error {
  using Error::Error;
};
struct IoFailure : Error {
  using Error::Error;
};

}  // namespace fddw
