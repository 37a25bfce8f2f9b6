#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvf {

// Every failure the library reports is one of these kinds. The CLI maps all of
// them to the "data error" exit code.
enum class ErrorKind {
  kTruncatedStream,
  kOutOfBits,
  kUnsupportedFeature,
  kMalformedHeader,
  kMalformedSlice,
  kBitstreamDesync,
  kGeometryError,
  kFormatError,
  kBadMagic,
  kTruncatedFile,
  kMissingFrame,
  kBoxTooLarge,
  kShapeMismatch,
  kNonFiniteGradient,
  kEmptySplit,
  kGridMismatch,
  kNoPFrames,
  kMissingCheckpoint,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& message) : Error(K, message) {}
};

using TruncatedStream = TypedError<ErrorKind::kTruncatedStream>;
using OutOfBits = TypedError<ErrorKind::kOutOfBits>;
using UnsupportedFeature = TypedError<ErrorKind::kUnsupportedFeature>;
using MalformedHeader = TypedError<ErrorKind::kMalformedHeader>;
using MalformedSlice = TypedError<ErrorKind::kMalformedSlice>;
using BitstreamDesync = TypedError<ErrorKind::kBitstreamDesync>;
using GeometryError = TypedError<ErrorKind::kGeometryError>;
using FormatError = TypedError<ErrorKind::kFormatError>;
using BadMagic = TypedError<ErrorKind::kBadMagic>;
using TruncatedFile = TypedError<ErrorKind::kTruncatedFile>;
using MissingFrame = TypedError<ErrorKind::kMissingFrame>;
using BoxTooLarge = TypedError<ErrorKind::kBoxTooLarge>;
using ShapeMismatch = TypedError<ErrorKind::kShapeMismatch>;
using NonFiniteGradient = TypedError<ErrorKind::kNonFiniteGradient>;
using EmptySplit = TypedError<ErrorKind::kEmptySplit>;
using GridMismatch = TypedError<ErrorKind::kGridMismatch>;
using NoPFrames = TypedError<ErrorKind::kNoPFrames>;
using MissingCheckpoint = TypedError<ErrorKind::kMissingCheckpoint>;
using IoError = TypedError<ErrorKind::kIoError>;

}  // namespace mvf
