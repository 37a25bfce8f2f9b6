#include "mvf/error.hpp"

namespace mvf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kTruncatedStream: return "TruncatedStream";
    case ErrorKind::kOutOfBits: return "OutOfBits";
    case ErrorKind::kUnsupportedFeature: return "UnsupportedFeature";
    case ErrorKind::kMalformedHeader: return "MalformedHeader";
    case ErrorKind::kMalformedSlice: return "MalformedSlice";
    case ErrorKind::kBitstreamDesync: return "BitstreamDesync";
    case ErrorKind::kGeometryError: return "GeometryError";
    case ErrorKind::kFormatError: return "FormatError";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kTruncatedFile: return "TruncatedFile";
    case ErrorKind::kMissingFrame: return "MissingFrame";
    case ErrorKind::kBoxTooLarge: return "BoxTooLarge";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::kEmptySplit: return "EmptySplit";
    case ErrorKind::kGridMismatch: return "GridMismatch";
    case ErrorKind::kNoPFrames: return "NoPFrames";
    case ErrorKind::kMissingCheckpoint: return "MissingCheckpoint";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mvf
