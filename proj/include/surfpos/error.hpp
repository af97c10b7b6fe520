#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace surfpos {

enum class ErrorKind {
  InvalidInput,
  InsufficientCorrespondences,
  DegenerateGeometry,
  NoCommonMarkers,
  MissingMarker,
  ParamsMismatch,
  Parse,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::InsufficientCorrespondences: return "insufficient correspondences";
    case ErrorKind::DegenerateGeometry: return "degenerate geometry";
    case ErrorKind::NoCommonMarkers: return "no common markers";
    case ErrorKind::MissingMarker: return "missing marker";
    case ErrorKind::ParamsMismatch: return "params mismatch";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

/// Single exception type for the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 protected:
  struct Verbatim {};
  Error(ErrorKind kind, const std::string& what, Verbatim) : std::runtime_error(what), kind_(kind) {}

 private:
  ErrorKind kind_;
};

/// Pipeline failures carry the stage they happened in.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "[" + stage + "] " + cause.what(), Verbatim{}), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace surfpos
