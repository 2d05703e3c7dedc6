#pragma once

#include <stdexcept>
#include <string>

namespace bforge {

// Failure classes surfaced by the library. The C API and the CLI map these
// onto process exit codes: Input -> 3, NotAttained/UnsupportedBlock -> 2,
// everything else (precondition verdicts) -> 1.
enum class ErrorKind {
  Input,
  Frame,
  Geometry,
  Model,
  NotAttained,
  RelationMismatch,
  UnsupportedBlock,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input: return "InputError";
    case ErrorKind::Frame: return "FrameError";
    case ErrorKind::Geometry: return "GeometryError";
    case ErrorKind::Model: return "ModelError";
    case ErrorKind::NotAttained: return "NotAttained";
    case ErrorKind::RelationMismatch: return "RelationMismatch";
    case ErrorKind::UnsupportedBlock: return "UnsupportedBlock";
    case ErrorKind::Internal: return "InternalError";
  }
  return "Error";
}

}  // namespace bforge
