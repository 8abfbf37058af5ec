#pragma once

#include <stdexcept>
#include <string>

namespace simptc {

enum class ErrorKind {
  Config,
  Template,
  Io,
  Format,
  Length,
  Data,
  Alignment,
  Label,
  UnknownName,
  EmptyAnchor,
  DegenerateVector,
  InsufficientData,
  Shape,
  EmptyClass,
  Precondition,
  Numerical,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config error";
    case ErrorKind::Template: return "template error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Length: return "length error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Label: return "label error";
    case ErrorKind::UnknownName: return "unknown-name error";
    case ErrorKind::EmptyAnchor: return "empty-anchor error";
    case ErrorKind::DegenerateVector: return "degenerate-vector error";
    case ErrorKind::InsufficientData: return "insufficient-data error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::EmptyClass: return "empty-class error";
    case ErrorKind::Precondition: return "precondition violation";
    case ErrorKind::Numerical: return "numerical error";
  }
  return "error";
}

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit status: 2 configuration, 3 data, 4 numerical.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Template:
      return 2;
    case ErrorKind::Numerical:
      return 4;
    default:
      return 3;
  }
}

}  // namespace simptc
