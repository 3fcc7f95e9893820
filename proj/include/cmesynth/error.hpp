#ifndef CMESYNTH_ERROR_HPP
#define CMESYNTH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cmesynth {

enum class ErrorKind {
  Input,
  Domain,
  Numerical,
  Regularization,
  Infeasible,
  Budget,
  Config,
  Model,
  StageOrder,
  Validation,
  Io,
};

/// Base exception for the library. The kind decides the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Regularization: return "regularization";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Config: return "config";
    case ErrorKind::Model: return "model";
    case ErrorKind::StageOrder: return "stage-order";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cmesynth

#endif  // CMESYNTH_ERROR_HPP
