#pragma once

#include <stdexcept>
#include <string>

namespace vortexlayer {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Validation,
  Io,
  SolverDivergence,
  BlowUp,
  NoSnapshots,
  MissingData,
};

// All library failures are reported through this one exception type; the C
// API maps `kind()` onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace vortexlayer
