#pragma once

#include <stdexcept>
#include <string>

namespace thinlayer {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateMesh : Error {
  using Error::Error;
};

struct OutOfDomain : Error {
  using Error::Error;
};

struct SolverDiverged : Error {
  using Error::Error;
};

/// Raised when a test field does not vanish where the admissible space requires it.
struct NotAdmissible : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

}  // namespace thinlayer
