#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gridlab {

// Base class for numerical failures. `module()` names the library module that
// raised the error so front ends can point the user at the right knob.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class NonInvertibleBasis : public Error {
 public:
  explicit NonInvertibleBasis(const std::string& what)
      : Error("lattice-core", what) {}
};

class EnumerationBudgetExceeded : public Error {
 public:
  explicit EnumerationBudgetExceeded(const std::string& what)
      : Error("lattice-core", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what)
      : Error("group-flow", what) {}
};

class WordTooShort : public Error {
 public:
  explicit WordTooShort(const std::string& what) : Error("ifs-fractal", what) {}
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what) : Error("diophantine", what) {}
};

class IncompatibleAccumulators : public Error {
 public:
  explicit IncompatibleAccumulators(const std::string& what)
      : Error("diagnostics", what) {}
};

}  // namespace gridlab
