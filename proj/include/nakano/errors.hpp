#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nakano {

using MultiIndex = std::vector<std::size_t>;

std::string index_to_string(const MultiIndex& idx);

/// Base class of all library errors. `code()` is the stable,
/// machine-readable identifier embedded in CLI reports.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

class IndexError : public Error {
public:
  explicit IndexError(const std::string& what) : Error("IndexError", what) {}
};

class AxisError : public Error {
public:
  explicit AxisError(std::size_t axis, std::size_t dim)
      : Error("AxisError", "axis " + std::to_string(axis) +
                               " out of range for dimension " + std::to_string(dim)) {}
};

class GridError : public Error {
public:
  explicit GridError(const std::string& what) : Error("GridError", what) {}
};

class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& what) : Error("ShapeError", what) {}
};

class NonFiniteError : public Error {
public:
  explicit NonFiniteError(const std::string& what) : Error("NonFiniteError", what) {}
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : Error("ParseError", what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class ExprVarError : public Error {
public:
  explicit ExprVarError(const std::string& name)
      : Error("ExprVarError", "unbound or disallowed variable '" + name + "'") {}
};

class EvalError : public Error {
public:
  explicit EvalError(const std::string& what) : Error("EvalError", what) {}
};

/// Raised by sample_metric when a sampled matrix is asymmetric beyond tolerance.
class SymmetryError : public Error {
public:
  SymmetryError(const MultiIndex& node, double asym)
      : Error("SymmetryError", "matrix asymmetry " + std::to_string(asym) +
                                   " beyond tolerance at node " + index_to_string(node)) {}
};

class NotPositiveDefiniteError : public Error {
public:
  NotPositiveDefiniteError(const MultiIndex& node, double eigenvalue)
      : Error("NotPositiveDefinite",
              "matrix not positive definite at node " + index_to_string(node) +
                  " (smallest eigenvalue " + std::to_string(eigenvalue) + ")"),
        eigenvalue_(eigenvalue) {}

  double eigenvalue() const noexcept { return eigenvalue_; }

private:
  double eigenvalue_;
};

class HessianNotPDError : public Error {
public:
  HessianNotPDError(const MultiIndex& node, double eigenvalue)
      : Error("HessianNotPD", "Hessian not positive definite at node " +
                                  index_to_string(node) + " (smallest eigenvalue " +
                                  std::to_string(eigenvalue) + ")") {}
};

class GramNotPDError : public Error {
public:
  GramNotPDError(const MultiIndex& node, double eigenvalue)
      : Error("GramNotPD", "Nakano Gram matrix not positive definite at node " +
                               index_to_string(node) + " (smallest eigenvalue " +
                               std::to_string(eigenvalue) + ")") {}
};

class ClosednessError : public Error {
public:
  explicit ClosednessError(double residual)
      : Error("ClosednessError",
              "input one-form is not d-closed (interior residual " +
                  std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class PathMismatchError : public Error {
public:
  PathMismatchError(double mismatch, double tolerance)
      : Error("PathMismatchError",
              "staircase integrals along reversed axis orders disagree by " +
                  std::to_string(mismatch) + " (tolerance " + std::to_string(tolerance) + ")") {}
};

class SupportError : public Error {
public:
  explicit SupportError(const std::string& what) : Error("SupportError", what) {}
};

class MassSingularError : public Error {
public:
  explicit MassSingularError(const std::string& what) : Error("MassSingularError", what) {}
};

class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

class TruncationError : public Error {
public:
  TruncationError(double collar_mass, double threshold)
      : Error("TruncationError",
              "fiber-integration truncation mass " + std::to_string(collar_mass) +
                  " exceeds threshold " + std::to_string(threshold)),
        collar_mass_(collar_mass) {}

  double collar_mass() const noexcept { return collar_mass_; }

private:
  double collar_mass_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error("IOError", what) {}
};

}  // namespace nakano
