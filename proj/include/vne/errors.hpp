#pragma once

#include <stdexcept>
#include <string>

namespace vne {

// Base for every failure raised by the library.
class VneError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public VneError {
  public:
    using VneError::VneError;
};

class InvalidInput : public VneError {
  public:
    using VneError::VneError;
};

class NumericalOverflow : public VneError {
  public:
    using VneError::VneError;
};

// The pencil has no eigenvector for the selected root within tolerance.
class DefectiveEigenpair : public VneError {
  public:
    using VneError::VneError;
};

// <chi|phi> vanished: the rank-one quotient defining P is undefined.
class SingularDarboux : public VneError {
  public:
    explicit SingularDarboux(const std::string& what, double t = 0.0)
        : VneError(what), time_(t) {}
    double time() const noexcept { return time_; }

  private:
    double time_;
};

// P was not built from genuine Lax eigenvectors, or an algebraic identity of
// the dressing failed.
class InconsistentLax : public VneError {
  public:
    using VneError::VneError;
};

class UnsupportedScenario : public VneError {
  public:
    using VneError::VneError;
};

// Scenario document does not match the schema; field() is a JSON pointer.
class SchemaError : public VneError {
  public:
    SchemaError(const std::string& field, const std::string& what)
        : VneError(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

}  // namespace vne
