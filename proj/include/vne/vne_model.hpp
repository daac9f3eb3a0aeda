#pragma once

#include <functional>
#include <vector>

#include "vne/operator_core.hpp"
#include "vne/tolerances.hpp"

namespace vne {

/// One member of the family  i d(rho)/dt = sum_{k=0..n} [A^{n-k} rho A^k, rho].
///
/// A must be Hermitian and is time-independent, so the powers A^0 .. A^{n+1}
/// are computed once at construction and shared by every evaluation.
class ModelSpec {
  public:
    ModelSpec(int n, OperatorMatrix a, const Tolerances& tol = default_tolerances());

    int order() const noexcept { return n_; }
    const OperatorMatrix& A() const noexcept { return powers_[1]; }
    /// A^k for 0 <= k <= n + 1.
    const OperatorMatrix& power(int k) const;
    Eigen::Index dim() const noexcept { return powers_[1].rows(); }

    /// Finite-difference step used by residual(): 1e-3 (1 + |A|_F)^{-(n+1)}.
    double default_step() const;

  private:
    int n_;
    std::vector<OperatorMatrix> powers_;
};

struct ResidualReport {
    double t = 0.0;
    double residual_norm = 0.0;
    double tolerance_used = 0.0;
    bool pass = false;
};

using RhoAt = std::function<OperatorMatrix(double)>;

/// H(rho) = sum_{k=0..n} A^{n-k} rho A^k.
OperatorMatrix hamiltonian_of(const ModelSpec& spec, const OperatorMatrix& rho);

/// d(rho)/dt = -i [H(rho), rho].
OperatorMatrix rhs(const ModelSpec& spec, const OperatorMatrix& rho);

/// The same derivative written as -i sum_k [A^{n-k}, rho A^k rho].
OperatorMatrix rhs_commutator_form(const ModelSpec& spec, const OperatorMatrix& rho);

/// rhs() after confirming both algebraic forms agree to tol.rhs_forms relative
/// to max(1, |H(rho)|_F |rho|_F). Throws InconsistentLax otherwise.
OperatorMatrix rhs_checked(const ModelSpec& spec, const OperatorMatrix& rho,
                           const Tolerances& tol = default_tolerances());

/// Default residual tolerance max(tol.residual_floor, C h^4).
double residual_tolerance(double h, const Tolerances& tol = default_tolerances());

/// |i d(rho)/dt - [H(rho), rho]|_F at t, with the derivative from the
/// five-point central stencil of width h. A non-positive h selects
/// spec.default_step(); a non-positive tolerance selects residual_tolerance(h).
ResidualReport residual(const ModelSpec& spec, const RhoAt& rho_at, double t, double h = 0.0,
                        double tolerance = 0.0, const Tolerances& tol = default_tolerances());

/// Five-point central difference of a matrix-valued function.
OperatorMatrix central_derivative(const RhoAt& f, double t, double h);

}  // namespace vne
