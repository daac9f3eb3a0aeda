#pragma once

#include <memory>
#include <optional>

#include "vne/operator_core.hpp"
#include "vne/seed_factory.hpp"

namespace vne {

/// Spectral parameters of the three conjugated linear problems and the
/// eigenvalues z selected for them.
struct DarbouxParams {
    Complex mu;
    Complex nu;
    std::optional<Complex> lambda;
    Complex z_mu;
    Complex z_nu;
    std::optional<Complex> z_lambda;
    bool hermitian_mode = false;  // nu == conj(mu); <chi| = <phi| by adjoint
};

/// Caller-side choice of parameters. nu left empty means nu = conj(mu).
struct LaxRequest {
    Complex mu;
    std::optional<Complex> nu;
    std::optional<Complex> lambda;
    std::optional<Complex> pin_z_mu;
    std::optional<Complex> pin_z_nu;
    std::optional<Complex> pin_z_lambda;
};

/// Eigenpair z_mu |phi> = (rho0 - mu A)|phi> at t = 0.
EigenPair solve_initial(const SeedSolution& seed, Complex mu,
                        std::optional<Complex> pin = std::nullopt,
                        const Tolerances& tol = default_tolerances());

/// Left eigenpair z <row| = <row|(rho0 - param A); the vector holds row entries.
EigenPair solve_initial_left(const SeedSolution& seed, Complex param,
                             std::optional<Complex> pin = std::nullopt,
                             const Tolerances& tol = default_tolerances());

/// H(rho0) - param A^{n+1}, the time generator of the linear problems at t = 0.
OperatorMatrix lax_generator(const SeedSolution& seed, Complex param);

/// |phi(t)> solving i d|phi>/dt = (H(rho(t)) - mu A^{n+1})|phi>.
///
/// Anticommuting seeds use exp(-i z_mu A^n t) (even n) or
/// exp(i mu A^{n+1} t) (odd n); DeltaCommuting seeds use
/// exp(-iaHt) exp(-(i/mu) Delta_a t) times the scalar phase
/// exp(i (z^2 - a z) t / mu) that makes the time equation hold exactly; the
/// remaining families use the frame form exp(-iKt) exp(-i(G - K)t).
StateVector evolve_phi(const SeedSolution& seed, const DarbouxParams& params,
                       const StateVector& phi0, double t);

/// <chi(t)| as row entries. In hermitian_mode this is the entrywise conjugate
/// of evolve_phi applied to conj(chi0); otherwise chi0 is propagated by
/// -i d<chi|/dt = <chi|(H(rho(t)) - nu A^{n+1}).
StateVector evolve_chi(const SeedSolution& seed, const DarbouxParams& params,
                       const StateVector& chi0, double t);

/// <psi(t)| as row entries for the lambda problem.
StateVector evolve_psi(const SeedSolution& seed, const DarbouxParams& params,
                       const StateVector& psi0, double t);

/// The frame form of the right and left evolutions, valid for every family.
StateVector evolve_right_frame(const SeedSolution& seed, Complex param, const StateVector& v0,
                               double t);
StateVector evolve_left_frame(const SeedSolution& seed, Complex param, const StateVector& row0,
                              double t);

/// Conjugated Lax solutions for one seed: phi and chi (and psi when lambda is
/// set) together with their initial data.
class LaxSolution {
  public:
    /// Assembles the parts without any check; solve() is the validated path.
    LaxSolution(std::shared_ptr<const SeedSolution> seed, DarbouxParams params, StateVector phi0,
                StateVector chi0, std::optional<StateVector> psi0 = std::nullopt);

    static LaxSolution solve(std::shared_ptr<const SeedSolution> seed, const LaxRequest& request,
                             const Tolerances& tol = default_tolerances());

    const SeedSolution& seed() const noexcept { return *seed_; }
    std::shared_ptr<const SeedSolution> seed_ptr() const noexcept { return seed_; }
    const DarbouxParams& params() const noexcept { return params_; }
    const StateVector& phi0() const noexcept { return phi0_; }
    const StateVector& chi0() const noexcept { return chi0_; }
    const std::optional<StateVector>& psi0() const noexcept { return psi0_; }
    /// H(rho0) - mu A^{n+1}.
    const OperatorMatrix& generator_phi() const noexcept { return generator_phi_; }

    StateVector phi_at(double t) const { return evolve_phi(*seed_, params_, phi0_, t); }
    StateVector chi_at(double t) const { return evolve_chi(*seed_, params_, chi0_, t); }
    /// Throws InvalidInput when lambda was not configured.
    StateVector psi_at(double t) const;

    /// |(rho(t) - mu A) phi - z_mu phi| / |phi| at time t.
    double phi_eigen_residual(double t) const;
    /// |chi (rho(t) - nu A) - z_nu chi| / |chi| at time t.
    double chi_eigen_residual(double t) const;

  private:
    std::shared_ptr<const SeedSolution> seed_;
    DarbouxParams params_;
    StateVector phi0_;
    StateVector chi0_;
    std::optional<StateVector> psi0_;
    OperatorMatrix generator_phi_;
};

}  // namespace vne
