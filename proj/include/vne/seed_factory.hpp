#pragma once

#include <span>
#include <string>
#include <vector>

#include "vne/operator_core.hpp"
#include "vne/vne_model.hpp"

namespace vne {

enum class SeedFamily {
    Anticommuting,   // A rho = -rho A, stationary
    DeltaCommuting,  // n = 1, [rho^2 - a rho, H] = 0, H = A
    PureState,       // rho = |Psi><Psi|
    Commuting,       // [rho, A] = 0, stationary; dressing is trivial
    Frame,           // shifted/rescaled seed with no closed family of its own
};

std::string to_string(SeedFamily family);
SeedFamily seed_family_from_string(const std::string& name);

/// A seed solution together with its exact evolution.
///
/// Every seed evolves as rho(t) = exp(-iKt) rho(0) exp(iKt) for a constant
/// frame generator K that commutes with A (K = 0 for the stationary
/// families, aH for DeltaCommuting, sum_k Tr(rho A^k) A^{n-k} for PureState).
struct SeedSolution {
    SeedFamily family = SeedFamily::Commuting;
    OperatorMatrix rho0;
    ModelSpec spec;
    double a = 0.0;        // DeltaCommuting only
    OperatorMatrix frame;  // K

    OperatorMatrix evolve(double t) const;
    RhoAt evolution() const;
    Eigen::Index dim() const { return rho0.rows(); }
};

struct DeltaBlock {
    double omega = 1.0;  // H block = diag(omega, 2 omega)
    double kappa = 0.5;  // rho block = (a/2) I + kappa sigma_x
};

/// A = blockdiag(diag(alpha_j, -alpha_j)), rho0 = blockdiag(b_j sigma_x).
SeedSolution make_anticommuting_seed(int n, std::span<const double> alphas,
                                     std::span<const double> couplings,
                                     const Tolerances& tol = default_tolerances());

/// n = 1 seed with Delta_a = rho^2 - a rho commuting with the block Hamiltonian.
SeedSolution make_delta_commuting_seed(std::span<const DeltaBlock> blocks, double a,
                                       const Tolerances& tol = default_tolerances());

SeedSolution make_pure_state_seed(const ModelSpec& spec, const StateVector& psi0,
                                  const Tolerances& tol = default_tolerances());

SeedSolution make_commuting_seed(const ModelSpec& spec, const OperatorMatrix& rho0,
                                 const Tolerances& tol = default_tolerances());

/// Unitary change of basis V rho V^dagger, V A V^dagger. Every family
/// relation is invariant under it.
SeedSolution conjugate_seed(const SeedSolution& seed, const OperatorMatrix& unitary);

/// Throws InvalidInput when the family invariants do not hold.
void validate_seed(const SeedSolution& seed, const Tolerances& tol = default_tolerances());

/// Delta_a = rho0^2 - a rho0.
OperatorMatrix delta_operator(const SeedSolution& seed);

/// sum_{k=0..n} Tr(rho A^k) A^{n-k} for rho = |psi><psi|.
OperatorMatrix pure_state_generator(const ModelSpec& spec, const StateVector& psi);

/// Closed-form pure-state solution U(t) rho(0) U(t)^dagger with
/// U(t) = exp(-i t sum_k Tr(rho(0) A^k) A^{n-k}).
OperatorMatrix pure_state_solution(const ModelSpec& spec, const StateVector& psi0, double t,
                                   const Tolerances& tol = default_tolerances());

/// d|Psi>/dt of the associated nonlinear Schrodinger equation,
/// -i sum_{k=0..n-1} <Psi|A^k|Psi> A^{n-k} |Psi>.
StateVector nlse_rhs(const ModelSpec& spec, const StateVector& psi);

}  // namespace vne
