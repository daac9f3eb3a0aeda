#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "vne/lax_engine.hpp"
#include "vne/operator_core.hpp"
#include "vne/seed_factory.hpp"
#include "vne/trajectory.hpp"
#include "vne/vne_model.hpp"

namespace vne {

struct DressedState {
    OperatorMatrix rho1;
    OperatorMatrix P;
    OperatorMatrix T;
    double t = 0.0;
    double form_gap = 0.0;    // |(rho + (mu - nu)[P, A]) - T rho T^{-1}|_F
    double bridge_gap = 0.0;  // residual of the [P, A] bridging identity
};

/// max(1, |P|_F^2); the scale against which projector-dependent gaps are measured.
double projector_scale(const OperatorMatrix& P);

/// P = |phi><chi| / <chi|phi>, chi given by its row entries.
/// Throws SingularDarboux when |<chi|phi>| < tol.overlap |phi| |chi|.
OperatorMatrix projector(const StateVector& phi, const StateVector& chi,
                         const Tolerances& tol = default_tolerances());

/// T = I + ((mu - nu)/nu) P, confirmed against exp(P log(mu/nu)) on the
/// principal branch.
OperatorMatrix similarity_T(const OperatorMatrix& P, Complex mu, Complex nu,
                            const Tolerances& tol = default_tolerances());

/// T^{-1} = I + ((nu - mu)/mu) P.
OperatorMatrix similarity_T_inverse(const OperatorMatrix& P, Complex mu, Complex nu);

/// [P, A] computed from the eigen relations alone:
/// ((nu - mu)/(mu nu)) P rho P - rho P / mu + P rho / nu.
OperatorMatrix bridged_commutator(const OperatorMatrix& rho, const OperatorMatrix& P, Complex mu,
                                  Complex nu);

/// Both constructions of rho[1] with their gaps; never throws on gaps.
DressedState dress_unchecked(const OperatorMatrix& rho, const OperatorMatrix& A,
                             const OperatorMatrix& P, Complex mu, Complex nu);

/// dress_unchecked() that throws InconsistentLax when the two forms differ by
/// more than tol.form_gap or the bridging identity fails beyond tol.bridge
/// (both relative to projector_scale(P)).
DressedState dress(const OperatorMatrix& rho, const OperatorMatrix& A, const OperatorMatrix& P,
                   Complex mu, Complex nu, const Tolerances& tol = default_tolerances());

/// Lax vectors at t renormalized to unit length (P is homogeneous of degree
/// zero in both), the projector, and the dressed seed. Does not validate gaps.
struct DressedSample {
    double t = 0.0;
    OperatorMatrix seed_rho;
    StateVector phi;  // unit norm
    StateVector chi;  // unit norm
    double phi_norm = 0.0;  // norm before renormalization
    DressedState state;
};

DressedSample dressed_sample(const LaxSolution& lax, double t,
                             const Tolerances& tol = default_tolerances());

/// rho[1](t) as a function of time.
RhoAt dressed_evolution(std::shared_ptr<const LaxSolution> lax,
                        const Tolerances& tol = default_tolerances());

/// Closed form of the n = 1 solution dressed from a Delta_a-commuting seed with
/// nu = conj(mu):
///   exp(-iaHt) (rho(0) + (mu - conj mu) F_a(t)^{-1}
///     exp(-(i/mu) Delta_a t) [|phi0><phi0|, H] exp((i/conj mu) Delta_a t)) exp(iaHt),
///   F_a(t) = <phi0| exp(i (mu - conj mu)/|mu|^2 Delta_a t) |phi0>.
OperatorMatrix explicit_eavn(const SeedSolution& seed, Complex mu, const StateVector& phi0,
                             double t, const Tolerances& tol = default_tolerances());

/// F_a(t) of explicit_eavn.
Complex eavn_overlap(const SeedSolution& seed, Complex mu, const StateVector& phi0, double t);

/// <psi[1]| = <psi| (I - ((nu - mu)/(lambda - mu)) P), rows as entries.
StateVector transform_psi(const StateVector& psi, const OperatorMatrix& P, Complex mu,
                          Complex nu, Complex lambda);

struct CovarianceResidual {
    double eigen = 0.0;  // |z psi1 - psi1 (rho1 - lambda A)| / |psi1|
    double time = 0.0;   // |-i dpsi1/dt - psi1 (H(rho1) - lambda A^{n+1})| / |psi1|
};

/// Checks that the transformed lambda vector solves both transformed linear
/// problems at time t; the time derivative uses the five-point stencil with
/// step h (non-positive selects the model's default step).
CovarianceResidual covariance_residual(const LaxSolution& lax, double t, double h = 0.0,
                                       const Tolerances& tol = default_tolerances());

struct TrajectoryOptions {
    bool compute_residual = true;
    double residual_step = 0.0;  // non-positive selects the model default
    Tolerances tol = default_tolerances();
};

/// Dresses the seed at every time. A SingularDarboux failure truncates the
/// trajectory and records the singular time instead of throwing.
/// Times must be strictly increasing.
Trajectory dressed_trajectory(std::shared_ptr<const LaxSolution> lax,
                              const std::vector<double>& times,
                              const TrajectoryOptions& options = {});

}  // namespace vne
