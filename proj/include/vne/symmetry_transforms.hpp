#pragma once

#include "vne/operator_core.hpp"
#include "vne/seed_factory.hpp"
#include "vne/vne_model.hpp"

namespace vne {

/// Operator X with [X, A] = [X, rho] = 0 used to shift a solution.
struct ShiftSpec {
    OperatorMatrix X;

    static ShiftSpec scalar(double lambda, Eigen::Index dim);
    /// Lambda when X = Lambda I (to tol), otherwise empty.
    std::optional<double> scalar_value(double tol = 1e-14) const;
};

/// Throws InvalidInput unless X commutes with A and with rho(0).
void validate_shift(const ModelSpec& spec, const OperatorMatrix& rho0, const ShiftSpec& shift,
                    const Tolerances& tol = default_tolerances());

/// exp(-i(n+1) X A^n t) (rho(t) + X) exp(i(n+1) X A^n t).
OperatorMatrix shift(const ModelSpec& spec, const RhoAt& rho_at, const ShiftSpec& x, double t,
                     const Tolerances& tol = default_tolerances());

/// The shifted solution as a function of time (validated once).
RhoAt shifted(const ModelSpec& spec, RhoAt rho_at, const ShiftSpec& x,
              const Tolerances& tol = default_tolerances());

/// Y rho(Y t).
OperatorMatrix rescale(const RhoAt& rho_at, double y, double t);
RhoAt rescaled(RhoAt rho_at, double y);

struct DensityNormalization {
    ShiftSpec X;
    double lambda = 0.0;
    double Y = 1.0;
    RhoAt rho_dm_at;  // Y rho_X(Y t)
};

/// Lambda = max(0, -lambda_min(rho(0))) + margin, Y = 1/(Tr rho(0) + Lambda dim).
/// Throws InvalidInput when the shifted trace vanishes.
DensityNormalization normalize_to_density(const RhoAt& rho_at, const ModelSpec& spec,
                                          double margin = 0.0,
                                          const Tolerances& tol = default_tolerances());

/// Seed-level versions: the shifted/rescaled seed keeps an exact frame
/// evolution, so it can be dressed like any other seed. DeltaCommuting seeds
/// stay in their family (a -> a + 2 Lambda, a -> Y a).
SeedSolution shift_seed(const SeedSolution& seed, double lambda,
                        const Tolerances& tol = default_tolerances());
SeedSolution rescale_seed(const SeedSolution& seed, double y,
                          const Tolerances& tol = default_tolerances());

/// Tr(rho0 A); zero for anticommuting seeds, which therefore cannot be
/// positive together with a positive A.
double trace_rho_a(const SeedSolution& seed);

/// True when rho0 is not already a unit-trace positive semidefinite matrix.
bool needs_density_normalization(const SeedSolution& seed,
                                 const Tolerances& tol = default_tolerances());

}  // namespace vne
