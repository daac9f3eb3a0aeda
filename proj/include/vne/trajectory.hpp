#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vne/lax_engine.hpp"
#include "vne/operator_core.hpp"
#include "vne/seed_factory.hpp"
#include "vne/vne_model.hpp"

namespace vne {

struct SampleDiagnostics {
    std::vector<Complex> moments;      // Tr rho1^k, k = 1..dim
    double hermiticity_gap = 0.0;
    std::optional<double> min_eig;     // hermitian_mode only
    double phi_norm = 0.0;             // |phi(t)| before renormalization
    std::optional<Complex> F_value;    // delta-commuting seeds in hermitian_mode
    double idempotency_gap = 0.0;      // |P^2 - P|_F
    double trace_P_gap = 0.0;          // |Tr P - 1|
    double form_gap = 0.0;
    double bridge_gap = 0.0;
    std::optional<double> unitarity_gap;  // |T^dagger T - I|_F, hermitian_mode only
    double projector_rate = 0.0;       // |dP/dt|_F, central difference
    std::optional<ResidualReport> residual;
};

/// Sampled solution rho(t_i) with optional provenance.
///
/// Trajectories built by dressed_trajectory() carry the Lax solution and an
/// evaluation rule, so checks can re-evaluate the solution off the grid.
/// Oracle trajectories (rk4_integrate) only carry the samples.
struct Trajectory {
    std::string label;
    std::vector<double> times;
    std::vector<OperatorMatrix> states;
    std::vector<SampleDiagnostics> diagnostics;  // empty or one per sample
    std::optional<ModelSpec> spec;
    std::shared_ptr<const SeedSolution> seed;
    std::shared_ptr<const LaxSolution> lax;
    RhoAt rho_at;
    OperatorMatrix reference;  // rho(0) of the seed, the spectral reference
    bool hermitian_mode = false;
    std::optional<double> singular_time;
    std::string singular_message;
    std::vector<double> drift;  // rk4: per-step Hermitian re-symmetrization size
};

}  // namespace vne
