#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vne/darboux_engine.hpp"
#include "vne/symmetry_transforms.hpp"
#include "vne/trajectory.hpp"
#include "vne/vne_model.hpp"

namespace vne {

/// Fixed-step classical RK4 for d(rho)/dt = rhs(spec, rho) from t = 0 to
/// t_end (negative t_end integrates backwards). Hermitian initial data are
/// re-symmetrized after every step and the correction size logged in drift.
/// The last step is shortened to land on t_end exactly.
Trajectory rk4_integrate(const ModelSpec& spec, const OperatorMatrix& rho0, double t_end,
                         double dt, const Tolerances& tol = default_tolerances());

/// RK4 for the nonlinear Schrodinger equation d|Psi>/dt = nlse_rhs(spec, Psi).
StateVector rk4_integrate_nlse(const ModelSpec& spec, const StateVector& psi0, double t_end,
                               double dt);

struct CheckResult {
    std::string name;
    bool pass = true;
    double worst_value = 0.0;
    double tolerance = 0.0;
    std::optional<double> location;  // time of the worst sample
    std::string note;
};

struct VerificationReport {
    std::string scenario_id;
    std::vector<CheckResult> checks;
    bool overall = true;

    const CheckResult* find(const std::string& name) const;
};

enum class SymmetryOrder { ShiftThenDress, DressThenShift };

/// Which checks run_suite performs. Checks whose inputs are absent from the
/// trajectory (no Lax solution, no lambda, ...) are skipped.
struct SuiteOptions {
    std::string scenario_id = "scenario";
    bool residual = true;
    bool state_consistency = true;
    bool spectrum = true;
    bool hermiticity = true;
    bool trace = true;
    bool positivity = true;
    bool idempotency = true;
    bool form_gap = true;
    bool bridge = true;
    bool unitarity = true;
    bool mode_consistency = true;
    bool lax_relation = true;
    bool covariance = true;
    bool explicit_eavn = true;
    std::optional<double> shift_lambda;  // closure of rho -> rho_X, X = Lambda I
    std::optional<double> rescale_y;     // closure of rho -> Y rho(Y t)
    double residual_step = 0.0;
    Tolerances tol = default_tolerances();
};

/// Runs every enabled check on the trajectory. Failures become report
/// entries; nothing is thrown for a failing check.
VerificationReport run_suite(const Trajectory& traj, const SuiteOptions& options = {});

/// Names of all checks run_suite can emit.
const std::vector<std::string>& check_names();

}  // namespace vne
