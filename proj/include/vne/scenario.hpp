#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vne/darboux_engine.hpp"
#include "vne/seed_factory.hpp"
#include "vne/verification.hpp"

namespace vne {

// Exit codes of run and sweep.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitSingular = 3;

/// Parses "1.5", "-2", "i", "-i", "2i", "1+i", "0.5-2.5i", "1e-3+4e2i".
/// Throws InvalidInput on anything else.
Complex parse_complex(const std::string& text);

enum class ASpecKind { None, Pairs, Diag, Matrix };

struct ModelConfig {
    int n = 1;
    ASpecKind kind = ASpecKind::None;
    std::vector<double> pairs;  // A = blockdiag(diag(alpha_j, -alpha_j))
    OperatorMatrix matrix;      // Diag and Matrix kinds
};

struct SeedConfig {
    SeedFamily family = SeedFamily::Anticommuting;
    std::vector<double> couplings;  // anticommuting
    std::vector<DeltaBlock> blocks; // delta_commuting
    double a = 0.0;                 // delta_commuting
    StateVector psi;                // pure_state
    OperatorMatrix rho;             // commuting
};

struct DarbouxConfig {
    Complex mu;
    std::optional<Complex> nu;  // empty: nu = conj(mu)
    std::optional<Complex> lambda;
    std::optional<Complex> pin_z_mu;
    std::optional<Complex> pin_z_nu;
    std::optional<Complex> pin_z_lambda;
};

struct TimeGrid {
    double t_min = 0.0;
    double t_max = 1.0;
    int samples = 2;
    std::vector<double> points() const;
};

struct SymmetryConfig {
    std::optional<double> shift;    // X = shift * I
    std::optional<double> rescale;  // Y
    bool normalize_density = false; // derive shift and rescale from rho(0)
    double margin = 0.0;
    SymmetryOrder order = SymmetryOrder::ShiftThenDress;
    bool any() const { return shift || rescale || normalize_density; }
};

/// A parsed and validated scenario document.
struct ScenarioConfig {
    std::string id;
    ModelConfig model;
    SeedConfig seed;
    DarbouxConfig darboux;
    TimeGrid times;
    SymmetryConfig symmetries;
    std::map<std::string, bool> checks;           // overrides of SuiteOptions flags
    std::map<std::string, double> tolerances;     // overrides of Tolerances fields
    double residual_step = 0.0;
};

/// Parses a JSON scenario document. Throws SchemaError naming the offending
/// field (as a JSON pointer) or, for malformed JSON, the line and column.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// JSON text that parse_config() maps back to the same config.
std::string config_to_json(const ScenarioConfig& config);

/// Tolerances after the config overrides and the global multiplier.
Tolerances resolve_tolerances(const ScenarioConfig& config, double tol_scale = 1.0);

/// The seed described by the config, before any symmetry.
SeedSolution build_seed(const ScenarioConfig& config, const Tolerances& tol = default_tolerances());

/// Replaces one sweep parameter ("mu", "t_max" or "a"). Throws SchemaError.
ScenarioConfig with_sweep_value(const ScenarioConfig& config, const std::string& param,
                                const std::string& value);

struct ScenarioResult {
    ScenarioConfig resolved;  // z pins and symmetry constants filled in
    std::shared_ptr<const SeedSolution> seed;  // seed that was dressed
    std::shared_ptr<const LaxSolution> lax;
    Trajectory trajectory;   // what trajectory.csv contains
    VerificationReport report;
    int exit_code = kExitPass;
    std::string message;
};

/// seed -> (symmetries) -> Lax -> dress -> (symmetries) -> verify.
/// Errors in the config content raise SchemaError or InvalidInput; a singular
/// dressing is reported through exit_code = kExitSingular.
ScenarioResult run_scenario(const ScenarioConfig& config, double tol_scale = 1.0);

/// Columns: t, re_<r>_<c>, im_<r>_<c> row-major, then the sample diagnostics.
/// Values carry 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

struct CsvTrajectory {
    std::vector<double> times;
    std::vector<OperatorMatrix> states;
};
CsvTrajectory read_trajectory_csv(std::istream& in);

std::string report_to_json(const ScenarioResult& result);
std::string lock_to_json(const ScenarioResult& result);

/// Writes trajectory.csv, report.json and scenario.lock.json into dir
/// (created if missing); every file goes through a temporary and a rename.
void write_outputs(const ScenarioResult& result, const std::string& dir);

/// Writes text to path through path.tmp and a rename.
void write_file_atomic(const std::string& path, const std::string& text);

struct RunOptions {
    double tol_scale = 1.0;
    bool seed_dump = false;
};

/// The run subcommand; messages go to out and err.
int run_command(const std::string& config_path, const std::string& out_dir,
                const RunOptions& options, std::ostream& out, std::ostream& err);

struct SweepOptions {
    double tol_scale = 1.0;
    int jobs = 1;
};

/// The sweep subcommand. One sub-directory per value plus summary.csv.
/// Returns the largest exit code over the points.
int sweep_command(const std::string& config_path, const std::string& param,
                  const std::vector<std::string>& values, const std::string& out_dir,
                  const SweepOptions& options, std::ostream& out, std::ostream& err);

}  // namespace vne
