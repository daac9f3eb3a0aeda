#include "vne/verification.hpp"

#include <algorithm>
#include <cmath>

#include "vne/errors.hpp"

namespace vne {

Trajectory rk4_integrate(const ModelSpec& spec, const OperatorMatrix& rho0, double t_end,
                         double dt, const Tolerances& tol) {
    if (!(dt > 0.0)) throw InvalidInput("rk4_integrate: dt must be positive");
    if (rho0.rows() != spec.dim() || rho0.cols() != spec.dim()) {
        throw DimensionMismatch("rk4_integrate: rho0 dimension does not match A");
    }
    const bool hermitian = is_hermitian(rho0, tol.hermiticity);
    const double direction = t_end < 0.0 ? -1.0 : 1.0;
    const auto steps = static_cast<long>(std::ceil(std::abs(t_end) / dt - 1e-9));

    Trajectory traj;
    traj.label = "rk4";
    traj.spec = spec;
    traj.reference = rho0;
    traj.hermitian_mode = hermitian;
    traj.times.push_back(0.0);
    traj.states.push_back(rho0);

    OperatorMatrix rho = rho0;
    double t = 0.0;
    for (long s = 0; s < steps; ++s) {
        double h = direction * dt;
        if (s == steps - 1) h = t_end - t;
        const OperatorMatrix k1 = rhs(spec, rho);
        const OperatorMatrix k2 = rhs(spec, rho + 0.5 * h * k1);
        const OperatorMatrix k3 = rhs(spec, rho + 0.5 * h * k2);
        const OperatorMatrix k4 = rhs(spec, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (hermitian) {
            const OperatorMatrix anti = 0.5 * (rho - rho.adjoint());
            traj.drift.push_back(anti.norm());
            rho -= anti;
        }
        if (!rho.allFinite() || rho.norm() > tol.rk4_norm_limit) {
            throw NumericalOverflow("rk4_integrate: state norm exceeded the limit at t = " +
                                    std::to_string(t + h));
        }
        t = (s == steps - 1) ? t_end : t + h;
        traj.times.push_back(t);
        traj.states.push_back(rho);
    }
    if (direction < 0.0) {
        std::reverse(traj.times.begin(), traj.times.end());
        std::reverse(traj.states.begin(), traj.states.end());
    }
    return traj;
}

StateVector rk4_integrate_nlse(const ModelSpec& spec, const StateVector& psi0, double t_end,
                               double dt) {
    if (!(dt > 0.0)) throw InvalidInput("rk4_integrate_nlse: dt must be positive");
    const auto steps = static_cast<long>(std::ceil(std::abs(t_end) / dt - 1e-9));
    const double h = steps == 0 ? 0.0 : t_end / static_cast<double>(steps);
    StateVector psi = psi0;
    for (long s = 0; s < steps; ++s) {
        const StateVector k1 = nlse_rhs(spec, psi);
        const StateVector k2 = nlse_rhs(spec, psi + 0.5 * h * k1);
        const StateVector k3 = nlse_rhs(spec, psi + 0.5 * h * k2);
        const StateVector k4 = nlse_rhs(spec, psi + h * k3);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi;
}

const CheckResult* VerificationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names = {
        "nonsingular",  "residual",       "state_consistency", "spectrum",
        "hermiticity",  "trace",          "positivity",        "idempotency",
        "trace_P",      "form_gap",       "bridge_identity",   "unitarity",
        "mode_consistency", "lax_eigen_relation", "covariance_eigen", "covariance_time",
        "explicit_eavn", "shift_closure", "rescale_closure"};
    return names;
}

namespace {

// Running worst case of one named check. Upper bounds pass when value <= tol,
// lower bounds when value >= tol.
class CheckAccumulator {
  public:
    CheckAccumulator(std::string name, double tolerance, bool lower_bound = false)
        : lower_(lower_bound) {
        result_.name = std::move(name);
        result_.tolerance = tolerance;
        result_.worst_value = lower_bound ? std::numeric_limits<double>::infinity() : 0.0;
    }

    // value is compared against tolerance * scale; the recorded worst value is
    // the normalized value / scale.
    void observe(double value, double t, double scale = 1.0) {
        used_ = true;
        const double v = value / scale;
        const bool worse = lower_ ? !(v >= result_.worst_value) : !(v <= result_.worst_value);
        if (worse || !result_.location) {
            if (worse || (!std::isfinite(result_.worst_value) && lower_)) {
                result_.worst_value = v;
                result_.location = t;
            } else if (!result_.location) {
                result_.location = t;
            }
        }
        const bool ok = lower_ ? v >= result_.tolerance : v <= result_.tolerance;
        if (!ok || !std::isfinite(v)) result_.pass = false;
    }

    void fail(const std::string& note, std::optional<double> t = std::nullopt) {
        used_ = true;
        result_.pass = false;
        result_.note = note;
        if (t) result_.location = t;
    }

    bool used() const { return used_; }
    CheckResult result() const { return result_; }

  private:
    CheckResult result_;
    bool lower_;
    bool used_ = false;
};

std::vector<double> sorted_eigs(const OperatorMatrix& m, const Tolerances& tol) {
    const OperatorMatrix sym = 0.5 * (m + m.adjoint());
    const Eigen::VectorXd v = eig_hermitian(sym, tol).values;
    return {v.data(), v.data() + v.size()};
}

bool uniform_stencil(const std::vector<double>& times, std::size_t i, double& h) {
    if (i < 2 || i + 2 >= times.size()) return false;
    h = times[i + 1] - times[i];
    for (std::size_t k = i - 2; k < i + 2; ++k) {
        if (std::abs((times[k + 1] - times[k]) - h) > 1e-12 * std::abs(h)) return false;
    }
    return h > 0.0;
}

}  // namespace

VerificationReport run_suite(const Trajectory& traj, const SuiteOptions& options) {
    const Tolerances& tol = options.tol;
    VerificationReport report;
    report.scenario_id = options.scenario_id;

    CheckAccumulator nonsingular("nonsingular", 0.0);
    CheckAccumulator res("residual", tol.residual_floor);
    CheckAccumulator consistency("state_consistency", tol.state_consistency);
    CheckAccumulator spectrum("spectrum", traj.hermitian_mode ? tol.spectrum : tol.moments);
    CheckAccumulator herm("hermiticity", tol.hermiticity);
    CheckAccumulator trace("trace", tol.trace);
    CheckAccumulator positivity("positivity", tol.positivity, true);
    CheckAccumulator idem("idempotency", tol.idempotency);
    CheckAccumulator trace_p("trace_P", tol.trace_P);
    CheckAccumulator form("form_gap", tol.form_gap);
    CheckAccumulator bridge("bridge_identity", tol.bridge);
    CheckAccumulator unitarity("unitarity", tol.unitarity);
    CheckAccumulator mode("mode_consistency", tol.mode_consistency);
    CheckAccumulator lax_rel("lax_eigen_relation", tol.lax_persistence);
    CheckAccumulator cov_eigen("covariance_eigen", tol.covariance_eigen);
    CheckAccumulator cov_time("covariance_time", tol.covariance_time);
    CheckAccumulator eavn("explicit_eavn", tol.explicit_vs_general);
    CheckAccumulator shift_cl("shift_closure", tol.residual_floor);
    CheckAccumulator rescale_cl("rescale_closure", tol.residual_floor);

    if (traj.times.size() != traj.states.size()) {
        nonsingular.fail("trajectory times and states differ in length");
    }
    if (traj.singular_time) nonsingular.fail(traj.singular_message, traj.singular_time);
    else nonsingular.observe(0.0, traj.times.empty() ? 0.0 : traj.times.front());

    const bool have_ref = traj.reference.size() > 0;
    const int dim = have_ref ? static_cast<int>(traj.reference.rows()) : 0;
    std::vector<double> ref_eigs;
    std::vector<Complex> ref_moments;
    double ref_scale = 1.0;
    bool ref_psd = false;
    const bool herm_mode = traj.hermitian_mode;
    if (have_ref) {
        ref_moments = trace_moments(traj.reference, dim);
        ref_scale = std::max(1.0, traj.reference.norm());
        if (herm_mode && is_hermitian(traj.reference, tol.hermiticity)) {
            ref_eigs = sorted_eigs(traj.reference, tol);
            ref_psd = ref_eigs.front() >= tol.positivity;
        }
    }

    const LaxSolution* lax = traj.lax.get();
    if (lax && options.mode_consistency) {
        const DarbouxParams& p = lax->params();
        if (p.hermitian_mode) {
            mode.observe(std::abs(p.nu - std::conj(p.mu)), 0.0, std::max(1.0, std::abs(p.mu)));
            mode.observe(hermiticity_gap(lax->seed().rho0), 0.0,
                         std::max(1.0, lax->seed().rho0.norm()) * 1e4);
        }
    }
    const bool delta_eavn = lax && lax->params().hermitian_mode &&
                            lax->seed().family == SeedFamily::DeltaCommuting;
    const bool do_cov = lax && options.covariance && lax->params().lambda.has_value();

    RhoAt shift_fn;
    RhoAt rescale_fn;
    double shift_scale = 1.0;
    double rescale_scale = 1.0;
    if (traj.rho_at && traj.spec) {
        const ModelSpec& spec = *traj.spec;
        const double a_scale = std::pow(std::max(1.0, spec.A().norm()), spec.order());
        if (options.shift_lambda) {
            shift_fn = shifted(spec, traj.rho_at, ShiftSpec::scalar(*options.shift_lambda, spec.dim()),
                               tol);
            shift_scale = (1.0 + std::abs(*options.shift_lambda)) * a_scale;
        }
        if (options.rescale_y) {
            rescale_fn = rescaled(traj.rho_at, *options.rescale_y);
            rescale_scale = (*options.rescale_y) * (*options.rescale_y);
        }
    }

    for (std::size_t i = 0; i < traj.states.size() && i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        const OperatorMatrix& state = traj.states[i];

        if (options.residual && traj.spec) {
            const ModelSpec& spec = *traj.spec;
            if (traj.rho_at) {
                const ResidualReport r =
                    residual(spec, traj.rho_at, t, options.residual_step, 0.0, tol);
                res.observe(r.residual_norm, t, r.tolerance_used / tol.residual_floor);
            } else {
                double h = 0.0;
                if (uniform_stencil(traj.times, i, h)) {
                    const OperatorMatrix d =
                        (traj.states[i - 2] - 8.0 * traj.states[i - 1] + 8.0 * traj.states[i + 1] -
                         traj.states[i + 2]) / (12.0 * h);
                    const OperatorMatrix hr = hamiltonian_of(spec, state);
                    const double norm = (kI * d - (hr * state - state * hr)).norm();
                    const double used = residual_tolerance(h, tol);
                    res.observe(norm, t, used / tol.residual_floor);
                }
            }
        }

        if (options.state_consistency && traj.rho_at) {
            consistency.observe((state - traj.rho_at(t)).norm(), t,
                                std::max(1.0, state.norm()));
        }

        double p_scale = 1.0;
        if (lax) {
            try {
                const DressedSample sample = dressed_sample(*lax, t, tol);
                const DressedState& st = sample.state;
                p_scale = projector_scale(st.P);
                if (options.idempotency) {
                    idem.observe((st.P * st.P - st.P).norm(), t, p_scale);
                    trace_p.observe(std::abs(st.P.trace() - 1.0), t, std::sqrt(p_scale));
                }
                if (options.form_gap) form.observe(st.form_gap, t, p_scale);
                if (options.bridge) bridge.observe(st.bridge_gap, t, p_scale);
                if (options.unitarity && lax->params().hermitian_mode) {
                    unitarity.observe(
                        (st.T.adjoint() * st.T - identity(st.T.rows())).norm(), t);
                }
                if (options.lax_relation) {
                    lax_rel.observe(lax->phi_eigen_residual(t), t);
                    lax_rel.observe(lax->chi_eigen_residual(t), t);
                }
                if (options.explicit_eavn && delta_eavn) {
                    const OperatorMatrix closed =
                        explicit_eavn(lax->seed(), lax->params().mu, lax->phi0(), t, tol);
                    eavn.observe((closed - state).norm(), t);
                }
                if (do_cov) {
                    const CovarianceResidual c =
                        covariance_residual(*lax, t, options.residual_step, tol);
                    cov_eigen.observe(c.eigen, t);
                    cov_time.observe(c.time, t);
                }
            } catch (const VneError& e) {
                idem.fail(e.what(), t);
            }
        }

        if (have_ref) {
            if (options.spectrum) {
                if (!ref_eigs.empty()) {
                    const std::vector<double> eigs = sorted_eigs(state, tol);
                    double gap = 0.0;
                    for (std::size_t k = 0; k < eigs.size(); ++k) {
                        gap = std::max(gap, std::abs(eigs[k] - ref_eigs[k]));
                    }
                    spectrum.observe(gap, t);
                } else {
                    const std::vector<Complex> m = trace_moments(state, dim);
                    double gap = 0.0;
                    for (int k = 0; k < dim; ++k) {
                        const double scale = std::pow(ref_scale, k + 1);
                        gap = std::max(gap, std::abs(m[static_cast<std::size_t>(k)] -
                                                     ref_moments[static_cast<std::size_t>(k)]) /
                                                scale);
                    }
                    spectrum.observe(gap, t);
                }
            }
            if (options.trace) {
                trace.observe(std::abs(state.trace() - traj.reference.trace()), t,
                              std::max(1.0, std::abs(traj.reference.trace())) * p_scale);
            }
            if (herm_mode) {
                if (options.hermiticity) herm.observe(hermiticity_gap(state), t);
                if (options.positivity && ref_psd) {
                    positivity.observe(sorted_eigs(state, tol).front(), t);
                }
            }
        }

        if (shift_fn) {
            const ResidualReport r = residual(*traj.spec, shift_fn, t, options.residual_step, 0.0,
                                              tol);
            shift_cl.observe(r.residual_norm, t, shift_scale * r.tolerance_used / tol.residual_floor);
        }
        if (rescale_fn) {
            const ResidualReport r = residual(*traj.spec, rescale_fn, t, options.residual_step,
                                              0.0, tol);
            rescale_cl.observe(r.residual_norm, t,
                               rescale_scale * r.tolerance_used / tol.residual_floor);
        }
    }

    for (const CheckAccumulator* acc :
         {&nonsingular, &res, &consistency, &spectrum, &herm, &trace, &positivity, &idem,
          &trace_p, &form, &bridge, &unitarity, &mode, &lax_rel, &cov_eigen, &cov_time, &eavn,
          &shift_cl, &rescale_cl}) {
        if (!acc->used()) continue;
        report.checks.push_back(acc->result());
        if (!report.checks.back().pass) report.overall = false;
    }
    return report;
}

}  // namespace vne
