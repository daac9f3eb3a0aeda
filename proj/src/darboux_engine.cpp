#include "vne/darboux_engine.hpp"

#include <cmath>
#include <string>

#include "vne/errors.hpp"

namespace vne {

double projector_scale(const OperatorMatrix& P) {
    const double n = P.norm();
    return std::max(1.0, n * n);
}

OperatorMatrix projector(const StateVector& phi, const StateVector& chi, const Tolerances& tol) {
    if (phi.size() != chi.size()) throw DimensionMismatch("projector: length mismatch");
    const Complex overlap = pairing(chi, phi);
    const double bound = tol.overlap * phi.norm() * chi.norm();
    if (!(std::abs(overlap) >= bound) || bound == 0.0) {
        throw SingularDarboux("projector: <chi|phi> vanishes, the transformation is singular");
    }
    return (phi * chi.transpose()) / overlap;
}

OperatorMatrix similarity_T(const OperatorMatrix& P, Complex mu, Complex nu,
                            const Tolerances& tol) {
    if (mu == Complex(0.0) || nu == Complex(0.0)) {
        throw InvalidInput("similarity_T: mu and nu must be nonzero");
    }
    const OperatorMatrix t = identity(P.rows()) + ((mu - nu) / nu) * P;
    const OperatorMatrix via_exp = mat_exp(std::log(mu / nu) * P);
    if ((t - via_exp).norm() > tol.exp_identity * std::max(1.0, t.norm()) * projector_scale(P)) {
        throw InconsistentLax("similarity_T: rational and exponential forms disagree");
    }
    return t;
}

OperatorMatrix similarity_T_inverse(const OperatorMatrix& P, Complex mu, Complex nu) {
    if (mu == Complex(0.0)) throw InvalidInput("similarity_T_inverse: mu must be nonzero");
    return identity(P.rows()) + ((nu - mu) / mu) * P;
}

OperatorMatrix bridged_commutator(const OperatorMatrix& rho, const OperatorMatrix& P, Complex mu,
                                  Complex nu) {
    return ((nu - mu) / (mu * nu)) * (P * rho * P) - (rho * P) / mu + (P * rho) / nu;
}

DressedState dress_unchecked(const OperatorMatrix& rho, const OperatorMatrix& A,
                             const OperatorMatrix& P, Complex mu, Complex nu) {
    if (rho.rows() != A.rows() || P.rows() != A.rows()) {
        throw DimensionMismatch("dress: dimension mismatch");
    }
    if (mu == Complex(0.0) || nu == Complex(0.0)) {
        throw InvalidInput("dress: mu and nu must be nonzero");
    }
    DressedState out;
    out.P = P;
    const OperatorMatrix pa = commutator(P, A);
    const OperatorMatrix by_commutator = rho + (mu - nu) * pa;
    out.T = identity(P.rows()) + ((mu - nu) / nu) * P;
    const OperatorMatrix by_similarity = out.T * rho * similarity_T_inverse(P, mu, nu);
    out.rho1 = by_commutator;
    out.form_gap = (by_commutator - by_similarity).norm();
    out.bridge_gap = (pa - bridged_commutator(rho, P, mu, nu)).norm();
    return out;
}

DressedState dress(const OperatorMatrix& rho, const OperatorMatrix& A, const OperatorMatrix& P,
                   Complex mu, Complex nu, const Tolerances& tol) {
    DressedState out = dress_unchecked(rho, A, P, mu, nu);
    const double scale = projector_scale(P);
    if (!(out.form_gap <= tol.form_gap * scale)) {
        throw InconsistentLax("dress: commutator and similarity forms differ by " +
                              std::to_string(out.form_gap));
    }
    if (!(out.bridge_gap <= tol.bridge * scale)) {
        throw InconsistentLax("dress: [P, A] bridging identity violated by " +
                              std::to_string(out.bridge_gap));
    }
    return out;
}

DressedSample dressed_sample(const LaxSolution& lax, double t, const Tolerances& tol) {
    DressedSample s;
    s.t = t;
    s.seed_rho = lax.seed().evolve(t);
    StateVector phi = lax.phi_at(t);
    StateVector chi = lax.chi_at(t);
    s.phi_norm = phi.norm();
    const double chi_norm = chi.norm();
    if (!(s.phi_norm > 0.0) || !(chi_norm > 0.0) || !std::isfinite(s.phi_norm) ||
        !std::isfinite(chi_norm)) {
        throw SingularDarboux("dressing: Lax vector vanished or overflowed", t);
    }
    s.phi = phi / s.phi_norm;
    s.chi = chi / chi_norm;
    OperatorMatrix P;
    try {
        P = projector(s.phi, s.chi, tol);
    } catch (const SingularDarboux& e) {
        throw SingularDarboux(e.what(), t);
    }
    const DarbouxParams& p = lax.params();
    s.state = dress_unchecked(s.seed_rho, lax.seed().spec.A(), P, p.mu, p.nu);
    s.state.t = t;
    return s;
}

RhoAt dressed_evolution(std::shared_ptr<const LaxSolution> lax, const Tolerances& tol) {
    return [lax = std::move(lax), tol](double t) { return dressed_sample(*lax, t, tol).state.rho1; };
}

namespace {

void require_delta_seed(const SeedSolution& seed) {
    if (seed.family != SeedFamily::DeltaCommuting || seed.spec.order() != 1) {
        throw UnsupportedScenario("explicit_eavn: requires an n = 1 delta-commuting seed");
    }
}

}  // namespace

Complex eavn_overlap(const SeedSolution& seed, Complex mu, const StateVector& phi0, double t) {
    require_delta_seed(seed);
    const Complex rate = (mu - std::conj(mu)) / std::norm(mu);
    const OperatorMatrix e = mat_exp(kI * rate * t * delta_operator(seed));
    return phi0.dot(e * phi0);
}

OperatorMatrix explicit_eavn(const SeedSolution& seed, Complex mu, const StateVector& phi0,
                             double t, const Tolerances& tol) {
    require_delta_seed(seed);
    if (mu == Complex(0.0)) throw InvalidInput("explicit_eavn: mu must be nonzero");
    const OperatorMatrix& h = seed.spec.A();
    const OperatorMatrix delta = delta_operator(seed);
    const Complex f = eavn_overlap(seed, mu, phi0, t);
    if (std::abs(f) < tol.singular_F) {
        throw SingularDarboux("explicit_eavn: F_a(t) vanishes", t);
    }
    const OperatorMatrix proj = phi0 * phi0.adjoint();
    const OperatorMatrix left = mat_exp(-(kI / mu) * t * delta);
    const OperatorMatrix right = mat_exp((kI / std::conj(mu)) * t * delta);
    const OperatorMatrix inner =
        seed.rho0 + ((mu - std::conj(mu)) / f) * (left * commutator(proj, h) * right);
    const OperatorMatrix u = mat_exp(-kI * seed.a * t * h);
    return u * inner * u.adjoint();
}

StateVector transform_psi(const StateVector& psi, const OperatorMatrix& P, Complex mu, Complex nu,
                          Complex lambda) {
    if (lambda == mu) throw InvalidInput("transform_psi: lambda must differ from mu");
    const Complex factor = (nu - mu) / (lambda - mu);
    // row' = row (I - factor P)  <=>  row'^T = (I - factor P)^T row^T
    return psi - factor * (P.transpose() * psi);
}

CovarianceResidual covariance_residual(const LaxSolution& lax, double t, double h,
                                       const Tolerances& tol) {
    const DarbouxParams& p = lax.params();
    if (!p.lambda || !p.z_lambda || !lax.psi0()) {
        throw InvalidInput("covariance_residual: lambda is not configured");
    }
    const ModelSpec& spec = lax.seed().spec;
    if (h <= 0.0) h = spec.default_step();
    const Complex lambda = *p.lambda;

    auto psi1_at = [&](double s) {
        const DressedSample sample = dressed_sample(lax, s, tol);
        return transform_psi(lax.psi_at(s), sample.state.P, p.mu, p.nu, lambda);
    };

    const DressedSample here = dressed_sample(lax, t, tol);
    const StateVector psi1 = transform_psi(lax.psi_at(t), here.state.P, p.mu, p.nu, lambda);
    const double norm = psi1.norm();
    if (!(norm > 0.0)) throw SingularDarboux("covariance: transformed psi vanished", t);

    CovarianceResidual out;
    const OperatorMatrix pencil1 = here.state.rho1 - lambda * spec.A();
    out.eigen = (pencil1.transpose() * psi1 - *p.z_lambda * psi1).norm() / norm;

    const StateVector derivative = (psi1_at(t - 2.0 * h) - 8.0 * psi1_at(t - h) +
                                    8.0 * psi1_at(t + h) - psi1_at(t + 2.0 * h)) /
                                   (12.0 * h);
    const OperatorMatrix v2 =
        hamiltonian_of(spec, here.state.rho1) - lambda * spec.power(spec.order() + 1);
    out.time = (-kI * derivative - v2.transpose() * psi1).norm() / norm;
    return out;
}

Trajectory dressed_trajectory(std::shared_ptr<const LaxSolution> lax,
                              const std::vector<double>& times,
                              const TrajectoryOptions& options) {
    if (!lax) throw InvalidInput("dressed_trajectory: null Lax solution");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InvalidInput("dressed_trajectory: times must be strictly increasing");
        }
    }
    const Tolerances& tol = options.tol;
    const SeedSolution& seed = lax->seed();
    const DarbouxParams& params = lax->params();
    const ModelSpec& spec = seed.spec;
    const int dim = static_cast<int>(seed.dim());
    const double rate_step = spec.default_step();

    Trajectory traj;
    traj.label = "dressed/" + to_string(seed.family);
    traj.spec = spec;
    traj.seed = lax->seed_ptr();
    traj.lax = lax;
    traj.rho_at = dressed_evolution(lax, tol);
    traj.reference = seed.rho0;
    traj.hermitian_mode = params.hermitian_mode;

    const bool eavn = params.hermitian_mode && seed.family == SeedFamily::DeltaCommuting;
    for (double t : times) {
        try {
            const DressedSample sample = dressed_sample(*lax, t, tol);
            const DressedState& st = sample.state;
            SampleDiagnostics d;
            d.moments = trace_moments(st.rho1, dim);
            d.hermiticity_gap = hermiticity_gap(st.rho1);
            if (params.hermitian_mode) {
                const OperatorMatrix sym = 0.5 * (st.rho1 + st.rho1.adjoint());
                d.min_eig = eig_hermitian(sym, tol).values(0);
                d.unitarity_gap = (st.T.adjoint() * st.T - identity(dim)).norm();
            }
            d.phi_norm = sample.phi_norm;
            if (eavn) d.F_value = eavn_overlap(seed, params.mu, lax->phi0(), t);
            d.idempotency_gap = (st.P * st.P - st.P).norm();
            d.trace_P_gap = std::abs(st.P.trace() - 1.0);
            d.form_gap = st.form_gap;
            d.bridge_gap = st.bridge_gap;
            const OperatorMatrix p_plus = dressed_sample(*lax, t + rate_step, tol).state.P;
            const OperatorMatrix p_minus = dressed_sample(*lax, t - rate_step, tol).state.P;
            d.projector_rate = (p_plus - p_minus).norm() / (2.0 * rate_step);
            if (options.compute_residual) {
                d.residual = residual(spec, traj.rho_at, t, options.residual_step, 0.0, tol);
            }
            traj.times.push_back(t);
            traj.states.push_back(st.rho1);
            traj.diagnostics.push_back(std::move(d));
        } catch (const SingularDarboux& e) {
            traj.singular_time = e.time();
            traj.singular_message = e.what();
            break;
        }
    }
    return traj;
}

}  // namespace vne
