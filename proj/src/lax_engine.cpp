#include "vne/lax_engine.hpp"

#include <cmath>
#include <string>

#include "vne/errors.hpp"

namespace vne {

namespace {

OperatorMatrix pencil(const SeedSolution& seed, const OperatorMatrix& rho, Complex param) {
    return rho - param * seed.spec.A();
}

bool frame_is_zero(const SeedSolution& seed) { return seed.frame.isZero(0.0); }

// exp(c t G) v. When v is an eigenvector of G the scalar form is used: a
// non-normal exp amplifies round-off along growing directions otherwise.
StateVector exp_apply(const OperatorMatrix& g, Complex c, const StateVector& v, double t) {
    const StateVector gv = g * v;
    const double vv = v.squaredNorm();
    if (vv > 0.0) {
        const Complex w = v.dot(gv) / vv;
        if ((gv - w * v).norm() <= 1e-11 * std::max(1.0, g.norm()) * std::sqrt(vv)) {
            return std::exp(c * t * w) * v;
        }
    }
    return mat_exp(c * t * g) * v;
}

void require_family_supported(const SeedSolution& seed) {
    if (seed.family == SeedFamily::DeltaCommuting && seed.spec.order() != 1) {
        throw UnsupportedScenario("lax: delta-commuting seeds are supported only for n = 1");
    }
}

}  // namespace

EigenPair solve_initial(const SeedSolution& seed, Complex mu, std::optional<Complex> pin,
                        const Tolerances& tol) {
    if (mu == Complex(0.0)) throw InvalidInput("solve_initial: mu must be nonzero");
    return eig_pair_general(pencil(seed, seed.rho0, mu), pin, tol);
}

EigenPair solve_initial_left(const SeedSolution& seed, Complex param, std::optional<Complex> pin,
                             const Tolerances& tol) {
    if (param == Complex(0.0)) throw InvalidInput("solve_initial_left: parameter must be nonzero");
    return eig_pair_general(pencil(seed, seed.rho0, param).transpose(), pin, tol);
}

OperatorMatrix lax_generator(const SeedSolution& seed, Complex param) {
    const int n = seed.spec.order();
    return hamiltonian_of(seed.spec, seed.rho0) - param * seed.spec.power(n + 1);
}

StateVector evolve_right_frame(const SeedSolution& seed, Complex param, const StateVector& v0,
                               double t) {
    if (t == 0.0) return v0;
    const OperatorMatrix inner = lax_generator(seed, param) - seed.frame;
    StateVector v = exp_apply(inner, -kI, v0, t);
    if (!frame_is_zero(seed)) v = mat_exp(-kI * t * seed.frame) * v;
    return v;
}

StateVector evolve_left_frame(const SeedSolution& seed, Complex param, const StateVector& row0,
                              double t) {
    if (t == 0.0) return row0;
    const OperatorMatrix inner = lax_generator(seed, param) - seed.frame;
    // row(t)^T = row0^T exp(iWt) exp(iKt)
    StateVector r = exp_apply(inner.transpose(), kI, row0, t);
    if (!frame_is_zero(seed)) r = mat_exp(kI * t * seed.frame).transpose() * r;
    return r;
}

namespace {

StateVector evolve_right(const SeedSolution& seed, Complex param, Complex z, const StateVector& v0,
                         double t) {
    if (t == 0.0) return v0;
    require_family_supported(seed);
    const int n = seed.spec.order();
    switch (seed.family) {
        case SeedFamily::Anticommuting:
            if (n % 2 == 0) return exp_apply(seed.spec.power(n), -kI * z, v0, t);
            return exp_apply(seed.spec.power(n + 1), kI * param, v0, t);
        case SeedFamily::DeltaCommuting: {
            const OperatorMatrix delta = delta_operator(seed);
            const Complex phase = std::exp(kI * (z * z - seed.a * z) * t / param);
            const StateVector inner = exp_apply(delta, -kI / param, v0, t);
            return phase * (mat_exp(-kI * seed.a * t * seed.spec.A()) * inner);
        }
        case SeedFamily::PureState:
        case SeedFamily::Commuting:
        case SeedFamily::Frame:
            return evolve_right_frame(seed, param, v0, t);
    }
    throw UnsupportedScenario("lax: unsupported seed family");
}

StateVector evolve_left(const SeedSolution& seed, Complex param, Complex z, const StateVector& row0,
                        double t) {
    if (t == 0.0) return row0;
    require_family_supported(seed);
    const int n = seed.spec.order();
    switch (seed.family) {
        case SeedFamily::Anticommuting:
            if (n % 2 == 0) return exp_apply(seed.spec.power(n).transpose(), kI * z, row0, t);
            return exp_apply(seed.spec.power(n + 1).transpose(), -kI * param, row0, t);
        case SeedFamily::DeltaCommuting: {
            // <row(t)| = phase <row0| exp(i Delta t / param) exp(iaHt)
            const OperatorMatrix delta = delta_operator(seed);
            const Complex phase = std::exp(-kI * (z * z - seed.a * z) * t / param);
            const StateVector inner = exp_apply(delta.transpose(), kI / param, row0, t);
            return phase * (mat_exp(kI * seed.a * t * seed.spec.A()).transpose() * inner);
        }
        case SeedFamily::PureState:
        case SeedFamily::Commuting:
        case SeedFamily::Frame:
            return evolve_left_frame(seed, param, row0, t);
    }
    throw UnsupportedScenario("lax: unsupported seed family");
}

}  // namespace

StateVector evolve_phi(const SeedSolution& seed, const DarbouxParams& params,
                       const StateVector& phi0, double t) {
    return evolve_right(seed, params.mu, params.z_mu, phi0, t);
}

StateVector evolve_chi(const SeedSolution& seed, const DarbouxParams& params,
                       const StateVector& chi0, double t) {
    if (params.hermitian_mode) {
        return evolve_right(seed, params.mu, params.z_mu, chi0.conjugate(), t).conjugate();
    }
    return evolve_left(seed, params.nu, params.z_nu, chi0, t);
}

StateVector evolve_psi(const SeedSolution& seed, const DarbouxParams& params,
                       const StateVector& psi0, double t) {
    if (!params.lambda || !params.z_lambda) {
        throw InvalidInput("evolve_psi: lambda is not configured");
    }
    return evolve_left(seed, *params.lambda, *params.z_lambda, psi0, t);
}

LaxSolution::LaxSolution(std::shared_ptr<const SeedSolution> seed, DarbouxParams params,
                         StateVector phi0, StateVector chi0, std::optional<StateVector> psi0)
    : seed_(std::move(seed)),
      params_(params),
      phi0_(std::move(phi0)),
      chi0_(std::move(chi0)),
      psi0_(std::move(psi0)) {
    if (!seed_) throw InvalidInput("LaxSolution: null seed");
    if (phi0_.size() != seed_->dim() || chi0_.size() != seed_->dim() ||
        (psi0_ && psi0_->size() != seed_->dim())) {
        throw DimensionMismatch("LaxSolution: vector length does not match the seed");
    }
    generator_phi_ = lax_generator(*seed_, params_.mu);
}

LaxSolution LaxSolution::solve(std::shared_ptr<const SeedSolution> seed,
                               const LaxRequest& request, const Tolerances& tol) {
    if (!seed) throw InvalidInput("LaxSolution::solve: null seed");
    require_family_supported(*seed);
    if (request.mu == Complex(0.0)) throw InvalidInput("lax: mu must be nonzero");
    const Complex nu = request.nu.value_or(std::conj(request.mu));
    if (nu == Complex(0.0)) throw InvalidInput("lax: nu must be nonzero");

    DarbouxParams params;
    params.mu = request.mu;
    params.nu = nu;
    params.hermitian_mode =
        nu == std::conj(request.mu) && is_hermitian(seed->rho0, tol.hermiticity);

    const EigenPair right = solve_initial(*seed, request.mu, request.pin_z_mu, tol);
    params.z_mu = right.z;

    StateVector chi0;
    if (params.hermitian_mode) {
        params.z_nu = std::conj(right.z);
        chi0 = right.v.conjugate();
    } else {
        const EigenPair left = solve_initial_left(*seed, nu, request.pin_z_nu, tol);
        params.z_nu = left.z;
        chi0 = left.v;
    }

    std::optional<StateVector> psi0;
    if (request.lambda) {
        if (*request.lambda == request.mu) {
            throw InvalidInput("lax: lambda must differ from mu");
        }
        const EigenPair psi = solve_initial_left(*seed, *request.lambda, request.pin_z_lambda, tol);
        params.lambda = request.lambda;
        params.z_lambda = psi.z;
        psi0 = psi.v;
    }

    LaxSolution sol(std::move(seed), params, right.v, chi0, psi0);
    if (sol.phi_eigen_residual(0.0) > tol.lax_initial * std::max(1.0, sol.seed().rho0.norm()) ||
        sol.chi_eigen_residual(0.0) > tol.lax_initial * std::max(1.0, sol.seed().rho0.norm())) {
        throw DefectiveEigenpair("lax: initial eigen relation not satisfied");
    }
    return sol;
}

StateVector LaxSolution::psi_at(double t) const {
    if (!psi0_) throw InvalidInput("LaxSolution: lambda was not configured");
    return evolve_psi(*seed_, params_, *psi0_, t);
}

double LaxSolution::phi_eigen_residual(double t) const {
    const StateVector phi = phi_at(t);
    const OperatorMatrix m = pencil(*seed_, seed_->evolve(t), params_.mu);
    return (m * phi - params_.z_mu * phi).norm() / phi.norm();
}

double LaxSolution::chi_eigen_residual(double t) const {
    const StateVector chi = chi_at(t);
    const OperatorMatrix m = pencil(*seed_, seed_->evolve(t), params_.nu);
    return (m.transpose() * chi - params_.z_nu * chi).norm() / chi.norm();
}

}  // namespace vne
