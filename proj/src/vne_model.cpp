#include "vne/vne_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vne/errors.hpp"

namespace vne {

ModelSpec::ModelSpec(int n, OperatorMatrix a, const Tolerances& tol) : n_(n) {
    if (n < 1) throw InvalidInput("ModelSpec: n must be >= 1, got " + std::to_string(n));
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw DimensionMismatch("ModelSpec: A must be square and non-empty");
    }
    if (!a.allFinite()) throw InvalidInput("ModelSpec: A has non-finite entries");
    if (!is_hermitian(a, tol.model_hermitian)) {
        throw InvalidInput("ModelSpec: A must be self-adjoint");
    }
    powers_.reserve(static_cast<std::size_t>(n) + 2);
    powers_.push_back(identity(a.rows()));
    powers_.push_back(std::move(a));
    for (int k = 2; k <= n + 1; ++k) powers_.push_back(powers_.back() * powers_[1]);
}

const OperatorMatrix& ModelSpec::power(int k) const {
    if (k < 0 || k > n_ + 1) {
        throw InvalidInput("ModelSpec::power: exponent " + std::to_string(k) + " out of range");
    }
    return powers_[static_cast<std::size_t>(k)];
}

double ModelSpec::default_step() const {
    return 1e-3 * std::pow(1.0 + A().norm(), -(n_ + 1));
}

namespace {

void require_dim(const ModelSpec& spec, const OperatorMatrix& rho, const char* what) {
    if (rho.rows() != spec.dim() || rho.cols() != spec.dim()) {
        throw DimensionMismatch(std::string(what) + ": rho dimension does not match A");
    }
}

}  // namespace

OperatorMatrix hamiltonian_of(const ModelSpec& spec, const OperatorMatrix& rho) {
    require_dim(spec, rho, "hamiltonian_of");
    const int n = spec.order();
    OperatorMatrix h = OperatorMatrix::Zero(spec.dim(), spec.dim());
    for (int k = 0; k <= n; ++k) h.noalias() += spec.power(n - k) * rho * spec.power(k);
    return h;
}

OperatorMatrix rhs(const ModelSpec& spec, const OperatorMatrix& rho) {
    const OperatorMatrix h = hamiltonian_of(spec, rho);
    return -kI * (h * rho - rho * h);
}

OperatorMatrix rhs_commutator_form(const ModelSpec& spec, const OperatorMatrix& rho) {
    require_dim(spec, rho, "rhs_commutator_form");
    const int n = spec.order();
    OperatorMatrix acc = OperatorMatrix::Zero(spec.dim(), spec.dim());
    for (int k = 0; k <= n; ++k) {
        const OperatorMatrix sandwich = rho * spec.power(k) * rho;
        acc += commutator(spec.power(n - k), sandwich);
    }
    return -kI * acc;
}

OperatorMatrix rhs_checked(const ModelSpec& spec, const OperatorMatrix& rho,
                           const Tolerances& tol) {
    const OperatorMatrix h = hamiltonian_of(spec, rho);
    const OperatorMatrix first = -kI * (h * rho - rho * h);
    const OperatorMatrix second = rhs_commutator_form(spec, rho);
    const double scale = std::max(1.0, h.norm() * rho.norm());
    if ((first - second).norm() > tol.rhs_forms * scale) {
        throw InconsistentLax("rhs: the two forms of the equation disagree");
    }
    return first;
}

double residual_tolerance(double h, const Tolerances& tol) {
    return std::max(tol.residual_floor, tol.residual_stencil_constant * std::pow(h, 4));
}

OperatorMatrix central_derivative(const RhoAt& f, double t, double h) {
    return (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
}

ResidualReport residual(const ModelSpec& spec, const RhoAt& rho_at, double t, double h,
                        double tolerance, const Tolerances& tol) {
    if (h <= 0.0) h = spec.default_step();
    if (tolerance <= 0.0) tolerance = residual_tolerance(h, tol);
    const OperatorMatrix rho = rho_at(t);
    const OperatorMatrix derivative = central_derivative(rho_at, t, h);
    const OperatorMatrix hrho = hamiltonian_of(spec, rho);
    const double norm = (kI * derivative - (hrho * rho - rho * hrho)).norm();
    ResidualReport report;
    report.t = t;
    report.residual_norm = norm;
    report.tolerance_used = tolerance;
    report.pass = std::isfinite(norm) && norm <= tolerance;
    return report;
}

}  // namespace vne
