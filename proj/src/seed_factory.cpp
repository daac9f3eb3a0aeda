#include "vne/seed_factory.hpp"

#include <cmath>

#include "vne/errors.hpp"

namespace vne {

std::string to_string(SeedFamily family) {
    switch (family) {
        case SeedFamily::Anticommuting: return "anticommuting";
        case SeedFamily::DeltaCommuting: return "delta_commuting";
        case SeedFamily::PureState: return "pure_state";
        case SeedFamily::Commuting: return "commuting";
        case SeedFamily::Frame: return "frame";
    }
    return "unknown";
}

SeedFamily seed_family_from_string(const std::string& name) {
    if (name == "anticommuting") return SeedFamily::Anticommuting;
    if (name == "delta_commuting") return SeedFamily::DeltaCommuting;
    if (name == "pure_state") return SeedFamily::PureState;
    if (name == "commuting") return SeedFamily::Commuting;
    if (name == "frame") return SeedFamily::Frame;
    throw InvalidInput("unknown seed family '" + name + "'");
}

OperatorMatrix SeedSolution::evolve(double t) const {
    if (t == 0.0 || frame.isZero(0.0)) return rho0;
    const OperatorMatrix u = mat_exp(-kI * t * frame);
    return u * rho0 * u.adjoint();
}

RhoAt SeedSolution::evolution() const {
    return [seed = *this](double t) { return seed.evolve(t); };
}

namespace {

OperatorMatrix sigma_x() { return make_matrix({{0.0, 1.0}, {1.0, 0.0}}); }

}  // namespace

SeedSolution make_anticommuting_seed(int n, std::span<const double> alphas,
                                     std::span<const double> couplings, const Tolerances& tol) {
    if (alphas.empty() || alphas.size() != couplings.size()) {
        throw InvalidInput("anticommuting seed: need one alpha and one coupling per block");
    }
    const auto pairs = static_cast<Eigen::Index>(alphas.size());
    OperatorMatrix a = OperatorMatrix::Zero(2 * pairs, 2 * pairs);
    OperatorMatrix rho = OperatorMatrix::Zero(2 * pairs, 2 * pairs);
    for (Eigen::Index j = 0; j < pairs; ++j) {
        const double alpha = alphas[static_cast<std::size_t>(j)];
        const double b = couplings[static_cast<std::size_t>(j)];
        if (alpha == 0.0) throw InvalidInput("anticommuting seed: alpha_j = 0 (degenerate A pair)");
        if (b == 0.0) throw InvalidInput("anticommuting seed: b_j = 0 (trivial block)");
        a(2 * j, 2 * j) = alpha;
        a(2 * j + 1, 2 * j + 1) = -alpha;
        rho.block(2 * j, 2 * j, 2, 2) = b * sigma_x();
    }
    SeedSolution seed{SeedFamily::Anticommuting, rho, ModelSpec(n, a, tol), 0.0,
                      OperatorMatrix::Zero(2 * pairs, 2 * pairs)};
    validate_seed(seed, tol);
    return seed;
}

SeedSolution make_delta_commuting_seed(std::span<const DeltaBlock> blocks, double a,
                                       const Tolerances& tol) {
    if (blocks.empty()) throw InvalidInput("delta-commuting seed: no blocks");
    if (!std::isfinite(a)) throw InvalidInput("delta-commuting seed: a must be a finite real");
    const auto count = static_cast<Eigen::Index>(blocks.size());
    OperatorMatrix h = OperatorMatrix::Zero(2 * count, 2 * count);
    OperatorMatrix rho = OperatorMatrix::Zero(2 * count, 2 * count);
    for (Eigen::Index j = 0; j < count; ++j) {
        const DeltaBlock& blk = blocks[static_cast<std::size_t>(j)];
        if (blk.kappa == 0.0) throw InvalidInput("delta-commuting seed: kappa_j = 0");
        h(2 * j, 2 * j) = blk.omega;
        h(2 * j + 1, 2 * j + 1) = 2.0 * blk.omega;
        rho.block(2 * j, 2 * j, 2, 2) =
            0.5 * a * identity(2) + blk.kappa * sigma_x();
    }
    ModelSpec spec(1, h, tol);
    SeedSolution seed{SeedFamily::DeltaCommuting, rho, spec, a, a * h};
    validate_seed(seed, tol);
    return seed;
}

OperatorMatrix pure_state_generator(const ModelSpec& spec, const StateVector& psi) {
    if (psi.size() != spec.dim()) throw DimensionMismatch("pure state: length does not match A");
    const int n = spec.order();
    OperatorMatrix k = OperatorMatrix::Zero(spec.dim(), spec.dim());
    for (int j = 0; j <= n; ++j) {
        const Complex moment = psi.dot(spec.power(j) * psi);  // <psi|A^j|psi>
        k += moment.real() * spec.power(n - j);
    }
    return k;
}

SeedSolution make_pure_state_seed(const ModelSpec& spec, const StateVector& psi0,
                                  const Tolerances& tol) {
    if (psi0.size() != spec.dim()) throw DimensionMismatch("pure state: length does not match A");
    if (std::abs(psi0.norm() - 1.0) > tol.pure_state_norm) {
        throw InvalidInput("pure state: psi0 must be normalized");
    }
    SeedSolution seed{SeedFamily::PureState, psi0 * psi0.adjoint(), spec, 0.0,
                      pure_state_generator(spec, psi0)};
    validate_seed(seed, tol);
    return seed;
}

SeedSolution make_commuting_seed(const ModelSpec& spec, const OperatorMatrix& rho0,
                                 const Tolerances& tol) {
    if (rho0.rows() != spec.dim() || rho0.cols() != spec.dim()) {
        throw DimensionMismatch("commuting seed: rho0 dimension does not match A");
    }
    SeedSolution seed{SeedFamily::Commuting, rho0, spec, 0.0,
                      OperatorMatrix::Zero(spec.dim(), spec.dim())};
    validate_seed(seed, tol);
    return seed;
}

SeedSolution conjugate_seed(const SeedSolution& seed, const OperatorMatrix& unitary) {
    if (unitary.rows() != seed.dim() || unitary.cols() != seed.dim()) {
        throw DimensionMismatch("conjugate_seed: basis change has wrong dimension");
    }
    if ((unitary.adjoint() * unitary - identity(seed.dim())).norm() > 1e-12) {
        throw InvalidInput("conjugate_seed: basis change is not unitary");
    }
    const OperatorMatrix a = unitary * seed.spec.A() * unitary.adjoint();
    // Exact Hermitian symmetrization; rotation leaves round-off of order 1e-16.
    ModelSpec spec(seed.spec.order(), 0.5 * (a + a.adjoint()));
    return SeedSolution{seed.family, unitary * seed.rho0 * unitary.adjoint(), spec, seed.a,
                        unitary * seed.frame * unitary.adjoint()};
}

OperatorMatrix delta_operator(const SeedSolution& seed) {
    return seed.rho0 * seed.rho0 - seed.a * seed.rho0;
}

void validate_seed(const SeedSolution& seed, const Tolerances& tol) {
    const OperatorMatrix& a = seed.spec.A();
    const OperatorMatrix& rho = seed.rho0;
    if (rho.rows() != seed.spec.dim() || rho.cols() != seed.spec.dim()) {
        throw DimensionMismatch("seed: rho0 dimension does not match A");
    }
    if (seed.frame.rows() != rho.rows() || seed.frame.cols() != rho.cols()) {
        throw DimensionMismatch("seed: frame generator has wrong dimension");
    }
    const double eps = tol.seed_structure * std::max(1.0, rho.norm() * a.norm());
    if (commutator(seed.frame, a).norm() > eps * std::max(1.0, seed.frame.norm())) {
        throw InvalidInput("seed: frame generator must commute with A");
    }
    switch (seed.family) {
        case SeedFamily::Anticommuting:
            if ((a * rho + rho * a).norm() > eps) {
                throw InvalidInput("anticommuting seed: A rho + rho A != 0");
            }
            break;
        case SeedFamily::DeltaCommuting: {
            if (seed.spec.order() != 1) {
                throw InvalidInput("delta-commuting seed: requires n = 1");
            }
            const OperatorMatrix delta = delta_operator(seed);
            if (commutator(delta, a).norm() > eps * std::max(1.0, rho.norm())) {
                throw InvalidInput("delta-commuting seed: [rho^2 - a rho, H] != 0");
            }
            break;
        }
        case SeedFamily::PureState: {
            if (std::abs(rho.trace() - 1.0) > tol.seed_structure ||
                (rho * rho - rho).norm() > tol.seed_structure) {
                throw InvalidInput("pure-state seed: rho0 is not a rank-one projector");
            }
            break;
        }
        case SeedFamily::Commuting:
            if (commutator(rho, a).norm() > eps) {
                throw InvalidInput("commuting seed: [rho, A] != 0");
            }
            break;
        case SeedFamily::Frame:
            break;
    }
}

OperatorMatrix pure_state_solution(const ModelSpec& spec, const StateVector& psi0, double t,
                                   const Tolerances& tol) {
    if (psi0.size() != spec.dim()) throw DimensionMismatch("pure state: length does not match A");
    if (std::abs(psi0.norm() - 1.0) > tol.pure_state_norm) {
        throw InvalidInput("pure_state_solution: psi0 must be normalized");
    }
    const OperatorMatrix rho0 = psi0 * psi0.adjoint();
    if (t == 0.0) return rho0;
    const OperatorMatrix u = mat_exp(-kI * t * pure_state_generator(spec, psi0));
    return u * rho0 * u.adjoint();
}

StateVector nlse_rhs(const ModelSpec& spec, const StateVector& psi) {
    if (psi.size() != spec.dim()) throw DimensionMismatch("nlse_rhs: length does not match A");
    const int n = spec.order();
    StateVector out = StateVector::Zero(psi.size());
    for (int k = 0; k < n; ++k) {
        const Complex moment = psi.dot(spec.power(k) * psi);
        out += moment * (spec.power(n - k) * psi);
    }
    return -kI * out;
}

}  // namespace vne
