#include "vne/symmetry_transforms.hpp"

#include <cmath>

#include "vne/errors.hpp"

namespace vne {

ShiftSpec ShiftSpec::scalar(double lambda, Eigen::Index dim) {
    return ShiftSpec{lambda * identity(dim)};
}

std::optional<double> ShiftSpec::scalar_value(double tol) const {
    const Complex first = X(0, 0);
    if (std::abs(first.imag()) > tol) return std::nullopt;
    if ((X - first * identity(X.rows())).norm() > tol * std::max(1.0, X.norm())) {
        return std::nullopt;
    }
    return first.real();
}

void validate_shift(const ModelSpec& spec, const OperatorMatrix& rho0, const ShiftSpec& shift,
                    const Tolerances& tol) {
    if (shift.X.rows() != spec.dim() || shift.X.cols() != spec.dim()) {
        throw DimensionMismatch("shift: X has the wrong dimension");
    }
    if (commutator(shift.X, spec.A()).norm() > tol.seed_structure ||
        commutator(shift.X, rho0).norm() > tol.seed_structure) {
        throw InvalidInput("shift: X must commute with A and rho(0)");
    }
}

namespace {

OperatorMatrix shift_generator(const ModelSpec& spec, const ShiftSpec& x) {
    return static_cast<double>(spec.order() + 1) * (x.X * spec.power(spec.order()));
}

}  // namespace

OperatorMatrix shift(const ModelSpec& spec, const RhoAt& rho_at, const ShiftSpec& x, double t,
                     const Tolerances& tol) {
    validate_shift(spec, rho_at(0.0), x, tol);
    const OperatorMatrix inner = rho_at(t) + x.X;
    if (t == 0.0) return inner;
    const OperatorMatrix u = mat_exp(-kI * t * shift_generator(spec, x));
    return u * inner * mat_exp(kI * t * shift_generator(spec, x));
}

RhoAt shifted(const ModelSpec& spec, RhoAt rho_at, const ShiftSpec& x, const Tolerances& tol) {
    validate_shift(spec, rho_at(0.0), x, tol);
    const OperatorMatrix gen = shift_generator(spec, x);
    return [rho_at = std::move(rho_at), gen, xx = x.X](double t) -> OperatorMatrix {
        const OperatorMatrix inner = rho_at(t) + xx;
        if (t == 0.0) return inner;
        return mat_exp(-kI * t * gen) * inner * mat_exp(kI * t * gen);
    };
}

OperatorMatrix rescale(const RhoAt& rho_at, double y, double t) {
    if (y == 0.0) throw InvalidInput("rescale: Y must be nonzero");
    return y * rho_at(y * t);
}

RhoAt rescaled(RhoAt rho_at, double y) {
    if (y == 0.0) throw InvalidInput("rescale: Y must be nonzero");
    return [rho_at = std::move(rho_at), y](double t) -> OperatorMatrix {
        return y * rho_at(y * t);
    };
}

DensityNormalization normalize_to_density(const RhoAt& rho_at, const ModelSpec& spec,
                                          double margin, const Tolerances& tol) {
    const OperatorMatrix rho0 = rho_at(0.0);
    if (!is_hermitian(rho0, tol.hermiticity)) {
        throw InvalidInput("normalize_to_density: rho(0) must be Hermitian");
    }
    const double min_eig = eig_hermitian(0.5 * (rho0 + rho0.adjoint()), tol).values(0);
    DensityNormalization out;
    out.lambda = std::max(0.0, -min_eig) + margin;
    const double dim = static_cast<double>(spec.dim());
    const double shifted_trace = rho0.trace().real() + out.lambda * dim;
    if (std::abs(shifted_trace) <= 1e-300 || std::abs(shifted_trace) < tol.trace) {
        throw InvalidInput("normalize_to_density: shifted trace vanishes, cannot normalize");
    }
    out.Y = 1.0 / shifted_trace;
    out.X = ShiftSpec::scalar(out.lambda, spec.dim());
    if (out.lambda == 0.0) {
        out.rho_dm_at = out.Y == 1.0 ? rho_at : rescaled(rho_at, out.Y);
    } else {
        out.rho_dm_at = rescaled(shifted(spec, rho_at, out.X, tol), out.Y);
    }
    return out;
}

SeedSolution shift_seed(const SeedSolution& seed, double lambda, const Tolerances& tol) {
    const ModelSpec& spec = seed.spec;
    const ShiftSpec x = ShiftSpec::scalar(lambda, spec.dim());
    SeedSolution out = seed;
    out.rho0 = seed.rho0 + x.X;
    out.frame = seed.frame + shift_generator(spec, x);
    switch (seed.family) {
        case SeedFamily::DeltaCommuting:
            out.a = seed.a + 2.0 * lambda;
            break;
        case SeedFamily::Commuting:
        case SeedFamily::Frame:
            break;
        case SeedFamily::Anticommuting:
        case SeedFamily::PureState:
            if (lambda != 0.0) out.family = SeedFamily::Frame;
            break;
    }
    validate_seed(out, tol);
    return out;
}

SeedSolution rescale_seed(const SeedSolution& seed, double y, const Tolerances& tol) {
    if (y == 0.0) throw InvalidInput("rescale_seed: Y must be nonzero");
    SeedSolution out = seed;
    out.rho0 = y * seed.rho0;
    out.frame = y * seed.frame;
    if (seed.family == SeedFamily::DeltaCommuting) out.a = y * seed.a;
    if (seed.family == SeedFamily::PureState && y != 1.0) out.family = SeedFamily::Frame;
    validate_seed(out, tol);
    return out;
}

double trace_rho_a(const SeedSolution& seed) {
    return (seed.rho0 * seed.spec.A()).trace().real();
}

bool needs_density_normalization(const SeedSolution& seed, const Tolerances& tol) {
    if (seed.family == SeedFamily::Anticommuting &&
        std::abs(trace_rho_a(seed)) > tol.seed_structure * std::max(1.0, seed.rho0.norm())) {
        throw InvalidInput("anticommuting seed with Tr(rho A) != 0");
    }
    if (!is_hermitian(seed.rho0, tol.hermiticity)) return true;
    if (std::abs(seed.rho0.trace() - 1.0) > tol.trace) return true;
    const double min_eig =
        eig_hermitian(0.5 * (seed.rho0 + seed.rho0.adjoint()), tol).values(0);
    return min_eig < tol.positivity;
}

}  // namespace vne
