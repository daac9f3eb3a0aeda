#pragma once

namespace vne {

/// Every numerical threshold used by the library, in one place.
///
/// Gaps between matrices are Frobenius norms. Checks that involve a possibly
/// non-orthogonal projector P are measured relative to max(1, |P|_F^2), which
/// reduces to the absolute value when P is Hermitian (|P|_F = 1).
struct Tolerances {
    // operator_core
    double hermitian_input = 1e-10;      // precondition of eig_hermitian
    double jacobi_offdiag = 1e-14;       // relative off-diagonal mass at convergence
    int jacobi_max_sweeps = 100;
    double eigpair_residual = 1e-9;      // |Mv - zv| <= tol |M|_F |v|
    int eigpair_max_dim = 32;
    double root_tie = 1e-9;              // Re-parts closer than this (relative) are tied
    double root_pin = 1e-6;              // pinned z must be this close to a root (relative)

    // vne_model / seeds
    double model_hermitian = 1e-12;
    double rhs_forms = 1e-11;
    double seed_structure = 1e-11;
    double pure_state_norm = 1e-12;
    double residual_floor = 1e-6;
    double residual_stencil_constant = 1e4;  // tolerance = max(floor, C h^4)

    // lax_engine
    double lax_initial = 1e-9;
    double lax_persistence = 1e-8;

    // darboux_engine
    double overlap = 1e-10;              // |<chi|phi>| >= tol |phi| |chi|
    double idempotency = 1e-11;
    double trace_P = 1e-11;
    double form_gap = 1e-9;
    double bridge = 1e-10;
    double exp_identity = 1e-11;
    double unitarity = 1e-10;
    double singular_F = 1e-12;

    // verification
    double spectrum = 1e-9;
    double moments = 1e-8;
    double hermiticity = 1e-10;
    double trace = 1e-11;
    double positivity = -1e-10;
    double covariance_eigen = 1e-9;
    double covariance_time = 1e-8;
    double explicit_vs_general = 1e-8;
    double state_consistency = 1e-12;
    double mode_consistency = 1e-14;
    double rk4_norm_limit = 1e6;

    // Multiplies every tolerance (never the structural limits).
    Tolerances scaled(double factor) const {
        Tolerances t = *this;
        for (double* v : {&t.hermitian_input, &t.eigpair_residual, &t.root_tie, &t.root_pin,
                          &t.model_hermitian, &t.rhs_forms, &t.seed_structure,
                          &t.pure_state_norm, &t.residual_floor, &t.lax_initial,
                          &t.lax_persistence, &t.idempotency, &t.trace_P, &t.form_gap,
                          &t.bridge, &t.exp_identity, &t.unitarity, &t.spectrum, &t.moments,
                          &t.hermiticity, &t.trace, &t.positivity, &t.covariance_eigen,
                          &t.covariance_time, &t.explicit_vs_general, &t.state_consistency,
                          &t.mode_consistency}) {
            *v *= factor;
        }
        return t;
    }
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

}  // namespace vne
