#pragma once

// Deterministic random scenarios and independent oracles shared by the unit
// tests and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vne/darboux_engine.hpp"
#include "vne/errors.hpp"
#include "vne/lax_engine.hpp"
#include "vne/seed_factory.hpp"
#include "vne/symmetry_transforms.hpp"

namespace vtest {

using vne::Complex;
using vne::OperatorMatrix;
using vne::StateVector;

// mt19937_64 with the double conversion done by hand, so the streams are the
// same with every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    Complex complex_normal() { return {normal(), normal()}; }
    double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

  private:
    std::mt19937_64 gen_;
};

inline OperatorMatrix random_matrix(Rng& rng, int dim) {
    OperatorMatrix m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = rng.complex_normal();
    return m;
}

inline OperatorMatrix random_hermitian(Rng& rng, int dim) {
    const OperatorMatrix m = random_matrix(rng, dim);
    return 0.5 * (m + m.adjoint());
}

inline OperatorMatrix random_unitary(Rng& rng, int dim) {
    const OperatorMatrix m = random_matrix(rng, dim);
    Eigen::HouseholderQR<OperatorMatrix> qr(m);
    return qr.householderQ() * OperatorMatrix::Identity(dim, dim);
}

inline StateVector random_unit_vector(Rng& rng, int dim) {
    StateVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
    return v / v.norm();
}

// Matrix exponential oracle independent of the library: Hermitian generators
// through Eigen's self-adjoint solver, otherwise a Taylor series with scaling
// and squaring in long double.
inline OperatorMatrix exp_oracle(const OperatorMatrix& m) {
    using LMat = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
    const long double norm = static_cast<long double>(m.norm());
    int squarings = 0;
    while (norm / std::ldexp(1.0L, squarings) > 0.25L) ++squarings;
    LMat a = m.cast<std::complex<long double>>() / std::ldexp(1.0L, squarings);
    LMat term = LMat::Identity(m.rows(), m.cols());
    LMat sum = term;
    for (int k = 1; k < 40; ++k) {
        term = term * a / static_cast<long double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum.cast<Complex>();
}

inline OperatorMatrix exp_i_hermitian(const OperatorMatrix& h, double t) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h);
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) phases(i) = std::exp(Complex(0.0, t * es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Five-point stencil, written again here so the tests do not lean on the
// library's residual().
template <class F>
auto fd5(F&& f, double t, double h) {
    return ((f(t - 2 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2 * h)) / (12.0 * h)).eval();
}

// H(rho) summed directly from the definition.
inline OperatorMatrix hamiltonian_oracle(const OperatorMatrix& a, int n, const OperatorMatrix& rho) {
    OperatorMatrix h = OperatorMatrix::Zero(rho.rows(), rho.cols());
    for (int k = 0; k <= n; ++k) {
        OperatorMatrix left = OperatorMatrix::Identity(rho.rows(), rho.cols());
        OperatorMatrix right = left;
        for (int i = 0; i < n - k; ++i) left = left * a;
        for (int i = 0; i < k; ++i) right = right * a;
        h += left * rho * right;
    }
    return h;
}

inline double equation_residual_oracle(const OperatorMatrix& a, int n, const vne::RhoAt& rho_at,
                                       double t, double h) {
    const OperatorMatrix d = fd5(rho_at, t, h);
    const OperatorMatrix rho = rho_at(t);
    const OperatorMatrix ham = hamiltonian_oracle(a, n, rho);
    return (Complex(0, 1) * d - (ham * rho - rho * ham)).norm();
}

struct Scenario {
    std::string label;
    std::shared_ptr<const vne::SeedSolution> seed;
    vne::LaxRequest request;
};

inline std::vector<double> random_alphas(Rng& rng, int pairs) {
    std::vector<double> a;
    for (int j = 0; j < pairs; ++j) a.push_back(rng.uniform(0.4, 1.6) * rng.sign());
    return a;
}

inline vne::SeedSolution random_anticommuting(Rng& rng, int n, int pairs) {
    const std::vector<double> alphas = random_alphas(rng, pairs);
    std::vector<double> b;
    for (int j = 0; j < pairs; ++j) b.push_back(rng.uniform(0.3, 1.5) * rng.sign());
    return vne::make_anticommuting_seed(n, alphas, b);
}

inline vne::SeedSolution random_delta(Rng& rng, int blocks, double a) {
    std::vector<vne::DeltaBlock> bl;
    for (int j = 0; j < blocks; ++j) bl.push_back({rng.uniform(0.3, 1.5), rng.uniform(0.2, 1.0) * rng.sign()});
    return vne::make_delta_commuting_seed(bl, a);
}

inline vne::SeedSolution random_pure(Rng& rng, int n, int dim) {
    std::vector<Complex> d;
    for (int i = 0; i < dim; ++i) d.emplace_back(rng.uniform(-1.2, 1.2));
    const vne::ModelSpec spec(n, vne::diag(d));
    return vne::make_pure_state_seed(spec, random_unit_vector(rng, dim));
}

inline vne::SeedSolution random_commuting(Rng& rng, int n, int dim) {
    std::vector<Complex> a, r;
    for (int i = 0; i < dim; ++i) {
        a.emplace_back(rng.uniform(-1.2, 1.2));
        r.emplace_back(rng.uniform(-1.0, 1.0));
    }
    return vne::make_commuting_seed(vne::ModelSpec(n, vne::diag(a)), vne::diag(r));
}

inline Complex random_spectral(Rng& rng) {
    return {rng.uniform(-1.5, 1.5), rng.sign() * rng.uniform(0.4, 2.0)};
}

// Smallest |<chi|phi>| / (|chi| |phi|) over the sample times.
inline double min_overlap(const vne::LaxSolution& lax, const std::vector<double>& times) {
    double worst = 1.0;
    for (double t : times) {
        const StateVector phi = lax.phi_at(t);
        const StateVector chi = lax.chi_at(t);
        worst = std::min(worst, std::abs(vne::pairing(chi, phi)) / (phi.norm() * chi.norm()));
    }
    return worst;
}

// A seed drawn from every supported family (optionally conjugated by a random
// unitary or moved by a symmetry) and a random request. Candidates whose
// dressing comes close to the singular set on the sample times are redrawn.
inline Scenario random_scenario(Rng& rng, const std::vector<double>& times, bool hermitian,
                                bool with_lambda, int max_dim = 16) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const int kind = rng.integer(0, 4);
        const int n = rng.integer(1, 3);
        std::optional<vne::SeedSolution> seed;
        std::string label;
        try {
            switch (kind) {
                case 0:
                    seed = random_anticommuting(rng, n, rng.integer(1, max_dim / 2));
                    label = "anticommuting";
                    break;
                case 1:
                    seed = random_delta(rng, rng.integer(1, std::min(4, max_dim / 2)), rng.uniform(-1.5, 1.5));
                    label = "delta_commuting";
                    break;
                case 2:
                    seed = random_pure(rng, n, rng.integer(2, std::min(8, max_dim)));
                    label = "pure_state";
                    break;
                case 3:
                    seed = random_commuting(rng, n, rng.integer(2, std::min(8, max_dim)));
                    label = "commuting";
                    break;
                default:
                    seed = vne::rescale_seed(vne::shift_seed(random_anticommuting(rng, n, rng.integer(1, 3)),
                                                             rng.uniform(-1.0, 1.0)),
                                             rng.uniform(0.5, 1.5));
                    label = "frame";
                    break;
            }
            if (rng.uniform() < 0.5) {
                seed = vne::conjugate_seed(*seed, random_unitary(rng, static_cast<int>(seed->dim())));
                label += "/rotated";
            }
            label += "/n=" + std::to_string(seed->spec.order()) + "/dim=" + std::to_string(seed->dim());
            vne::LaxRequest req;
            req.mu = random_spectral(rng);
            if (!hermitian) req.nu = random_spectral(rng);
            if (with_lambda) req.lambda = random_spectral(rng);
            auto shared = std::make_shared<const vne::SeedSolution>(*seed);
            const vne::LaxSolution lax = vne::LaxSolution::solve(shared, req);
            if (min_overlap(lax, times) < 1e-2) continue;
            return Scenario{label + (hermitian ? "/hermitian" : "/general"), shared, req};
        } catch (const vne::VneError&) {
            continue;
        }
    }
    throw std::runtime_error("random_scenario: no valid candidate");
}

inline std::vector<double> grid(double lo, double hi, int samples) {
    std::vector<double> t;
    for (int i = 0; i < samples; ++i) t.push_back(lo + (hi - lo) * i / (samples - 1));
    return t;
}

}  // namespace vtest
