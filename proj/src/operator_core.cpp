#include "vne/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "vne/errors.hpp"

namespace vne {

namespace {

void require_square(const OperatorMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw DimensionMismatch(std::string(what) + ": matrix must be square and non-empty");
    }
}

double one_norm(const OperatorMatrix& m) {
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

std::string format_complex(Complex z) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

}  // namespace

OperatorMatrix identity(Eigen::Index dim) { return OperatorMatrix::Identity(dim, dim); }

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw DimensionMismatch("commutator: operands must be square of equal dimension");
    }
    return a * b - b * a;
}

double hermiticity_gap(const OperatorMatrix& m) { return (m - m.adjoint()).norm(); }

bool is_hermitian(const OperatorMatrix& m, double eps) {
    if (m.rows() != m.cols()) return false;
    return hermiticity_gap(m) <= eps * std::max(1.0, m.norm());
}

Complex pairing(const StateVector& chi, const StateVector& phi) {
    if (chi.size() != phi.size()) throw DimensionMismatch("pairing: length mismatch");
    return (chi.transpose() * phi)(0, 0);
}

OperatorMatrix mat_exp(const OperatorMatrix& m) {
    require_square(m, "mat_exp");
    if (!m.allFinite()) throw NumericalOverflow("mat_exp: non-finite input");

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    static constexpr double theta13 = 5.371920351148152;

    const Eigen::Index n = m.rows();
    const double norm1 = one_norm(m);
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    }
    if (squarings > 1000) throw NumericalOverflow("mat_exp: norm too large");

    const OperatorMatrix a = m * std::ldexp(1.0, -squarings);
    const OperatorMatrix id = identity(n);
    const OperatorMatrix a2 = a * a;
    const OperatorMatrix a4 = a2 * a2;
    const OperatorMatrix a6 = a4 * a2;

    const OperatorMatrix u_inner =
        a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    const OperatorMatrix u = a * u_inner;
    const OperatorMatrix v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    OperatorMatrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) {
        r = r * r;
        if (!r.allFinite()) throw NumericalOverflow("mat_exp: overflow while squaring");
    }
    if (!r.allFinite()) throw NumericalOverflow("mat_exp: overflow");
    return r;
}

HermitianEigen eig_hermitian(const OperatorMatrix& m, const Tolerances& tol) {
    require_square(m, "eig_hermitian");
    if (!is_hermitian(m, tol.hermitian_input)) {
        throw InvalidInput("eig_hermitian: input is not Hermitian");
    }
    const Eigen::Index n = m.rows();
    OperatorMatrix a = 0.5 * (m + m.adjoint());
    OperatorMatrix vecs = identity(n);
    const double scale = a.norm();

    auto off_mass = [&] {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    bool converged = off_mass() <= tol.jacobi_offdiag * scale;
    for (int sweep = 0; sweep < tol.jacobi_max_sweeps && !converged; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq_abs = std::abs(a(p, q));
                if (apq_abs == 0.0) continue;
                const Complex phase = a(p, q) / apq_abs;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * apq_abs);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]] acting on (p, q).
                const Complex gpp = c;
                const Complex gpq = s;
                const Complex gqp = -s * std::conj(phase);
                const Complex gqq = c * std::conj(phase);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * gpp + akq * gqp;
                    a(k, q) = akp * gpq + akq * gqq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
                    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex vkp = vecs(k, p);
                    const Complex vkq = vecs(k, q);
                    vecs(k, p) = vkp * gpp + vkq * gqp;
                    vecs(k, q) = vkp * gpq + vkq * gqq;
                }
            }
        }
        converged = off_mass() <= tol.jacobi_offdiag * scale;
    }
    if (!converged) throw InvalidInput("eig_hermitian: Jacobi sweeps did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        return a(i, i).real() < a(j, j).real();
    });

    HermitianEigen out{Eigen::VectorXd(n), OperatorMatrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src).real();
        out.vectors.col(k) = vecs.col(src);
    }
    return out;
}

namespace {

// Characteristic polynomial det(zI - H) of an upper Hessenberg matrix, lowest
// degree first, via the La Budde recurrence.
std::vector<Complex> hessenberg_charpoly(const OperatorMatrix& h) {
    const Eigen::Index n = h.rows();
    std::vector<std::vector<Complex>> p(static_cast<std::size_t>(n) + 1);
    p[0] = {Complex(1.0)};
    for (Eigen::Index k = 1; k <= n; ++k) {
        std::vector<Complex> next(static_cast<std::size_t>(k) + 1, Complex(0.0));
        const auto& prev = p[static_cast<std::size_t>(k - 1)];
        const Complex diag_entry = h(k - 1, k - 1);
        for (std::size_t j = 0; j < prev.size(); ++j) {
            next[j + 1] += prev[j];
            next[j] -= diag_entry * prev[j];
        }
        Complex subprod(1.0);
        for (Eigen::Index i = k - 1; i >= 1; --i) {
            subprod *= h(i, i - 1);
            const Complex coef = h(i - 1, k - 1) * subprod;
            const auto& lower = p[static_cast<std::size_t>(i - 1)];
            for (std::size_t j = 0; j < lower.size(); ++j) next[j] -= coef * lower[j];
        }
        p[static_cast<std::size_t>(k)] = std::move(next);
    }
    return p[static_cast<std::size_t>(n)];
}

// Aberth-Ehrlich simultaneous iteration for the roots of a monic polynomial.
std::vector<Complex> aberth_roots(const std::vector<Complex>& coeffs, double radius) {
    const std::size_t deg = coeffs.size() - 1;
    std::vector<Complex> z(deg);
    for (std::size_t k = 0; k < deg; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                                 static_cast<double>(deg) + 0.4;
        z[k] = radius * Complex(std::cos(angle), std::sin(angle));
    }
    std::vector<bool> done(deg, false);
    for (int iter = 0; iter < 2000; ++iter) {
        bool all_done = true;
        for (std::size_t k = 0; k < deg; ++k) {
            if (done[k]) continue;
            Complex p = coeffs[deg];
            Complex dp = 0.0;
            for (std::size_t j = deg; j-- > 0;) {
                dp = dp * z[k] + p;
                p = p * z[k] + coeffs[j];
            }
            if (p == Complex(0.0)) {
                done[k] = true;
                continue;
            }
            const Complex ratio = p / dp;
            Complex repulsion = 0.0;
            for (std::size_t j = 0; j < deg; ++j) {
                if (j != k) repulsion += 1.0 / (z[k] - z[j]);
            }
            const Complex w = ratio / (1.0 - ratio * repulsion);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
                done[k] = true;
                continue;
            }
            z[k] -= w;
            if (std::abs(w) <= 1e-16 * std::max(radius, std::abs(z[k]))) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if (all_done) break;
    }
    return z;
}

// Newton on f(z) = det(zI - M): z <- z - m / Tr((zI - M)^{-1}) with m the
// assumed multiplicity.
Complex newton_det_polish(const OperatorMatrix& m, Complex z, double multiplicity, double scale,
                          int max_iter) {
    const OperatorMatrix id = identity(m.rows());
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::PartialPivLU<OperatorMatrix> lu(z * id - m);
        const OperatorMatrix inv = lu.inverse();
        if (!inv.allFinite()) break;
        const Complex trace = inv.trace();
        if (trace == Complex(0.0)) break;
        const Complex step = multiplicity / trace;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        if (std::abs(step) > 1e-2 * scale) break;
        z -= step;
        if (std::abs(step) <= 1e-15 * scale) break;
    }
    return z;
}

}  // namespace

std::vector<Complex> characteristic_roots(const OperatorMatrix& m) {
    require_square(m, "characteristic_roots");
    const Eigen::Index n = m.rows();
    const double norm = m.norm();
    if (norm == 0.0) return std::vector<Complex>(static_cast<std::size_t>(n), Complex(0.0));
    if (n == 1) return {m(0, 0)};

    const double scale = std::max(1.0, norm);
    Eigen::HessenbergDecomposition<OperatorMatrix> hess(m);
    const OperatorMatrix h = hess.matrixH();
    const auto coeffs = hessenberg_charpoly(h);
    auto roots = aberth_roots(coeffs, norm);

    for (auto& z : roots) z = newton_det_polish(m, z, 1.0, scale, 60);

    // Single-link clustering of numerically coincident roots.
    const double cluster_tol = 1e-6 * scale;
    const std::size_t count = roots.size();
    std::vector<int> label(count, -1);
    int next_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (label[i] >= 0) continue;
        label[i] = next_label;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < count; ++j) {
                if (label[j] < 0 && std::abs(roots[j] - roots[cur]) <= cluster_tol) {
                    label[j] = next_label;
                    stack.push_back(j);
                }
            }
        }
        ++next_label;
    }
    std::vector<Complex> out;
    out.reserve(count);
    for (int c = 0; c < next_label; ++c) {
        Complex sum = 0.0;
        int mult = 0;
        for (std::size_t j = 0; j < count; ++j) {
            if (label[j] == c) {
                sum += roots[j];
                ++mult;
            }
        }
        Complex mean = sum / static_cast<double>(mult);
        if (mult > 1) mean = newton_det_polish(m, mean, mult, scale, 8);
        for (int k = 0; k < mult; ++k) out.push_back(mean);
    }
    return out;
}

StateVector canonical_phase(const StateVector& v) {
    const double norm = v.norm();
    if (norm == 0.0) throw InvalidInput("canonical_phase: zero vector");
    StateVector u = v / norm;
    const double biggest = u.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (std::abs(u(i)) > 1e-8 * biggest) {
            u *= std::conj(u(i)) / std::abs(u(i));
            u(i) = std::abs(u(i));
            break;
        }
    }
    return u;
}

EigenPair eig_pair_general(const OperatorMatrix& m, std::optional<Complex> pin,
                           const Tolerances& tol) {
    require_square(m, "eig_pair_general");
    if (m.rows() > tol.eigpair_max_dim) {
        throw UnsupportedScenario("eig_pair_general: dimension " + std::to_string(m.rows()) +
                                  " exceeds the cap of " + std::to_string(tol.eigpair_max_dim));
    }
    if (!m.allFinite()) throw InvalidInput("eig_pair_general: non-finite input");
    const double scale = std::max(1.0, m.norm());
    const auto roots = characteristic_roots(m);

    Complex z;
    if (pin) {
        auto best = std::min_element(roots.begin(), roots.end(), [&](Complex a, Complex b) {
            return std::abs(a - *pin) < std::abs(b - *pin);
        });
        if (std::abs(*best - *pin) > tol.root_pin * scale) {
            throw InvalidInput("eig_pair_general: pinned value " + format_complex(*pin) +
                               " is not an eigenvalue");
        }
        z = *best;
    } else {
        double max_re = -std::numeric_limits<double>::infinity();
        for (Complex r : roots) max_re = std::max(max_re, r.real());
        const double tie = tol.root_tie * scale;
        bool found = false;
        for (Complex r : roots) {
            if (r.real() >= max_re - tie && (!found || r.imag() > z.imag())) {
                z = r;
                found = true;
            }
        }
    }

    const OperatorMatrix shifted = m - z * identity(m.rows());
    const double bound = tol.eigpair_residual * m.norm();
    for (double threshold : {1e-13, 1e-11, 1e-9, 1e-7}) {
        Eigen::FullPivLU<OperatorMatrix> lu(shifted);
        lu.setThreshold(threshold);
        const OperatorMatrix kernel = lu.kernel();
        if (kernel.cols() == 0 || kernel.col(0).norm() == 0.0) continue;
        StateVector v = canonical_phase(kernel.col(0));
        if ((m * v - z * v).norm() <= bound) return {z, v};
    }
    throw DefectiveEigenpair("eig_pair_general: no eigenvector within tolerance for z = " +
                             format_complex(z));
}

std::vector<Complex> trace_moments(const OperatorMatrix& m, int kmax) {
    require_square(m, "trace_moments");
    if (kmax < 1) throw InvalidInput("trace_moments: kmax must be >= 1");
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(kmax));
    OperatorMatrix power = m;
    out.push_back(power.trace());
    for (int k = 2; k <= kmax; ++k) {
        power = power * m;
        out.push_back(power.trace());
    }
    return out;
}

OperatorMatrix make_matrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw DimensionMismatch("make_matrix: empty");
    const auto cols = static_cast<Eigen::Index>(rows.begin()->size());
    OperatorMatrix out(n, cols);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw DimensionMismatch("make_matrix: ragged rows");
        }
        Eigen::Index j = 0;
        for (Complex v : row) out(i, j++) = v;
        ++i;
    }
    return out;
}

OperatorMatrix diag(std::span<const Complex> entries) {
    const auto n = static_cast<Eigen::Index>(entries.size());
    OperatorMatrix out = OperatorMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out(i, i) = entries[static_cast<std::size_t>(i)];
    return out;
}

OperatorMatrix diag(std::initializer_list<Complex> entries) {
    return diag(std::span<const Complex>(entries.begin(), entries.size()));
}

}  // namespace vne
