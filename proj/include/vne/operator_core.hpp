#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vne/tolerances.hpp"

namespace vne {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
/// Column vector. Kets are stored as-is; bras are stored by their row entries,
/// so <chi|phi> is the plain (unconjugated) product sum_i chi_i phi_i.
using StateVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

OperatorMatrix identity(Eigen::Index dim);

/// AB - BA.
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// |M - M^dagger|_F.
double hermiticity_gap(const OperatorMatrix& m);

/// |M - M^dagger|_F <= eps * max(1, |M|_F).
bool is_hermitian(const OperatorMatrix& m, double eps);

/// sum_i chi_i phi_i, the pairing of a bra (row entries) with a ket.
Complex pairing(const StateVector& chi, const StateVector& phi);

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant. Throws NumericalOverflow instead of returning infinities.
OperatorMatrix mat_exp(const OperatorMatrix& m);

struct HermitianEigen {
    Eigen::VectorXd values;   // ascending
    OperatorMatrix vectors;   // orthonormal columns, vectors.col(i) <-> values(i)
};

/// Cyclic complex Jacobi. Requires is_hermitian(m, tol.hermitian_input).
HermitianEigen eig_hermitian(const OperatorMatrix& m,
                             const Tolerances& tol = default_tolerances());

struct EigenPair {
    Complex z;
    StateVector v;  // unit norm, first significant component real positive
};

/// All roots of det(zI - M), found on the characteristic polynomial of the
/// Hessenberg form and polished by Newton steps on det(zI - M) through LU.
/// Near-coincident roots are replaced by their cluster mean.
std::vector<Complex> characteristic_roots(const OperatorMatrix& m);

/// One eigenpair of a general square matrix.
///
/// Without a pin the root maximizing (Re z, then Im z) is taken; real parts
/// within tol.root_tie * max(1, |M|_F) count as tied. With a pin the nearest
/// root is taken and must lie within tol.root_pin * max(1, |M|_F). The
/// eigenvector is the null vector of M - zI attached to the first free column
/// of a completely pivoted elimination, so degenerate eigenspaces resolve the
/// same way on every run.
EigenPair eig_pair_general(const OperatorMatrix& m, std::optional<Complex> pin = std::nullopt,
                           const Tolerances& tol = default_tolerances());

/// (Tr M, Tr M^2, ..., Tr M^kmax).
std::vector<Complex> trace_moments(const OperatorMatrix& m, int kmax);

/// Normalizes to unit norm with the first component above 1e-8 (relative)
/// made real positive.
StateVector canonical_phase(const StateVector& v);

/// Row-major dense construction helper: rows of equal length.
OperatorMatrix make_matrix(std::initializer_list<std::initializer_list<Complex>> rows);

OperatorMatrix diag(std::span<const Complex> entries);
OperatorMatrix diag(std::initializer_list<Complex> entries);

}  // namespace vne
