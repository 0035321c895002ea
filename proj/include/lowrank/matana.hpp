#pragma once

// Matrix-analytic core: SVD, rank-k hard thresholding, norms and sign vectors.

#include <Eigen/Dense>

#include <iosfwd>
#include <string_view>

namespace lowrank {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD Z = U diag(sigma) V^T with k = min(rows, cols).
struct SvdFactors {
  Matrix left;    // rows x k, orthonormal columns
  Vector values;  // nonincreasing, nonnegative
  Matrix right;   // cols x k, orthonormal columns

  Index size() const { return values.size(); }
};

/// Throws ParameterError unless Z has at least one row and column and all
/// entries are finite. `what` names the argument in the message.
void require_valid(const Matrix& z, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

/// Full (thin) SVD computed by one-sided Jacobi rotations. Deterministic for a
/// fixed input on a fixed build; throws NumericalError if the decomposition
/// does not converge.
SvdFactors svd(const Matrix& z);

/// Best approximation of rank at most k: the first k singular triples of svd(z).
/// Under ties sigma_k == sigma_{k+1} the triples are taken in decomposition order.
Matrix hard_threshold(const Matrix& z, Index k);
Matrix hard_threshold(const SvdFactors& factors, Index k);

/// 1 + sqrt(8 / (kappa + 1)); requires kappa >= 1.
double eta(double kappa);

/// Componentwise sign with sgn(0) = 0.
Vector sign_vector(const Vector& u);

/// <A, B>_F = trace(A^T B).
double frobenius_inner(const Matrix& a, const Matrix& b);

/// Row-major CSV, one matrix row per line, 17 significant digits, no header.
void write_matrix_csv(std::ostream& out, const Matrix& z);
Matrix read_matrix_csv(std::istream& in);

}  // namespace lowrank
