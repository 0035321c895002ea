#include "lowrank/matana.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "lowrank/csv.hpp"
#include "lowrank/errors.hpp"

namespace lowrank {

void require_valid(const Matrix& z, std::string_view what) {
  if (z.rows() < 1 || z.cols() < 1) {
    throw ParameterError(std::string(what) + ": matrix must have at least one row and column");
  }
  if (!z.allFinite()) {
    throw ParameterError(std::string(what) + ": matrix has non-finite entries");
  }
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw ParameterError(std::string(what) + ": vector has non-finite entries");
  }
}

SvdFactors svd(const Matrix& z) {
  require_valid(z, "svd");
  Eigen::JacobiSVD<Matrix> decomposition(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (decomposition.info() != Eigen::Success) {
    throw NumericalError("svd: Jacobi SVD failed");
  }
  SvdFactors factors{decomposition.matrixU(), decomposition.singularValues(),
                     decomposition.matrixV()};
  if (!factors.left.allFinite() || !factors.values.allFinite() || !factors.right.allFinite()) {
    throw NumericalError("svd: decomposition produced non-finite factors");
  }
  return factors;
}

Matrix hard_threshold(const SvdFactors& factors, Index k) {
  if (k < 0 || k > factors.size()) {
    throw ParameterError("hard_threshold: rank " + std::to_string(k) + " outside [0, " +
                         std::to_string(factors.size()) + "]");
  }
  const auto u = factors.left.leftCols(k);
  const auto v = factors.right.leftCols(k);
  return u * factors.values.head(k).asDiagonal() * v.transpose();
}

Matrix hard_threshold(const Matrix& z, Index k) {
  require_valid(z, "hard_threshold");
  const Index full = std::min(z.rows(), z.cols());
  if (k < 0 || k > full) {
    throw ParameterError("hard_threshold: rank " + std::to_string(k) + " outside [0, " +
                         std::to_string(full) + "]");
  }
  if (k == 0) return Matrix::Zero(z.rows(), z.cols());
  return hard_threshold(svd(z), k);
}

double eta(double kappa) {
  if (!(kappa >= 1.0)) {
    throw ParameterError("eta: kappa must be >= 1");
  }
  return 1.0 + std::sqrt(8.0 / (kappa + 1.0));
}

Vector sign_vector(const Vector& u) {
  require_finite(u, "sign_vector");
  return u.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ParameterError("frobenius_inner: dimension mismatch");
  }
  return a.cwiseProduct(b).sum();
}

void write_matrix_csv(std::ostream& out, const Matrix& z) {
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.cols(); ++j) {
      if (j > 0) out << ',';
      out << csv::format(z(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(csv::parse_row(line));
    if (rows.back().size() != rows.front().size()) {
      throw ParameterError("read_matrix_csv: ragged row " + std::to_string(rows.size()));
    }
  }
  if (rows.empty()) throw ParameterError("read_matrix_csv: no rows");
  Matrix z(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.cols(); ++j) z(i, j) = rows[i][j];
  }
  require_valid(z, "read_matrix_csv");
  return z;
}

}  // namespace lowrank
