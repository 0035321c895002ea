#include "lowrank/measure.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "lowrank/csv.hpp"
#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_positive(Index n1, Index n2, Index m) {
  if (n1 < 1 || n2 < 1 || m < 1) {
    throw ParameterError("measurement map: N1, N2 and m must all be >= 1");
  }
}

std::string_view to_string(MeasurementMap::Variant v) {
  return v == MeasurementMap::Variant::rank_one ? "rank_one" : "dense";
}

}  // namespace

std::string_view to_string(Distribution dist) {
  switch (dist) {
    case Distribution::gaussian: return "gaussian";
    case Distribution::laplace: return "laplace";
    case Distribution::custom: return "custom";
  }
  return "custom";
}

Distribution parse_distribution(std::string_view label) {
  if (label == "gaussian") return Distribution::gaussian;
  if (label == "laplace") return Distribution::laplace;
  if (label == "custom") return Distribution::custom;
  throw ParameterError("unknown distribution '" + std::string(label) + "'");
}

MeasurementMap MeasurementMap::from_rank_one(Matrix left, Matrix right, RngSeed seed,
                                             Distribution dist) {
  require_positive(left.cols(), right.cols(), left.rows());
  if (left.rows() != right.rows()) {
    throw ParameterError("rank-one map: a and b must have the same number of rows");
  }
  if (!left.allFinite() || !right.allFinite()) {
    throw ParameterError("rank-one map: non-finite vector entries");
  }
  MeasurementMap map;
  map.variant_ = Variant::rank_one;
  map.n1_ = left.cols();
  map.n2_ = right.cols();
  map.m_ = left.rows();
  map.seed_ = seed;
  map.dist_ = dist;
  map.left_ = std::move(left);
  map.right_ = std::move(right);
  return map;
}

MeasurementMap MeasurementMap::from_dense(Index n1, Index n2, Matrix coefficients, RngSeed seed,
                                          Distribution dist) {
  require_positive(n1, n2, coefficients.rows());
  if (coefficients.cols() != n1 * n2) {
    throw ParameterError("dense map: coefficient array must have N1*N2 columns");
  }
  if (!coefficients.allFinite()) {
    throw ParameterError("dense map: non-finite coefficients");
  }
  MeasurementMap map;
  map.variant_ = Variant::dense;
  map.n1_ = n1;
  map.n2_ = n2;
  map.m_ = coefficients.rows();
  map.seed_ = seed;
  map.dist_ = dist;
  map.coefficients_ = std::move(coefficients);
  return map;
}

Vector MeasurementMap::apply(const Matrix& z) const {
  if (z.rows() != n1_ || z.cols() != n2_) {
    throw ParameterError("apply: matrix is " + std::to_string(z.rows()) + "x" +
                         std::to_string(z.cols()) + ", map domain is " + std::to_string(n1_) +
                         "x" + std::to_string(n2_));
  }
  if (variant_ == Variant::rank_one) {
    // (a_i^T Z) . b_i for every i at once.
    return (left_ * z).cwiseProduct(right_).rowwise().sum();
  }
  const RowMajorMatrix row_major = z;
  return coefficients_ * Eigen::Map<const Vector>(row_major.data(), row_major.size());
}

Matrix MeasurementMap::adjoint(const Vector& u) const {
  if (u.size() != m_) {
    throw ParameterError("adjoint: vector has length " + std::to_string(u.size()) +
                         ", map has m = " + std::to_string(m_));
  }
  if (variant_ == Variant::rank_one) {
    return left_.transpose() * u.asDiagonal() * right_;
  }
  const Vector flat = coefficients_.transpose() * u;
  return Eigen::Map<const RowMajorMatrix>(flat.data(), n1_, n2_);
}

Matrix MeasurementMap::as_dense() const {
  if (variant_ == Variant::dense) return coefficients_;
  Matrix out(m_, n1_ * n2_);
  for (Index i = 0; i < m_; ++i) {
    for (Index k = 0; k < n1_; ++k) {
      out.row(i).segment(k * n2_, n2_) = left_(i, k) * right_.row(i);
    }
  }
  return out;
}

MeasurementMap make_rank_one_map(Index n1, Index n2, Index m, RngSeed seed) {
  require_positive(n1, n2, m);
  Rng rng(seed);
  Matrix left(m, n1);
  Matrix right(m, n2);
  for (Index i = 0; i < m; ++i) {
    for (Index k = 0; k < n1; ++k) left(i, k) = rng.normal();
    for (Index l = 0; l < n2; ++l) right(i, l) = rng.normal();
  }
  return MeasurementMap::from_rank_one(std::move(left), std::move(right), seed,
                                       Distribution::gaussian);
}

MeasurementMap make_dense_map(Index n1, Index n2, Index m, Distribution dist, RngSeed seed) {
  require_positive(n1, n2, m);
  if (dist == Distribution::custom) {
    throw ParameterError("make_dense_map: distribution must be gaussian or laplace");
  }
  Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  const double laplace_scale = sd / std::sqrt(2.0);
  Matrix coefficients(m, n1 * n2);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n1 * n2; ++j) {
      coefficients(i, j) = dist == Distribution::gaussian ? sd * rng.normal()
                                                          : rng.laplace(laplace_scale);
    }
  }
  return MeasurementMap::from_dense(n1, n2, std::move(coefficients), seed, dist);
}

void write_map(std::ostream& out, const MeasurementMap& map) {
  out << to_string(map.variant()) << ' ' << map.n1() << ' ' << map.n2() << ' ' << map.m() << ' '
      << map.seed().value << ' ' << to_string(map.distribution()) << '\n';
  for (Index i = 0; i < map.m(); ++i) {
    std::vector<std::string> fields;
    if (map.variant() == MeasurementMap::Variant::rank_one) {
      for (Index k = 0; k < map.n1(); ++k) fields.push_back(csv::format(map.left_vectors()(i, k)));
      for (Index l = 0; l < map.n2(); ++l) fields.push_back(csv::format(map.right_vectors()(i, l)));
    } else {
      for (Index j = 0; j < map.coefficients().cols(); ++j) {
        fields.push_back(csv::format(map.coefficients()(i, j)));
      }
    }
    out << csv::join(fields) << '\n';
  }
}

MeasurementMap read_map(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParameterError("read_map: missing header line");
  std::istringstream fields(header);
  std::string variant;
  std::string dist;
  Index n1 = 0;
  Index n2 = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  if (!(fields >> variant >> n1 >> n2 >> m >> seed >> dist)) {
    throw ParameterError("read_map: malformed header '" + header + "'");
  }
  require_positive(n1, n2, m);
  const Distribution distribution = parse_distribution(dist);
  const bool rank_one = variant == "rank_one";
  if (!rank_one && variant != "dense") {
    throw ParameterError("read_map: unknown variant '" + variant + "'");
  }
  const Index width = rank_one ? n1 + n2 : n1 * n2;
  Matrix payload(m, width);
  std::string line;
  for (Index i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw ParameterError("read_map: truncated payload");
    const auto row = csv::parse_row(line);
    if (static_cast<Index>(row.size()) != width) {
      throw ParameterError("read_map: payload row " + std::to_string(i) + " has " +
                           std::to_string(row.size()) + " fields, expected " +
                           std::to_string(width));
    }
    for (Index j = 0; j < width; ++j) payload(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (rank_one) {
    return MeasurementMap::from_rank_one(payload.leftCols(n1), payload.rightCols(n2),
                                         RngSeed{seed}, distribution);
  }
  return MeasurementMap::from_dense(n1, n2, std::move(payload), RngSeed{seed}, distribution);
}

}  // namespace lowrank
