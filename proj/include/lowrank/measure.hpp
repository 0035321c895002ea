#pragma once

// Linear measurement maps A: R^{N1 x N2} -> R^m and their adjoints.

#include <iosfwd>
#include <string>
#include <string_view>

#include "lowrank/matana.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

enum class Distribution { gaussian, laplace, custom };

std::string_view to_string(Distribution dist);
/// Accepts "gaussian", "laplace", "custom"; throws ParameterError otherwise.
Distribution parse_distribution(std::string_view label);

/// Immutable measurement map. Two variants:
///
///  - rank_one: A(Z)_i = a_i^T Z b_i. Only the vectors a_i, b_i are stored
///    (m x (N1 + N2) reals); the m x N1*N2 matrix is never formed.
///  - dense:    A(Z)_i = sum_{k,l} C_{i, k*N2 + l} Z_{k,l}, i.e. row i of the
///    coefficient array dotted with the row-major vectorization of Z.
///
/// The adjoint satisfies <adjoint(u), Z>_F = <u, apply(Z)>; for rank_one it is
/// sum_i u_i a_i b_i^T.
class MeasurementMap {
 public:
  enum class Variant { rank_one, dense };

  /// Rows of `left` are a_i (m x N1), rows of `right` are b_i (m x N2).
  static MeasurementMap from_rank_one(Matrix left, Matrix right, RngSeed seed = {},
                                      Distribution dist = Distribution::custom);
  /// `coefficients` is m x (N1*N2) in row-major vectorization order.
  static MeasurementMap from_dense(Index n1, Index n2, Matrix coefficients, RngSeed seed = {},
                                   Distribution dist = Distribution::custom);

  Variant variant() const { return variant_; }
  Index n1() const { return n1_; }
  Index n2() const { return n2_; }
  Index m() const { return m_; }
  RngSeed seed() const { return seed_; }
  Distribution distribution() const { return dist_; }

  const Matrix& left_vectors() const { return left_; }
  const Matrix& right_vectors() const { return right_; }
  const Matrix& coefficients() const { return coefficients_; }

  Vector apply(const Matrix& z) const;
  Matrix adjoint(const Vector& u) const;

  /// m x (N1*N2) matrix of the map in row-major vectorization; materializes
  /// rank_one maps, so only meant for small dimensions.
  Matrix as_dense() const;

 private:
  MeasurementMap() = default;

  Variant variant_ = Variant::rank_one;
  Index n1_ = 0;
  Index n2_ = 0;
  Index m_ = 0;
  RngSeed seed_{};
  Distribution dist_ = Distribution::custom;
  Matrix left_;
  Matrix right_;
  Matrix coefficients_;
};

/// a_i, b_i i.i.d. standard normal. For each i, the N1 entries of a_i are drawn
/// before the N2 entries of b_i.
MeasurementMap make_rank_one_map(Index n1, Index n2, Index m, RngSeed seed);

/// Entries i.i.d. with mean zero and variance exactly 1/m, drawn row by row.
/// Laplace entries use scale 1/sqrt(2m).
MeasurementMap make_dense_map(Index n1, Index n2, Index m, Distribution dist, RngSeed seed);

inline Vector apply(const MeasurementMap& map, const Matrix& z) { return map.apply(z); }
inline Matrix adjoint(const MeasurementMap& map, const Vector& u) { return map.adjoint(u); }

/// Text format: header line `variant N1 N2 m seed dist`, then m CSV rows.
/// rank_one rows hold a_i followed by b_i; dense rows hold one coefficient row.
void write_map(std::ostream& out, const MeasurementMap& map);
MeasurementMap read_map(std::istream& in);

}  // namespace lowrank
