#include "lowrank/rripcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "lowrank/csv.hpp"
#include "lowrank/errors.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace lowrank {

namespace {

// Calls visit(x) for every point x of a hyperspherical angle grid on the unit
// sphere of R^dim: polar angles take `steps` values in [0, pi], the azimuth
// 2 * steps values in [0, 2 pi).
void for_each_sphere_point(Index dim, int steps, const std::function<void(const Vector&)>& visit) {
  Vector x(dim);
  if (dim == 1) {
    x(0) = 1.0;
    visit(x);
    return;
  }
  const int azimuth_steps = 2 * steps;
  std::function<void(Index, double)> recurse = [&](Index level, double radius) {
    if (level == dim - 2) {
      for (int j = 0; j < azimuth_steps; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / azimuth_steps;
        x(level) = radius * std::cos(phi);
        x(level + 1) = radius * std::sin(phi);
        visit(x);
      }
      return;
    }
    for (int j = 0; j < steps; ++j) {
      const double phi = std::numbers::pi * j / (steps - 1);
      x(level) = radius * std::cos(phi);
      recurse(level + 1, radius * std::sin(phi));
    }
  };
  recurse(0, 1.0);
}

IsometryConstants from_extremes(double lo, double hi) {
  IsometryConstants c{lo, hi, 0.0};
  c.gamma = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return c;
}

void require_rank(Index n1, Index n2, Index rank, std::string_view who) {
  if (rank < 1 || rank > std::min(n1, n2)) {
    throw ParameterError(std::string(who) + ": rank must lie in [1, min(N1,N2)]");
  }
}

}  // namespace

Matrix sample_rank_r(Index n1, Index n2, Index rank, RngSeed seed) {
  if (n1 < 1 || n2 < 1) throw ParameterError("sample_rank_r: N1, N2 must be >= 1");
  require_rank(n1, n2, rank, "sample_rank_r");
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, 1, attempt));
    Matrix g1(n1, rank);
    Matrix g2(n2, rank);
    for (Index i = 0; i < n1; ++i) {
      for (Index j = 0; j < rank; ++j) g1(i, j) = rng.normal();
    }
    for (Index i = 0; i < n2; ++i) {
      for (Index j = 0; j < rank; ++j) g2(i, j) = rng.normal();
    }
    Matrix z = g1 * g2.transpose();
    const double norm = z.norm();
    if (norm > 0.0) return z / norm;
  }
}

RripEstimate estimate_constants(const MeasurementMap& map, Index rank, int n_samples,
                                RngSeed seed, bool keep_samples, int workers) {
  require_rank(map.n1(), map.n2(), rank, "estimate_constants");
  if (n_samples < 2) throw ParameterError("estimate_constants: need at least 2 samples");

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  detail::parallel_for(values.size(), workers, [&](std::size_t k) {
    const Matrix z = sample_rank_r(map.n1(), map.n2(), rank, derive_seed(seed, 0, k));
    values[k] = map.apply(z).lpNorm<1>();
  });

  RripEstimate estimate;
  estimate.order = static_cast<int>(rank);
  estimate.n_samples = n_samples;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  estimate.alpha_hat = *lo;
  estimate.beta_hat = *hi;
  estimate.gamma_hat = estimate.alpha_hat > 0.0 ? estimate.beta_hat / estimate.alpha_hat
                                                : std::numeric_limits<double>::infinity();
  if (keep_samples) estimate.sample_l1_values = std::move(values);
  return estimate;
}

IsometryConstants exact_constants_full_order(const MeasurementMap& map) {
  const Matrix c = map.as_dense();
  const Index m = c.rows();
  const Index d = c.cols();
  if (m > 24) throw ParameterError("exact_constants_full_order: m must be <= 24");

  // beta: max over w in {-1,1}^m of ||C^T w||_2; w and -w agree, so fix w_0 = 1.
  // Gray-code walk, recomputing from scratch periodically to bound drift.
  double beta = 0.0;
  {
    const std::uint64_t count = std::uint64_t{1} << (m - 1);
    Vector w = Vector::Ones(m);
    Vector v = c.transpose() * w;
    beta = v.norm();
    for (std::uint64_t k = 1; k < count; ++k) {
      const int bit = std::countr_zero(k);
      const Index row = bit + 1;
      w(row) = -w(row);
      if ((k & 4095u) == 0) {
        v = c.transpose() * w;
      } else {
        v += 2.0 * w(row) * c.row(row).transpose();
      }
      beta = std::max(beta, v.norm());
    }
  }

  if (d == 1) return from_extremes(c.col(0).lpNorm<1>(), beta);

  const Eigen::JacobiSVD<Matrix> whole(c);
  const double scale = whole.singularValues()(0);
  if (m < d || !(whole.singularValues()(d - 1) > 1e-12 * scale)) {
    return from_extremes(0.0, beta);
  }

  // alpha: vertices of {z : ||C z||_1 <= 1} have d - 1 independent zero rows.
  const Index k = d - 1;
  double alpha = std::numeric_limits<double>::infinity();
  std::vector<Index> subset(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
  Matrix rows(k, d);
  while (true) {
    for (Index i = 0; i < k; ++i) rows.row(i) = c.row(subset[static_cast<std::size_t>(i)]);
    const Eigen::JacobiSVD<Matrix> part(rows, Eigen::ComputeFullV);
    const auto& sv = part.singularValues();
    if (sv(k - 1) > 1e-10 * scale) {
      const Vector z = part.matrixV().col(d - 1);
      alpha = std::min(alpha, (c * z).lpNorm<1>() / z.norm());
    }
    // Next combination in lexicographic order.
    Index pos = k - 1;
    while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
    if (pos < 0) break;
    ++subset[static_cast<std::size_t>(pos)];
    for (Index i = pos + 1; i < k; ++i) {
      subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return from_extremes(alpha, beta);
}

namespace {

// Unit vectors orthogonal to some (n - 1)-subset of the rows of `rows` whose
// span has dimension n - 1. For n == 1 the single candidate is (1).
std::vector<Vector> vertex_directions(const Matrix& rows) {
  const Index m = rows.rows();
  const Index n = rows.cols();
  if (n == 1) return {Vector::Ones(1)};
  const Index k = n - 1;
  const double scale = std::max(rows.norm(), std::numeric_limits<double>::min());
  std::vector<Vector> out;
  if (m < k) return out;
  std::vector<Index> subset(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
  Matrix part(k, n);
  while (true) {
    for (Index i = 0; i < k; ++i) part.row(i) = rows.row(subset[static_cast<std::size_t>(i)]);
    const Eigen::JacobiSVD<Matrix> s(part, Eigen::ComputeFullV);
    if (s.singularValues()(k - 1) > 1e-10 * scale) out.push_back(s.matrixV().col(n - 1));
    Index pos = k - 1;
    while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
    if (pos < 0) break;
    ++subset[static_cast<std::size_t>(pos)];
    for (Index i = pos + 1; i < k; ++i) {
      subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return out;
}

}  // namespace

IsometryConstants exact_constants_rank_one(const MeasurementMap& map) {
  if (map.variant() != MeasurementMap::Variant::rank_one) {
    throw ParameterError("exact_constants_rank_one: needs a rank_one map");
  }
  const Index m = map.m();
  if (m > 24) throw ParameterError("exact_constants_rank_one: m must be <= 24");
  const Matrix& a = map.left_vectors();
  const Matrix& b = map.right_vectors();

  double beta = 0.0;
  {
    const std::uint64_t count = std::uint64_t{1} << (m - 1);
    Vector w = Vector::Ones(m);
    Matrix sum = a.transpose() * b;
    const auto spectral = [](const Matrix& z) {
      return Eigen::JacobiSVD<Matrix>(z).singularValues()(0);
    };
    beta = spectral(sum);
    for (std::uint64_t k = 1; k < count; ++k) {
      const Index row = std::countr_zero(k) + 1;
      w(row) = -w(row);
      if ((k & 4095u) == 0) {
        sum = a.transpose() * w.asDiagonal() * b;
      } else {
        sum += 2.0 * w(row) * a.row(row).transpose() * b.row(row);
      }
      beta = std::max(beta, spectral(sum));
    }
  }

  const auto us = vertex_directions(a);
  const auto vs = vertex_directions(b);
  double alpha = us.empty() || vs.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  std::vector<Vector> b_abs;
  b_abs.reserve(vs.size());
  for (const auto& v : vs) b_abs.push_back((b * v).cwiseAbs());
  for (const auto& u : us) {
    const Vector a_abs = (a * u).cwiseAbs();
    for (const auto& bv : b_abs) alpha = std::min(alpha, a_abs.dot(bv));
  }
  return from_extremes(alpha, beta);
}

IsometryConstants grid_constants_full_order(const MeasurementMap& map, int steps) {
  const Index d = map.n1() * map.n2();
  if (d > 6) throw ParameterError("grid_constants_full_order: N1*N2 must be <= 6");
  if (steps < 2) throw ParameterError("grid_constants_full_order: steps must be >= 2");
  const Matrix c = map.as_dense();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for_each_sphere_point(d, steps, [&](const Vector& z) {
    const double value = (c * z).lpNorm<1>();
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  });
  return from_extremes(lo, hi);
}

IsometryConstants grid_constants_rank_one(const MeasurementMap& map, int steps) {
  if ((map.n1() - 1) + (map.n2() - 1) > 4) {
    throw ParameterError("grid_constants_rank_one: (N1 - 1) + (N2 - 1) must be <= 4");
  }
  if (steps < 2) throw ParameterError("grid_constants_rank_one: steps must be >= 2");
  std::vector<Vector> right_points;
  for_each_sphere_point(map.n2(), steps, [&](const Vector& v) { right_points.push_back(v); });
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const auto record = [&](double value) {
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  };
  if (map.variant() == MeasurementMap::Variant::rank_one) {
    // ||A(u v^T)||_1 = sum_i |a_i . u| |b_i . v|
    std::vector<Vector> right_abs;
    right_abs.reserve(right_points.size());
    for (const auto& v : right_points) right_abs.push_back((map.right_vectors() * v).cwiseAbs());
    for_each_sphere_point(map.n1(), steps, [&](const Vector& u) {
      const Vector left_abs = (map.left_vectors() * u).cwiseAbs();
      for (const auto& b : right_abs) record(left_abs.dot(b));
    });
  } else {
    for_each_sphere_point(map.n1(), steps, [&](const Vector& u) {
      for (const auto& v : right_points) record(map.apply(u * v.transpose()).lpNorm<1>());
    });
  }
  return from_extremes(lo, hi);
}

std::vector<CurveRow> concentration_curve(Distribution dist, Index n, Index rank,
                                          const std::vector<Index>& m_values, int trials,
                                          RngSeed seed, int n_samples, int workers) {
  if (m_values.empty()) throw ParameterError("concentration_curve: m_values is empty");
  if (trials < 1) throw ParameterError("concentration_curve: trials must be >= 1");
  if (dist == Distribution::custom) {
    throw ParameterError("concentration_curve: distribution must be gaussian or laplace");
  }
  require_rank(n, n, rank, "concentration_curve");

  const std::size_t cells = m_values.size() * static_cast<std::size_t>(trials);
  std::vector<CurveRow> rows(cells);
  detail::parallel_for(cells, workers, [&](std::size_t cell) {
    const Index m = m_values[cell / static_cast<std::size_t>(trials)];
    const int trial = static_cast<int>(cell % static_cast<std::size_t>(trials));
    const auto map_seed = derive_seed(derive_seed(seed, 1, static_cast<std::uint64_t>(m)), 0,
                                      static_cast<std::uint64_t>(trial));
    const auto sample_seed = derive_seed(seed, 2, static_cast<std::uint64_t>(trial));
    const MeasurementMap map = make_dense_map(n, n, m, dist, map_seed);
    const RripEstimate est = estimate_constants(map, rank, n_samples, sample_seed);
    rows[cell] = CurveRow{m, trial, est.alpha_hat, est.beta_hat, est.gamma_hat};
  });
  return rows;
}

std::vector<CurveSummary> summarize_curve(const std::vector<CurveRow>& rows) {
  std::map<Index, std::vector<double>> by_m;
  std::vector<Index> order;
  for (const auto& row : rows) {
    if (!by_m.contains(row.m)) order.push_back(row.m);
    by_m[row.m].push_back(row.gamma_hat);
  }
  std::vector<CurveSummary> out;
  for (Index m : order) {
    const auto& values = by_m[m];
    out.push_back({m, detail::median(values), *std::max_element(values.begin(), values.end())});
  }
  return out;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
  out << "m,trial,alpha_hat,beta_hat,gamma_hat\n";
  for (const auto& row : rows) {
    out << row.m << ',' << row.trial << ',' << csv::format(row.alpha_hat) << ','
        << csv::format(row.beta_hat) << ',' << csv::format(row.gamma_hat) << '\n';
  }
}

}  // namespace lowrank
