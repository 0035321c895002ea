#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lowrank/errors.hpp"
#include "lowrank/matana.hpp"
#include "lowrank/measure.hpp"
#include "lowrank/rng.hpp"
#include "support/oracles.hpp"

using namespace lowrank;

namespace {

Matrix unit(Index n1, Index n2, Index i, Index j) {
  Matrix e = Matrix::Zero(n1, n2);
  e(i, j) = 1.0;
  return e;
}

struct Moments {
  double mean = 0, variance = 0, excess_kurtosis = 0;
};

Moments moments(const std::vector<double>& x) {
  Moments out;
  const double n = static_cast<double>(x.size());
  for (double v : x) out.mean += v;
  out.mean /= n;
  double m2 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - out.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  out.variance = m2;
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

std::vector<double> entries(const Matrix& z) { return {z.data(), z.data() + z.size()}; }

}  // namespace

TEST(Rng, SeedsAreReproducibleAndDistinct) {
  Rng a(RngSeed{5}), b(RngSeed{5}), c(RngSeed{6});
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_NE(x, c.normal());
  }
}

TEST(Rng, DerivedSeedsDoNotDependOnOtherIndices) {
  const RngSeed base{42};
  EXPECT_EQ(derive_seed(base, 1, 7), derive_seed(base, 1, 7));
  EXPECT_NE(derive_seed(base, 1, 7), derive_seed(base, 2, 7));
  EXPECT_NE(derive_seed(base, 1, 7), derive_seed(base, 1, 8));
}

TEST(Rng, UniformStaysInsideOpenInterval) {
  Rng rng(RngSeed{9});
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, RademacherIsBalanced) {
  Rng rng(RngSeed{10});
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double s = rng.rademacher();
    ASSERT_TRUE(s == 1.0 || s == -1.0);
    sum += s;
  }
  EXPECT_LT(std::abs(sum) / 100000.0, 0.02);
}

TEST(RankOneMap, DeterministicPerSeed) {
  const auto a = make_rank_one_map(2, 2, 3, RngSeed{7});
  const auto b = make_rank_one_map(2, 2, 3, RngSeed{7});
  EXPECT_EQ(a.left_vectors(), b.left_vectors());
  EXPECT_EQ(a.right_vectors(), b.right_vectors());
  const auto c = make_rank_one_map(2, 2, 3, RngSeed{8});
  EXPECT_NE(a.left_vectors(), c.left_vectors());
}

TEST(RankOneMap, EntriesAreStandardNormal) {
  const auto map = make_rank_one_map(4, 4, 10000, RngSeed{3});
  const Moments mo = moments(entries(map.left_vectors()));
  EXPECT_LT(std::abs(mo.mean), 0.05);
  EXPECT_LT(std::abs(mo.variance - 1.0), 0.05);
  const Moments mb = moments(entries(map.right_vectors()));
  EXPECT_LT(std::abs(mb.mean), 0.05);
  EXPECT_LT(std::abs(mb.variance - 1.0), 0.05);
}

TEST(RankOneMap, RejectsBadSizes) {
  EXPECT_THROW(make_rank_one_map(0, 2, 3, RngSeed{}), ParameterError);
  EXPECT_THROW(make_rank_one_map(2, 2, 0, RngSeed{}), ParameterError);
  EXPECT_THROW(MeasurementMap::from_rank_one(Matrix::Ones(2, 3), Matrix::Ones(3, 3)),
               ParameterError);
}

TEST(DenseMap, DeterministicPerSeed) {
  const auto a = make_dense_map(2, 2, 4, Distribution::gaussian, RngSeed{1});
  const auto b = make_dense_map(2, 2, 4, Distribution::gaussian, RngSeed{1});
  EXPECT_EQ(a.coefficients(), b.coefficients());
}

TEST(DenseMap, VarianceIsOneOverM) {
  for (auto dist : {Distribution::gaussian, Distribution::laplace}) {
    const auto map = make_dense_map(10, 10, 100, dist, RngSeed{2});
    const Moments mo = moments(entries(map.coefficients()));
    EXPECT_LT(std::abs(mo.variance - 0.01), 0.001) << to_string(dist);
  }
}

TEST(DenseMap, LaplaceKurtosisDiffersFromGaussian) {
  const auto laplace = make_dense_map(10, 100, 100, Distribution::laplace, RngSeed{4});
  const auto gauss = make_dense_map(10, 100, 100, Distribution::gaussian, RngSeed{4});
  EXPECT_NEAR(moments(entries(laplace.coefficients())).excess_kurtosis, 3.0, 0.5);
  EXPECT_NEAR(moments(entries(gauss.coefficients())).excess_kurtosis, 0.0, 0.1);
}

TEST(DenseMap, RejectsCustomDistribution) {
  EXPECT_THROW(make_dense_map(2, 2, 4, Distribution::custom, RngSeed{}), ParameterError);
  EXPECT_THROW(parse_distribution("cauchy"), ParameterError);
  EXPECT_EQ(parse_distribution("laplace"), Distribution::laplace);
}

TEST(Apply, CoordinateFunctional) {
  Matrix a = Matrix::Zero(1, 3), b = Matrix::Zero(1, 2);
  a(0, 0) = 1;
  b(0, 0) = 1;
  const auto map = MeasurementMap::from_rank_one(a, b);
  oracle::Gen gen(1);
  const Matrix z = gen.gaussian(3, 2);
  const Vector y = map.apply(z);
  ASSERT_EQ(y.size(), 1);
  EXPECT_EQ(y(0), z(0, 0));
}

TEST(Apply, ZeroAndLinearity) {
  oracle::Gen gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seed = RngSeed{static_cast<std::uint64_t>(trial)};
    const MeasurementMap maps[] = {make_rank_one_map(4, 3, 25, seed),
                                   make_dense_map(4, 3, 25, Distribution::gaussian, seed)};
    for (const auto& map : maps) {
      EXPECT_EQ(map.apply(Matrix::Zero(4, 3)), Vector::Zero(25));
      const Matrix z = gen.gaussian(4, 3);
      const Matrix w = gen.gaussian(4, 3);
      const Vector az = map.apply(z);
      EXPECT_LE((map.apply(2 * z) - 2 * az).norm(), 1e-12 * az.norm());
      EXPECT_LE((map.apply(z + w) - az - map.apply(w)).norm(), 1e-12 * (1 + az.norm()));
    }
  }
}

TEST(Apply, MatchesEntrywiseFormula) {
  oracle::Gen gen(3);
  const auto map = make_rank_one_map(3, 4, 10, RngSeed{11});
  const Matrix z = gen.gaussian(3, 4);
  const Vector y = map.apply(z);
  for (Index i = 0; i < 10; ++i) {
    double expected = 0;
    for (Index k = 0; k < 3; ++k) {
      for (Index l = 0; l < 4; ++l) {
        expected += map.left_vectors()(i, k) * z(k, l) * map.right_vectors()(i, l);
      }
    }
    EXPECT_NEAR(y(i), expected, 1e-12 * (1 + std::abs(expected)));
  }
  const auto dense = make_dense_map(3, 4, 10, Distribution::laplace, RngSeed{12});
  const Vector yd = dense.apply(z);
  for (Index i = 0; i < 10; ++i) {
    double expected = 0;
    for (Index k = 0; k < 3; ++k) {
      for (Index l = 0; l < 4; ++l) expected += dense.coefficients()(i, k * 4 + l) * z(k, l);
    }
    EXPECT_NEAR(yd(i), expected, 1e-12 * (1 + std::abs(expected)));
  }
}

TEST(Apply, RejectsDimensionMismatch) {
  const auto map = make_rank_one_map(3, 4, 5, RngSeed{});
  EXPECT_THROW(map.apply(Matrix::Zero(4, 3)), ParameterError);
  EXPECT_THROW(map.adjoint(Vector::Zero(4)), ParameterError);
}

TEST(Adjoint, ZeroVectorAndSingleDyad) {
  Matrix a = Matrix::Zero(1, 2), b = Matrix::Zero(1, 2);
  a(0, 0) = 1;
  b(0, 1) = 1;
  const auto map = MeasurementMap::from_rank_one(a, b);
  EXPECT_EQ(map.adjoint(Vector::Zero(1)), Matrix::Zero(2, 2));
  EXPECT_EQ(map.adjoint(Vector::Ones(1)), unit(2, 2, 0, 1));
}

TEST(Adjoint, DefiningIdentity) {
  oracle::Gen gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n1 = gen.integer(1, 6), n2 = gen.integer(1, 6), m = gen.integer(1, 40);
    const auto seed = RngSeed{static_cast<std::uint64_t>(100 + trial)};
    const MeasurementMap maps[] = {make_rank_one_map(n1, n2, m, seed),
                                   make_dense_map(n1, n2, m, Distribution::laplace, seed)};
    for (const auto& map : maps) {
      const Vector u = gen.gaussian(m);
      const Matrix z = gen.gaussian(n1, n2);
      const double lhs = frobenius_inner(map.adjoint(u), z);
      const double rhs = u.dot(map.apply(z));
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1 + u.norm() * z.norm()));
    }
  }
}

TEST(Adjoint, SignedResidualIsDyadSum) {
  oracle::Gen gen(5);
  const auto map = make_rank_one_map(3, 5, 20, RngSeed{6});
  const Matrix x = gen.low_rank(3, 5, 1);
  const Matrix xn = gen.gaussian(3, 5);
  const Vector w = sign_vector(map.apply(x) - map.apply(xn));
  Matrix expected = Matrix::Zero(3, 5);
  for (Index i = 0; i < 20; ++i) {
    expected += w(i) * map.left_vectors().row(i).transpose() * map.right_vectors().row(i);
  }
  EXPECT_LE((map.adjoint(w) - expected).norm(), 1e-12 * expected.norm());
}

TEST(Apply, L1NormIsSeminorm) {
  oracle::Gen gen(6);
  const auto map = make_rank_one_map(4, 4, 30, RngSeed{7});
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix z = gen.gaussian(4, 4), w = gen.gaussian(4, 4);
    const double c = gen.uniform(-3, 3);
    const double nz = map.apply(z).lpNorm<1>();
    EXPECT_LE(map.apply(z + w).lpNorm<1>(), nz + map.apply(w).lpNorm<1>() + 1e-12);
    EXPECT_NEAR(map.apply(c * z).lpNorm<1>(), std::abs(c) * nz, 1e-12 * (1 + nz));
  }
}

TEST(AsDense, AgreesWithApply) {
  oracle::Gen gen(7);
  const auto map = make_rank_one_map(3, 2, 8, RngSeed{8});
  const Matrix z = gen.gaussian(3, 2);
  const Matrix zt = z.transpose();
  const Vector vec = Eigen::Map<const Vector>(zt.data(), 6);
  EXPECT_LE((map.as_dense() * vec - map.apply(z)).norm(), 1e-12);
}

TEST(MapText, RoundTripBothVariants) {
  const MeasurementMap maps[] = {make_rank_one_map(3, 2, 5, RngSeed{77}),
                                 make_dense_map(2, 3, 4, Distribution::laplace, RngSeed{78})};
  for (const auto& map : maps) {
    std::stringstream text;
    write_map(text, map);
    const MeasurementMap back = read_map(text);
    EXPECT_EQ(back.variant(), map.variant());
    EXPECT_EQ(back.n1(), map.n1());
    EXPECT_EQ(back.n2(), map.n2());
    EXPECT_EQ(back.m(), map.m());
    EXPECT_EQ(back.seed(), map.seed());
    EXPECT_EQ(back.distribution(), map.distribution());
    EXPECT_EQ(back.as_dense(), map.as_dense());
  }
}

TEST(MapText, RejectsMalformedInput) {
  std::stringstream bad_variant("sparse 2 2 1 0 gaussian\n1,2,3,4\n");
  EXPECT_THROW(read_map(bad_variant), ParameterError);
  std::stringstream truncated("rank_one 2 2 2 0 gaussian\n1,2,3,4\n");
  EXPECT_THROW(read_map(truncated), ParameterError);
  std::stringstream empty("");
  EXPECT_THROW(read_map(empty), ParameterError);
}
