#pragma once

// Estimation of the l1 rank-restricted isometry constants
//
//   alpha ||Z||_F <= ||A(Z)||_1 <= beta ||Z||_F   for all Z with rank(Z) <= r
//
// and of their ratio gamma = beta / alpha.

#include <iosfwd>
#include <vector>

#include "lowrank/matana.hpp"
#include "lowrank/measure.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

/// Monte-Carlo inner estimate: alpha_hat >= alpha_r and beta_hat <= beta_r, so
/// gamma_hat is a lower estimate of gamma_r.
struct RripEstimate {
  int order = 0;
  int n_samples = 0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double gamma_hat = 0.0;
  /// ||A(Z_k)||_1 per sample, in sample order; filled only on request.
  std::vector<double> sample_l1_values;
};

/// G1 G2^T / ||G1 G2^T||_F with G1 (N1 x r), G2 (N2 x r) standard normal.
Matrix sample_rank_r(Index n1, Index n2, Index rank, RngSeed seed);

/// Sample k uses sample_rank_r(..., derive_seed(seed, 0, k)), so a longer run
/// extends a shorter one with the same seed.
RripEstimate estimate_constants(const MeasurementMap& map, Index rank, int n_samples,
                                RngSeed seed, bool keep_samples = false, int workers = 1);

struct IsometryConstants {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Exact constants over all N1 x N2 matrices (order min(N1, N2)).
///
/// beta = max over sign vectors w of ||A^* w||_F. alpha is the minimum of
/// ||A z||_1 / ||z||_2 over the vertices of the polytope {||A z||_1 <= 1},
/// each of which is the null direction of some (N1*N2 - 1)-row submatrix of
/// rank N1*N2 - 1. Cost is 2^(m-1) + C(m, N1*N2 - 1) small solves, so this is
/// limited to m <= 24 and tiny N1*N2.
IsometryConstants exact_constants_full_order(const MeasurementMap& map);

/// Exact constants over unit rank-one matrices for a rank_one map.
///
/// For fixed v, u -> ||A(u v^T)||_1 is a polyhedral seminorm whose minimum on
/// the sphere sits at a vertex, i.e. at u orthogonal to N1 - 1 of the a_i; the
/// same holds for v, so alpha is a minimum over finitely many pairs. beta is
/// the maximum over sign vectors w of the spectral norm of sum_i w_i a_i b_i^T.
/// Limited to m <= 24.
IsometryConstants exact_constants_rank_one(const MeasurementMap& map);

/// Brute-force sweep of ||A(Z)||_1 over a hyperspherical angle grid of the
/// unit sphere of R^{N1 x N2} (N1*N2 <= 6). Inner estimate of the full-order
/// constants; each polar angle takes `steps` values.
IsometryConstants grid_constants_full_order(const MeasurementMap& map, int steps);

/// Same sweep over unit rank-one matrices u v^T with u, v on angle grids of
/// their spheres ((N1 - 1) + (N2 - 1) <= 4).
IsometryConstants grid_constants_rank_one(const MeasurementMap& map, int steps);

struct CurveRow {
  Index m = 0;
  int trial = 0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double gamma_hat = 0.0;
};

struct CurveSummary {
  Index m = 0;
  double gamma_median = 0.0;
  double gamma_max = 0.0;
};

/// For each m and trial: a fresh dense N x N map with the given law, and its
/// order-r estimate from `n_samples` samples. The sample set depends only on
/// the trial index, so every m sees the same matrices.
std::vector<CurveRow> concentration_curve(Distribution dist, Index n, Index rank,
                                          const std::vector<Index>& m_values, int trials,
                                          RngSeed seed, int n_samples = 400, int workers = 1);

std::vector<CurveSummary> summarize_curve(const std::vector<CurveRow>& rows);

/// Columns m,trial,alpha_hat,beta_hat,gamma_hat with a header row.
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

}  // namespace lowrank
