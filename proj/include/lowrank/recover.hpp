#pragma once

// Low-rank recovery from y = A(X) + e by iterative hard thresholding.
//
// miht() implements the modified scheme
//
//   X_0 = 0,  X_{n+1} = H_s(X_n + mu_n * H_t(A^* sgn(y - A X_n)))
//
// whose signed-residual step is a subgradient step for Z -> ||y - A Z||_1.
// iht_classic() and niht() are the l2 baselines.

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "lowrank/matana.hpp"
#include "lowrank/measure.hpp"

namespace lowrank {

enum class StepsizePolicy {
  adaptive,  // mu_n from the two-term max (needs only gamma)
  fixed,     // mu_n = ||y - A X_n||_1 / beta^2 (needs an estimate of beta)
};

struct MihtConfig {
  int target_rank = 1;
  int thresh_s = 1;
  /// Inner threshold; nullopt means t = min(N1, N2), i.e. no inner thresholding.
  std::optional<int> thresh_t;
  double gamma = 3.0;
  StepsizePolicy stepsize_policy = StepsizePolicy::adaptive;
  double fixed_beta = 1.0;
  /// Multiplies every mu_n; 1 + delta for stepsize-leeway experiments.
  double step_scale = 1.0;
  int max_iter = 500;
  /// Stop when ||y - A X_n||_1 <= tol_residual * ||y||_1.
  double tol_residual = 1e-10;
  /// Stop when ||X_{n+1} - X_n||_F <= tol_change * (1 + ||X_n||_F).
  double tol_change = 1e-8;
  bool enable_condsri_stop = false;

  /// s = r and t = ALL.
  static MihtConfig practical(int rank, double gamma = 3.0);
  /// s = r, t = 2r (clamped to min(N1, N2) when given).
  static MihtConfig rank_2r(int rank, Index n_min, double gamma = 3.0);
  /// s = 100 gamma^4 r, t = 800 gamma^12 s, both clamped to n_min with a
  /// warning on std::clog when the theoretical values do not fit.
  static MihtConfig theorem_faithful(int rank, double gamma, Index n_min);

  /// Throws ParameterError unless r <= s <= min(N1,N2), t <= min(N1,N2),
  /// gamma >= 1 and the tolerances are positive.
  void validate(Index n1, Index n2) const;

  Index inner_rank(Index n_min) const { return thresh_t ? *thresh_t : n_min; }
};

enum class StopReason { residual_converged, iterate_converged, max_iter, condsri_triggered };

std::string_view to_string(StopReason reason);

struct TraceRecord {
  int iter = 0;
  double l1_residual = 0.0;
  /// Stepsize that produced this iterate; empty for X_0.
  std::optional<double> stepsize;
  /// ||truth - X_n||_F when ground truth was supplied.
  std::optional<double> frob_error;
};

struct RecoveryResult {
  Matrix final_iterate;
  int iterations_used = 0;
  StopReason stop_reason = StopReason::max_iter;
  /// One record per iterate including X_0: size() == iterations_used + 1.
  std::vector<TraceRecord> trace;
};

struct StepResult {
  double mu = 0.0;
  /// ||A(D)||_1 >= 2 gamma ||D||_F^2: the second term of the max dominates.
  bool condsri_hit = false;
  /// True when D == 0; mu is then meaningless.
  bool degenerate = false;
  /// D = H_t(A^* sgn(y - A X_n)).
  Matrix direction;
  double residual_l1 = 0.0;
};

/// Search direction, stepsize and stopping test at the iterate `xn`.
/// Requires y - A(xn) != 0.
StepResult stepsize(const MeasurementMap& map, const Vector& y, const Matrix& xn,
                    const MihtConfig& cfg);

RecoveryResult miht(const MeasurementMap& map, const Vector& y, const MihtConfig& cfg,
                    const std::optional<Matrix>& truth = std::nullopt);

/// Stopping surface shared by the l2 baselines (same meaning as in MihtConfig).
struct StopRule {
  int max_iter = 500;
  double tol_residual = 1e-10;
  double tol_change = 1e-8;
};

/// X_{n+1} = H_r(X_n + mu A^*(y - A X_n)) with a fixed mu > 0.
RecoveryResult iht_classic(const MeasurementMap& map, const Vector& y, int rank, double mu,
                           const StopRule& stop = {},
                           const std::optional<Matrix>& truth = std::nullopt);

/// Normalized IHT: mu_n = ||P_n G_n||_F^2 / ||A(P_n G_n)||_2^2 with
/// G_n = A^*(y - A X_n) and P_n the projection onto matrices whose column
/// space lies in span(U_n) or whose row space lies in span(V_n), U_n, V_n the
/// singular vectors of X_n (of H_r(G_0) while X_n = 0).
RecoveryResult niht(const MeasurementMap& map, const Vector& y, int rank,
                    const StopRule& stop = {},
                    const std::optional<Matrix>& truth = std::nullopt);

/// Stepsize that makes A^*A an isotropic update in expectation:
/// 1/m for standard Gaussian rank-one maps, 1 for dense maps of variance 1/m.
double natural_iht_stepsize(const MeasurementMap& map);

/// Columns iter,l1_residual,stepsize,frob_error with a header row.
void write_trace_csv(std::ostream& out, const RecoveryResult& result);

}  // namespace lowrank
