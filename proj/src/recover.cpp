#include "lowrank/recover.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "lowrank/csv.hpp"
#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

Index min_dim(const MeasurementMap& map) { return std::min(map.n1(), map.n2()); }

void check_measurements(const MeasurementMap& map, const Vector& y, std::string_view who) {
  if (y.size() != map.m()) {
    throw ParameterError(std::string(who) + ": y has length " + std::to_string(y.size()) +
                         ", map has m = " + std::to_string(map.m()));
  }
  require_finite(y, who);
}

void check_truth(const MeasurementMap& map, const std::optional<Matrix>& truth,
                 std::string_view who) {
  if (truth && (truth->rows() != map.n1() || truth->cols() != map.n2())) {
    throw ParameterError(std::string(who) + ": ground truth dimensions do not match the map");
  }
}

StepResult step_from_residual(const MeasurementMap& map, const Vector& residual,
                              const MihtConfig& cfg) {
  StepResult out;
  out.residual_l1 = residual.lpNorm<1>();
  const Matrix full = map.adjoint(sign_vector(residual));
  const Index t = cfg.inner_rank(min_dim(map));
  out.direction = t >= min_dim(map) ? full : hard_threshold(full, t);

  const double d_sq = out.direction.squaredNorm();
  if (!(d_sq > 0.0)) {
    out.degenerate = true;
    return out;
  }
  const double ad_l1 = map.apply(out.direction).lpNorm<1>();
  out.condsri_hit = ad_l1 >= 2.0 * cfg.gamma * d_sq;

  double denominator = 0.0;
  if (cfg.stepsize_policy == StepsizePolicy::adaptive) {
    const double second = ad_l1 * ad_l1 / (4.0 * cfg.gamma * cfg.gamma * d_sq);
    denominator = std::max(d_sq, second);
  } else {
    denominator = cfg.fixed_beta * cfg.fixed_beta;
  }
  out.mu = cfg.step_scale * out.residual_l1 / denominator;
  return out;
}

struct StepOutcome {
  Matrix next;
  double mu = 0.0;
  std::optional<StopReason> stop;
};

// Shared iteration loop. `step(x, residual, n)` either proposes X_{n+1} or
// asks to stop at X_n.
template <class Step>
RecoveryResult run_iterations(const MeasurementMap& map, const Vector& y, int max_iter,
                              double tol_residual, double tol_change,
                              const std::optional<Matrix>& truth, std::string_view who,
                              Step&& step) {
  const double tol = tol_residual * y.lpNorm<1>();
  auto error_of = [&](const Matrix& x) -> std::optional<double> {
    if (!truth) return std::nullopt;
    return (*truth - x).norm();
  };

  RecoveryResult result;
  Matrix x = Matrix::Zero(map.n1(), map.n2());
  Vector residual = y;
  double residual_l1 = residual.lpNorm<1>();
  result.trace.push_back({0, residual_l1, std::nullopt, error_of(x)});

  if (residual_l1 <= tol) {
    result.stop_reason = StopReason::residual_converged;
    result.final_iterate = std::move(x);
    return result;
  }

  result.stop_reason = StopReason::max_iter;
  for (int n = 0; n < max_iter; ++n) {
    StepOutcome outcome = step(x, residual, n);
    if (outcome.stop) {
      result.stop_reason = *outcome.stop;
      break;
    }
    if (!outcome.next.allFinite() || !std::isfinite(outcome.mu)) {
      throw NumericalError(std::string(who) + ": non-finite iterate at iteration " +
                           std::to_string(n + 1));
    }
    const double change = (outcome.next - x).norm();
    const double previous_norm = x.norm();
    x = std::move(outcome.next);
    residual = y - map.apply(x);
    residual_l1 = residual.lpNorm<1>();
    result.iterations_used = n + 1;
    result.trace.push_back({n + 1, residual_l1, outcome.mu, error_of(x)});

    if (residual_l1 <= tol) {
      result.stop_reason = StopReason::residual_converged;
      break;
    }
    if (change <= tol_change * (1.0 + previous_norm)) {
      result.stop_reason = StopReason::iterate_converged;
      break;
    }
  }
  result.final_iterate = std::move(x);
  return result;
}

void check_rank(int rank, Index n_min, std::string_view who) {
  if (rank < 1 || rank > n_min) {
    throw ParameterError(std::string(who) + ": rank " + std::to_string(rank) +
                         " outside [1, min(N1,N2) = " + std::to_string(n_min) + "]");
  }
}

void check_stop_rule(const StopRule& stop, std::string_view who) {
  if (stop.max_iter < 0 || !(stop.tol_residual >= 0.0) || !(stop.tol_change >= 0.0)) {
    throw ParameterError(std::string(who) + ": invalid stopping rule");
  }
}

}  // namespace

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::residual_converged: return "residual_converged";
    case StopReason::iterate_converged: return "iterate_converged";
    case StopReason::max_iter: return "max_iter";
    case StopReason::condsri_triggered: return "condsri_triggered";
  }
  return "max_iter";
}

MihtConfig MihtConfig::practical(int rank, double gamma) {
  MihtConfig cfg;
  cfg.target_rank = rank;
  cfg.thresh_s = rank;
  cfg.thresh_t = std::nullopt;
  cfg.gamma = gamma;
  return cfg;
}

MihtConfig MihtConfig::rank_2r(int rank, Index n_min, double gamma) {
  MihtConfig cfg = practical(rank, gamma);
  cfg.thresh_t = static_cast<int>(std::min<Index>(2 * rank, n_min));
  return cfg;
}

MihtConfig MihtConfig::theorem_faithful(int rank, double gamma, Index n_min) {
  MihtConfig cfg = practical(rank, gamma);
  const double s = 100.0 * std::pow(gamma, 4) * rank;
  const double t = 800.0 * std::pow(gamma, 12) * s;
  const auto clamp = [n_min](double value, const char* name) {
    if (value > static_cast<double>(n_min)) {
      std::clog << "miht: theoretical " << name << " = " << value << " exceeds min(N1,N2) = "
                << n_min << "; clamping\n";
      return static_cast<int>(n_min);
    }
    return static_cast<int>(std::ceil(value));
  };
  cfg.thresh_s = clamp(s, "s");
  cfg.thresh_t = clamp(t, "t");
  return cfg;
}

void MihtConfig::validate(Index n1, Index n2) const {
  const Index n_min = std::min(n1, n2);
  if (target_rank < 1 || target_rank > thresh_s || thresh_s > n_min) {
    throw ParameterError("MihtConfig: need 1 <= r <= s <= min(N1,N2); got r = " +
                         std::to_string(target_rank) + ", s = " + std::to_string(thresh_s) +
                         ", min(N1,N2) = " + std::to_string(n_min));
  }
  if (thresh_t && (*thresh_t < 1 || *thresh_t > n_min)) {
    throw ParameterError("MihtConfig: t = " + std::to_string(*thresh_t) +
                         " outside [1, min(N1,N2)]");
  }
  if (!(gamma >= 1.0)) throw ParameterError("MihtConfig: gamma must be >= 1");
  if (stepsize_policy == StepsizePolicy::fixed && !(fixed_beta > 0.0)) {
    throw ParameterError("MihtConfig: fixed stepsize needs beta > 0");
  }
  if (!(step_scale > 0.0)) throw ParameterError("MihtConfig: step_scale must be > 0");
  if (max_iter < 0) throw ParameterError("MihtConfig: max_iter must be >= 0");
  if (!(tol_residual >= 0.0) || !(tol_change >= 0.0)) {
    throw ParameterError("MihtConfig: tolerances must be nonnegative");
  }
}

StepResult stepsize(const MeasurementMap& map, const Vector& y, const Matrix& xn,
                    const MihtConfig& cfg) {
  check_measurements(map, y, "stepsize");
  cfg.validate(map.n1(), map.n2());
  const Vector residual = y - map.apply(xn);
  if (!(residual.lpNorm<1>() > 0.0)) {
    throw ParameterError("stepsize: residual is zero, nothing to step towards");
  }
  return step_from_residual(map, residual, cfg);
}

RecoveryResult miht(const MeasurementMap& map, const Vector& y, const MihtConfig& cfg,
                    const std::optional<Matrix>& truth) {
  check_measurements(map, y, "miht");
  check_truth(map, truth, "miht");
  cfg.validate(map.n1(), map.n2());

  return run_iterations(
      map, y, cfg.max_iter, cfg.tol_residual, cfg.tol_change, truth, "miht",
      [&](const Matrix& x, const Vector& residual, int) {
        StepOutcome outcome;
        const StepResult step = step_from_residual(map, residual, cfg);
        if (step.degenerate) {
          outcome.stop = StopReason::max_iter;
          return outcome;
        }
        if (step.condsri_hit && cfg.enable_condsri_stop) {
          outcome.stop = StopReason::condsri_triggered;
          return outcome;
        }
        outcome.mu = step.mu;
        const Matrix candidate = x + step.mu * step.direction;
        if (!candidate.allFinite()) {
          outcome.next = candidate;
          return outcome;
        }
        outcome.next = hard_threshold(svd(candidate), cfg.thresh_s);
        return outcome;
      });
}

RecoveryResult iht_classic(const MeasurementMap& map, const Vector& y, int rank, double mu,
                           const StopRule& stop, const std::optional<Matrix>& truth) {
  check_measurements(map, y, "iht_classic");
  check_truth(map, truth, "iht_classic");
  check_rank(rank, min_dim(map), "iht_classic");
  check_stop_rule(stop, "iht_classic");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ParameterError("iht_classic: mu must be > 0");

  return run_iterations(map, y, stop.max_iter, stop.tol_residual, stop.tol_change, truth,
                        "iht_classic", [&](const Matrix& x, const Vector& residual, int) {
                          StepOutcome outcome;
                          outcome.mu = mu;
                          const Matrix candidate = x + mu * map.adjoint(residual);
                          outcome.next = candidate.allFinite()
                                             ? hard_threshold(svd(candidate), rank)
                                             : candidate;
                          return outcome;
                        });
}

RecoveryResult niht(const MeasurementMap& map, const Vector& y, int rank, const StopRule& stop,
                    const std::optional<Matrix>& truth) {
  check_measurements(map, y, "niht");
  check_truth(map, truth, "niht");
  check_rank(rank, min_dim(map), "niht");
  check_stop_rule(stop, "niht");

  // Leading singular vectors of the current iterate, carried between steps.
  Matrix u;
  Matrix v;
  return run_iterations(
      map, y, stop.max_iter, stop.tol_residual, stop.tol_change, truth, "niht",
      [&](const Matrix& x, const Vector& residual, int n) {
        StepOutcome outcome;
        const Matrix gradient = map.adjoint(residual);
        if (n == 0) {
          const SvdFactors g = svd(gradient);
          u = g.left.leftCols(rank);
          v = g.right.leftCols(rank);
        }
        const Matrix ug = u.transpose() * gradient;
        const Matrix projected =
            u * ug + (gradient * v) * v.transpose() - u * (ug * v) * v.transpose();
        const double numerator = projected.squaredNorm();
        const double denominator = map.apply(projected).squaredNorm();
        if (!(numerator > 0.0) || !(denominator > 0.0)) {
          outcome.stop = StopReason::max_iter;
          return outcome;
        }
        outcome.mu = numerator / denominator;
        const Matrix candidate = x + outcome.mu * gradient;
        if (!candidate.allFinite()) {
          outcome.next = candidate;
          return outcome;
        }
        const SvdFactors factors = svd(candidate);
        u = factors.left.leftCols(rank);
        v = factors.right.leftCols(rank);
        outcome.next = hard_threshold(factors, rank);
        return outcome;
      });
}

double natural_iht_stepsize(const MeasurementMap& map) {
  // N1*N2 / ||A||_F^2, the reciprocal of the mean eigenvalue of A^*A.
  double frobenius_sq = 0.0;
  if (map.variant() == MeasurementMap::Variant::rank_one) {
    frobenius_sq = (map.left_vectors().rowwise().squaredNorm().array() *
                    map.right_vectors().rowwise().squaredNorm().array())
                       .sum();
  } else {
    frobenius_sq = map.coefficients().squaredNorm();
  }
  if (!(frobenius_sq > 0.0)) throw ParameterError("natural_iht_stepsize: zero map");
  return static_cast<double>(map.n1() * map.n2()) / frobenius_sq;
}

void write_trace_csv(std::ostream& out, const RecoveryResult& result) {
  out << "iter,l1_residual,stepsize,frob_error\n";
  for (const auto& record : result.trace) {
    out << record.iter << ',' << csv::format(record.l1_residual) << ','
        << csv::format(record.stepsize) << ',' << csv::format(record.frob_error) << '\n';
  }
}

}  // namespace lowrank
