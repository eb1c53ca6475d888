#pragma once
// Allocation oracles for best-arm identification with offline data.
//
// The central object is the constrained allocation problem: find a
// nonnegative online allocation N (one entry per arm) minimizing the total
// number of online samples subject to the transportation indexes
//
//   Z_{1,a}(N) = inf_x [ (O_1 + N_1) kl(mu_1, x) + (O_a + N_a) kl(mu_a, x) ]
//
// reaching a confidence threshold for every suboptimal arm a, where O_a are
// the (possibly fractional) offline counts and arm 1 denotes the best arm.
// The solver reduces the problem to a scalar search over N_1: for fixed N_1
// each constraint pins down the smallest feasible N_a by a one-dimensional
// bisection, and the derivative of the resulting objective in N_1 is
// 1 - sum_a kl(mu_1, x_a)/kl(mu_a, x_a) over arms with positive N_a. The
// outer bisection locates the first N_1 where that derivative turns
// nonnegative, which is the minimizer of the (convex) objective.
//
// On top of this sit the normalized problem (value V and maximizing online
// proportions w for a fixed offline fraction z) and the fixed-confidence
// characteristic problems: the achievable plug-in problem with threshold
// log(1/delta) + loglog(1/delta) and the lower-bound problem with threshold
// log(1/(2.4 delta)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ooband/spef.hpp"
#include "ooband/types.hpp"

namespace ooband {

namespace detail {

// Internal view of an allocation problem with real-valued offline counts.
struct AllocationProblem {
  const DistributionFamily* family;
  std::vector<double> means;
  std::vector<double> offline;
  int best;
  double threshold;
  double epsilon;
  int max_doublings;

  int K() const { return static_cast<int>(means.size()); }
};

// Smallest online count N_a (possibly negative, meaning the offline data
// alone already over-satisfies the constraint) such that the pooled index
// of arm a against the best arm reaches the threshold, for a fixed online
// count n1 on the best arm. Returns nullopt when no finite N_a suffices:
// the index is bounded above by (O_1 + n1) kl(mu_1, mu_a).
inline std::optional<double> min_online_for_arm(const AllocationProblem& ap,
                                                int a, double n1) {
  const double lam1 = ap.offline[ap.best] + n1;
  const double mu1 = ap.means[ap.best];
  const double mua = ap.means[a];
  const double cap = lam1 * kl(*ap.family, mu1, mua);
  if (!(cap > ap.threshold)) return std::nullopt;
  // Degenerate threshold: the index reaches 0 exactly at pooled count 0.
  if (ap.threshold == 0.0) return -ap.offline[a];

  // The index is 0 at pooled count 0 and strictly increasing, so bracket by
  // doubling and bisect for the crossing.
  double hi = std::max(1.0, ap.offline[a]);
  int doublings = 0;
  while (weighted_index(*ap.family, lam1, mu1, hi, mua) < ap.threshold) {
    hi *= 2.0;
    if (++doublings > ap.max_doublings) {
      throw std::runtime_error(
          "ooband::min_online_for_arm: failed to bracket the index crossing "
          "for arm " +
          std::to_string(a));
    }
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (weighted_index(*ap.family, lam1, mu1, mid, mua) >= ap.threshold) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi - ap.offline[a];
}

// Right derivative of the total-online-samples objective at n1, i.e.
// 1 - sum over arms with positive N_a(n1) of kl(mu_1, x_a)/kl(mu_a, x_a)
// where x_a is the infimizer of the pooled index. nullopt when some arm is
// infeasible at this n1 (the objective is +infinity to the left of
// feasibility, so callers treat this as "increase n1").
inline std::optional<double> gradient_at(const AllocationProblem& ap,
                                         double n1) {
  const double lam1 = ap.offline[ap.best] + n1;
  const double mu1 = ap.means[ap.best];
  double g = 1.0;
  for (int a = 0; a < ap.K(); ++a) {
    if (a == ap.best) continue;
    const auto na = min_online_for_arm(ap, a, n1);
    if (!na.has_value()) return std::nullopt;
    if (*na > 0.0) {
      const double lama = ap.offline[a] + *na;
      const double x = weighted_infimizer(lam1, mu1, lama, ap.means[a]);
      g -= kl(*ap.family, mu1, x) / kl(*ap.family, ap.means[a], x);
    }
  }
  return g;
}

// Full solve: the minimizing n1 (first point of nonnegative gradient) and
// the induced per-arm online allocation, clamped at zero.
inline AllocationVector solve_allocation(const AllocationProblem& ap) {
  double n1_star = 0.0;
  const auto g0 = gradient_at(ap, 0.0);
  if (!(g0.has_value() && *g0 >= 0.0)) {
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    for (;;) {
      const auto g = gradient_at(ap, hi);
      if (g.has_value() && *g >= 0.0) break;
      lo = hi;
      hi *= 2.0;
      if (++doublings > ap.max_doublings) {
        throw std::runtime_error(
            "ooband::solve_allocation: failed to bracket the optimal N_1; "
            "objective gradient stayed negative");
      }
    }
    // Capped: when the optimal N_1 is astronomically large (near-tied
    // means), one ulp of hi can exceed the absolute epsilon and the bracket
    // stalls at machine resolution; the cap turns that stall into an exit.
    for (int it = 0; it < 200 && hi - lo > ap.epsilon; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto g = gradient_at(ap, mid);
      if (g.has_value() && *g >= 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    n1_star = hi;  // feasible endpoint with nonnegative gradient
  }

  AllocationVector alloc;
  alloc.n.assign(ap.K(), 0.0);
  alloc.n[ap.best] = n1_star;
  for (int a = 0; a < ap.K(); ++a) {
    if (a == ap.best) continue;
    const auto na = min_online_for_arm(ap, a, n1_star);
    if (!na.has_value()) {
      throw std::logic_error(
          "ooband::solve_allocation: arm became infeasible at the solution");
    }
    alloc.n[a] = std::max(0.0, *na);
  }
  return alloc;
}

inline AllocationProblem make_problem(const BanditInstance& instance,
                                      const std::vector<double>& offline,
                                      const SolverConfig& config) {
  config.validate();
  if (static_cast<int>(offline.size()) != instance.K()) {
    throw std::invalid_argument(
        "ooband::make_problem: offline count vector has wrong length");
  }
  for (double c : offline) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument(
          "ooband::make_problem: offline counts must be finite and >= 0");
    }
  }
  AllocationProblem ap;
  ap.family = &instance.family();
  ap.means = instance.means();
  ap.offline = offline;
  ap.best = instance.best_arm();
  ap.threshold = config.threshold;
  ap.epsilon = config.epsilon;
  ap.max_doublings = config.max_doublings;
  return ap;
}

inline std::vector<double> to_real_counts(const OfflineDataset& offline,
                                          int K) {
  offline.validate(K);
  std::vector<double> c(offline.counts.size());
  for (size_t a = 0; a < c.size(); ++a) {
    c[a] = static_cast<double>(offline.counts[a]);
  }
  return c;
}

}  // namespace detail

// Transportation index Z_{a,b} under pooled (offline + allocated online)
// counts: the cost of moving arms a and b to a common mean.
inline double index_Z(const BanditInstance& instance,
                      const OfflineDataset& offline,
                      const AllocationVector& alloc, int a, int b) {
  offline.validate(instance.K());
  if (static_cast<int>(alloc.n.size()) != instance.K()) {
    throw std::invalid_argument("ooband::index_Z: allocation length mismatch");
  }
  if (a == b) {
    throw std::invalid_argument("ooband::index_Z: arms must be distinct");
  }
  const double lama = static_cast<double>(offline.counts.at(a)) + alloc.n.at(a);
  const double lamb = static_cast<double>(offline.counts.at(b)) + alloc.n.at(b);
  return weighted_index(instance.family(), lama, instance.mean(a), lamb,
                        instance.mean(b));
}

// Smallest online count for arm a meeting the index constraint at the given
// n1, or nullopt when infeasible for every finite count. The returned value
// can be negative when offline data alone already satisfies the constraint.
inline std::optional<double> solve_Na_given_N1(const BanditInstance& instance,
                                               const OfflineDataset& offline,
                                               int a, double n1,
                                               const SolverConfig& config) {
  if (a == instance.best_arm()) {
    throw std::invalid_argument(
        "ooband::solve_Na_given_N1: arm must differ from the best arm");
  }
  if (!(n1 >= 0.0)) {
    throw std::invalid_argument("ooband::solve_Na_given_N1: n1 must be >= 0");
  }
  const auto ap = detail::make_problem(
      instance, detail::to_real_counts(offline, instance.K()), config);
  return detail::min_online_for_arm(ap, a, n1);
}

// Derivative of the total-online objective in n1 (see header comment).
// Returns 1.0 when no arm needs online samples, nullopt when some arm is
// infeasible at this n1.
inline std::optional<double> objective_gradient_at(
    const BanditInstance& instance, const OfflineDataset& offline, double n1,
    const SolverConfig& config) {
  if (!(n1 >= 0.0)) {
    throw std::invalid_argument(
        "ooband::objective_gradient_at: n1 must be >= 0");
  }
  const auto ap = detail::make_problem(
      instance, detail::to_real_counts(offline, instance.K()), config);
  return detail::gradient_at(ap, n1);
}

// Minimal-total online allocation meeting every index constraint at
// config.threshold, given integer offline counts.
inline AllocationVector solve_P2(const BanditInstance& instance,
                                 const OfflineDataset& offline,
                                 const SolverConfig& config) {
  if (!(config.threshold > 0.0)) {
    throw std::invalid_argument("ooband::solve_P2: threshold must be > 0");
  }
  const auto ap = detail::make_problem(
      instance, detail::to_real_counts(offline, instance.K()), config);
  return detail::solve_allocation(ap);
}

// First-order-condition audit of an allocation. All residuals are
// normalized to be dimensionless:
//   - feasibility: max over arms of (threshold - Z_a)_+ / (1 + threshold);
//   - tightness:   |Z_a - threshold| / (1 + threshold) for arms with
//                  positive allocation (set A1);
//   - the KL ratio sum over A1 must not exceed 1;
//   - when the best arm receives online samples, the ratio sum over
//     A1 plus the tight zero-allocation arms A2 must reach 1.
inline OptimalityReport check_optimality(const BanditInstance& instance,
                                         const OfflineDataset& offline,
                                         const AllocationVector& alloc,
                                         const SolverConfig& config) {
  const auto ap = detail::make_problem(
      instance, detail::to_real_counts(offline, instance.K()), config);
  if (static_cast<int>(alloc.n.size()) != instance.K()) {
    throw std::invalid_argument(
        "ooband::check_optimality: allocation length mismatch");
  }
  for (double v : alloc.n) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(
          "ooband::check_optimality: allocation entries must be finite and "
          ">= 0");
    }
  }

  const int best = ap.best;
  const double thr = ap.threshold;
  const double active_tol = 1e-9 * (1.0 + alloc.total());
  const double tight_tol = 1e-5 * (1.0 + thr);

  OptimalityReport report;
  double worst = 0.0;
  double ratio_sum_A1 = 0.0;
  double ratio_sum_A = 0.0;
  for (int a = 0; a < ap.K(); ++a) {
    if (a == best) continue;
    const double lam1 = ap.offline[best] + alloc.n[best];
    const double lama = ap.offline[a] + alloc.n[a];
    const double Z = weighted_index(*ap.family, lam1, ap.means[best], lama,
                                    ap.means[a]);
    const double deficit = std::max(0.0, thr - Z) / (1.0 + thr);
    worst = std::max(worst, deficit);

    const bool positive = alloc.n[a] > active_tol;
    const bool tight = std::abs(Z - thr) <= tight_tol;
    double ratio = 0.0;
    if (lam1 > 0.0 && lama > 0.0) {
      const double x =
          weighted_infimizer(lam1, ap.means[best], lama, ap.means[a]);
      ratio = kl(*ap.family, ap.means[best], x) / kl(*ap.family, ap.means[a], x);
    }
    if (positive) {
      report.active_set_A1.push_back(a);
      ratio_sum_A1 += ratio;
      ratio_sum_A += ratio;
      worst = std::max(worst, std::abs(Z - thr) / (1.0 + thr));
    } else if (tight) {
      report.tight_zero_set_A2.push_back(a);
      ratio_sum_A += ratio;
    }
  }
  report.ratio_sum_A1 = ratio_sum_A1;
  report.ratio_sum_A = ratio_sum_A;
  worst = std::max(worst, std::max(0.0, ratio_sum_A1 - 1.0));
  if (alloc.n[best] > active_tol) {
    worst = std::max(worst, std::max(0.0, 1.0 - ratio_sum_A));
  }
  report.max_constraint_violation = worst;
  return report;
}

// Value and maximizer of the normalized problem.
struct VResult {
  double value = 0.0;
  std::vector<double> w;
};

namespace detail {

// Inner solve of the normalized problem for a fixed share w1 on the best
// arm: distribute the remaining online mass so the smallest weighted index
//   g_j = I(z p_1 + (1-z) w_1, mu_1; z p_j + (1-z) w_j, mu_j)
// is as large as possible. Because each g_j depends only on its own w_j and
// is increasing in it, the max-min is the largest level v whose total
// required mass sum_j (minimal w_j with g_j >= v) fits in the budget.
struct InnerSolution {
  double value = 0.0;
  std::vector<double> w;
};

inline InnerSolution eval_V_inner(const BanditInstance& instance, double z,
                                  const std::vector<double>& p, double w1) {
  const int K = instance.K();
  const int best = instance.best_arm();
  const auto& fam = instance.family();
  const double mu1 = instance.mean(best);
  const double lam1 = z * p[best] + (1.0 - z) * w1;
  const double budget = 1.0 - w1;

  const auto g = [&](int j, double wj) {
    return weighted_index(fam, lam1, mu1, z * p[j] + (1.0 - z) * wj,
                          instance.mean(j));
  };
  // Minimal w_j in [0, budget] with g_j >= v (g_j is increasing in w_j).
  const auto needed = [&](int j, double v) -> std::optional<double> {
    if (g(j, 0.0) >= v) return 0.0;
    if (g(j, budget) < v) return std::nullopt;
    double lo = 0.0, hi = budget;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g(j, mid) >= v) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  };

  double v_hi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < K; ++j) {
    if (j != best) v_hi = std::min(v_hi, g(j, budget));
  }

  InnerSolution sol;
  sol.w.assign(K, 0.0);
  sol.w[best] = w1;
  if (!(v_hi > 0.0)) {
    sol.value = std::max(0.0, v_hi);
    sol.w[best] += budget;  // mass placement is irrelevant at value 0
    return sol;
  }

  double vlo = 0.0, vhi = v_hi;
  for (int it = 0; it < 100 && (vhi - vlo) > 1e-13 * (1.0 + vhi); ++it) {
    const double vmid = 0.5 * (vlo + vhi);
    double used = 0.0;
    bool ok = true;
    for (int j = 0; j < K && ok; ++j) {
      if (j == best) continue;
      const auto wj = needed(j, vmid);
      if (!wj.has_value()) {
        ok = false;
      } else {
        used += *wj;
        if (used > budget) ok = false;
      }
    }
    if (ok) {
      vlo = vmid;
    } else {
      vhi = vmid;
    }
  }

  double used = 0.0;
  for (int j = 0; j < K; ++j) {
    if (j == best) continue;
    const auto wj = needed(j, vlo);
    sol.w[j] = wj.value_or(budget);
    used += sol.w[j];
  }
  // Return any numerical leftover to the best arm so w stays on the simplex.
  sol.w[best] += std::max(0.0, budget - used);
  sol.value = vlo;
  return sol;
}

}  // namespace detail

// Value V(z, p) of the normalized problem: the best worst-case index rate
// achievable by online proportions w when a fraction z of all samples is
// offline with proportions p. Returns the value and a maximizing w.
inline VResult eval_V(const BanditInstance& instance, double z,
                      const std::vector<double>& p) {
  if (static_cast<int>(p.size()) != instance.K()) {
    throw std::invalid_argument("ooband::eval_V: p has wrong length");
  }
  double psum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument("ooband::eval_V: p entries must be >= 0");
    }
    psum += v;
  }
  if (std::abs(psum - 1.0) > 1e-9) {
    throw std::invalid_argument("ooband::eval_V: p must lie on the simplex");
  }
  if (!(z >= 0.0 && z <= 1.0)) {
    throw std::invalid_argument("ooband::eval_V: z must lie in [0, 1]");
  }

  const int K = instance.K();
  const int best = instance.best_arm();
  if (z == 1.0) {
    // No online mass: the value is determined by p alone.
    double value = std::numeric_limits<double>::infinity();
    for (int j = 0; j < K; ++j) {
      if (j == best) continue;
      value = std::min(
          value, weighted_index(instance.family(), p[best],
                                instance.mean(best), p[j], instance.mean(j)));
    }
    VResult r;
    r.value = value;
    r.w.assign(K, 1.0 / static_cast<double>(K));
    return r;
  }

  // The inner value is concave in w1, so golden-section search converges to
  // the maximizer.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = detail::eval_V_inner(instance, z, p, c).value;
  double fd = detail::eval_V_inner(instance, z, p, d).value;
  while (b - a > 1e-9) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = detail::eval_V_inner(instance, z, p, c).value;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = detail::eval_V_inner(instance, z, p, d).value;
    }
  }
  const auto sol = detail::eval_V_inner(instance, z, p, 0.5 * (a + b));
  VResult r;
  r.value = sol.value;
  r.w = sol.w;
  return r;
}

// Largest offline fraction z such that the normalized value still meets the
// per-offline-sample confidence requirement (z / tau1) * L with
// L = log(1/delta) + loglog(1/delta), together with the maximizing online
// proportions at that z. z = 0 when there is no offline data.
inline NormalizedSolution solve_P3(const BanditInstance& instance,
                                   const std::vector<double>& p,
                                   long long tau1, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ooband::solve_P3: delta must be in (0, 1)");
  }
  if (tau1 < 0) {
    throw std::invalid_argument("ooband::solve_P3: tau1 must be >= 0");
  }
  NormalizedSolution sol;
  if (tau1 == 0) {
    sol.z = 0.0;
    sol.w = eval_V(instance, 0.0, p).w;
    return sol;
  }
  const double log1d = std::log(1.0 / delta);
  const double L = log1d + std::log(log1d);
  const auto rhs = [&](double z) {
    return z / static_cast<double>(tau1) * L;
  };
  if (eval_V(instance, 1.0, p).value >= rhs(1.0)) {
    sol.z = 1.0;
    sol.w = eval_V(instance, 1.0, p).w;
    return sol;
  }
  // V(z) is non-increasing and the requirement grows linearly in z, so the
  // crossing is located by bisection; the lower endpoint stays feasible.
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (eval_V(instance, mid, p).value >= rhs(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  sol.z = lo;
  sol.w = eval_V(instance, lo, p).w;
  return sol;
}

// Information-theoretic lower-bound problem: minimal expected online totals
// subject to index constraints at threshold log(1/(2.4 delta)), with
// real-valued expected offline counts. Returns the allocation and its total.
struct P1Solution {
  AllocationVector allocation;
  double optimal_total = 0.0;
};

inline P1Solution solve_P1(const BanditInstance& instance,
                           const std::vector<double>& expected_counts,
                           double delta, double epsilon = 1e-6) {
  if (!(delta > 0.0 && delta < 1.0 / 2.4)) {
    throw std::invalid_argument(
        "ooband::solve_P1: delta must be in (0, 1/2.4) so the threshold is "
        "positive");
  }
  SolverConfig config;
  config.epsilon = epsilon;
  config.threshold = std::log(1.0 / (2.4 * delta));
  const auto ap = detail::make_problem(instance, expected_counts, config);
  P1Solution sol;
  sol.allocation = detail::solve_allocation(ap);
  sol.optimal_total = sol.allocation.total();
  return sol;
}

}  // namespace ooband
