#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "crsf/core.hpp"

namespace crsf {

/// Frozen per-slot assignment problem. Latency constraints are already
/// compiled into `feasible`: a request picks at most one SF, so its latency
/// constraint only ever involves the single chosen pair.
struct SelectionInstance {
  Matrix<double> coefficients;       // |R| x |M|, c = S * Q
  Matrix<std::uint8_t> feasible;     // |R| x |M|, L <= T of the request's category
  std::vector<double> utilization;   // |R|, U of the request's category
  std::vector<double> capacity;      // |M|

  std::size_t num_requests() const noexcept { return utilization.size(); }
  std::size_t num_sfs() const noexcept { return capacity.size(); }

  bool allowed(std::size_t r, std::size_t m) const { return feasible(r, m) != 0; }

  /// Throws Error(invalid_argument) when dimensions or values are inconsistent.
  void validate() const {
    const std::size_t R = utilization.size();
    const std::size_t M = capacity.size();
    if (coefficients.rows() != R || coefficients.cols() != M)
      throw Error(ErrorCode::invalid_argument, "coefficient matrix must be |R| x |M|");
    if (feasible.rows() != R || feasible.cols() != M)
      throw Error(ErrorCode::invalid_argument, "feasibility matrix must be |R| x |M|");
    for (double c : coefficients.data())
      if (!std::isfinite(c)) throw Error(ErrorCode::invalid_argument, "coefficients must be finite");
    for (double u : utilization)
      if (!(u > 0.0) || !std::isfinite(u)) throw Error(ErrorCode::invalid_argument, "utilization must be positive");
    for (double c : capacity)
      if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::invalid_argument, "capacity must be nonnegative");
  }
};

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t lp_iterations = 0;
  std::uint64_t columns = 0;
  double elapsed_ms = 0.0;
};

struct Assignment {
  std::vector<std::optional<std::size_t>> assigned;  // request index -> SF index
  double objective = 0.0;
  bool optimal = false;
  std::vector<double> per_request_value;
  SolveStats stats;

  std::size_t assigned_count() const {
    std::size_t n = 0;
    for (const auto& a : assigned) n += a.has_value();
    return n;
  }
};

struct SolveBudget {
  std::uint64_t max_nodes = 10'000'000;
  std::chrono::milliseconds time_limit{30'000};
  /// Deterministic work limit for the LP-based search (simplex pivots).
  std::uint64_t max_lp_iterations = std::numeric_limits<std::uint64_t>::max();
  /// Stop once the best bound is within this fraction of the incumbent; the
  /// result then reports `optimal = false` unless it was proven anyway.
  double relative_gap = 0.0;
};

/// Sentinel in choice vectors: the request stays unassigned. It ranks after
/// every SF index, so lexicographic order prefers serving a request.
inline constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

/// Builds an Assignment from a per-request choice vector, evaluating values
/// under the instance coefficients in request order.
inline Assignment make_assignment(const SelectionInstance& inst, const std::vector<std::size_t>& choice) {
  Assignment a;
  const std::size_t R = inst.num_requests();
  a.assigned.assign(R, std::nullopt);
  a.per_request_value.assign(R, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    if (choice[r] == kUnassigned) continue;
    a.assigned[r] = choice[r];
    a.per_request_value[r] = inst.coefficients(r, choice[r]);
    total += a.per_request_value[r];
  }
  a.objective = total;
  return a;
}

inline std::vector<std::size_t> choice_vector(const Assignment& a) {
  std::vector<std::size_t> out(a.assigned.size(), kUnassigned);
  for (std::size_t r = 0; r < a.assigned.size(); ++r)
    if (a.assigned[r]) out[r] = *a.assigned[r];
  return out;
}

/// Re-evaluates an assignment under another coefficient matrix (used to report
/// the priority-only baseline in priority-weighted QoS units).
inline Assignment reevaluate(const SelectionInstance& inst, const Assignment& a) {
  Assignment out = make_assignment(inst, choice_vector(a));
  out.optimal = a.optimal;
  out.stats = a.stats;
  return out;
}

/// True when every choice respects the latency mask and the capacities.
inline bool is_feasible_choice(const SelectionInstance& inst, const std::vector<std::size_t>& choice) {
  const std::size_t M = inst.num_sfs();
  if (choice.size() != inst.num_requests()) return false;
  std::vector<double> load(M, 0.0);
  for (std::size_t r = 0; r < choice.size(); ++r) {
    const std::size_t m = choice[r];
    if (m == kUnassigned) continue;
    if (m >= M || !inst.allowed(r, m)) return false;
    load[m] += inst.utilization[r];
  }
  for (std::size_t m = 0; m < M; ++m)
    if (!fits(load[m], inst.capacity[m])) return false;
  return true;
}

/// Re-checks latency feasibility, capacity, the at-most-one rule and the
/// reported objective against the instance.
inline bool verify_assignment(const SelectionInstance& inst, const Assignment& a) {
  const std::size_t R = inst.num_requests();
  const std::size_t M = inst.num_sfs();
  if (a.assigned.size() != R || a.per_request_value.size() != R) return false;
  std::vector<double> load(M, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    // std::optional makes "at most one SF per request" structural.
    if (!a.assigned[r]) {
      if (a.per_request_value[r] != 0.0) return false;
      continue;
    }
    const std::size_t m = *a.assigned[r];
    if (m >= M || !inst.allowed(r, m)) return false;
    load[m] += inst.utilization[r];
    const double expected = inst.coefficients(r, m);
    if (std::abs(a.per_request_value[r] - expected) > objective_tolerance(expected)) return false;
    total += expected;
  }
  for (std::size_t m = 0; m < M; ++m)
    if (!fits(load[m], inst.capacity[m])) return false;
  return std::abs(total - a.objective) <= objective_tolerance(total);
}

/// Strict "better" order among candidate solutions: a larger objective wins;
/// objectives within tolerance fall back to the lexicographically smaller
/// choice vector.
inline bool better_solution(double value, const std::vector<std::size_t>& choice, double incumbent_value,
                            const std::vector<std::size_t>& incumbent) {
  const double tol = objective_tolerance(std::max(std::abs(value), std::abs(incumbent_value)));
  if (value > incumbent_value + tol) return true;
  if (value < incumbent_value - tol) return false;
  return std::lexicographical_compare(choice.begin(), choice.end(), incumbent.begin(), incumbent.end());
}

/// Upper bound on any assignment that ignores capacities: each request takes
/// its best positive feasible coefficient.
inline double capacity_free_bound(const SelectionInstance& inst) {
  double total = 0.0;
  for (std::size_t r = 0; r < inst.num_requests(); ++r) {
    double best = 0.0;
    for (std::size_t m = 0; m < inst.num_sfs(); ++m)
      if (inst.allowed(r, m) && fits(inst.utilization[r], inst.capacity[m]))
        best = std::max(best, inst.coefficients(r, m));
    total += best;
  }
  return total;
}

}  // namespace crsf
