#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crsf/solver/branch_and_price.hpp"
#include "crsf/solver/brute_force.hpp"
#include "crsf/solver/greedy.hpp"
#include "crsf/solver/instance.hpp"
#include "crsf/solver/request_search.hpp"

namespace crsf {

enum class ExactMethod { automatic, request_search, branch_and_price };

struct SolveOptions {
  SolveBudget budget;
  ExactMethod method = ExactMethod::automatic;
  /// Optional feasible starting solution (request index -> SF index or kUnassigned).
  std::optional<std::vector<std::size_t>> warm_start;
};

/// Batches up to this size use the request-level search, which returns the
/// lexicographically smallest optimum.
inline constexpr std::size_t kRequestSearchMaxRequests = 12;

inline Assignment solve_exact(const SelectionInstance& inst, const SolveOptions& options = {}) {
  inst.validate();
  ExactMethod method = options.method;
  if (method == ExactMethod::automatic)
    method = inst.num_requests() <= kRequestSearchMaxRequests ? ExactMethod::request_search
                                                              : ExactMethod::branch_and_price;
  const std::vector<std::size_t>* warm = options.warm_start ? &*options.warm_start : nullptr;
  if (method == ExactMethod::request_search) return RequestSearch(inst, options.budget).run(warm);
  return BranchAndPrice(inst, options.budget).run(warm);
}

/// Priority-only baseline: maximizes the sum of priority weights S under the
/// same feasibility and capacity constraints, then reports the assignment
/// under the instance's priority-weighted QoS coefficients.
inline Assignment solve_baseline(const SelectionInstance& inst, const Matrix<double>& priorities,
                                 const SolveOptions& options = {}) {
  inst.validate();
  if (priorities.rows() != inst.num_requests() || priorities.cols() != inst.num_sfs())
    throw Error(ErrorCode::invalid_argument, "priority matrix must be |R| x |M|");
  SelectionInstance by_priority = inst;
  by_priority.coefficients = priorities;
  return reevaluate(inst, solve_exact(by_priority, options));
}

enum class SolverChoice { exact, greedy, baseline, brute };

inline const char* to_string(SolverChoice s) {
  switch (s) {
    case SolverChoice::exact: return "exact";
    case SolverChoice::greedy: return "greedy";
    case SolverChoice::baseline: return "baseline";
    case SolverChoice::brute: return "brute";
  }
  return "?";
}

inline SolverChoice parse_solver_choice(const std::string& s) {
  for (auto c : {SolverChoice::exact, SolverChoice::greedy, SolverChoice::baseline, SolverChoice::brute})
    if (s == to_string(c)) return c;
  throw Error(ErrorCode::invalid_argument, "unknown solver '" + s + "'");
}

/// Dispatches to one solver; `priorities` is only read by the baseline.
inline Assignment solve_with(SolverChoice choice, const SelectionInstance& inst, const Matrix<double>& priorities,
                             const SolveOptions& options = {}) {
  switch (choice) {
    case SolverChoice::exact: return solve_exact(inst, options);
    case SolverChoice::greedy: return solve_greedy(inst);
    case SolverChoice::baseline: return solve_baseline(inst, priorities, options);
    case SolverChoice::brute: inst.validate(); return brute_force(inst);
  }
  throw Error(ErrorCode::invalid_argument, "unknown solver");
}

}  // namespace crsf
