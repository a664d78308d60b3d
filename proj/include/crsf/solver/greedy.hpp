#pragma once

#include <algorithm>
#include <numeric>
#include <tuple>
#include <vector>

#include "crsf/solver/instance.hpp"

namespace crsf {

// Walks request-SF pairs by descending coefficient (ties: lower request, then
// lower SF) and takes every pair that is latency-feasible, whose request is
// still open and whose SF still has room.
inline std::vector<std::size_t> greedy_choice(const SelectionInstance& inst, std::vector<std::size_t> choice,
                                              std::vector<double> residual) {
  const std::size_t R = inst.num_requests();
  const std::size_t M = inst.num_sfs();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(R * M);
  for (std::size_t r = 0; r < R; ++r) {
    if (choice[r] != kUnassigned) continue;
    for (std::size_t m = 0; m < M; ++m)
      if (inst.allowed(r, m) && inst.coefficients(r, m) >= 0.0) pairs.emplace_back(r, m);
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return inst.coefficients(a.first, a.second) > inst.coefficients(b.first, b.second);
  });
  for (const auto& [r, m] : pairs) {
    if (choice[r] != kUnassigned || !fits(inst.utilization[r], residual[m])) continue;
    choice[r] = m;
    residual[m] -= inst.utilization[r];
  }
  return choice;
}

inline Assignment solve_greedy(const SelectionInstance& inst) {
  inst.validate();
  auto choice = greedy_choice(inst, std::vector<std::size_t>(inst.num_requests(), kUnassigned), inst.capacity);
  Assignment out = make_assignment(inst, choice);
  // Provably optimal only when it reaches the capacity-free bound.
  out.optimal = out.objective >= capacity_free_bound(inst) - objective_tolerance(out.objective);
  return out;
}

}  // namespace crsf
