#pragma once

#include <vector>

#include "crsf/solver/instance.hpp"

namespace crsf {

/// Improves a feasible choice vector by first-improvement local search over
/// inserts, moves, pairwise swaps and evictions (the evicted request may move
/// to another SF). Every accepted step raises the objective by more than the
/// objective tolerance, so the search terminates.
inline std::vector<std::size_t> improve_choice(const SelectionInstance& inst, std::vector<std::size_t> choice) {
  const std::size_t R = inst.num_requests();
  const std::size_t M = inst.num_sfs();
  const auto& U = inst.utilization;
  auto c = [&](std::size_t r, std::size_t m) { return inst.coefficients(r, m); };
  auto ok = [&](std::size_t r, std::size_t m) { return inst.allowed(r, m) && c(r, m) >= 0.0; };

  std::vector<double> load(M, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < R; ++r)
    if (choice[r] != kUnassigned) {
      load[choice[r]] += U[r];
      total += c(r, choice[r]);
    }
  auto room = [&](std::size_t m, double delta) { return fits(load[m] + delta, inst.capacity[m]); };
  auto value = [&](std::size_t r) { return choice[r] == kUnassigned ? 0.0 : c(r, choice[r]); };

  bool improved = true;
  while (improved) {
    improved = false;
    const double eps = objective_tolerance(total);
    auto accept = [&](double gain) {
      if (gain <= eps) return false;
      total += gain;
      improved = true;
      return true;
    };

    // Insert or move a single request.
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t from = choice[r];
      std::size_t best = kUnassigned;
      double best_gain = eps;
      for (std::size_t m = 0; m < M; ++m) {
        if (m == from || !ok(r, m) || !room(m, U[r])) continue;
        const double gain = c(r, m) - value(r);
        if (gain > best_gain) {
          best_gain = gain;
          best = m;
        }
      }
      if (best == kUnassigned || !accept(best_gain)) continue;
      if (from != kUnassigned) load[from] -= U[r];
      load[best] += U[r];
      choice[r] = best;
    }

    // Swap the SFs of two assigned requests.
    for (std::size_t a = 0; a < R; ++a) {
      for (std::size_t b = a + 1; b < R; ++b) {
        const std::size_t ma = choice[a], mb = choice[b];
        if (ma == kUnassigned || mb == kUnassigned || ma == mb) continue;
        if (!ok(a, mb) || !ok(b, ma)) continue;
        const double gain = c(a, mb) + c(b, ma) - c(a, ma) - c(b, mb);
        if (gain <= eps || !room(ma, U[b] - U[a]) || !room(mb, U[a] - U[b])) continue;
        accept(gain);
        load[ma] += U[b] - U[a];
        load[mb] += U[a] - U[b];
        choice[a] = mb;
        choice[b] = ma;
      }
    }

    // Put an unassigned request in place of an assigned one, which either
    // moves to another SF with room or becomes unassigned.
    for (std::size_t r = 0; r < R; ++r) {
      if (choice[r] != kUnassigned) continue;
      for (std::size_t v = 0; v < R && choice[r] == kUnassigned; ++v) {
        const std::size_t m = choice[v];
        if (m == kUnassigned || !ok(r, m) || !room(m, U[r] - U[v])) continue;
        std::size_t dest = kUnassigned;
        double dest_value = 0.0;
        for (std::size_t k = 0; k < M; ++k)
          if (k != m && ok(v, k) && room(k, U[v]) && c(v, k) > dest_value) {
            dest_value = c(v, k);
            dest = k;
          }
        if (!accept(c(r, m) - c(v, m) + dest_value)) continue;
        load[m] += U[r] - U[v];
        if (dest != kUnassigned) load[dest] += U[v];
        choice[v] = dest;
        choice[r] = m;
      }
    }
  }
  return choice;
}

}  // namespace crsf
