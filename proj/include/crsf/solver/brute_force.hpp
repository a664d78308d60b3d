#pragma once

#include <cstdint>
#include <vector>

#include "crsf/solver/instance.hpp"

namespace crsf {

inline constexpr std::uint64_t kDefaultEnumerationCap = 2'000'000;

/// Exhaustive oracle: walks every request -> (SF | unassigned) vector in
/// lexicographic order and keeps the best feasible one. Ties keep the first,
/// i.e. the lexicographically smallest, vector.
inline Assignment brute_force(const SelectionInstance& inst, std::uint64_t cap = kDefaultEnumerationCap) {
  inst.validate();
  const std::size_t R = inst.num_requests();
  const std::size_t M = inst.num_sfs();

  // (M+1)^R without overflow.
  std::uint64_t count = 1;
  for (std::size_t r = 0; r < R; ++r) {
    if (count > cap / (M + 1)) throw Error(ErrorCode::capacity_exceeded, "instance exceeds the enumeration cap");
    count *= M + 1;
  }
  if (count > cap) throw Error(ErrorCode::capacity_exceeded, "instance exceeds the enumeration cap");

  // digit M encodes "unassigned" so the odometer order is the lexicographic order.
  std::vector<std::size_t> digits(R, 0);
  std::vector<std::size_t> best_choice(R, kUnassigned);
  double best_value = 0.0;
  std::vector<std::size_t> choice(R);
  std::uint64_t visited = 0;

  for (;;) {
    ++visited;
    for (std::size_t r = 0; r < R; ++r) choice[r] = digits[r] == M ? kUnassigned : digits[r];
    if (is_feasible_choice(inst, choice)) {
      double value = 0.0;
      for (std::size_t r = 0; r < R; ++r)
        if (choice[r] != kUnassigned) value += inst.coefficients(r, choice[r]);
      if (better_solution(value, choice, best_value, best_choice)) {
        best_value = value;
        best_choice = choice;
      }
    }
    // Increment from the last position so earlier requests vary slowest.
    std::size_t pos = R;
    while (pos > 0) {
      --pos;
      if (++digits[pos] <= M) break;
      digits[pos] = 0;
      if (pos == 0) {
        pos = R;  // wrapped
        break;
      }
    }
    if (pos == R || R == 0) break;
  }

  Assignment out = make_assignment(inst, best_choice);
  out.optimal = true;
  out.stats.nodes = visited;
  return out;
}

}  // namespace crsf
