#pragma once

#include <algorithm>
#include <chrono>
#include <numeric>
#include <vector>

#include "crsf/solver/greedy.hpp"
#include "crsf/solver/instance.hpp"

namespace crsf {

/// Depth-first branch-and-bound over requests. Requests are visited by
/// descending best feasible coefficient; each request tries its feasible SFs
/// by descending coefficient and then "unassigned". The bound adds to the
/// partial value the smaller of the capacity-free bound and a fractional
/// knapsack over the pooled residual capacity. Subtrees that can only tie the
/// incumbent are explored only while they may still yield a lexicographically
/// smaller vector, so the result is the lexicographically smallest optimum.
class RequestSearch {
 public:
  RequestSearch(const SelectionInstance& inst, SolveBudget budget) : inst_(inst), budget_(budget) {}

  Assignment run(const std::vector<std::size_t>* warm_start = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    deadline_ = start + budget_.time_limit;
    const std::size_t R = inst_.num_requests();
    const std::size_t M = inst_.num_sfs();

    std::vector<double> best(R, 0.0);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t m = 0; m < M; ++m)
        if (inst_.allowed(r, m)) best[r] = std::max(best[r], inst_.coefficients(r, m));
    order_.resize(R);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return best[a] > best[b]; });

    choice_.assign(R, kUnassigned);
    fixed_.assign(R, 0);
    load_.assign(M, 0.0);

    incumbent_ = greedy_choice(inst_, std::vector<std::size_t>(R, kUnassigned), inst_.capacity);
    incumbent_value_ = make_assignment(inst_, incumbent_).objective;
    if (warm_start && is_feasible_choice(inst_, *warm_start)) offer(*warm_start);

    aborted_ = false;
    nodes_ = 0;
    search(0, 0.0);

    Assignment out = make_assignment(inst_, incumbent_);
    out.optimal = !aborted_;
    out.stats.nodes = nodes_;
    out.stats.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

 private:
  void offer(const std::vector<std::size_t>& candidate) {
    const double value = make_assignment(inst_, candidate).objective;
    if (better_solution(value, candidate, incumbent_value_, incumbent_)) {
      incumbent_value_ = value;
      incumbent_ = candidate;
    }
  }

  bool over_budget() {
    if (nodes_ >= budget_.max_nodes) return true;
    if ((nodes_ & 1023u) == 0 && std::chrono::steady_clock::now() >= deadline_) return true;
    return false;
  }

  bool fits_in(std::size_t r, std::size_t m) const { return fits(load_[m] + inst_.utilization[r], inst_.capacity[m]); }

  double remaining_bound(std::size_t depth) const {
    const std::size_t M = inst_.num_sfs();
    double free_bound = 0.0;
    double pooled = 0.0;
    for (std::size_t m = 0; m < M; ++m) pooled += std::max(0.0, inst_.capacity[m] - load_[m]);
    pooled += 1e-9 * std::max(1.0, pooled);
    struct Item {
      double profit, weight;
    };
    std::vector<Item> items;
    for (std::size_t d = depth; d < order_.size(); ++d) {
      const std::size_t r = order_[d];
      double b = 0.0;
      for (std::size_t m = 0; m < M; ++m)
        if (inst_.allowed(r, m) && fits_in(r, m)) b = std::max(b, inst_.coefficients(r, m));
      if (b > 0.0) {
        free_bound += b;
        items.push_back({b, inst_.utilization[r]});
      }
    }
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.profit * b.weight > b.profit * a.weight; });
    double surrogate = 0.0;
    for (const auto& it : items) {
      if (it.weight <= pooled) {
        pooled -= it.weight;
        surrogate += it.profit;
      } else {
        surrogate += it.profit * pooled / it.weight;
        break;
      }
    }
    return std::min(free_bound, surrogate);
  }

  // True when every completion of the current partial vector is
  // lexicographically greater than the incumbent.
  bool prefix_after_incumbent() const {
    for (std::size_t r = 0; r < choice_.size(); ++r) {
      if (!fixed_[r]) return false;
      if (choice_[r] < incumbent_[r]) return false;
      if (choice_[r] > incumbent_[r]) return true;
    }
    return true;
  }

  void search(std::size_t depth, double value) {
    if (aborted_) return;
    if (over_budget()) {
      aborted_ = true;
      return;
    }
    ++nodes_;
    if (depth == order_.size()) {
      offer(choice_);
      return;
    }
    const double bound = value + remaining_bound(depth);
    const double tol = objective_tolerance(incumbent_value_);
    if (bound < incumbent_value_ - tol) return;
    if (bound <= incumbent_value_ + tol && prefix_after_incumbent()) return;

    const std::size_t r = order_[depth];
    std::vector<std::size_t> options;
    for (std::size_t m = 0; m < inst_.num_sfs(); ++m)
      if (inst_.allowed(r, m) && fits_in(r, m)) options.push_back(m);
    std::stable_sort(options.begin(), options.end(), [&](std::size_t a, std::size_t b) {
      return inst_.coefficients(r, a) > inst_.coefficients(r, b);
    });
    options.push_back(kUnassigned);

    fixed_[r] = 1;
    for (std::size_t m : options) {
      choice_[r] = m;
      if (m == kUnassigned) {
        search(depth + 1, value);
      } else {
        const double saved = load_[m];
        load_[m] += inst_.utilization[r];
        search(depth + 1, value + inst_.coefficients(r, m));
        load_[m] = saved;
      }
      if (aborted_) break;
    }
    choice_[r] = kUnassigned;
    fixed_[r] = 0;
  }

  const SelectionInstance& inst_;
  SolveBudget budget_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> choice_;
  std::vector<std::uint8_t> fixed_;
  std::vector<double> load_;
  std::vector<std::size_t> incumbent_;
  double incumbent_value_ = 0.0;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace crsf
