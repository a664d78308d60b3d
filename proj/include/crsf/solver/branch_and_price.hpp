#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "crsf/solver/greedy.hpp"
#include "crsf/solver/instance.hpp"
#include "crsf/solver/knapsack.hpp"
#include "crsf/solver/local_search.hpp"
#include "crsf/solver/packing_lp.hpp"
#include "crsf/solver/transport.hpp"

namespace crsf {

/// Exact solver for larger batches (branch-and-price).
///
/// Each column is the set of requests one SF serves; the master LP packs
/// columns so that every request and every SF is used at most once, and
/// columns are priced by a 0-1 knapsack per SF. Requests with equal
/// utilization form a class. Branching restricts how many requests of a class
/// an SF serves: once those counts are integral, the remaining choice of which
/// requests fill the slots is a transportation problem per class, which has an
/// integral optimum. Request-SF pairs are fixed or forbidden only as a fallback.
///
/// Node bounds use the Lagrangian value
///   fixed value + sum_r lambda_r + sum_m knapsack_m(lambda)
/// which is an upper bound for every lambda >= 0, so LP round-off can never
/// prune an optimum.
class BranchAndPrice {
 public:
  BranchAndPrice(const SelectionInstance& inst, SolveBudget budget) : inst_(inst), budget_(budget) {}

  Assignment run(const std::vector<std::size_t>* warm_start = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    deadline_ = start + budget_.time_limit;
    const std::size_t R = inst_.num_requests();
    const std::size_t M = inst_.num_sfs();

    std::vector<double> weights = inst_.utilization;
    std::sort(weights.begin(), weights.end());
    weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
    W_ = weights.size();
    class_of_.resize(R);
    for (std::size_t r = 0; r < R; ++r)
      class_of_[r] = static_cast<std::size_t>(
          std::lower_bound(weights.begin(), weights.end(), inst_.utilization[r]) - weights.begin());

    bonus_ = 1.0;
    for (std::size_t r = 0; r < R; ++r) {
      double b = 0.0;
      for (std::size_t m = 0; m < M; ++m) b = std::max(b, inst_.coefficients(r, m));
      bonus_ += b;
    }
    penalty_ = 4.0 * bonus_;
    pool_by_sf_.assign(M, {});
    lp_ = std::make_unique<PackingLp>(std::vector<double>(R + M, 1.0));

    incumbent_.assign(R, kUnassigned);
    incumbent_value_ = 0.0;
    offer(greedy_choice(inst_, std::vector<std::size_t>(R, kUnassigned), inst_.capacity));
    if (warm_start) offer(*warm_start);

    const double free_bound = capacity_free_bound(inst_);
    if (incumbent_value_ < free_bound - objective_tolerance(free_bound)) {
      Node node;
      node.fixed.assign(R, kUnassigned);
      node.forbidden.assign(R * M, 0);
      node.window.assign(M * W_, ClassBounds{});
      explore(node);
    }

    fill_leftovers(incumbent_);
    Assignment out = make_assignment(inst_, incumbent_);
    out.optimal = !aborted_ && !gap_pruned_;
    out.stats.nodes = nodes_;
    out.stats.lp_iterations = lp_iterations_;
    out.stats.columns = pool_.size();
    out.stats.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

 private:
  struct Column {
    std::size_t sf;
    std::vector<std::size_t> requests;  // ascending
    std::vector<std::uint16_t> counts;  // per class
    double weight;
    double value;
  };

  // Branching state. Count windows bound the total number of requests of a
  // class served by an SF, fixed ones included.
  struct Node {
    std::vector<std::size_t> fixed;
    std::vector<std::uint8_t> forbidden;
    std::vector<ClassBounds> window;  // [m * W + w]
  };

  static constexpr double kIntegralTol = 1e-6;

  bool over_budget() {
    if (nodes_ >= budget_.max_nodes || lp_iterations_ >= budget_.max_lp_iterations ||
        std::chrono::steady_clock::now() >= deadline_)
      aborted_ = true;
    return aborted_;
  }

  std::size_t add_to_pool(std::size_t m, std::vector<std::size_t> requests) {
    auto [it, inserted] = pool_by_sf_[m].try_emplace(requests, pool_.size());
    if (!inserted) return it->second;
    Column col{m, std::move(requests), std::vector<std::uint16_t>(W_, 0), 0.0, 0.0};
    for (std::size_t r : col.requests) {
      col.weight += inst_.utilization[r];
      col.value += inst_.coefficients(r, m);
      ++col.counts[class_of_[r]];
    }
    std::vector<std::uint32_t> entries(col.requests.begin(), col.requests.end());
    entries.push_back(static_cast<std::uint32_t>(inst_.num_requests() + m));
    lp_->add_column(-penalty_, std::move(entries), false);
    pool_.push_back(std::move(col));
    return pool_.size() - 1;
  }

  void offer(std::vector<std::size_t> candidate) {
    if (!is_feasible_choice(inst_, candidate)) return;
    candidate = improve_choice(inst_, std::move(candidate));
    const double value = make_assignment(inst_, candidate).objective;
    if (!better_solution(value, candidate, incumbent_value_, incumbent_)) return;
    incumbent_value_ = value;
    incumbent_ = candidate;
    std::vector<std::vector<std::size_t>> sets(inst_.num_sfs());
    for (std::size_t r = 0; r < candidate.size(); ++r)
      if (candidate[r] != kUnassigned && inst_.coefficients(r, candidate[r]) > 0.0) sets[candidate[r]].push_back(r);
    for (std::size_t m = 0; m < sets.size(); ++m)
      if (!sets[m].empty()) add_to_pool(m, std::move(sets[m]));
  }

  // Serves leftover requests with nonnegative value at the lowest-index SF
  // with room; this never lowers the objective and makes the vector smaller.
  void fill_leftovers(std::vector<std::size_t>& choice) const {
    std::vector<double> load(inst_.num_sfs(), 0.0);
    for (std::size_t r = 0; r < choice.size(); ++r)
      if (choice[r] != kUnassigned) load[choice[r]] += inst_.utilization[r];
    for (std::size_t r = 0; r < choice.size(); ++r) {
      if (choice[r] != kUnassigned) continue;
      for (std::size_t m = 0; m < inst_.num_sfs(); ++m) {
        if (!inst_.allowed(r, m) || inst_.coefficients(r, m) < 0.0) continue;
        if (!fits(load[m] + inst_.utilization[r], inst_.capacity[m])) continue;
        choice[r] = m;
        load[m] += inst_.utilization[r];
        break;
      }
    }
  }

  bool pruned(double bound) {
    if (bound <= incumbent_value_ + objective_tolerance(incumbent_value_)) return true;
    if (bound <= incumbent_value_ + budget_.relative_gap * std::abs(incumbent_value_)) {
      gap_pruned_ = true;
      return true;
    }
    return false;
  }

  // Completes `fixed` by filling the given per-(SF, class) slot counts with
  // free requests (one transportation problem per class), then greedily.
  void fill_slots(const Node& node, const std::vector<long>& slots,
                  const std::function<bool(std::size_t, std::size_t)>& usable) {
    const std::size_t R = inst_.num_requests();
    const std::size_t M = inst_.num_sfs();
    std::vector<std::size_t> choice = node.fixed;
    for (std::size_t w = 0; w < W_; ++w) {
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < R; ++r)
        if (class_of_[r] == w && node.fixed[r] == kUnassigned) rows.push_back(r);
      std::vector<std::size_t> slot_sf;
      for (std::size_t m = 0; m < M; ++m)
        for (long k = 0; k < slots[m * W_ + w]; ++k) slot_sf.push_back(m);
      if (rows.empty() || slot_sf.empty()) continue;
      const std::size_t cols = slot_sf.size() + rows.size();
      Matrix<double> profit(rows.size(), cols, 0.0);
      const double forbid = -bonus_;
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < slot_sf.size(); ++j)
          profit(i, j) = usable(rows[i], slot_sf[j]) ? inst_.coefficients(rows[i], slot_sf[j]) : forbid;
      const auto col = max_profit_assignment(profit);
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (col[i] < slot_sf.size() && profit(i, col[i]) > 0.0) choice[rows[i]] = slot_sf[col[i]];
    }
    std::vector<double> residual = inst_.capacity;
    for (std::size_t r = 0; r < R; ++r)
      if (choice[r] != kUnassigned) residual[choice[r]] -= inst_.utilization[r];
    offer(greedy_choice(inst_, std::move(choice), std::move(residual)));
  }

  void explore(Node& node) {
    if (over_budget()) return;
    ++nodes_;
    const std::size_t R = inst_.num_requests();
    const std::size_t M = inst_.num_sfs();

    double fixed_value = 0.0;
    std::vector<double> fixed_load(M, 0.0);
    std::vector<long> fixed_count(M * W_, 0);
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t m = node.fixed[r];
      if (m == kUnassigned) continue;
      fixed_value += inst_.coefficients(r, m);
      fixed_load[m] += inst_.utilization[r];
      ++fixed_count[m * W_ + class_of_[r]];
    }
    std::vector<double> limit(M);
    for (std::size_t m = 0; m < M; ++m) {
      const double cap = inst_.capacity[m];
      limit[m] = cap + 1e-9 * std::max(1.0, std::abs(cap)) - fixed_load[m];
    }

    // Count windows for the free part of each SF's load.
    std::vector<std::vector<ClassBounds>> free_window(M, std::vector<ClassBounds>(W_));
    std::vector<std::uint8_t> must_use(M, 0);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t w = 0; w < W_; ++w) {
        const ClassBounds& b = node.window[m * W_ + w];
        const auto f = static_cast<std::size_t>(fixed_count[m * W_ + w]);
        if (b.hi < f) return;  // fixed requests already exceed the window
        ClassBounds& fb = free_window[m][w];
        fb.lo = b.lo > f ? b.lo - f : 0;
        fb.hi = b.hi == std::numeric_limits<std::size_t>::max() ? b.hi : b.hi - f;
        if (fb.lo > 0) must_use[m] = 1;
      }

    auto usable = [&](std::size_t r, std::size_t m) {
      return node.fixed[r] == kUnassigned && inst_.allowed(r, m) && !node.forbidden[r * M + m] &&
             inst_.coefficients(r, m) > 0.0 && inst_.utilization[r] <= limit[m] &&
             free_window[m][class_of_[r]].hi > 0;
    };
    auto column_fits = [&](const Column& col) {
      if (col.weight > limit[col.sf]) return false;
      for (std::size_t w = 0; w < W_; ++w) {
        const ClassBounds& fb = free_window[col.sf][w];
        if (col.counts[w] < fb.lo || col.counts[w] > fb.hi) return false;
      }
      for (std::size_t r : col.requests)
        if (!usable(r, col.sf)) return false;
      return true;
    };

    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t m = 0; m < M; ++m)
        if (usable(r, m)) {
          rows.push_back(r);
          break;
        }

    // Reprice the shared master: columns invalid here are disabled.
    std::vector<std::uint8_t> enabled(pool_.size(), 0);
    auto cost_of = [&](const Column& col) { return col.value + (must_use[col.sf] ? bonus_ : 0.0); };
    for (std::size_t idx = 0; idx < pool_.size(); ++idx) {
      enabled[idx] = column_fits(pool_[idx]);
      lp_->set_column(idx, enabled[idx] ? cost_of(pool_[idx]) : -penalty_, enabled[idx] != 0);
    }

    double bound = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::vector<KnapsackItem> items;
    for (;;) {
      const auto before = lp_->iterations();
      const auto status = lp_->solve();
      lp_iterations_ += lp_->iterations() - before;
      const auto& y = lp_->duals();

      double lagrangian = fixed_value;
      for (std::size_t r : rows) lagrangian += std::max(0.0, y[r]);
      bool added = false;
      for (std::size_t m = 0; m < M; ++m) {
        items.clear();
        for (std::size_t r : rows)
          if (usable(r, m))
            items.push_back({r, class_of_[r], inst_.coefficients(r, m) - std::max(0.0, y[r]), inst_.utilization[r]});
        const KnapsackResult kp = knapsack_.solve(items, limit[m], free_window[m]);
        if (!kp.feasible) {
          if (must_use[m]) return;  // the node admits no solution
          continue;
        }
        lagrangian += must_use[m] ? kp.upper_bound : std::max(0.0, kp.upper_bound);
        if (kp.items.empty()) continue;
        const double cost = kp.value + (must_use[m] ? bonus_ : 0.0);
        if (cost - std::max(0.0, y[R + m]) <= 1e-9 * std::max(1.0, std::abs(cost))) continue;
        const std::size_t idx = add_to_pool(m, kp.items);
        if (idx < enabled.size() && enabled[idx]) continue;
        enabled.resize(pool_.size(), 0);
        enabled[idx] = 1;
        lp_->set_column(idx, cost_of(pool_[idx]), true);
        added = true;
      }
      bound = std::min(bound, lagrangian);
      if (pruned(bound)) return;
      if (!added) {
        converged = status == PackingLp::Status::optimal;
        break;
      }
      if (over_budget()) return;
    }

    const std::vector<double> z = lp_->primal();
    std::vector<double> n(M * W_, 0.0), used(M, 0.0), x(R * M, 0.0);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t w = 0; w < W_; ++w) n[m * W_ + w] = static_cast<double>(fixed_count[m * W_ + w]);
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (z[j] <= 1e-12 || j >= enabled.size() || !enabled[j]) continue;
      const Column& col = pool_[j];
      used[col.sf] += z[j];
      for (std::size_t w = 0; w < W_; ++w) n[col.sf * W_ + w] += z[j] * col.counts[w];
      for (std::size_t r : col.requests) x[r * M + col.sf] += z[j];
    }

    bool integral = true;
    std::vector<long> floor_slots(M * W_), round_slots(M * W_);
    for (std::size_t k = 0; k < M * W_; ++k) {
      const double fl = std::floor(n[k] + kIntegralTol);
      if (n[k] - fl > kIntegralTol) integral = false;
      floor_slots[k] = static_cast<long>(fl) - fixed_count[k];
      round_slots[k] = static_cast<long>(std::llround(n[k])) - fixed_count[k];
    }
    fill_slots(node, floor_slots, usable);
    if (integral) fill_slots(node, round_slots, usable);
    if (pruned(bound)) return;

    bool must_use_met = true;
    for (std::size_t m = 0; m < M; ++m)
      if (must_use[m] && used[m] < 1.0 - kIntegralTol) must_use_met = false;
    // Integral counts at an LP optimum: the transportation fill above is at
    // least as good as the relaxation, so the node is solved.
    if (integral && converged && must_use_met) return;

    // Branch on the most fractional class count.
    std::size_t bk = M * W_;
    double best_score = kIntegralTol;
    for (std::size_t k = 0; k < M * W_; ++k) {
      const double frac = n[k] - std::floor(n[k]);
      const double score = std::min(frac, 1.0 - frac);
      if (score > best_score && n[k] > static_cast<double>(node.window[k].lo)) {
        best_score = score;
        bk = k;
      }
    }
    if (bk < M * W_) {
      const ClassBounds saved = node.window[bk];
      const auto down = static_cast<std::size_t>(std::floor(n[bk]));
      node.window[bk].lo = down + 1;
      explore(node);
      node.window[bk] = saved;
      if (aborted_ || pruned(bound)) return;
      node.window[bk].hi = down;
      explore(node);
      node.window[bk] = saved;
      return;
    }

    // Fallback: fix or forbid one request-SF pair.
    std::size_t br = R, bm = M;
    double best_x = -1.0;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t m = 0; m < M; ++m) {
        if (!usable(r, m)) continue;
        const double v = x[r * M + m];
        const double frac = std::min(v, 1.0 - v);
        if (frac > best_x + 1e-12) {
          best_x = frac;
          br = r;
          bm = m;
        }
      }
    if (br == R) return;
    node.fixed[br] = bm;
    explore(node);
    node.fixed[br] = kUnassigned;
    if (aborted_ || pruned(bound)) return;
    node.forbidden[br * M + bm] = 1;
    explore(node);
    node.forbidden[br * M + bm] = 0;
  }

  const SelectionInstance& inst_;
  SolveBudget budget_;
  std::chrono::steady_clock::time_point deadline_;
  KnapsackSolver knapsack_;
  std::size_t W_ = 0;
  std::vector<std::size_t> class_of_;
  double bonus_ = 1.0;
  double penalty_ = 4.0;
  // Master LP shared by all nodes: rows are the requests, then the SFs; the
  // column of pool entry j is LP column j.
  std::unique_ptr<PackingLp> lp_;
  std::vector<Column> pool_;
  std::vector<std::map<std::vector<std::size_t>, std::size_t>> pool_by_sf_;
  std::vector<std::size_t> incumbent_;
  double incumbent_value_ = 0.0;
  std::uint64_t nodes_ = 0;
  std::uint64_t lp_iterations_ = 0;
  bool aborted_ = false;
  bool gap_pruned_ = false;
};

}  // namespace crsf
