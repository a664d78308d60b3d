#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace crsf {

struct KnapsackItem {
  std::size_t id = 0;
  std::size_t cls = 0;  // items of one class share the weight
  double profit = 0.0;
  double weight = 0.0;
};

/// Per-class count window for the chosen items.
struct ClassBounds {
  std::size_t lo = 0;
  std::size_t hi = std::numeric_limits<std::size_t>::max();
};

struct KnapsackResult {
  bool feasible = true;  // false when the bounds admit no selection
  double value = 0.0;
  /// Upper bound on the optimum; equals `value` when `exact`.
  double upper_bound = 0.0;
  std::vector<std::size_t> items;  // ids, ascending
  bool exact = true;
  std::uint64_t nodes = 0;
};

/// 0-1 knapsack whose items come in equal-weight classes. Within a class only
/// the most profitable items are ever worth taking, so a selection is a count
/// per class; the search enumerates counts class by class under a fractional
/// (Dantzig) bound. Optional per-class count windows restrict the selection;
/// a positive lower bound may force items with nonpositive profit in.
class KnapsackSolver {
 public:
  explicit KnapsackSolver(std::uint64_t node_limit = 2'000'000) : node_limit_(node_limit) {}

  /// `bounds` is indexed by class id; classes beyond its size are unbounded.
  KnapsackResult solve(const std::vector<KnapsackItem>& input, double limit,
                       const std::vector<ClassBounds>& bounds = {}) {
    groups_.clear();
    std::vector<KnapsackItem> items = input;
    std::sort(items.begin(), items.end(), [](const KnapsackItem& a, const KnapsackItem& b) {
      if (a.cls != b.cls) return a.cls < b.cls;
      if (a.profit != b.profit) return a.profit > b.profit;
      return a.id < b.id;
    });
    KnapsackResult out;
    for (std::size_t i = 0; i < items.size();) {
      std::size_t j = i;
      Group g;
      g.weight = items[i].weight;
      const ClassBounds b = items[i].cls < bounds.size() ? bounds[items[i].cls] : ClassBounds{};
      g.lo = b.lo;
      std::size_t positive = 0;
      for (; j < items.size() && items[j].cls == items[i].cls; ++j) {
        g.ids.push_back(items[j].id);
        g.prefix.push_back((g.prefix.empty() ? 0.0 : g.prefix.back()) + items[j].profit);
        positive += items[j].profit > 0.0;
      }
      // Counts past the positive items only matter when a lower bound forces them.
      g.hi = std::min({b.hi, g.ids.size(), std::max(positive, g.lo)});
      if (g.lo > g.hi) {
        out.feasible = false;
        return out;
      }
      if (g.hi > 0) groups_.push_back(std::move(g));
      i = j;
    }
    // Classes with a lower bound but no items.
    for (std::size_t c = 0; c < bounds.size(); ++c) {
      if (bounds[c].lo == 0) continue;
      bool present = false;
      for (const auto& it : items) present = present || it.cls == c;
      if (!present) {
        out.feasible = false;
        return out;
      }
    }
    std::sort(groups_.begin(), groups_.end(), [](const Group& a, const Group& b) {
      const double ra = a.prefix[0] * b.weight;
      const double rb = b.prefix[0] * a.weight;
      if (ra != rb) return ra > rb;
      return a.ids[0] < b.ids[0];
    });

    // Positive items of all groups by profit density, for the fractional bound.
    order_.clear();
    for (std::size_t g = 0; g < groups_.size(); ++g)
      for (std::size_t k = 0; k < groups_[g].hi; ++k) {
        const double p = groups_[g].prefix[k] - (k ? groups_[g].prefix[k - 1] : 0.0);
        if (p > 0.0) order_.push_back({g, k, p, p / groups_[g].weight});
      }
    std::stable_sort(order_.begin(), order_.end(), [](const Ranked& a, const Ranked& b) { return a.density > b.density; });

    suffix_lo_.assign(groups_.size() + 1, 0.0);
    for (std::size_t g = groups_.size(); g-- > 0;)
      suffix_lo_[g] = suffix_lo_[g + 1] + static_cast<double>(groups_[g].lo) * groups_[g].weight;
    if (suffix_lo_[0] > limit) {
      out.feasible = false;
      return out;
    }

    limit_ = limit;
    count_.assign(groups_.size(), 0);
    best_count_.assign(groups_.size(), 0);
    best_value_ = -std::numeric_limits<double>::infinity();
    found_ = false;
    nodes_ = 0;
    aborted_ = false;

    const double root_bound = forced_value() + fractional_bound(0, limit - suffix_lo_[0]);
    search(0, 0.0, 0.0);

    out.nodes = nodes_;
    out.exact = !aborted_;
    if (!found_) {
      out.feasible = aborted_;
      out.value = -std::numeric_limits<double>::infinity();
      out.upper_bound = aborted_ ? root_bound : out.value;
      out.exact = false;
      return out;
    }
    out.value = best_value_;
    out.upper_bound = out.exact ? best_value_ : std::max(best_value_, root_bound);
    for (std::size_t g = 0; g < groups_.size(); ++g)
      for (std::size_t k = 0; k < best_count_[g]; ++k) out.items.push_back(groups_[g].ids[k]);
    std::sort(out.items.begin(), out.items.end());
    return out;
  }

 private:
  struct Group {
    double weight = 0.0;
    std::size_t lo = 0, hi = 0;
    std::vector<std::size_t> ids;
    std::vector<double> prefix;  // prefix[k] = profit of the k+1 best items
  };
  struct Ranked {
    std::size_t group;
    std::size_t rank;  // position within its group
    double profit;
    double density;
  };

  static double prefix_value(const Group& g, std::size_t n) { return n ? g.prefix[n - 1] : 0.0; }

  double forced_value() const {
    double v = 0.0;
    for (const auto& g : groups_) v += prefix_value(g, g.lo);
    return v;
  }

  // Fractional bound on the optional (beyond the lower bound) positive items
  // of groups >= from; mandatory items are accounted for by the caller.
  double fractional_bound(std::size_t from, double room) const {
    double bound = 0.0;
    for (const auto& r : order_) {
      if (r.group < from || r.rank < groups_[r.group].lo) continue;
      const double w = groups_[r.group].weight;
      if (w <= room) {
        room -= w;
        bound += r.profit;
      } else {
        bound += r.profit * (room / w);
        break;
      }
    }
    return bound;
  }

  void search(std::size_t gi, double load, double value) {
    if (aborted_) return;
    if (++nodes_ > node_limit_) {
      aborted_ = true;
      return;
    }
    if (gi == groups_.size()) {
      if (!found_ || value > best_value_) {
        found_ = true;
        best_value_ = value;
        best_count_ = count_;
      }
      return;
    }
    double mandatory = 0.0;
    for (std::size_t g = gi; g < groups_.size(); ++g) mandatory += prefix_value(groups_[g], groups_[g].lo);
    const double room = limit_ - load - suffix_lo_[gi];
    if (found_) {
      const double bound = value + mandatory + fractional_bound(gi, room);
      if (bound <= best_value_ + 1e-12 * std::max(1.0, std::abs(best_value_))) return;
    }
    const Group& g = groups_[gi];
    const double free_room = limit_ - load - suffix_lo_[gi + 1];
    std::size_t top = g.hi;
    while (top > g.lo && static_cast<double>(top) * g.weight > free_room) --top;
    if (static_cast<double>(g.lo) * g.weight > free_room) return;
    for (std::size_t n = top + 1; n-- > g.lo;) {
      count_[gi] = n;
      search(gi + 1, load + static_cast<double>(n) * g.weight, value + prefix_value(g, n));
      if (aborted_) break;
    }
    count_[gi] = 0;
  }

  std::uint64_t node_limit_;
  std::vector<Group> groups_;
  std::vector<Ranked> order_;
  std::vector<double> suffix_lo_;
  std::vector<std::size_t> count_, best_count_;
  double limit_ = 0.0;
  double best_value_ = 0.0;
  bool found_ = false;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace crsf
