#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace crsf {

/// Revised simplex for packing LPs: maximize c'z subject to A z <= b, z >= 0,
/// with A a 0/1 matrix given column by column and b >= 0, so the all-slack
/// basis is always a feasible start. Columns may be appended, repriced or
/// disabled between solves; b never changes, so the current basis stays primal
/// feasible and the next solve resumes from it. A disabled column never
/// enters; give it a strongly negative cost so that it is driven out of the
/// basis if it is still there.
class PackingLp {
 public:
  enum class Status { optimal, iteration_limit };

  explicit PackingLp(std::vector<double> rhs) : rhs_(std::move(rhs)) { reset_basis(); }

  std::size_t num_rows() const noexcept { return rhs_.size(); }
  std::size_t num_columns() const noexcept { return cols_.size(); }

  std::size_t add_column(double cost, std::vector<std::uint32_t> rows, bool enabled = true) {
    cols_.push_back({cost, std::move(rows), enabled});
    basic_row_.push_back(-1);
    if (enabled) scale_ = std::max(scale_, std::abs(cost));
    return cols_.size() - 1;
  }

  void set_column(std::size_t j, double cost, bool enabled) {
    cols_[j].cost = cost;
    cols_[j].enabled = enabled;
    if (enabled) scale_ = std::max(scale_, std::abs(cost));
  }

  Status solve(std::uint64_t max_iterations = 200'000) {
    const std::size_t m = num_rows();
    std::vector<double> u(m);
    compute_duals();
    std::uint64_t done = 0;
    for (;;) {
      const double rc_tol = 1e-9 * scale_;
      double rc = 0.0;
      const long entering = choose_entering(rc_tol, rc);
      if (entering == kNone) return Status::optimal;
      if (done++ >= max_iterations) return Status::iteration_limit;

      column_direction(entering, u);
      // Ratio test; Bland mode takes the smallest variable among ties.
      std::size_t leave = m;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (u[i] <= kPivotTol) continue;
        const double ratio = x_[i] / u[i];
        if (leave == m || ratio < best_ratio - 1e-12) {
          leave = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + 1e-12) {
          const bool prefer = bland_ ? variable_order(head_[i]) < variable_order(head_[leave]) : u[i] > u[leave];
          if (prefer) {
            leave = i;
            best_ratio = std::min(best_ratio, ratio);
          }
        }
      }
      // Every column meets a row with finite b, so the LP is bounded; a
      // missing pivot row can only come from round-off.
      if (leave == m) {
        refactor();
        compute_duals();
        if (++stalls_ > 3) return Status::optimal;
        continue;
      }
      stalls_ = 0;

      pivot(leave, entering, u);
      const double* prow = &binv_[leave * m];
      for (std::size_t j = 0; j < m; ++j) y_[j] += rc * prow[j];
      ++iterations_;
      if (best_ratio <= 1e-12) {
        if (++degenerate_streak_ > kDegenerateStreak) bland_ = true;
      } else {
        degenerate_streak_ = 0;
        bland_ = false;
      }
      if (++since_refactor_ >= kRefactorPeriod) {
        refactor();
        compute_duals();
      }
    }
  }

  double objective() const {
    double total = 0.0;
    for (std::size_t i = 0; i < num_rows(); ++i)
      if (head_[i] >= 0) total += cols_[static_cast<std::size_t>(head_[i])].cost * x_[i];
    return total;
  }

  /// Value of every structural column.
  std::vector<double> primal() const {
    std::vector<double> z(cols_.size(), 0.0);
    for (std::size_t i = 0; i < num_rows(); ++i)
      if (head_[i] >= 0) z[static_cast<std::size_t>(head_[i])] = std::max(0.0, x_[i]);
    return z;
  }

  /// Row duals of the last solve (nonnegative up to round-off at optimality).
  const std::vector<double>& duals() const noexcept { return y_; }
  std::uint64_t iterations() const noexcept { return iterations_; }

 private:
  struct Column {
    double cost;
    std::vector<std::uint32_t> rows;
    bool enabled;
  };

  static constexpr long kNone = std::numeric_limits<long>::min();
  static constexpr double kPivotTol = 1e-9;
  static constexpr int kDegenerateStreak = 50;
  static constexpr int kRefactorPeriod = 500;
  static constexpr std::size_t kPricingWindow = 256;

  static long slack_id(std::size_t row) { return -static_cast<long>(row) - 1; }
  static std::size_t slack_row(long id) { return static_cast<std::size_t>(-id - 1); }

  // Slacks first, then structurals: a fixed total order for Bland's rule.
  long variable_order(long id) const {
    return id < 0 ? static_cast<long>(slack_row(id)) : static_cast<long>(num_rows()) + id;
  }

  void reset_basis() {
    const std::size_t m = num_rows();
    head_.resize(m);
    binv_.assign(m * m, 0.0);
    x_ = rhs_;
    slack_in_basis_.assign(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
      head_[i] = slack_id(i);
      binv_[i * m + i] = 1.0;
    }
    for (auto& b : basic_row_) b = -1;
    since_refactor_ = 0;
  }

  double cost_of(long id) const { return id < 0 ? 0.0 : cols_[static_cast<std::size_t>(id)].cost; }

  void compute_duals() {
    const std::size_t m = num_rows();
    y_.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost_of(head_[i]);
      if (cb == 0.0) continue;
      const double* row = &binv_[i * m];
      for (std::size_t j = 0; j < m; ++j) y_[j] += cb * row[j];
    }
  }

  // Dantzig pricing over the slacks and a window of structural columns that
  // starts where the previous search stopped; the window grows until it
  // holds a candidate or covers every column. Bland mode scans in order.
  long choose_entering(double tol, double& rc_out) {
    long best = kNone;
    double best_rc = tol;
    // Slack i has reduced cost -y_i.
    for (std::size_t i = 0; i < num_rows(); ++i) {
      if (slack_in_basis_[i]) continue;
      const double rc = -y_[i];
      if (rc > tol) {
        if (bland_) {
          rc_out = rc;
          return slack_id(i);
        }
        if (rc > best_rc) {
          best_rc = rc;
          best = slack_id(i);
        }
      }
    }
    const std::size_t n = cols_.size();
    if (n == 0) {
      rc_out = best_rc;
      return best;
    }
    const std::size_t window = std::max<std::size_t>(kPricingWindow, n / 8);
    std::size_t start = bland_ ? 0 : cursor_ % n;
    for (std::size_t scanned = 0; scanned < n; ++scanned) {
      const std::size_t j = (start + scanned) % n;
      if (best != kNone && !bland_ && scanned >= window) {
        cursor_ = j;
        break;
      }
      if (basic_row_[j] >= 0 || !cols_[j].enabled) continue;
      double rc = cols_[j].cost;
      for (auto r : cols_[j].rows) rc -= y_[r];
      if (rc > tol) {
        if (bland_) {
          rc_out = rc;
          return static_cast<long>(j);
        }
        if (rc > best_rc) {
          best_rc = rc;
          best = static_cast<long>(j);
        }
      }
    }
    rc_out = best_rc;
    return best;
  }

  void column_direction(long id, std::vector<double>& u) const {
    const std::size_t m = num_rows();
    if (id < 0) {
      const std::size_t r = slack_row(id);
      for (std::size_t i = 0; i < m; ++i) u[i] = binv_[i * m + r];
      return;
    }
    std::fill(u.begin(), u.end(), 0.0);
    for (auto r : cols_[static_cast<std::size_t>(id)].rows)
      for (std::size_t i = 0; i < m; ++i) u[i] += binv_[i * m + r];
  }

  void set_head(std::size_t row, long id) {
    const long old = head_[row];
    if (old >= 0) basic_row_[static_cast<std::size_t>(old)] = -1;
    else slack_in_basis_[slack_row(old)] = 0;
    head_[row] = id;
    if (id >= 0) basic_row_[static_cast<std::size_t>(id)] = static_cast<long>(row);
    else slack_in_basis_[slack_row(id)] = 1;
  }

  void pivot(std::size_t p, long entering, const std::vector<double>& u) {
    const std::size_t m = num_rows();
    const double up = u[p];
    const double theta = x_[p] / up;
    double* prow = &binv_[p * m];
    for (std::size_t j = 0; j < m; ++j) prow[j] /= up;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == p || u[i] == 0.0) continue;
      const double f = u[i];
      double* row = &binv_[i * m];
      for (std::size_t j = 0; j < m; ++j) row[j] -= f * prow[j];
      x_[i] -= theta * f;
      if (x_[i] < 0.0) x_[i] = 0.0;
    }
    x_[p] = theta;
    set_head(p, entering);
  }

  // Recomputes B^-1 from the basis columns by Gauss-Jordan elimination with
  // partial pivoting; falls back to the slack basis if B is numerically singular.
  void refactor() {
    since_refactor_ = 0;
    const std::size_t m = num_rows();
    std::vector<double> a(m * m, 0.0), inv(m * m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const long id = head_[k];
      if (id < 0) a[slack_row(id) * m + k] = 1.0;
      else
        for (auto r : cols_[static_cast<std::size_t>(id)].rows) a[r * m + k] = 1.0;
      inv[k * m + k] = 1.0;
    }
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m; ++r)
        if (std::abs(a[r * m + c]) > std::abs(a[piv * m + c])) piv = r;
      if (std::abs(a[piv * m + c]) < 1e-10) {
        reset_basis();
        return;
      }
      if (piv != c)
        for (std::size_t j = 0; j < m; ++j) {
          std::swap(a[piv * m + j], a[c * m + j]);
          std::swap(inv[piv * m + j], inv[c * m + j]);
        }
      const double d = a[c * m + c];
      for (std::size_t j = 0; j < m; ++j) {
        a[c * m + j] /= d;
        inv[c * m + j] /= d;
      }
      for (std::size_t r = 0; r < m; ++r) {
        if (r == c) continue;
        const double f = a[r * m + c];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) {
          a[r * m + j] -= f * a[c * m + j];
          inv[r * m + j] -= f * inv[c * m + j];
        }
      }
    }
    binv_ = std::move(inv);
    for (std::size_t i = 0; i < m; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < m; ++j) v += binv_[i * m + j] * rhs_[j];
      x_[i] = std::max(0.0, v);
    }
  }

  std::vector<double> rhs_;
  std::vector<Column> cols_;
  std::vector<long> head_;        // basic variable per row; slacks encoded as negatives
  std::vector<long> basic_row_;   // row of each structural in the basis, -1 otherwise
  std::vector<std::uint8_t> slack_in_basis_;
  std::vector<double> binv_;      // dense row-major B^-1
  std::vector<double> x_;         // basic values
  std::vector<double> y_;
  double scale_ = 1.0;
  std::uint64_t iterations_ = 0;
  int degenerate_streak_ = 0;
  int since_refactor_ = 0;
  int stalls_ = 0;
  std::size_t cursor_ = 0;
  bool bland_ = false;
};

}  // namespace crsf
