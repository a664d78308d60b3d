#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crsf {

// Error ---------------------------------------------------------------------

enum class ErrorCode {
  invalid_argument,
  schema,
  not_found,
  duplicate,
  unknown_service_type,
  no_provider,
  parse,
  unsupported,
  capacity_exceeded,
  io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::schema: return "schema";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::duplicate: return "duplicate";
    case ErrorCode::unknown_service_type: return "unknown-service-type";
    case ErrorCode::no_provider: return "no-provider";
    case ErrorCode::parse: return "parse";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::capacity_exceeded: return "capacity-exceeded";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Strong integer ids --------------------------------------------------------

template <typename Tag>
class Id {
 public:
  using value_type = std::int64_t;

  constexpr Id() = default;
  constexpr explicit Id(value_type v) : value_(v) {}

  constexpr value_type value() const noexcept { return value_; }
  constexpr auto operator<=>(const Id&) const = default;

 private:
  value_type value_ = 0;
};

using SfId = Id<struct SfIdTag>;
using SubnetworkId = Id<struct SubnetworkIdTag>;
using RequestId = Id<struct RequestIdTag>;
using CategoryId = Id<struct CategoryIdTag>;

// Dense row-major matrix ----------------------------------------------------

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<T>> init) : rows_(init.size()) {
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw Error(ErrorCode::invalid_argument, "ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Numeric tolerances shared by the solvers and the verifier ----------------

/// Relative tolerance used for objective comparisons and tie detection.
inline constexpr double kObjectiveTolerance = 1e-9;

inline double objective_tolerance(double reference) {
  return kObjectiveTolerance * std::max(1.0, std::abs(reference));
}

/// True when a load fits a capacity. The slack absorbs summation round-off only.
inline bool fits(double load, double capacity) {
  return load <= capacity + 1e-9 * std::max(1.0, std::abs(capacity));
}

}  // namespace crsf

template <typename Tag>
struct std::hash<crsf::Id<Tag>> {
  std::size_t operator()(const crsf::Id<Tag>& id) const noexcept { return std::hash<std::int64_t>{}(id.value()); }
};
