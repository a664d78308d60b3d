#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "crsf/core.hpp"
#include "crsf/registry.hpp"
#include "crsf/solver/instance.hpp"

namespace crsf {

enum class ScoringMode { raw, normalized };

inline const char* to_string(ScoringMode mode) { return mode == ScoringMode::raw ? "raw" : "normalized"; }

inline ScoringMode parse_scoring_mode(const std::string& s) {
  if (s == "raw") return ScoringMode::raw;
  if (s == "normalized") return ScoringMode::normalized;
  throw Error(ErrorCode::invalid_argument, "unknown scoring mode '" + s + "'");
}

/// Direction-aware min-max scaling to [0, 1]: benefit parameters grow with
/// the value, cost parameters shrink.
inline std::vector<double> normalize_params(const std::vector<double>& p, const std::vector<QosParamDescriptor>& descriptors) {
  if (p.size() != descriptors.size()) throw Error(ErrorCode::invalid_argument, "parameter count does not match schema");
  std::vector<double> out(p.size());
  for (std::size_t n = 0; n < p.size(); ++n) {
    const auto& d = descriptors[n];
    if (!(p[n] >= d.range_min && p[n] <= d.range_max))
      throw Error(ErrorCode::invalid_argument, "parameter '" + d.name + "' out of range");
    const double t = (p[n] - d.range_min) / (d.range_max - d.range_min);
    out[n] = d.direction == QosDirection::benefit ? t : 1.0 - t;
  }
  return out;
}

/// Weighted parameter sum of one category at one SF.
inline double category_qos(const std::vector<double>& weights, const std::vector<double>& p) {
  if (weights.size() != p.size()) throw Error(ErrorCode::invalid_argument, "weight and parameter counts differ");
  double q = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) q += weights[n] * p[n];
  return q;
}

/// Q per (category, SF); rows follow `categories`, columns follow `sf_order`.
struct ScoreMatrix {
  Matrix<double> q;
  std::vector<CategoryId> categories;
  std::vector<SfId> sf_order;

  std::size_t category_index(CategoryId k) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
      if (categories[i] == k) return i;
    throw Error(ErrorCode::not_found, "unknown category " + std::to_string(k.value()));
  }
  std::size_t sf_index(SfId m) const {
    for (std::size_t i = 0; i < sf_order.size(); ++i)
      if (sf_order[i] == m) return i;
    throw Error(ErrorCode::not_found, "unknown SF " + std::to_string(m.value()));
  }
};

inline ScoreMatrix build_score_matrix(const std::vector<CategoryProfile>& categories, const std::vector<SfProfile>& profiles,
                                      const std::vector<QosParamDescriptor>& descriptors, ScoringMode mode) {
  ScoreMatrix s;
  s.q = Matrix<double>(categories.size(), profiles.size());
  for (const auto& c : categories) s.categories.push_back(c.category_id);
  for (std::size_t m = 0; m < profiles.size(); ++m) {
    s.sf_order.push_back(profiles[m].sf_id);
    const std::vector<double> p =
        mode == ScoringMode::normalized ? normalize_params(profiles[m].qos_params, descriptors) : profiles[m].qos_params;
    for (std::size_t k = 0; k < categories.size(); ++k) s.q(k, m) = category_qos(categories[k].weights, p);
  }
  return s;
}

/// Q of the request's own category at one SF.
inline double request_qos(const ServiceRequest& request, const ScoreMatrix& scores, SfId sf) {
  return scores.q(scores.category_index(request.category_id), scores.sf_index(sf));
}

struct CoefficientMatrix {
  Matrix<double> c;
  std::vector<RequestId> request_order;
  std::vector<SfId> sf_order;
};

namespace detail {

inline double priority_of(const ServiceRequest& r, SfId sf) {
  auto it = r.priority_weights.find(sf);
  if (it == r.priority_weights.end())
    throw Error(ErrorCode::invalid_argument, "request " + std::to_string(r.request_id.value()) +
                                                 " has no priority weight for SF " + std::to_string(sf.value()));
  return it->second;
}

}  // namespace detail

/// c = S * Q per (request, SF), in batch order and snapshot order.
inline CoefficientMatrix build_coefficients(const std::vector<ServiceRequest>& requests, const std::vector<SfProfile>& profiles,
                                            const ServiceSchema& schema, ScoringMode mode) {
  const ScoreMatrix scores = build_score_matrix(schema.categories, profiles, schema.descriptors, mode);
  CoefficientMatrix out;
  out.c = Matrix<double>(requests.size(), profiles.size());
  out.sf_order = scores.sf_order;
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const auto& req = requests[r];
    if (req.service_type != schema.service_type)
      throw Error(ErrorCode::invalid_argument, "request " + std::to_string(req.request_id.value()) + " is for another service type");
    out.request_order.push_back(req.request_id);
    const std::size_t k = scores.category_index(req.category_id);
    for (std::size_t m = 0; m < profiles.size(); ++m)
      out.c(r, m) = detail::priority_of(req, profiles[m].sf_id) * scores.q(k, m);
  }
  return out;
}

/// Selection problem of one batch together with the priority matrix S that
/// the priority-only baseline maximizes.
struct SlotProblem {
  SelectionInstance instance;
  Matrix<double> priorities;
  std::vector<RequestId> request_order;
  std::vector<SfId> sf_order;
};

inline SlotProblem build_slot_problem(const std::vector<ServiceRequest>& requests, const std::vector<SfProfile>& profiles,
                                      const ServiceSchema& schema, const LatencyMatrix& latency, ScoringMode mode) {
  CoefficientMatrix coeff = build_coefficients(requests, profiles, schema, mode);
  SlotProblem p;
  const std::size_t R = requests.size(), M = profiles.size();
  p.instance.coefficients = std::move(coeff.c);
  p.instance.feasible = Matrix<std::uint8_t>(R, M, 0);
  p.instance.utilization.resize(R);
  p.instance.capacity.resize(M);
  p.priorities = Matrix<double>(R, M);
  for (std::size_t m = 0; m < M; ++m) p.instance.capacity[m] = profiles[m].capacity;
  for (std::size_t r = 0; r < R; ++r) {
    const CategoryProfile* cat = schema.category(requests[r].category_id);
    if (!cat) throw Error(ErrorCode::not_found, "unknown category " + std::to_string(requests[r].category_id.value()));
    p.instance.utilization[r] = cat->utilization;
    for (std::size_t m = 0; m < M; ++m) {
      p.priorities(r, m) = detail::priority_of(requests[r], profiles[m].sf_id);
      p.instance.feasible(r, m) = latency.at(requests[r].request_id, profiles[m].sf_id) <= cat->latency_threshold;
    }
  }
  p.request_order = std::move(coeff.request_order);
  p.sf_order = std::move(coeff.sf_order);
  return p;
}

}  // namespace crsf
