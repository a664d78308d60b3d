#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crsf/core.hpp"

namespace crsf {

/// Name of a service family, e.g. "sensing".
class ServiceTypeId {
 public:
  ServiceTypeId() = default;
  explicit ServiceTypeId(std::string name) : name_(std::move(name)) {
    if (!valid(name_)) throw Error(ErrorCode::invalid_argument, "invalid service type name '" + name_ + "'");
  }

  static bool valid(const std::string& name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(),
                       [](char ch) { return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '-'; });
  }

  const std::string& name() const noexcept { return name_; }
  auto operator<=>(const ServiceTypeId&) const = default;

 private:
  std::string name_;
};

enum class QosDirection { benefit, cost };

inline const char* to_string(QosDirection d) { return d == QosDirection::benefit ? "benefit" : "cost"; }

struct QosParamDescriptor {
  std::string name;
  std::string unit;
  QosDirection direction = QosDirection::benefit;
  double range_min = 0.0;
  double range_max = 1.0;

  void validate() const {
    if (!(range_min < range_max))
      throw Error(ErrorCode::invalid_argument, "descriptor '" + name + "' needs range_min < range_max");
  }
  bool operator==(const QosParamDescriptor&) const = default;
};

struct SfProfile {
  SfId sf_id;
  SubnetworkId subnetwork_id;
  ServiceTypeId service_type;
  std::vector<double> qos_params;
  double capacity = 0.0;

  bool operator==(const SfProfile&) const = default;
};

struct CategoryProfile {
  CategoryId category_id;
  std::vector<double> weights;
  double latency_threshold = 0.0;  // ms
  double utilization = 0.0;

  void validate(std::size_t num_params) const {
    if (category_id.value() < 1) throw Error(ErrorCode::invalid_argument, "category ids start at 1");
    if (weights.size() != num_params)
      throw Error(ErrorCode::schema, "category " + std::to_string(category_id.value()) + " needs " +
                                         std::to_string(num_params) + " weights");
    for (double w : weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::invalid_argument, "category weights must be nonnegative");
    if (!(latency_threshold > 0.0)) throw Error(ErrorCode::invalid_argument, "latency threshold must be positive");
    if (!(utilization > 0.0)) throw Error(ErrorCode::invalid_argument, "utilization must be positive");
  }
  bool operator==(const CategoryProfile&) const = default;
};

struct ServiceRequest {
  RequestId request_id;
  SubnetworkId origin_subnetwork;
  ServiceTypeId service_type;
  CategoryId category_id;
  std::map<SfId, double> priority_weights;  // S per SF

  void validate() const {
    for (const auto& [sf, s] : priority_weights)
      if (!(s > 0.0) || !std::isfinite(s))
        throw Error(ErrorCode::invalid_argument, "priority weight for SF " + std::to_string(sf.value()) + " must be positive");
  }
  bool operator==(const ServiceRequest&) const = default;
};

/// Communication latency L (ms) per (request, SF) pair.
class LatencyMatrix {
 public:
  void set(RequestId r, SfId m, double latency_ms) {
    if (!(latency_ms >= 0.0) || !std::isfinite(latency_ms))
      throw Error(ErrorCode::invalid_argument, "latency must be nonnegative");
    entries_[{r, m}] = latency_ms;
  }
  std::optional<double> get(RequestId r, SfId m) const {
    auto it = entries_.find({r, m});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }
  double at(RequestId r, SfId m) const {
    auto v = get(r, m);
    if (!v)
      throw Error(ErrorCode::not_found, "no latency for request " + std::to_string(r.value()) + " and SF " +
                                            std::to_string(m.value()));
    return *v;
  }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::pair<RequestId, SfId>, double> entries_;
};

/// Schema shared by every SF of one service type.
struct ServiceSchema {
  ServiceTypeId service_type;
  std::vector<QosParamDescriptor> descriptors;
  std::vector<CategoryProfile> categories;

  std::size_t num_params() const noexcept { return descriptors.size(); }

  const CategoryProfile* category(CategoryId id) const {
    for (const auto& c : categories)
      if (c.category_id == id) return &c;
    return nullptr;
  }

  void validate() const {
    if (descriptors.empty()) throw Error(ErrorCode::schema, "service type needs at least one QoS parameter");
    for (const auto& d : descriptors) d.validate();
    for (std::size_t i = 0; i < categories.size(); ++i) {
      categories[i].validate(descriptors.size());
      for (std::size_t j = 0; j < i; ++j)
        if (categories[j].category_id == categories[i].category_id)
          throw Error(ErrorCode::duplicate, "duplicate category id " + std::to_string(categories[i].category_id.value()));
    }
  }
};

struct SfRegistryEntry {
  SfProfile profile;
  std::int64_t last_update_slot = 0;
};

/// Catalog of registered SFs. Every SF must belong to a known service type;
/// each (subnetwork, service type) pair hosts at most one SF.
class Registry {
 public:
  /// Declares the parameter schema for a service type (replaces any prior one
  /// as long as no SF of that type is registered).
  void add_service_type(const ServiceTypeId& type, std::vector<QosParamDescriptor> descriptors) {
    for (const auto& d : descriptors) d.validate();
    for (const auto& [id, e] : entries_)
      if (e.profile.service_type == type && descriptors.size() != e.profile.qos_params.size())
        throw Error(ErrorCode::schema, "service type '" + type.name() + "' already has SFs with another schema");
    schemas_[type] = std::move(descriptors);
  }

  bool has_service_type(const ServiceTypeId& type) const { return schemas_.count(type) != 0; }

  const std::vector<QosParamDescriptor>& descriptors(const ServiceTypeId& type) const {
    auto it = schemas_.find(type);
    if (it == schemas_.end()) throw Error(ErrorCode::unknown_service_type, "unknown service type '" + type.name() + "'");
    return it->second;
  }

  void register_sf(const SfProfile& profile) {
    const auto& desc = descriptors(profile.service_type);
    if (profile.qos_params.size() != desc.size())
      throw Error(ErrorCode::schema, "SF " + std::to_string(profile.sf_id.value()) + " has " +
                                         std::to_string(profile.qos_params.size()) + " QoS parameters, schema needs " +
                                         std::to_string(desc.size()));
    for (std::size_t n = 0; n < desc.size(); ++n) {
      const double p = profile.qos_params[n];
      if (!std::isfinite(p) || p < desc[n].range_min || p > desc[n].range_max)
        throw Error(ErrorCode::invalid_argument, "QoS parameter '" + desc[n].name + "' of SF " +
                                                     std::to_string(profile.sf_id.value()) + " is out of range");
    }
    if (!(profile.capacity >= 0.0) || !std::isfinite(profile.capacity))
      throw Error(ErrorCode::invalid_argument, "capacity must be nonnegative");
    for (const auto& [id, e] : entries_)
      if (id != profile.sf_id && e.profile.subnetwork_id == profile.subnetwork_id &&
          e.profile.service_type == profile.service_type)
        throw Error(ErrorCode::duplicate, "subnetwork " + std::to_string(profile.subnetwork_id.value()) +
                                              " already hosts SF " + std::to_string(id.value()) + " for '" +
                                              profile.service_type.name() + "'");
    entries_[profile.sf_id] = {profile, current_slot_};
  }

  void update_capacity(SfId sf, double capacity) {
    auto it = entries_.find(sf);
    if (it == entries_.end()) throw Error(ErrorCode::not_found, "unknown SF " + std::to_string(sf.value()));
    if (!(capacity >= 0.0) || !std::isfinite(capacity))
      throw Error(ErrorCode::invalid_argument, "capacity must be nonnegative");
    it->second.profile.capacity = capacity;
    it->second.last_update_slot = current_slot_;
  }

  void deregister_sf(SfId sf) {
    if (entries_.erase(sf) == 0) throw Error(ErrorCode::not_found, "unknown SF " + std::to_string(sf.value()));
  }

  /// Profiles of one service type ordered by sf_id; an independent copy.
  std::vector<SfProfile> snapshot(const ServiceTypeId& type) const {
    std::vector<SfProfile> out;
    for (const auto& [id, e] : entries_)
      if (e.profile.service_type == type) out.push_back(e.profile);
    return out;
  }

  const SfRegistryEntry* find(SfId sf) const {
    auto it = entries_.find(sf);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  std::int64_t current_slot() const noexcept { return current_slot_; }
  void advance_slot() { ++current_slot_; }

  const std::map<SfId, SfRegistryEntry>& entries() const noexcept { return entries_; }

 private:
  std::map<ServiceTypeId, std::vector<QosParamDescriptor>> schemas_;
  std::map<SfId, SfRegistryEntry> entries_;
  std::int64_t current_slot_ = 0;
};

}  // namespace crsf
