#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crsf/config.hpp"
#include "crsf/protocol.hpp"
#include "crsf/registry.hpp"
#include "crsf/scoring.hpp"
#include "crsf/solver.hpp"

namespace crsf {

using ConnectionId = std::uint64_t;

struct Outgoing {
  ConnectionId to = 0;
  ProtocolMessage message;
};

enum class SlotPhase { collecting, solving, notifying };

struct PendingRequest {
  ServiceRequest request;
  std::map<SfId, double> latency;
  ConnectionId reply_to = 0;
};

/// Outcome of one service type's batch in a slot.
struct BatchReport {
  ServiceTypeId service_type;
  std::size_t batch_size = 0;
  std::size_t served = 0;
  double objective = 0.0;
  bool optimal = true;
};

struct SlotReport {
  std::int64_t slot = 0;
  std::vector<BatchReport> batches;

  std::size_t batch_size() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += b.batch_size;
    return n;
  }
  double objective() const {
    double v = 0.0;
    for (const auto& b : batches) v += b.objective;
    return v;
  }
  bool optimal() const {
    for (const auto& b : batches)
      if (!b.optimal) return false;
    return true;
  }
};

/// The selection function without its transport: messages in, messages out.
/// Each service type has its own registry and request batch; the slot index is
/// shared. Not thread-safe; the owner serializes calls.
class CrsfService {
 public:
  explicit CrsfService(ServiceConfig config) : config_(std::move(config)) {
    for (const auto& schema : config_.service_types) {
      Microservice& ms = services_[schema.service_type];
      ms.schema = schema;
      ms.registry.add_service_type(schema.service_type, schema.descriptors);
    }
  }

  std::int64_t slot() const noexcept { return slot_; }
  SlotPhase phase() const noexcept { return phase_; }
  const ServiceConfig& config() const noexcept { return config_; }

  std::size_t pending(const ServiceTypeId& type) const {
    auto it = services_.find(type);
    return it == services_.end() ? 0 : it->second.pending.size();
  }

  const Registry* registry(const ServiceTypeId& type) const {
    auto it = services_.find(type);
    return it == services_.end() ? nullptr : &it->second.registry;
  }

  /// Handles one inbound message. A TICK in tick mode closes the slot; its
  /// report is then stored in `last_report()`.
  std::vector<Outgoing> handle(const ProtocolMessage& msg, ConnectionId from) {
    std::vector<Outgoing> out;
    try {
      switch (msg.type()) {
        case MessageType::REGISTER: out.push_back({from, handle_register(std::get<RegisterPayload>(msg.payload), from)}); break;
        case MessageType::CAPACITY_UPDATE:
          out.push_back({from, handle_capacity(std::get<CapacityUpdatePayload>(msg.payload))});
          break;
        case MessageType::DISCOVER: out.push_back({from, handle_discover(std::get<DiscoverPayload>(msg.payload), from)}); break;
        case MessageType::TICK:
          if (!config_.tick_mode) throw Error(ErrorCode::unsupported, "TICK is only accepted in tick mode");
          {
            const std::int64_t closed = slot_;
            out = run_slot();
            out.push_back({from, {slot_, AckPayload{MessageType::TICK, closed}}});
          }
          break;
        default: throw Error(ErrorCode::unsupported, std::string(to_string(msg.type())) + " is not accepted by the CRSF");
      }
    } catch (const Error& e) {
      out.push_back({from, make_error(slot_, e.code(), e.what())});
    }
    return out;
  }

  /// Forgets a closed connection: its SFs keep their registration but no
  /// longer receive notice copies.
  void disconnect(ConnectionId conn) {
    for (auto it = provider_conn_.begin(); it != provider_conn_.end();)
      it = it->second == conn ? provider_conn_.erase(it) : std::next(it);
  }

  /// Closes the current slot: solves every pending batch and returns one
  /// notice per pending request plus a copy to each chosen SF's connection.
  std::vector<Outgoing> run_slot() {
    phase_ = SlotPhase::solving;
    std::vector<Outgoing> out;
    SlotReport report;
    report.slot = slot_;
    for (auto& [type, ms] : services_) {
      if (ms.pending.empty()) continue;
      const std::vector<SfProfile> profiles = ms.registry.snapshot(type);
      const SlotProblem problem = build_problem(ms, profiles);
      SolveOptions options;
      options.budget = config_.budget;
      const Assignment a = solve_with(config_.solver, problem.instance, problem.priorities, options);
      phase_ = SlotPhase::notifying;
      BatchReport batch{type, ms.pending.size(), a.assigned_count(), a.objective, a.optimal};
      for (std::size_t r = 0; r < ms.pending.size(); ++r) {
        SelectionNoticePayload notice;
        notice.request_id = ms.pending[r].request.request_id;
        notice.optimal = a.optimal;
        if (a.assigned[r]) {
          notice.sf_id = profiles[*a.assigned[r]].sf_id;
          notice.value = a.per_request_value[r];
        }
        out.push_back({ms.pending[r].reply_to, {slot_, notice}});
        if (notice.sf_id) {
          auto conn = provider_conn_.find(*notice.sf_id);
          if (conn != provider_conn_.end()) out.push_back({conn->second, {slot_, notice}});
        }
      }
      report.batches.push_back(std::move(batch));
      ms.pending.clear();
      ms.request_ids.clear();
    }
    ++slot_;
    for (auto& [type, ms] : services_) ms.registry.advance_slot();
    phase_ = SlotPhase::collecting;
    last_report_ = std::move(report);
    return out;
  }

  const SlotReport& last_report() const noexcept { return last_report_; }

 private:
  struct Microservice {
    ServiceSchema schema;
    Registry registry;
    std::vector<PendingRequest> pending;
    std::set<RequestId> request_ids;
  };

  Microservice& service_for(const ServiceTypeId& type) {
    auto it = services_.find(type);
    if (it == services_.end()) throw Error(ErrorCode::unknown_service_type, "unknown service type '" + type.name() + "'");
    return it->second;
  }

  ProtocolMessage handle_register(const RegisterPayload& p, ConnectionId from) {
    Microservice& ms = service_for(p.profile.service_type);
    for (const auto& [type, other] : services_)
      if (type != p.profile.service_type && other.registry.find(p.profile.sf_id))
        throw Error(ErrorCode::duplicate, "SF " + std::to_string(p.profile.sf_id.value()) + " is registered for '" +
                                              type.name() + "'");
    ms.registry.register_sf(p.profile);
    provider_conn_[p.profile.sf_id] = from;
    return {slot_, AckPayload{MessageType::REGISTER, p.profile.sf_id.value()}};
  }

  ProtocolMessage handle_capacity(const CapacityUpdatePayload& p) {
    for (auto& [type, ms] : services_)
      if (ms.registry.find(p.sf_id)) {
        ms.registry.update_capacity(p.sf_id, p.capacity);
        return {slot_, AckPayload{MessageType::CAPACITY_UPDATE, p.sf_id.value()}};
      }
    throw Error(ErrorCode::not_found, "unknown SF " + std::to_string(p.sf_id.value()));
  }

  ProtocolMessage handle_discover(const DiscoverPayload& p, ConnectionId from) {
    Microservice& ms = service_for(p.request.service_type);
    p.request.validate();
    if (!ms.schema.category(p.request.category_id))
      throw Error(ErrorCode::not_found, "unknown category " + std::to_string(p.request.category_id.value()));
    const auto profiles = ms.registry.snapshot(p.request.service_type);
    if (profiles.empty())
      throw Error(ErrorCode::no_provider, "no SF offers '" + p.request.service_type.name() + "'");
    for (const auto& [sf, s] : p.request.priority_weights)
      if (!ms.registry.find(sf)) throw Error(ErrorCode::not_found, "priority map names unregistered SF " + std::to_string(sf.value()));
    for (const auto& [sf, l] : p.latency) {
      if (!ms.registry.find(sf)) throw Error(ErrorCode::not_found, "latency row names unregistered SF " + std::to_string(sf.value()));
      if (!(l >= 0.0) || !std::isfinite(l)) throw Error(ErrorCode::schema, "latency must be a nonnegative number");
    }
    for (const auto& prof : profiles) {
      if (!p.request.priority_weights.count(prof.sf_id))
        throw Error(ErrorCode::schema, "priority map misses SF " + std::to_string(prof.sf_id.value()));
      if (!p.latency.count(prof.sf_id))
        throw Error(ErrorCode::schema, "latency row misses SF " + std::to_string(prof.sf_id.value()));
    }
    if (!ms.request_ids.insert(p.request.request_id).second)
      throw Error(ErrorCode::duplicate, "request " + std::to_string(p.request.request_id.value()) + " is already queued");
    ms.pending.push_back({p.request, p.latency, from});
    return {slot_, AckPayload{MessageType::DISCOVER, p.request.request_id.value()}};
  }

  // SFs that registered after a request arrived are absent from its maps;
  // such pairs are made ineligible.
  SlotProblem build_problem(const Microservice& ms, const std::vector<SfProfile>& profiles) const {
    std::vector<ServiceRequest> requests;
    LatencyMatrix latency;
    for (const auto& pr : ms.pending) {
      ServiceRequest req = pr.request;
      for (const auto& prof : profiles) {
        auto l = pr.latency.find(prof.sf_id);
        latency.set(req.request_id, prof.sf_id,
                    l == pr.latency.end() ? std::numeric_limits<double>::max() : l->second);
        req.priority_weights.try_emplace(prof.sf_id, 1.0);
      }
      requests.push_back(std::move(req));
    }
    return build_slot_problem(requests, profiles, ms.schema, latency, config_.scoring);
  }

  ServiceConfig config_;
  std::map<ServiceTypeId, Microservice> services_;
  std::map<SfId, ConnectionId> provider_conn_;
  std::int64_t slot_ = 0;
  SlotPhase phase_ = SlotPhase::collecting;
  SlotReport last_report_;
};

}  // namespace crsf
