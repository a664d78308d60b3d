#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crsf/core.hpp"
#include "crsf/registry.hpp"
#include "crsf/scoring.hpp"
#include "crsf/solver.hpp"

namespace crsf {

/// The six sensing QoS parameters and their value ranges.
inline std::vector<QosParamDescriptor> sensing_descriptors() {
  return {
      {"position_accuracy", "cm", QosDirection::cost, 20.0, 500.0},
      {"latency", "ms", QosDirection::cost, 10.0, 500.0},
      {"sensing_range", "m", QosDirection::benefit, 50.0, 300.0},
      {"resolution", "cm", QosDirection::cost, 1.0, 20.0},
      {"detection_probability", "", QosDirection::benefit, 0.5, 1.0},
      {"false_alarm_probability", "", QosDirection::cost, 0.0, 0.1},
  };
}

struct ServiceConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7878;
  std::chrono::milliseconds slot_period{100};
  /// Slots close only on TICK messages instead of the timer.
  bool tick_mode = false;
  SolverChoice solver = SolverChoice::exact;
  ScoringMode scoring = ScoringMode::raw;
  SolveBudget budget;
  std::vector<ServiceSchema> service_types;
};

namespace detail {

using nlohmann::json;

template <typename T>
T config_value(const json& obj, const char* name, const T& fallback) {
  auto it = obj.find(name);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::invalid_argument, std::string("config field '") + name + "' has the wrong type");
  }
}

inline const json& config_field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw Error(ErrorCode::invalid_argument, std::string("config is missing '") + name + "'");
  return *it;
}

inline QosDirection parse_direction(const std::string& s) {
  if (s == "benefit") return QosDirection::benefit;
  if (s == "cost") return QosDirection::cost;
  throw Error(ErrorCode::invalid_argument, "direction must be 'benefit' or 'cost', got '" + s + "'");
}

inline ServiceSchema parse_schema(const json& j) {
  ServiceSchema s;
  s.service_type = ServiceTypeId(config_field(j, "name").get<std::string>());
  const json& params = config_field(j, "qos_params");
  if (params.is_string()) {
    if (params.get<std::string>() != "sensing")
      throw Error(ErrorCode::invalid_argument, "the only built-in parameter set is 'sensing'");
    s.descriptors = sensing_descriptors();
  } else {
    for (const auto& p : params)
      s.descriptors.push_back({config_field(p, "name").get<std::string>(), config_value<std::string>(p, "unit", ""),
                               parse_direction(config_value<std::string>(p, "direction", "benefit")),
                               config_field(p, "range_min").get<double>(), config_field(p, "range_max").get<double>()});
  }
  for (const auto& c : config_field(j, "categories"))
    s.categories.push_back({CategoryId(config_field(c, "category_id").get<std::int64_t>()),
                            config_field(c, "weights").get<std::vector<double>>(),
                            config_field(c, "latency_threshold").get<double>(), config_field(c, "utilization").get<double>()});
  s.validate();
  return s;
}

}  // namespace detail

/// Parses a service config document. Throws Error(invalid_argument) with a
/// readable message on any problem.
inline ServiceConfig parse_config(const std::string& text) {
  using nlohmann::json;
  json j = json::parse(text, nullptr, false, /*ignore_comments=*/true);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::invalid_argument, "config is not a JSON object");
  ServiceConfig c;
  try {
    const std::string listen = detail::config_value<std::string>(j, "listen", "127.0.0.1:7878");
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "listen must be host:port");
    c.host = listen.substr(0, colon);
    const long port = std::stol(listen.substr(colon + 1));
    if (port < 0 || port > 65535) throw Error(ErrorCode::invalid_argument, "port out of range");
    c.port = static_cast<std::uint16_t>(port);
    const auto period = detail::config_value<std::int64_t>(j, "slot_period_ms", 100);
    if (period <= 0) throw Error(ErrorCode::invalid_argument, "slot_period_ms must be positive");
    c.slot_period = std::chrono::milliseconds(period);
    c.tick_mode = detail::config_value<bool>(j, "tick_mode", false);
    c.solver = parse_solver_choice(detail::config_value<std::string>(j, "solver", "exact"));
    if (c.solver == SolverChoice::brute) throw Error(ErrorCode::invalid_argument, "the service cannot use the brute-force solver");
    c.scoring = parse_scoring_mode(detail::config_value<std::string>(j, "scoring_mode", "raw"));
    const auto limit = detail::config_value<std::int64_t>(j, "solver_time_limit_ms", c.budget.time_limit.count());
    if (limit <= 0) throw Error(ErrorCode::invalid_argument, "solver_time_limit_ms must be positive");
    c.budget.time_limit = std::chrono::milliseconds(limit);
    for (const auto& s : detail::config_field(j, "service_types")) c.service_types.push_back(detail::parse_schema(s));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("bad config: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::invalid_argument, std::string("bad config: ") + e.what());
  }
  if (c.service_types.empty()) throw Error(ErrorCode::invalid_argument, "config declares no service types");
  for (std::size_t i = 0; i < c.service_types.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (c.service_types[k].service_type == c.service_types[i].service_type)
        throw Error(ErrorCode::invalid_argument, "service type '" + c.service_types[i].service_type.name() + "' declared twice");
  return c;
}

inline ServiceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace crsf
