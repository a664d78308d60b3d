#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <ostream>
#include <streambuf>
#include <thread>
#include <utility>

#include "crsf/net.hpp"
#include "crsf/service.hpp"
#include "crsf/sim.hpp"

namespace crsf {

namespace driver_detail {

class NullBuffer : public std::streambuf {
 protected:
  int overflow(int c) override { return c; }
};

/// A CrsfService in tick mode behind a TcpServer on an ephemeral loopback port.
class LocalService {
 public:
  explicit LocalService(ServiceConfig config) : service_(std::move(config)), log_(&null_), server_(service_, log_) {
    server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.run(stop_); });
  }
  ~LocalService() {
    stop_ = true;
    thread_.join();
  }
  LocalService(const LocalService&) = delete;
  LocalService& operator=(const LocalService&) = delete;

  std::uint16_t port() const { return server_.port(); }

 private:
  CrsfService service_;
  NullBuffer null_;
  std::ostream log_;
  TcpServer server_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

inline ProtocolMessage expect_reply(TcpClient& client, std::chrono::milliseconds timeout) {
  auto msg = client.receive(timeout);
  if (!msg) throw Error(ErrorCode::io, "service did not answer in time");
  if (msg->type() == MessageType::ERROR) {
    const auto& e = std::get<ErrorPayload>(msg->payload);
    throw Error(ErrorCode::io, "service rejected a message: " + e.code + ": " + e.message);
  }
  return *msg;
}

}  // namespace driver_detail

/// Plays one sampled round through a CRSF over TCP: one provider connection
/// registers every SF, one consumer connection sends every DISCOVER, then a
/// TICK closes the slot. The notices are mapped back onto `problem`.
inline Assignment solve_via_service(const SampledRound& round, const SlotProblem& problem, SolverChoice solver,
                                    const SolveBudget& budget, ScoringMode scoring) {
  using namespace std::chrono_literals;
  ServiceConfig config;
  config.host = "127.0.0.1";
  config.port = 0;
  config.tick_mode = true;
  config.solver = solver;
  config.scoring = scoring;
  config.budget = budget;
  config.service_types = {round.schema};
  driver_detail::LocalService local(config);

  const auto io_timeout = 10s;
  TcpClient provider, consumer;
  provider.connect("127.0.0.1", local.port());
  consumer.connect("127.0.0.1", local.port());
  for (const auto& p : round.profiles) {
    provider.send({0, RegisterPayload{p}});
    driver_detail::expect_reply(provider, io_timeout);
  }
  for (const auto& r : round.requests) {
    DiscoverPayload d{r, {}};
    for (const auto& p : round.profiles) d.latency[p.sf_id] = round.latency.at(r.request_id, p.sf_id);
    consumer.send({0, d});
    driver_detail::expect_reply(consumer, io_timeout);
  }
  consumer.send({0, TickPayload{}});

  std::map<RequestId, std::size_t> request_index;
  std::map<SfId, std::size_t> sf_index;
  for (std::size_t r = 0; r < problem.request_order.size(); ++r) request_index[problem.request_order[r]] = r;
  for (std::size_t m = 0; m < problem.sf_order.size(); ++m) sf_index[problem.sf_order[m]] = m;

  std::vector<std::size_t> choice(problem.instance.num_requests(), kUnassigned);
  std::vector<bool> noticed(choice.size(), false);
  bool optimal = true;
  const auto solve_timeout = std::chrono::duration_cast<std::chrono::milliseconds>(budget.time_limit) + 60s;
  for (;;) {
    const ProtocolMessage msg = driver_detail::expect_reply(consumer, solve_timeout);
    if (msg.type() == MessageType::ACK && std::get<AckPayload>(msg.payload).of == MessageType::TICK) break;
    if (msg.type() != MessageType::SELECTION_NOTICE) continue;
    const auto& n = std::get<SelectionNoticePayload>(msg.payload);
    auto r = request_index.find(n.request_id);
    if (r == request_index.end() || noticed[r->second])
      throw Error(ErrorCode::io, "unexpected notice for request " + std::to_string(n.request_id.value()));
    noticed[r->second] = true;
    optimal = optimal && n.optimal;
    if (n.sf_id) {
      auto m = sf_index.find(*n.sf_id);
      if (m == sf_index.end()) throw Error(ErrorCode::io, "notice names unknown SF " + std::to_string(n.sf_id->value()));
      choice[r->second] = m->second;
    }
  }
  for (bool seen : noticed)
    if (!seen) throw Error(ErrorCode::io, "a queued request received no notice");
  Assignment a = make_assignment(problem.instance, choice);
  a.optimal = optimal;
  return a;
}

/// Hook for ExperimentOptions::via_service that runs the proposed and the
/// baseline solver each through its own service instance.
inline std::function<std::pair<Assignment, Assignment>(const SampledRound&, const SlotProblem&)> service_round_runner(
    SolveBudget budget, ScoringMode scoring) {
  return [budget, scoring](const SampledRound& round, const SlotProblem& problem) {
    Assignment prop = solve_via_service(round, problem, SolverChoice::exact, budget, scoring);
    Assignment base = solve_via_service(round, problem, SolverChoice::baseline, budget, scoring);
    return std::make_pair(std::move(prop), std::move(base));
  };
}

}  // namespace crsf
