// Acceptance suite: one PASS/FAIL line per criterion. With arguments, runs
// only the listed criteria, e.g. `acceptance 1 8 9`.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "crsf/crsf.hpp"
#include "message_gen.hpp"
#include "support.hpp"

using namespace crsf;
using namespace std::chrono_literals;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Full suite, run once and shared by the trend criteria ---------------------------

struct Suite {
  std::map<std::string, ExperimentResult> results;
  double seconds = 0.0;
  unsigned threads = 0;
};

const Suite& suite() {
  static const Suite s = [] {
    Suite out;
    ExperimentOptions opts;
    opts.seed = 7;
    opts.rounds = 100;
    out.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto t0 = Clock::now();
    for (const auto& name : experiment_names())
      out.results[name] = run_experiment(name, opts, [](const std::string& p) { std::cerr << "  " << p << std::endl; });
    out.seconds = seconds_since(t0);
    return out;
  }();
  return s;
}

const MetricsRow* find_row(const std::vector<MetricsRow>& rows, const std::string& solver, std::size_t R, std::size_t M,
                           std::optional<double> cap = std::nullopt) {
  for (const auto& r : rows)
    if (r.solver == solver && r.num_requests == R && r.num_sfs == M && (!cap || r.capacity_override == cap)) return &r;
  return nullptr;
}

// Criteria ----------------------------------------------------------------------------

Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  std::size_t n = 0, mismatches = 0, invalid = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; n < 600; ++seed) {
    const std::size_t R = 1 + seed % 6, M = 1 + (seed / 6) % 4, K = 1 + (seed / 24) % 3;
    const SampledRound round = sample_instance(test::sim_config(R, M, 1000 + seed, K), seed % 5);
    const auto problem = build_round_problem(round, ScoringMode::raw);
    const Assignment exact = solve_exact(problem.instance);
    const Assignment oracle = brute_force(problem.instance);
    const double diff = std::abs(exact.objective - oracle.objective);
    worst = std::max(worst, diff);
    mismatches += diff > 1e-9;
    invalid += !verify_assignment(problem.instance, exact) || !exact.optimal;
    ++n;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && invalid == 0 && secs < 60,
          fmt("%zu instances, %zu objective mismatches (max |diff| %g), %zu invalid, %.1f s", n, mismatches, worst, invalid,
              secs)};
}

Verdict dominance() {
  const Suite& s = suite();
  std::size_t violations = 0, invalid = 0, solves = 0;
  double worst = 0.0;
  for (const auto& [name, res] : s.results) {
    violations += res.log.dominance_violations;
    invalid += res.log.invalid_assignments;
    solves += res.log.solves;
    worst = std::min(worst, res.log.worst_dominance_gap);
  }
  const auto& rows = s.results.at("request-sweep").rows;
  const MetricsRow* p = find_row(rows, "proposed", 100, 5);
  const MetricsRow* b = find_row(rows, "baseline", 100, 5);
  if (!p || !b) return {false, "request-sweep lacks the R=100, M=5 point"};
  const double ratio = p->mean_aggregate_qos / b->mean_aggregate_qos;
  return {violations == 0 && invalid == 0 && ratio > 1.10,
          fmt("%zu violations over %zu solves (worst gap %g), %zu invalid; proposed/baseline mean aggregate at R=100 M=5 %.3f",
              violations, solves, worst, invalid, ratio)};
}

Verdict asr_load_trend() {
  const auto& rows = suite().results.at("request-sweep").rows;
  const MetricsRow* lo = find_row(rows, "proposed", 10, 5);
  const MetricsRow* hi = find_row(rows, "proposed", 100, 5);
  if (!lo || !hi) return {false, "missing request-sweep points"};
  const double drop = lo->mean_asr - hi->mean_asr;
  return {drop >= 0.10, fmt("M=5: ASR %.4f at R=10, %.4f at R=100, drop %.4f", lo->mean_asr, hi->mean_asr, drop)};
}

Verdict asr_provisioning_trend() {
  const auto& rows = suite().results.at("sf-sweep").rows;
  std::vector<std::pair<std::size_t, double>> curve;
  for (const auto& r : rows)
    if (r.solver == "proposed" && r.num_requests == 50) curve.emplace_back(r.num_sfs, r.mean_asr);
  std::sort(curve.begin(), curve.end());
  if (curve.empty() || curve.back().first != 20) return {false, "sf-sweep lacks R=50 up to M=20"};
  double worst_dip = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) worst_dip = std::max(worst_dip, curve[i - 1].second - curve[i].second);
  std::ostringstream pts;
  for (const auto& [m, a] : curve) pts << ' ' << m << ':' << fmt("%.3f", a);
  return {curve.back().second >= 0.99 && worst_dip <= 0.01,
          fmt("R=50: ASR at M=20 %.4f, largest dip %.4f;", curve.back().second, worst_dip) + pts.str()};
}

Verdict per_request_trend() {
  const auto& rows = suite().results.at("per-request-qos").rows;
  std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> by_r;
  for (const auto& r : rows)
    if (r.solver == "proposed" && r.mean_qos_per_request) by_r[r.num_requests].emplace_back(r.num_sfs, *r.mean_qos_per_request);
  if (by_r.empty()) return {false, "no grid point with every request served"};
  bool ok = true;
  std::string detail;
  for (auto& [R, curve] : by_r) {
    std::sort(curve.begin(), curve.end());
    const bool rising = curve.size() >= 2 && curve.back().second > curve.front().second;
    ok = ok && rising;
    detail += fmt("R=%zu: %.3f at M=%zu, %.3f at M=%zu; ", R, curve.front().second, curve.front().first,
                  curve.back().second, curve.back().first);
  }
  return {ok, detail};
}

Verdict capacity_trends() {
  const auto& rows = suite().results.at("capacity-sweep").rows;
  std::vector<const MetricsRow*> prop, base;
  for (const auto& r : rows) (r.solver == "proposed" ? prop : base).push_back(&r);
  auto by_cap = [](const MetricsRow* a, const MetricsRow* b) { return *a->capacity_override < *b->capacity_override; };
  std::sort(prop.begin(), prop.end(), by_cap);
  std::sort(base.begin(), base.end(), by_cap);
  if (prop.size() < 2 || prop.size() != base.size()) return {false, "capacity-sweep rows incomplete"};
  double worst_dip = 0.0;
  for (std::size_t i = 1; i < prop.size(); ++i)
    worst_dip = std::max(worst_dip, (prop[i - 1]->mean_aggregate_qos - prop[i]->mean_aggregate_qos) / prop[i - 1]->mean_aggregate_qos);
  const double top_asr = prop.back()->mean_asr;
  const double gap_lo = prop.front()->mean_aggregate_qos - base.front()->mean_aggregate_qos;
  const double gap_hi = prop.back()->mean_aggregate_qos - base.back()->mean_aggregate_qos;
  return {worst_dip <= 0.01 && top_asr >= 0.99 && gap_hi > gap_lo,
          fmt("largest relative dip %.4f, ASR at C=%g %.4f, gap %.2f at C=%g vs %.2f at C=%g", worst_dip,
              *prop.back()->capacity_override, top_asr, gap_hi, *prop.back()->capacity_override, gap_lo,
              *prop.front()->capacity_override)};
}

Verdict saturation() {
  const auto& rows = suite().results.at("request-sweep").rows;
  const MetricsRow* a = find_row(rows, "proposed", 90, 5);
  const MetricsRow* b = find_row(rows, "proposed", 100, 5);
  if (!a || !b) return {false, "missing request-sweep points"};
  const double rel = (b->mean_aggregate_qos - a->mean_aggregate_qos) / a->mean_aggregate_qos;
  return {rel < 0.05, fmt("M=5: aggregate %.2f at R=90, %.2f at R=100, relative increase %.4f", a->mean_aggregate_qos,
                          b->mean_aggregate_qos, rel)};
}

class LiveServer {
 public:
  explicit LiveServer(ServiceConfig config) : service_(std::move(config)), server_(service_, log_) {
    server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.run(stop_); });
  }
  ~LiveServer() {
    stop_ = true;
    thread_.join();
  }
  TcpClient connect() const {
    TcpClient c;
    c.connect("127.0.0.1", server_.port());
    return c;
  }

 private:
  CrsfService service_;
  std::ostringstream log_;
  TcpServer server_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

ServiceConfig tick_config() {
  ServiceConfig c;
  c.tick_mode = true;
  ServiceSchema s;
  s.service_type = ServiceTypeId("sensing");
  s.descriptors = {{"range", "m", QosDirection::benefit, 0, 300},
                   {"accuracy", "", QosDirection::benefit, 0, 1},
                   {"rate", "Hz", QosDirection::benefit, 0, 100}};
  s.categories = {{CategoryId(1), {0.02, 3.0, 0.05}, 100, 6}};
  c.service_types = {s};
  return c;
}

Verdict protocol() {
  test::MessageGen gen(2024);
  std::set<MessageType> seen;
  std::size_t mismatches = 0;
  for (int i = 0; i < 20000; ++i) {
    const ProtocolMessage m = gen.next();
    seen.insert(m.type());
    mismatches += decode_frame(encode_frame(m)) != m;
  }

  LiveServer server(tick_config());
  std::size_t frames = 0, error_replies = 0;
  for (int i = 0; i < 3000; ++i) {
    TcpClient c = server.connect();
    std::string bytes = encode_frame(gen.next());
    for (std::int64_t f = gen.pick(1, 4); f > 0; --f)
      bytes[static_cast<std::size_t>(gen.pick(0, static_cast<std::int64_t>(bytes.size()) - 1))] =
          static_cast<char>(gen.pick(0, 255));
    if (gen.pick(0, 3) == 0) bytes.resize(static_cast<std::size_t>(gen.pick(0, static_cast<std::int64_t>(bytes.size()))));
    if (gen.pick(0, 9) == 0) bytes = std::string("\xff\xff\xff\xff", 4) + bytes;
    c.send_raw(bytes);
    ++frames;
    if (i % 10 == 0) {
      try {
        if (auto r = c.receive(100ms); r && r->type() == MessageType::ERROR) ++error_replies;
      } catch (const Error&) {
      }
    }
  }
  TcpClient probe = server.connect();
  probe.send({0, RegisterPayload{{SfId(1), SubnetworkId(1), ServiceTypeId("sensing"), {100, 0.5, 10}, 10}}});
  const auto reply = probe.receive(2s);
  const bool alive = reply && reply->type() == MessageType::ACK;
  return {mismatches == 0 && seen.size() == 7 && alive,
          fmt("20000 round-trips over %zu types, %zu mismatches; %zu mutated frames sent, %zu sampled ERROR replies, "
              "service %s afterwards",
              seen.size(), mismatches, frames, error_replies, alive ? "answers" : "does not answer")};
}

Verdict tick_replay() {
  // Three SFs, one request; priority weights differ per SF.
  const std::vector<std::vector<double>> params{{120, 0.8, 20}, {200, 0.7, 40}, {90, 0.95, 10}};
  const std::vector<double> weights{0.02, 3.0, 0.05}, priority{3.0, 1.5, 2.5}, capacity{10, 4, 10};
  LiveServer server(tick_config());
  TcpClient tester = server.connect(), consumer = server.connect();
  std::vector<TcpClient> providers;
  DiscoverPayload d;
  d.request = {RequestId(1), SubnetworkId(9), ServiceTypeId("sensing"), CategoryId(1), {}};
  for (std::size_t m = 0; m < 3; ++m) {
    const SfId id(static_cast<std::int64_t>(m + 1));
    providers.push_back(server.connect());
    providers.back().send({0, RegisterPayload{{id, SubnetworkId(id.value()), ServiceTypeId("sensing"), params[m], capacity[m]}}});
    const auto ack = providers.back().receive(2s);
    if (!ack || ack->type() != MessageType::ACK) return {false, "registration was not acknowledged"};
    d.request.priority_weights[id] = priority[m];
    d.latency[id] = 40.0 + 10.0 * static_cast<double>(m);
  }
  consumer.send({0, d});
  const auto dack = consumer.receive(2s);
  if (!dack || dack->type() != MessageType::ACK) return {false, "DISCOVER was not acknowledged"};
  tester.send({0, TickPayload{}});
  const auto tack = tester.receive(5s);
  if (!tack || tack->type() != MessageType::ACK) return {false, "TICK was not acknowledged"};
  std::vector<SelectionNoticePayload> notices;
  while (auto m = consumer.receive(300ms))
    if (m->type() == MessageType::SELECTION_NOTICE) notices.push_back(std::get<SelectionNoticePayload>(m->payload));

  // Oracle: c = S * (w . p) with utilization 6 and every latency within 100 ms.
  SelectionInstance inst;
  inst.coefficients = Matrix<double>(1, 3);
  inst.feasible = Matrix<std::uint8_t>(1, 3, 1);
  inst.utilization = {6};
  inst.capacity = capacity;
  for (std::size_t m = 0; m < 3; ++m) {
    double q = 0.0;
    for (std::size_t n = 0; n < 3; ++n) q += weights[n] * params[m][n];
    inst.coefficients(0, m) = priority[m] * q;
  }
  const Assignment oracle = brute_force(inst);
  const std::optional<SfId> expected = oracle.assigned[0] ? std::optional(SfId(static_cast<std::int64_t>(*oracle.assigned[0] + 1)))
                                                          : std::nullopt;
  const bool ok = notices.size() == 1 && notices[0].sf_id == expected && expected;
  return {ok, fmt("%zu notice(s) to the requester, chosen SF %lld, brute-force optimum SF %lld", notices.size(),
                  notices.empty() || !notices[0].sf_id ? -1LL : static_cast<long long>(notices[0].sf_id->value()),
                  expected ? static_cast<long long>(expected->value()) : -1LL)};
}

Verdict performance() {
  std::vector<double> ms;
  std::size_t not_optimal = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const SampledRound round = sample_instance(test::sim_config(100, 10, 7), i);
    const auto problem = build_round_problem(round, ScoringMode::raw);
    const auto t0 = Clock::now();
    const Assignment a = solve_exact(problem.instance);
    ms.push_back(seconds_since(t0) * 1000.0);
    not_optimal += !a.optimal;
  }
  std::sort(ms.begin(), ms.end());
  const double p95 = ms[94];
  const Suite& s = suite();
  const bool suite_ok = s.seconds < 600.0;
  return {suite_ok && p95 < 2000.0,
          fmt("suite %.0f s on %u hardware thread(s) (limit 600 s on 4 cores); R=100 M=10 exact solve p95 %.0f ms, "
              "max %.0f ms, %zu of 100 stopped before proving optimality",
              s.seconds, s.threads, p95, ms.back(), not_optimal)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"oracle equivalence", oracle_equivalence},   {"dominance", dominance},
      {"ASR under load", asr_load_trend},           {"ASR with more SFs", asr_provisioning_trend},
      {"per-request QoS", per_request_trend},       {"capacity trends", capacity_trends},
      {"saturation", saturation},                   {"protocol round-trip and fuzzing", protocol},
      {"tick-mode replay", tick_replay},            {"performance envelope", performance},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << id << ' ' << criteria[i].first << ": " << v.detail << std::endl;
  }
  return failures ? 1 : 0;
}
