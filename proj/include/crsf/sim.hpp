#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "crsf/config.hpp"
#include "crsf/registry.hpp"
#include "crsf/scoring.hpp"
#include "crsf/solver.hpp"

namespace crsf {

/// A real interval with per-end openness, e.g. (0, 1] or [60, 120).
struct Range {
  double min = 0.0;
  double max = 1.0;
  bool open_min = false;
  bool open_max = true;

  bool contains(double x) const {
    if (open_min ? !(x > min) : !(x >= min)) return false;
    if (open_max ? !(x < max) : !(x <= max)) return false;
    return true;
  }
  bool nonempty() const { return min < max || (min == max && !open_min && !open_max); }
};

/// Uniform draw from a range honoring openness at both ends.
template <typename Rng>
double draw(const Range& r, Rng& rng) {
  if (r.min == r.max) return r.min;
  for (;;) {
    // Half-open [lo, hi) draws, mirrored or widened to reach the other bracket shapes.
    double x;
    if (r.open_min && !r.open_max) {
      x = r.min + r.max - std::uniform_real_distribution<double>(r.min, r.max)(rng);
    } else {
      const double hi = r.open_max ? r.max : std::nextafter(r.max, std::numeric_limits<double>::infinity());
      x = std::uniform_real_distribution<double>(r.min, hi)(rng);
    }
    if (r.contains(x)) return x;
  }
}

struct SimRanges {
  Range priority{1.0, 10.0, false, false};
  Range latency{60.0, 120.0, false, true};
  Range threshold{90.0, 140.0, false, true};
  Range capacity{30.0, 50.0, false, false};
  Range utilization{5.0, 10.0, false, false};
  Range weight{0.0, 1.0, true, false};
  std::vector<Range> params{
      {20.0, 500.0, false, true}, {10.0, 500.0, false, true}, {50.0, 300.0, false, true},
      {1.0, 20.0, false, true},   {0.5, 1.0, true, true},     {0.0, 0.1, true, true},
  };
};

struct SimConfig {
  std::size_t num_requests = 50;
  std::size_t num_sfs = 5;
  std::size_t num_categories = 5;
  std::size_t num_params = 6;
  std::size_t rounds = 100;
  std::uint64_t seed = 7;
  SimRanges ranges;
  /// Replaces the capacity range by one value for every SF.
  std::optional<double> capacity_override;
  ScoringMode scoring = ScoringMode::raw;
  SolverChoice solver = SolverChoice::exact;

  void validate() const {
    if (rounds < 1) throw Error(ErrorCode::invalid_argument, "rounds must be at least 1");
    if (num_categories < 1) throw Error(ErrorCode::invalid_argument, "need at least one category");
    if (ranges.params.size() != num_params)
      throw Error(ErrorCode::invalid_argument, "parameter range count must equal num_params");
    for (const Range* r : {&ranges.priority, &ranges.latency, &ranges.threshold, &ranges.capacity, &ranges.utilization,
                           &ranges.weight})
      if (!r->nonempty()) throw Error(ErrorCode::invalid_argument, "empty sampling range");
    for (const auto& r : ranges.params)
      if (!r.nonempty()) throw Error(ErrorCode::invalid_argument, "empty parameter range");
    if (ranges.priority.min <= 0.0 && !ranges.priority.open_min)
      throw Error(ErrorCode::invalid_argument, "priority weights must be positive");
    if (capacity_override && !(*capacity_override >= 0.0))
      throw Error(ErrorCode::invalid_argument, "capacity override must be nonnegative");
  }
};

/// Sensing schema whose descriptor ranges follow the configured parameter ranges.
inline std::vector<QosParamDescriptor> sim_descriptors(const SimConfig& config) {
  std::vector<QosParamDescriptor> d;
  const auto sensing = sensing_descriptors();
  for (std::size_t n = 0; n < config.num_params; ++n) {
    QosParamDescriptor q = n < sensing.size() ? sensing[n] : QosParamDescriptor{"param" + std::to_string(n), "", QosDirection::benefit, 0, 1};
    q.range_min = config.ranges.params[n].min;
    q.range_max = config.ranges.params[n].max;
    d.push_back(q);
  }
  return d;
}

struct SampledRound {
  std::vector<ServiceRequest> requests;
  std::vector<SfProfile> profiles;
  ServiceSchema schema;
  LatencyMatrix latency;
};

namespace sim_detail {

// Independent stream per (seed, round, entity kind, entity index). SFs and
// requests draw from their own streams, so instances with more SFs or more
// requests extend smaller ones drawn from the same (seed, round).
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t round, std::uint32_t kind, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(round), static_cast<std::uint32_t>(round >> 32), kind,
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

enum : std::uint32_t { kCategoryStream = 1, kSfStream = 2, kRequestStream = 3 };

}  // namespace sim_detail

inline const ServiceTypeId& sensing_type() {
  static const ServiceTypeId type("sensing");
  return type;
}

/// Draws one round's requests, SFs, categories and latencies.
inline SampledRound sample_instance(const SimConfig& config, std::uint64_t round_index) {
  config.validate();
  using namespace sim_detail;
  const auto& rg = config.ranges;
  SampledRound out;
  out.schema.service_type = sensing_type();
  out.schema.descriptors = sim_descriptors(config);

  auto cat_rng = stream(config.seed, round_index, kCategoryStream, 0);
  for (std::size_t k = 0; k < config.num_categories; ++k) {
    CategoryProfile c;
    c.category_id = CategoryId(static_cast<std::int64_t>(k + 1));
    for (std::size_t n = 0; n < config.num_params; ++n) c.weights.push_back(draw(rg.weight, cat_rng));
    c.latency_threshold = draw(rg.threshold, cat_rng);
    c.utilization = draw(rg.utilization, cat_rng);
    out.schema.categories.push_back(std::move(c));
  }

  for (std::size_t m = 0; m < config.num_sfs; ++m) {
    auto rng = stream(config.seed, round_index, kSfStream, m);
    SfProfile p;
    p.sf_id = SfId(static_cast<std::int64_t>(m + 1));
    p.subnetwork_id = SubnetworkId(static_cast<std::int64_t>(m + 1));
    p.service_type = sensing_type();
    for (std::size_t n = 0; n < config.num_params; ++n) p.qos_params.push_back(draw(rg.params[n], rng));
    const double cap = draw(rg.capacity, rng);
    p.capacity = config.capacity_override ? *config.capacity_override : cap;
    out.profiles.push_back(std::move(p));
  }

  for (std::size_t r = 0; r < config.num_requests; ++r) {
    auto rng = stream(config.seed, round_index, kRequestStream, r);
    ServiceRequest req;
    req.request_id = RequestId(static_cast<std::int64_t>(r + 1));
    req.service_type = sensing_type();
    req.category_id = CategoryId(static_cast<std::int64_t>(
        std::uniform_int_distribution<std::size_t>(1, config.num_categories)(rng)));
    for (std::size_t m = 0; m < config.num_sfs; ++m) {
      const SfId sf(static_cast<std::int64_t>(m + 1));
      req.priority_weights[sf] = draw(rg.priority, rng);
      out.latency.set(req.request_id, sf, draw(rg.latency, rng));
    }
    req.origin_subnetwork = SubnetworkId(static_cast<std::int64_t>(
        config.num_sfs ? std::uniform_int_distribution<std::size_t>(1, config.num_sfs)(rng) : 0));
    out.requests.push_back(std::move(req));
  }
  return out;
}

inline SlotProblem build_round_problem(const SampledRound& round, ScoringMode mode) {
  return build_slot_problem(round.requests, round.profiles, round.schema, round.latency, mode);
}

struct RoundMetrics {
  double aggregate = 0.0;
  double asr = 1.0;
  std::optional<double> qos_per_request;  // only when every request is served
};

inline RoundMetrics compute_metrics(const Assignment& a, const SelectionInstance& inst) {
  RoundMetrics m;
  const std::size_t R = inst.num_requests();
  for (double v : a.per_request_value) m.aggregate += v;
  if (R == 0) return m;
  const std::size_t served = a.assigned_count();
  m.asr = static_cast<double>(served) / static_cast<double>(R);
  if (served == R) m.qos_per_request = m.aggregate / static_cast<double>(R);
  return m;
}

// Experiments -----------------------------------------------------------------

struct ExperimentOptions {
  std::uint64_t seed = 7;
  std::size_t rounds = 100;
  unsigned threads = 0;  // 0: hardware concurrency
  ScoringMode scoring = ScoringMode::raw;
  SolverChoice solver = SolverChoice::exact;
  SolveBudget budget = default_budget();
  bool timing = false;
  /// Route every round through a CRSF service over TCP instead of calling
  /// the solvers in-process. Set by the caller, see run_round_via_service.
  std::function<std::pair<Assignment, Assignment>(const SampledRound&, const SlotProblem&)> via_service;
  SimRanges ranges;

  /// Experiment solves stop on a deterministic pivot budget so that results
  /// never depend on machine speed; the time limit is only a safety net.
  static SolveBudget default_budget() {
    SolveBudget b;
    b.max_lp_iterations = 30'000;
    b.time_limit = std::chrono::milliseconds(600'000);
    b.relative_gap = 1e-4;
    return b;
  }
};

struct MetricsRow {
  std::string experiment;
  std::string solver;
  std::string scoring_mode;
  std::size_t num_requests = 0;
  std::size_t num_sfs = 0;
  std::optional<double> capacity_override;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  double mean_aggregate_qos = 0.0;
  double std_aggregate_qos = 0.0;
  double mean_asr = 0.0;
  double std_asr = 0.0;
  std::optional<double> mean_qos_per_request;
  std::optional<double> std_qos_per_request;
  std::optional<double> mean_solver_ms;
};

/// Bookkeeping that does not go into the CSV.
struct ExperimentLog {
  std::size_t solves = 0;
  std::size_t non_optimal_proposed = 0;
  std::size_t non_optimal_baseline = 0;
  std::size_t dominance_violations = 0;
  std::size_t invalid_assignments = 0;
  double worst_dominance_gap = 0.0;  // most negative proposed - baseline, 0 if none

  void merge(const ExperimentLog& o) {
    solves += o.solves;
    non_optimal_proposed += o.non_optimal_proposed;
    non_optimal_baseline += o.non_optimal_baseline;
    dominance_violations += o.dominance_violations;
    invalid_assignments += o.invalid_assignments;
    worst_dominance_gap = std::min(worst_dominance_gap, o.worst_dominance_gap);
  }
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  ExperimentLog log;
};

struct RoundOutcome {
  RoundMetrics proposed, baseline;
  double proposed_ms = 0.0, baseline_ms = 0.0;
  bool proposed_optimal = true, baseline_optimal = true;
  bool valid = true;
  double dominance_gap = 0.0;  // proposed - baseline aggregate under c
};

/// Solves one round with the baseline and the proposed solver. The proposed
/// solve starts from the baseline's assignment, which satisfies the same
/// constraints.
inline RoundOutcome run_round(const SimConfig& config, std::uint64_t round_index, const ExperimentOptions& opts) {
  const SampledRound round = sample_instance(config, round_index);
  const SlotProblem problem = build_round_problem(round, config.scoring);
  const auto& inst = problem.instance;
  RoundOutcome out;
  Assignment base, prop;
  if (opts.via_service) {
    std::tie(prop, base) = opts.via_service(round, problem);
  } else {
    SolveOptions so;
    so.budget = opts.budget;
    auto t0 = std::chrono::steady_clock::now();
    base = solve_baseline(inst, problem.priorities, so);
    auto t1 = std::chrono::steady_clock::now();
    if (config.solver == SolverChoice::exact) {
      so.warm_start = choice_vector(base);
      prop = solve_exact(inst, so);
    } else {
      prop = solve_with(config.solver, inst, problem.priorities, so);
    }
    auto t2 = std::chrono::steady_clock::now();
    out.baseline_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.proposed_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  }
  out.valid = verify_assignment(inst, prop) && verify_assignment(inst, base);
  out.proposed = compute_metrics(prop, inst);
  out.baseline = compute_metrics(base, inst);
  out.proposed_optimal = prop.optimal;
  out.baseline_optimal = base.optimal;
  out.dominance_gap = out.proposed.aggregate - out.baseline.aggregate;
  return out;
}

namespace sim_detail {

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

inline MetricsRow summarize(const std::string& experiment, const std::string& solver, const SimConfig& config,
                            const std::vector<RoundMetrics>& metrics, const std::vector<double>& ms, bool timing) {
  MetricsRow row;
  row.experiment = experiment;
  row.solver = solver;
  row.scoring_mode = to_string(config.scoring);
  row.num_requests = config.num_requests;
  row.num_sfs = config.num_sfs;
  row.capacity_override = config.capacity_override;
  row.rounds = config.rounds;
  row.seed = config.seed;
  std::vector<double> agg, asr, per;
  for (const auto& m : metrics) {
    agg.push_back(m.aggregate);
    asr.push_back(m.asr);
    if (m.qos_per_request) per.push_back(*m.qos_per_request);
  }
  mean_std(agg, row.mean_aggregate_qos, row.std_aggregate_qos);
  mean_std(asr, row.mean_asr, row.std_asr);
  if (per.size() == metrics.size()) {
    double mean = 0.0, sd = 0.0;
    mean_std(per, mean, sd);
    row.mean_qos_per_request = mean;
    row.std_qos_per_request = sd;
  }
  if (timing) {
    double mean = 0.0, sd = 0.0;
    mean_std(ms, mean, sd);
    row.mean_solver_ms = mean;
  }
  return row;
}

}  // namespace sim_detail

/// Runs every round of one grid point (in parallel when allowed) and appends
/// the proposed and baseline rows.
inline void run_point(const std::string& experiment, const SimConfig& config, const ExperimentOptions& opts,
                      ExperimentResult& result) {
  config.validate();
  std::vector<RoundOutcome> outcomes(config.rounds);
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  if (opts.via_service) threads = 1;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.rounds));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < config.rounds;) outcomes[i] = run_round(config, i, opts);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<RoundMetrics> prop, base;
  std::vector<double> prop_ms, base_ms;
  ExperimentLog log;
  for (const auto& o : outcomes) {
    prop.push_back(o.proposed);
    base.push_back(o.baseline);
    prop_ms.push_back(o.proposed_ms);
    base_ms.push_back(o.baseline_ms);
    log.solves += 2;
    log.non_optimal_proposed += !o.proposed_optimal;
    log.non_optimal_baseline += !o.baseline_optimal;
    log.invalid_assignments += !o.valid;
    const double tol = objective_tolerance(o.baseline.aggregate);
    if (o.dominance_gap < -tol) {
      ++log.dominance_violations;
      log.worst_dominance_gap = std::min(log.worst_dominance_gap, o.dominance_gap);
    }
  }
  result.rows.push_back(sim_detail::summarize(experiment, "proposed", config, prop, prop_ms, opts.timing));
  result.rows.push_back(sim_detail::summarize(experiment, "baseline", config, base, base_ms, opts.timing));
  result.log.merge(log);
}

inline SimConfig point_config(const ExperimentOptions& opts, std::size_t R, std::size_t M,
                              std::optional<double> capacity = std::nullopt) {
  SimConfig c;
  c.num_requests = R;
  c.num_sfs = M;
  c.rounds = opts.rounds;
  c.seed = opts.seed;
  c.ranges = opts.ranges;
  c.capacity_override = capacity;
  c.scoring = opts.scoring;
  c.solver = opts.solver;
  return c;
}

inline std::vector<std::size_t> grid(std::size_t from, std::size_t to, std::size_t step) {
  std::vector<std::size_t> g;
  for (std::size_t v = from; v <= to; v += step) g.push_back(v);
  return g;
}

struct RequestSweepGrid {
  std::vector<std::size_t> requests = grid(10, 100, 10);
  std::vector<std::size_t> sfs{5, 10};
};
struct SfSweepGrid {
  std::vector<std::size_t> sfs = grid(2, 20, 2);
  std::vector<std::size_t> requests{50, 100};
};
struct PerRequestQosGrid {
  std::vector<std::size_t> sfs = grid(2, 20, 2);
  std::vector<std::size_t> requests{20, 50};
};
struct CapacitySweepGrid {
  std::vector<double> capacities{30, 60, 90, 120, 150, 180, 210, 240, 270, 300};
  std::size_t requests = 100;
  std::size_t sfs = 5;
};

using ProgressFn = std::function<void(const std::string&)>;

inline ExperimentResult experiment_request_sweep(const ExperimentOptions& opts, const RequestSweepGrid& g = {},
                                                 const ProgressFn& progress = {}) {
  ExperimentResult res;
  for (std::size_t M : g.sfs)
    for (std::size_t R : g.requests) {
      if (progress) progress("request-sweep R=" + std::to_string(R) + " M=" + std::to_string(M));
      run_point("request-sweep", point_config(opts, R, M), opts, res);
    }
  return res;
}

inline ExperimentResult experiment_sf_sweep(const ExperimentOptions& opts, const SfSweepGrid& g = {},
                                            const ProgressFn& progress = {}) {
  ExperimentResult res;
  for (std::size_t R : g.requests)
    for (std::size_t M : g.sfs) {
      if (progress) progress("sf-sweep R=" + std::to_string(R) + " M=" + std::to_string(M));
      run_point("sf-sweep", point_config(opts, R, M), opts, res);
    }
  return res;
}

/// Keeps only the grid points where every round of both solvers served every
/// request.
inline ExperimentResult experiment_per_request_qos(const ExperimentOptions& opts, const PerRequestQosGrid& g = {},
                                                   const ProgressFn& progress = {}) {
  ExperimentResult all;
  for (std::size_t R : g.requests)
    for (std::size_t M : g.sfs) {
      if (progress) progress("per-request-qos R=" + std::to_string(R) + " M=" + std::to_string(M));
      run_point("per-request-qos", point_config(opts, R, M), opts, all);
    }
  ExperimentResult res;
  res.log = all.log;
  for (std::size_t i = 0; i + 1 < all.rows.size(); i += 2)
    if (all.rows[i].mean_qos_per_request && all.rows[i + 1].mean_qos_per_request) {
      res.rows.push_back(all.rows[i]);
      res.rows.push_back(all.rows[i + 1]);
    }
  return res;
}

inline ExperimentResult experiment_capacity_sweep(const ExperimentOptions& opts, const CapacitySweepGrid& g = {},
                                                  const ProgressFn& progress = {}) {
  ExperimentResult res;
  for (double cap : g.capacities) {
    if (progress) {
      std::ostringstream label;
      label << "capacity-sweep C=" << cap;
      progress(label.str());
    }
    run_point("capacity-sweep", point_config(opts, g.requests, g.sfs, cap), opts, res);
  }
  return res;
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"request-sweep", "sf-sweep", "per-request-qos", "capacity-sweep"};
  return names;
}

inline ExperimentResult run_experiment(const std::string& name, const ExperimentOptions& opts, const ProgressFn& progress = {}) {
  if (name == "request-sweep") return experiment_request_sweep(opts, {}, progress);
  if (name == "sf-sweep") return experiment_sf_sweep(opts, {}, progress);
  if (name == "per-request-qos") return experiment_per_request_qos(opts, {}, progress);
  if (name == "capacity-sweep") return experiment_capacity_sweep(opts, {}, progress);
  throw Error(ErrorCode::invalid_argument, "unknown experiment '" + name + "'");
}

// CSV -------------------------------------------------------------------------

inline const std::string& csv_header() {
  static const std::string h =
      "experiment,solver,scoring_mode,num_requests,num_sfs,capacity_override,rounds,seed,mean_aggregate_qos,"
      "std_aggregate_qos,mean_asr,std_asr,mean_qos_per_request,std_qos_per_request,mean_solver_ms";
  return h;
}

namespace sim_detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace sim_detail

inline void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  using sim_detail::fmt;
  os << csv_header() << '\n';
  for (const auto& r : rows)
    os << r.experiment << ',' << r.solver << ',' << r.scoring_mode << ',' << r.num_requests << ',' << r.num_sfs << ','
       << fmt(r.capacity_override) << ',' << r.rounds << ',' << r.seed << ',' << fmt(r.mean_aggregate_qos) << ','
       << fmt(r.std_aggregate_qos) << ',' << fmt(r.mean_asr) << ',' << fmt(r.std_asr) << ',' << fmt(r.mean_qos_per_request)
       << ',' << fmt(r.std_qos_per_request) << ',' << fmt(r.mean_solver_ms) << '\n';
}

/// Parses a CSV written by write_csv. Throws Error(schema) on a header or
/// field mismatch and Error(parse) on malformed numbers.
inline std::vector<MetricsRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::schema, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw Error(ErrorCode::schema, "unexpected CSV header");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  auto num = [&](const std::string& s) -> double {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
  };
  auto opt = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return num(s);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 15) throw Error(ErrorCode::schema, "line " + std::to_string(line_no) + ": expected 15 fields");
    MetricsRow r;
    r.experiment = f[0];
    r.solver = f[1];
    r.scoring_mode = f[2];
    r.num_requests = static_cast<std::size_t>(num(f[3]));
    r.num_sfs = static_cast<std::size_t>(num(f[4]));
    r.capacity_override = opt(f[5]);
    r.rounds = static_cast<std::size_t>(num(f[6]));
    try {
      std::size_t used = 0;
      r.seed = static_cast<std::uint64_t>(std::stoull(f[7], &used));
      if (used != f[7].size()) throw std::invalid_argument("seed");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad seed '" + f[7] + "'");
    }
    r.mean_aggregate_qos = num(f[8]);
    r.std_aggregate_qos = num(f[9]);
    r.mean_asr = num(f[10]);
    r.std_asr = num(f[11]);
    r.mean_qos_per_request = opt(f[12]);
    r.std_qos_per_request = opt(f[13]);
    r.mean_solver_ms = opt(f[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace crsf
