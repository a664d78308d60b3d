#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crsf/crsf.hpp"

namespace fs = std::filesystem;
using namespace crsf;

namespace {

enum Exit : int { kOk = 0, kDataError = 1, kEnvError = 2, kUsage = 64 };

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::io: return kEnvError;
    default: return kDataError;
  }
}

struct ServeArgs {
  std::string config;
  int port = -1;
};

int cmd_serve(const ServeArgs& args) {
  ServiceConfig config = load_config(args.config);
  if (args.port >= 0) config.port = static_cast<std::uint16_t>(args.port);
  CrsfService service(config);
  TcpServer server(service, std::cout);
  server.bind(config.host, config.port);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "crsf ready on " << config.host << ":" << server.port() << " solver=" << to_string(config.solver)
            << " mode=" << (config.tick_mode ? "tick" : "timer") << std::endl;
  server.run(g_stop);
  return kOk;
}

struct ClientArgs {
  std::string host = "127.0.0.1";
  int port = 7878;
  std::string script;
  int timeout_ms = 60000;
};

// A script holds one protocol message per line as a JSON object; blank lines
// and lines starting with '#' are skipped. After each message the client
// prints every reply up to the one that answers it.
int cmd_client(const ClientArgs& args) {
  std::ifstream in(args.script);
  if (!in) throw Error(ErrorCode::io, "cannot read script '" + args.script + "'");
  std::vector<ProtocolMessage> messages;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::parse, "script line " + std::to_string(n) + ": invalid JSON");
    try {
      messages.push_back(message_from_json(doc));
    } catch (const Error& e) {
      throw Error(e.code(), "script line " + std::to_string(n) + ": " + e.what());
    }
  }

  TcpClient client;
  client.connect(args.host, static_cast<std::uint16_t>(args.port));
  const std::chrono::milliseconds timeout(args.timeout_ms);
  for (const auto& msg : messages) {
    client.send(msg);
    const bool tick = msg.type() == MessageType::TICK;
    auto replies = client.receive_until(
        [tick](const ProtocolMessage& m) {
          if (m.type() == MessageType::ERROR) return true;
          if (m.type() != MessageType::ACK) return false;
          return !tick || std::get<AckPayload>(m.payload).of == MessageType::TICK;
        },
        timeout);
    for (const auto& r : replies) std::cout << to_json(r).dump() << '\n';
    if (replies.empty() || (replies.back().type() != MessageType::ACK && replies.back().type() != MessageType::ERROR))
      throw Error(ErrorCode::io, std::string("no answer to ") + to_string(msg.type()));
  }
  std::cout.flush();
  return kOk;
}

struct SolveArgs {
  std::string file;
  std::string solver = "exact";
  int time_limit_ms = 30000;
};

int cmd_solve(const SolveArgs& args) {
  const SolverChoice choice = parse_solver_choice(args.solver);
  const InstanceFile f = load_instance(args.file);
  f.instance.validate();
  if (choice == SolverChoice::baseline && !f.priorities)
    throw Error(ErrorCode::invalid_argument, "the baseline solver needs a 'priorities' section");
  SolveOptions options;
  options.budget.time_limit = std::chrono::milliseconds(args.time_limit_ms);
  const Assignment a = solve_with(choice, f.instance, f.priorities.value_or(Matrix<double>()), options);
  std::cout << std::setprecision(17);
  std::cout << "solver " << to_string(choice) << '\n';
  std::cout << "objective " << a.objective << '\n';
  std::cout << "optimal " << (a.optimal ? "true" : "false") << '\n';
  std::cout << "assigned " << a.assigned_count() << " of " << a.assigned.size() << '\n';
  for (std::size_t r = 0; r < a.assigned.size(); ++r) {
    if (a.assigned[r])
      std::cout << "r" << r << " -> m" << *a.assigned[r] << '\n';
    else
      std::cout << "r" << r << " -> unassigned\n";
  }
  return kOk;
}

struct ExperimentArgs {
  std::string name;
  std::uint64_t seed = 7;
  std::string out = "results";
  std::size_t rounds = 100;
  unsigned threads = 0;
  bool timing = false;
  bool via_service = false;
  std::string scoring = "raw";
  std::string solver = "exact";
  std::uint64_t max_pivots = 0;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  os.close();
  if (!os) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  std::cout << path.string() << '\n';
}

int cmd_experiment(const ExperimentArgs& args) {
  std::vector<std::string> names;
  if (args.name == "all") {
    names = experiment_names();
  } else {
    names = {args.name};
  }
  ExperimentOptions opts;
  opts.seed = args.seed;
  opts.rounds = args.rounds;
  opts.threads = args.threads;
  opts.timing = args.timing;
  opts.scoring = parse_scoring_mode(args.scoring);
  opts.solver = parse_solver_choice(args.solver);
  if (opts.solver == SolverChoice::baseline || opts.solver == SolverChoice::brute)
    throw Error(ErrorCode::invalid_argument, "the proposed solver must be 'exact' or 'greedy'");
  if (args.max_pivots) opts.budget.max_lp_iterations = args.max_pivots;
  if (args.via_service) {
    if (opts.solver != SolverChoice::exact) throw Error(ErrorCode::invalid_argument, "--via-service runs the exact solver");
    opts.via_service = service_round_runner(opts.budget, opts.scoring);
  }

  const fs::path dir(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());

  ExperimentLog total;
  for (const auto& name : names) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult res = run_experiment(name, opts, [](const std::string& p) { std::cerr << p << std::endl; });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream csv;
    write_csv(csv, res.rows);
    write_file(dir / (name + ".csv"), csv.str());
    if (!res.rows.empty()) write_file(dir / (name + ".svg"), render_svg(name, res.rows));
    std::cerr << name << ": " << res.rows.size() << " rows, " << res.log.solves << " solves ("
              << res.log.non_optimal_proposed << " proposed and " << res.log.non_optimal_baseline
              << " baseline stopped on budget), dominance violations " << res.log.dominance_violations
              << ", invalid assignments " << res.log.invalid_assignments << ", " << std::fixed << std::setprecision(1)
              << secs << " s" << std::defaultfloat << std::endl;
    total.merge(res.log);
  }
  return total.invalid_assignments ? kDataError : kOk;
}

struct RenderArgs {
  std::string csv;
  std::string out = "results";
};

int cmd_render(const RenderArgs& args) {
  std::ifstream in(args.csv);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + args.csv + "'");
  const auto plots = render_plots(read_csv(in));
  const fs::path dir(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& [name, svg] : plots) write_file(dir / (name + ".svg"), svg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Central repository and selection function for shared services"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run the selection service");
  s->add_option("--config", serve.config, "Service config (JSON)")->required();
  s->add_option("--port", serve.port, "Override the configured port")->check(CLI::Range(0, 65535));

  ClientArgs client;
  auto* c = app.add_subcommand("client", "Send a scripted message sequence to a running service");
  c->add_option("script", client.script, "One JSON message per line")->required();
  c->add_option("--host", client.host, "Service host");
  c->add_option("--port", client.port, "Service port")->check(CLI::Range(1, 65535));
  c->add_option("--timeout-ms", client.timeout_ms, "Reply timeout per message")->check(CLI::PositiveNumber);

  SolveArgs solve;
  auto* v = app.add_subcommand("solve", "Solve an instance file");
  v->add_option("file", solve.file, "Instance file")->required();
  v->add_option("--solver", solve.solver, "exact, greedy, baseline or brute")
      ->check(CLI::IsMember({"exact", "greedy", "baseline", "brute"}));
  v->add_option("--time-limit-ms", solve.time_limit_ms, "Time limit of the exact solver")->check(CLI::PositiveNumber);

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run Monte-Carlo experiments and write CSV and SVG");
  std::vector<std::string> choices = experiment_names();
  choices.push_back("all");
  e->add_option("name", exp.name, "request-sweep, sf-sweep, per-request-qos, capacity-sweep or all")
      ->required()
      ->check(CLI::IsMember(choices));
  e->add_option("--seed", exp.seed, "Base seed");
  e->add_option("--out", exp.out, "Output directory");
  e->add_option("--rounds", exp.rounds, "Rounds per grid point")->check(CLI::PositiveNumber);
  e->add_option("--threads", exp.threads, "Worker threads (0: all cores)");
  e->add_flag("--timing", exp.timing, "Fill the solver time column (makes the CSV machine dependent)");
  e->add_flag("--via-service", exp.via_service, "Drive a local CRSF over TCP instead of calling the solvers");
  e->add_option("--scoring", exp.scoring, "raw or normalized")->check(CLI::IsMember({"raw", "normalized"}));
  e->add_option("--solver", exp.solver, "Proposed solver: exact or greedy")->check(CLI::IsMember({"exact", "greedy"}));
  e->add_option("--max-pivots", exp.max_pivots, "Simplex pivot budget per exact solve");

  RenderArgs render;
  auto* r = app.add_subcommand("render", "Render SVG plots from an experiment CSV");
  r->add_option("csv", render.csv, "Experiment CSV")->required();
  r->add_option("--out", render.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }

  try {
    if (s->parsed()) return cmd_serve(serve);
    if (c->parsed()) return cmd_client(client);
    if (v->parsed()) return cmd_solve(solve);
    if (e->parsed()) return cmd_experiment(exp);
    if (r->parsed()) return cmd_render(render);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << std::endl;
    return exit_code_for(ex);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << std::endl;
    return kDataError;
  }
  return kUsage;
}
