#include <gtest/gtest.h>

#include <sys/wait.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace crsf;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(CRSF_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string sample(const std::string& name) { return std::string(CRSF_SAMPLES_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("crsf_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A `crsf serve` child on an ephemeral port; the shell prints its pid first.
class ServeProcess {
 public:
  explicit ServeProcess(const std::string& config) {
    const std::string cmd =
        "sh -c 'echo $$; exec " + std::string(CRSF_CLI_PATH) + " serve --config " + config + " --port 0' 2>/dev/null";
    pipe_ = ::popen(cmd.c_str(), "r");
    pid_ = std::stol(line());
    ready_ = line();
    const auto colon = ready_.rfind(':', ready_.find(" solver="));
    port_ = std::stoi(ready_.substr(colon + 1));
  }
  ~ServeProcess() {
    ::kill(static_cast<pid_t>(pid_), SIGTERM);
    ::pclose(pipe_);
  }
  std::string line() {
    char buf[512];
    if (!std::fgets(buf, sizeof buf, pipe_)) return {};
    std::string s(buf);
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
  }
  int port() const { return port_; }
  const std::string& ready() const { return ready_; }

 private:
  FILE* pipe_ = nullptr;
  long pid_ = 0;
  int port_ = 0;
  std::string ready_;
};

}  // namespace

TEST(Cli, SolveThreeByTwo) {
  const CliRun r = run("solve " + sample("three_by_two.inst"));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "solver exact\nobjective 24\noptimal true\nassigned 3 of 3\nr0 -> m1\nr1 -> m0\nr2 -> m0\n");
  const CliRun g = run("solve " + sample("three_by_two.inst") + " --solver greedy");
  EXPECT_NE(g.out.find("objective 23\noptimal false\n"), std::string::npos);
  EXPECT_NE(run("solve " + sample("single.inst") + " --solver brute").out.find("r0 -> m0"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("solve " + sample("ragged.inst")).status, 1);
  EXPECT_EQ(run("solve " + sample("three_by_two.inst") + " --solver baseline").status, 1);
  EXPECT_EQ(run("solve " + sample("no-such.inst")).status, 2);
  EXPECT_EQ(run("solve").status, 64);
  EXPECT_EQ(run("solve x --solver gurobi").status, 64);
  EXPECT_EQ(run("frobnicate").status, 64);
  EXPECT_EQ(run("experiment no-such-sweep").status, 64);
  EXPECT_EQ(run("render " + sample("no-such.csv")).status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, ExperimentIsByteReproducible) {
  const fs::path a = scratch("a"), b = scratch("b");
  const std::string args = "experiment capacity-sweep --rounds 2 --threads 1 --max-pivots 2000 --out ";
  const CliRun ra = run(args + a.string());
  ASSERT_EQ(ra.status, 0);
  EXPECT_NE(ra.out.find("capacity-sweep.csv"), std::string::npos);
  ASSERT_EQ(run(args + b.string()).status, 0);
  EXPECT_EQ(slurp(a / "capacity-sweep.csv"), slurp(b / "capacity-sweep.csv"));
  EXPECT_EQ(slurp(a / "capacity-sweep.svg"), slurp(b / "capacity-sweep.svg"));

  const fs::path c = scratch("c");
  ASSERT_EQ(run("render " + (a / "capacity-sweep.csv").string() + " --out " + c.string()).status, 0);
  EXPECT_EQ(slurp(c / "capacity-sweep.svg"), slurp(a / "capacity-sweep.svg"));

  const fs::path empty = scratch("empty") / "empty.csv";
  std::ofstream(empty) << csv_header() << '\n';
  EXPECT_EQ(run("render " + empty.string() + " --out " + c.string()).status, 1);
}

TEST(Cli, ServeAndReplayScript) {
  ServeProcess server(sample("tick.json"));
  EXPECT_EQ(server.ready().rfind("crsf ready on 127.0.0.1:", 0), 0u) << server.ready();
  EXPECT_NE(server.ready().find("mode=tick"), std::string::npos);
  const CliRun r = run("client " + sample("three_sfs.script") + " --port " + std::to_string(server.port()));
  ASSERT_EQ(r.status, 0);
  std::vector<nlohmann::json> lines;
  std::istringstream in(r.out);
  for (std::string l; std::getline(in, l);) lines.push_back(nlohmann::json::parse(l));
  std::vector<std::int64_t> chosen;
  for (const auto& j : lines)
    if (j["type"] == "SELECTION_NOTICE") chosen.push_back(j["payload"]["sf_id"].get<std::int64_t>());
  // Each notice arrives twice: once for the requester and once for the provider.
  EXPECT_EQ(chosen, (std::vector<std::int64_t>{2, 2, 3, 3}));
  EXPECT_EQ(lines.back()["payload"]["of"], "TICK");
  EXPECT_EQ(server.line(), "slot=0 batch=1 objective=9 optimal=true");
  EXPECT_EQ(server.line(), "slot=1 batch=1 objective=7 optimal=true");
}

TEST(Cli, ServeFailsWhenPortIsTaken) {
  CrsfService svc(parse_config(R"({"service_types":[{"name":"sensing","qos_params":"sensing","categories":[]}]})"));
  std::ostringstream log;
  TcpServer holder(svc, log);
  holder.bind("127.0.0.1", 0);
  EXPECT_EQ(run("serve --config " + sample("tick.json") + " --port " + std::to_string(holder.port())).status, 2);
  EXPECT_EQ(run("serve --config " + sample("missing.json")).status, 2);
}

TEST(Cli, ClientReportsErrors) {
  ServeProcess server(sample("tick.json"));
  const fs::path dir = scratch("client");
  std::ofstream(dir / "bad.script") << "{\"type\":\"TICK\"}\n";
  EXPECT_EQ(run("client " + (dir / "bad.script").string() + " --port " + std::to_string(server.port())).status, 1);
  std::ofstream(dir / "err.script")
      << R"({"type":"CAPACITY_UPDATE","slot":0,"payload":{"sf_id":5,"capacity":1}})" << '\n';
  const CliRun r = run("client " + (dir / "err.script").string() + " --port " + std::to_string(server.port()));
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\"code\":\"not-found\""), std::string::npos);
}
