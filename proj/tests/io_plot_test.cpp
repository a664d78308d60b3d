#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <vector>

#include "support.hpp"

using namespace crsf;
using namespace crsf::test;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    return e.what();
  }
  ADD_FAILURE() << "parsed unexpectedly";
  return {};
}

// Tag balance check: every element opened is closed in order, and the
// document has a single root.
bool well_formed(const std::string& xml) {
  std::vector<std::string> stack;
  std::size_t roots = 0;
  for (std::size_t i = xml.find('<'); i != std::string::npos; i = xml.find('<', i + 1)) {
    const std::size_t end = xml.find('>', i);
    if (end == std::string::npos) return false;
    const std::string tag = xml.substr(i + 1, end - i - 1);
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    if (stack.empty()) ++roots;
    if (tag.back() == '/') continue;
    stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
  }
  return stack.empty() && roots == 1;
}

std::vector<MetricsRow> sweep_rows(const std::string& experiment) {
  ExperimentOptions o;
  o.rounds = 3;
  o.threads = 1;
  if (experiment == "request-sweep") return experiment_request_sweep(o, {{5, 10, 15}, {2, 3}}).rows;
  if (experiment == "sf-sweep") return experiment_sf_sweep(o, {{2, 4}, {6, 8}}).rows;
  if (experiment == "per-request-qos") return experiment_per_request_qos(o, {{3, 4}, {4}}).rows;
  CapacitySweepGrid g;
  g.capacities = {10, 20, 40};
  g.requests = 8;
  g.sfs = 2;
  return experiment_capacity_sweep(o, g).rows;
}

}  // namespace

TEST(InstanceIo, ParsesSampleWithCommentsAndBlankLines) {
  const auto f = parse_instance(
      "# header\n\ndims 2 3\ncapacity\n4 5 6\ncoefficients\n1 2 3\n4.5 -1 0\n"
      "feasible\n1 0 1\n0 1 1\n\nutilization   \n2 3\n");
  EXPECT_EQ(f.instance.coefficients, (Matrix<double>{{1, 2, 3}, {4.5, -1, 0}}));
  EXPECT_EQ(f.instance.feasible, (Matrix<std::uint8_t>{{1, 0, 1}, {0, 1, 1}}));
  EXPECT_EQ(f.instance.utilization, (std::vector<double>{2, 3}));
  EXPECT_EQ(f.instance.capacity, (std::vector<double>{4, 5, 6}));
  EXPECT_FALSE(f.priorities);
}

TEST(InstanceIo, LoadsShippedSamples) {
  const auto f = load_instance(std::string(CRSF_SAMPLES_DIR) + "/three_by_two.inst");
  EXPECT_EQ(solve_exact(f.instance).objective, 24.0);
  EXPECT_THROW(load_instance(std::string(CRSF_SAMPLES_DIR) + "/missing.inst"), Error);
  try {
    load_instance(std::string(CRSF_SAMPLES_DIR) + "/ragged.inst");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "line 4: section 'coefficients' row has 1 values, expected 2");
  }
}

TEST(InstanceIo, ErrorsNameTheLine) {
  EXPECT_EQ(parse_error(""), "line 1: empty instance file");
  EXPECT_EQ(parse_error("dims 1\n"), "line 1: expected 'dims <R> <M>'");
  EXPECT_EQ(parse_error("dims 1 1\ncoefficients\nx\n"), "line 3: 'x' is not a number");
  EXPECT_EQ(parse_error("dims 1 1\nfeasible\n2\n"), "line 3: feasibility values must be 0 or 1, got '2'");
  EXPECT_EQ(parse_error("dims 1 1\nutilization\n0\n"), "line 3: utilization must be positive");
  EXPECT_EQ(parse_error("dims 1 1\ncapacity\n-1\n"), "line 3: capacity must be nonnegative");
  EXPECT_EQ(parse_error("dims 1 1\ncapacity\n1\ncapacity\n1\n"), "line 4: section 'capacity' appears twice");
  EXPECT_EQ(parse_error("dims 1 1\nweights\n"), "line 2: unknown section 'weights'");
  EXPECT_EQ(parse_error("dims 2 1\ncoefficients\n1\n"), "line 4: section 'coefficients' ends after 1 of 2 rows");
  EXPECT_EQ(parse_error("dims 1 1\ncoefficients\n1\nfeasible\n1\ncapacity\n1\n"), "line 8: missing section 'utilization'");
}

TEST(InstanceIo, WriteThenParseRoundTrips) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = sampled_problem(seed, 0, 1 + seed % 9, 1 + seed % 4);
    std::ostringstream os;
    write_instance(os, p.instance, seed % 2 ? std::optional(p.priorities) : std::nullopt);
    const auto back = parse_instance(os.str());
    EXPECT_EQ(back.instance.coefficients, p.instance.coefficients);
    EXPECT_EQ(back.instance.feasible, p.instance.feasible);
    EXPECT_EQ(back.instance.utilization, p.instance.utilization);
    EXPECT_EQ(back.instance.capacity, p.instance.capacity);
    EXPECT_EQ(back.priorities.has_value(), seed % 2 == 1);
    if (back.priorities) {
      EXPECT_EQ(*back.priorities, p.priorities);
    }
  }
  auto tie = tie_heavy_instance(rng, 0, 3);
  std::ostringstream os;
  write_instance(os, tie);
  EXPECT_EQ(parse_instance(os.str()).instance.num_sfs(), 3u);
}

TEST(Plot, EveryExperimentRendersWellFormedSvg) {
  for (const auto& name : experiment_names()) {
    const auto rows = sweep_rows(name);
    ASSERT_FALSE(rows.empty()) << name;
    const std::string svg = render_svg(name, rows);
    EXPECT_TRUE(well_formed(svg)) << name;
    EXPECT_NE(svg.find("<title>" + name + "</title>"), std::string::npos);
    EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos) << name;
    EXPECT_EQ(render_svg(name, rows), svg);
  }
}

TEST(Plot, ReRenderFromCsvIsByteIdentical) {
  const auto rows = sweep_rows("request-sweep");
  std::ostringstream os;
  write_csv(os, rows);
  std::istringstream is(os.str());
  EXPECT_EQ(render_plots(read_csv(is)).at("request-sweep"), render_svg("request-sweep", rows));
}

TEST(Plot, RejectsUnplottableInput) {
  EXPECT_THROW(render_plots({}), Error);
  auto rows = sweep_rows("capacity-sweep");
  EXPECT_THROW(render_svg("request-sweep", rows), Error);
  EXPECT_THROW(render_svg("no-such-sweep", rows), Error);
  rows[0].capacity_override.reset();
  EXPECT_THROW(render_svg("capacity-sweep", rows), Error);
  rows = sweep_rows("sf-sweep");
  rows[1].solver = "oracle";
  EXPECT_THROW(render_svg("sf-sweep", rows), Error);
  std::istringstream header_only(csv_header() + "\n");
  EXPECT_THROW(render_plots(read_csv(header_only)), Error);
}
