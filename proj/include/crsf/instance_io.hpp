#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crsf/core.hpp"
#include "crsf/solver/instance.hpp"

namespace crsf {

/// A selection instance as stored in an instance file. `priorities` is only
/// present when the file has a `priorities` section; the baseline needs it.
struct InstanceFile {
  SelectionInstance instance;
  std::optional<Matrix<double>> priorities;
};

// Instance file layout, one token group per line, blank lines and `#`
// comments allowed anywhere:
//
//   dims <R> <M>
//   coefficients        followed by R rows of M reals
//   feasible            followed by R rows of M values in {0, 1}
//   utilization         followed by one row of R reals
//   capacity            followed by one row of M reals
//   priorities          optional, followed by R rows of M reals
//
// Sections after `dims` may appear in any order, each at most once.

namespace io_detail {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

[[noreturn]] inline void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
}

inline double parse_real(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail(line, "'" + tok + "' is not a number");
  }
  if (used != tok.size()) fail(line, "'" + tok + "' is not a number");
  if (!std::isfinite(v)) fail(line, "'" + tok + "' is not finite");
  return v;
}

inline std::size_t parse_count(const std::string& tok, std::size_t line) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) fail(line, "'" + tok + "' is not a count");
  try {
    return static_cast<std::size_t>(std::stoull(tok));
  } catch (const std::exception&) {
    fail(line, "'" + tok + "' is out of range");
  }
}

inline std::vector<Line> tokenize(std::istream& in) {
  std::vector<Line> lines;
  std::string text;
  for (std::size_t n = 1; std::getline(in, text); ++n) {
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream ss(text);
    Line l{n, {}};
    for (std::string tok; ss >> tok;) l.tokens.push_back(tok);
    if (!l.tokens.empty()) lines.push_back(std::move(l));
  }
  return lines;
}

}  // namespace io_detail

/// Parses an instance file. Throws Error(parse) whose message starts with the
/// offending line number.
inline InstanceFile parse_instance(std::istream& in) {
  using namespace io_detail;
  const std::vector<Line> lines = tokenize(in);
  if (lines.empty()) throw Error(ErrorCode::parse, "line 1: empty instance file");
  const Line& head = lines.front();
  if (head.tokens[0] != "dims" || head.tokens.size() != 3) fail(head.number, "expected 'dims <R> <M>'");
  const std::size_t R = parse_count(head.tokens[1], head.number);
  const std::size_t M = parse_count(head.tokens[2], head.number);

  InstanceFile f;
  SelectionInstance& inst = f.instance;
  bool have_c = false, have_f = false, have_u = false, have_cap = false;
  std::size_t i = 1;

  auto read_rows = [&](std::size_t rows, std::size_t cols, const std::string& section, auto&& store) {
    for (std::size_t r = 0; r < rows; ++r) {
      if (i >= lines.size())
        throw Error(ErrorCode::parse, "line " + std::to_string(lines.back().number + 1) + ": section '" + section +
                                          "' ends after " + std::to_string(r) + " of " + std::to_string(rows) + " rows");
      const Line& l = lines[i++];
      if (l.tokens.size() != cols)
        fail(l.number, "section '" + section + "' row has " + std::to_string(l.tokens.size()) + " values, expected " +
                           std::to_string(cols));
      for (std::size_t c = 0; c < cols; ++c) store(r, c, l.tokens[c], l.number);
    }
  };
  auto once = [&](bool& seen, const Line& l) {
    if (seen) fail(l.number, "section '" + l.tokens[0] + "' appears twice");
    if (l.tokens.size() != 1) fail(l.number, "section header '" + l.tokens[0] + "' takes no values");
    seen = true;
  };

  bool have_p = false;
  while (i < lines.size()) {
    const Line& l = lines[i++];
    const std::string& name = l.tokens[0];
    if (name == "coefficients") {
      once(have_c, l);
      inst.coefficients = Matrix<double>(R, M);
      read_rows(R, M, name, [&](std::size_t r, std::size_t c, const std::string& t, std::size_t n) {
        inst.coefficients(r, c) = parse_real(t, n);
      });
    } else if (name == "priorities") {
      once(have_p, l);
      Matrix<double> p(R, M);
      read_rows(R, M, name, [&](std::size_t r, std::size_t c, const std::string& t, std::size_t n) {
        p(r, c) = parse_real(t, n);
      });
      f.priorities = std::move(p);
    } else if (name == "feasible") {
      once(have_f, l);
      inst.feasible = Matrix<std::uint8_t>(R, M);
      read_rows(R, M, name, [&](std::size_t r, std::size_t c, const std::string& t, std::size_t n) {
        if (t != "0" && t != "1") fail(n, "feasibility values must be 0 or 1, got '" + t + "'");
        inst.feasible(r, c) = t == "1";
      });
    } else if (name == "utilization") {
      once(have_u, l);
      inst.utilization.assign(R, 0.0);
      if (R > 0)
        read_rows(1, R, name, [&](std::size_t, std::size_t c, const std::string& t, std::size_t n) {
          const double u = parse_real(t, n);
          if (!(u > 0.0)) fail(n, "utilization must be positive");
          inst.utilization[c] = u;
        });
    } else if (name == "capacity") {
      once(have_cap, l);
      inst.capacity.assign(M, 0.0);
      if (M > 0)
        read_rows(1, M, name, [&](std::size_t, std::size_t c, const std::string& t, std::size_t n) {
          const double v = parse_real(t, n);
          if (v < 0.0) fail(n, "capacity must be nonnegative");
          inst.capacity[c] = v;
        });
    } else {
      fail(l.number, "unknown section '" + name + "'");
    }
  }
  const std::size_t end = lines.back().number + 1;
  auto missing = [&](bool seen, const char* name) {
    if (!seen) fail(end, std::string("missing section '") + name + "'");
  };
  missing(have_c, "coefficients");
  missing(have_f, "feasible");
  missing(have_u, "utilization");
  missing(have_cap, "capacity");
  return f;
}

inline InstanceFile parse_instance(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

inline InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read instance file '" + path + "'");
  return parse_instance(in);
}

inline void write_instance(std::ostream& os, const SelectionInstance& inst,
                           const std::optional<Matrix<double>>& priorities = std::nullopt) {
  const std::size_t R = inst.num_requests();
  const std::size_t M = inst.num_sfs();
  os << std::setprecision(17);
  os << "dims " << R << ' ' << M << '\n';
  auto rows = [&](const char* name, const Matrix<double>& m) {
    os << name << '\n';
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t c = 0; c < M; ++c) os << (c ? " " : "") << m(r, c);
      os << '\n';
    }
  };
  rows("coefficients", inst.coefficients);
  os << "feasible\n";
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < M; ++c) os << (c ? " " : "") << int(inst.feasible(r, c) != 0);
    os << '\n';
  }
  os << "utilization\n";
  for (std::size_t r = 0; r < R; ++r) os << (r ? " " : "") << inst.utilization[r];
  if (R) os << '\n';
  os << "capacity\n";
  for (std::size_t m = 0; m < M; ++m) os << (m ? " " : "") << inst.capacity[m];
  if (M) os << '\n';
  if (priorities) rows("priorities", *priorities);
}

}  // namespace crsf
