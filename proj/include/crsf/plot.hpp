#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "crsf/core.hpp"
#include "crsf/sim.hpp"

namespace crsf {

namespace plot_detail {

struct Point {
  double x, mean, sd;
};

struct Series {
  std::string label;
  std::string color;
  bool dashed = false;
  std::vector<Point> points;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline double nice_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (f * mag >= raw) return f * mag;
  return 10.0 * mag;
}

struct Axis {
  double lo, hi, step;
};

inline Axis make_axis(double lo, double hi, int target) {
  if (hi - lo < 1e-12) {
    const double pad = std::max(1.0, std::abs(hi) * 0.05);
    lo -= pad;
    hi += pad;
  }
  const double step = nice_step(hi - lo, target);
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

inline void draw_panel(std::string& svg, const Panel& p, double ox, double oy, double w, double h) {
  const double left = 70, right = 20, top = 36, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : p.series)
    for (const auto& pt : s.points) {
      xmin = std::min(xmin, pt.x);
      xmax = std::max(xmax, pt.x);
      ymin = std::min(ymin, pt.mean - pt.sd);
      ymax = std::max(ymax, pt.mean + pt.sd);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  const Axis ax = make_axis(xmin, xmax, 6);
  const Axis ay = make_axis(std::min(0.0, ymin), ymax, 5);
  auto X = [&](double x) { return ox + left + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto Y = [&](double y) { return oy + top + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

  svg += "<g>\n";
  svg += "<text x=\"" + num(ox + w / 2) + "\" y=\"" + num(oy + 22) +
         "\" text-anchor=\"middle\" font-size=\"14\" font-weight=\"bold\">" + escape(p.title) + "</text>\n";
  for (double t = ay.lo; t <= ay.hi + ay.step * 1e-9; t += ay.step) {
    svg += "<line x1=\"" + num(X(ax.lo)) + "\" y1=\"" + num(Y(t)) + "\" x2=\"" + num(X(ax.hi)) + "\" y2=\"" + num(Y(t)) +
           "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + num(X(ax.lo) - 6) + "\" y=\"" + num(Y(t) + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
           tick_label(t) + "</text>\n";
  }
  for (double t = ax.lo; t <= ax.hi + ax.step * 1e-9; t += ax.step) {
    svg += "<line x1=\"" + num(X(t)) + "\" y1=\"" + num(Y(ay.lo)) + "\" x2=\"" + num(X(t)) + "\" y2=\"" + num(Y(ay.lo) + 5) +
           "\" stroke=\"#000\"/>\n";
    svg += "<text x=\"" + num(X(t)) + "\" y=\"" + num(Y(ay.lo) + 18) + "\" text-anchor=\"middle\" font-size=\"11\">" +
           tick_label(t) + "</text>\n";
  }
  svg += "<rect x=\"" + num(ox + left) + "\" y=\"" + num(oy + top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"#000\"/>\n";
  svg += "<text x=\"" + num(ox + left + pw / 2) + "\" y=\"" + num(oy + h - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + escape(p.x_label) + "</text>\n";
  svg += "<text transform=\"translate(" + num(ox + 16) + "," + num(oy + top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" + escape(p.y_label) + "</text>\n";

  for (const auto& s : p.series) {
    if (s.points.empty()) continue;
    std::string band;
    for (const auto& pt : s.points) band += num(X(pt.x)) + "," + num(Y(pt.mean + pt.sd)) + " ";
    for (auto it = s.points.rbegin(); it != s.points.rend(); ++it)
      band += num(X(it->x)) + "," + num(Y(it->mean - it->sd)) + " ";
    band.pop_back();
    svg += "<polygon points=\"" + band + "\" fill=\"" + s.color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    std::string line;
    for (const auto& pt : s.points) line += num(X(pt.x)) + "," + num(Y(pt.mean)) + " ";
    line.pop_back();
    svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\"" +
           (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    for (const auto& pt : s.points)
      svg += "<circle cx=\"" + num(X(pt.x)) + "\" cy=\"" + num(Y(pt.mean)) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
  }
  double ly = oy + top + 10;
  for (const auto& s : p.series) {
    const double lx = ox + left + 10;
    svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 24) + "\" y2=\"" + num(ly) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    svg += "<text x=\"" + num(lx + 30) + "\" y=\"" + num(ly + 4) + "\" font-size=\"11\">" + escape(s.label) + "</text>\n";
    ly += 16;
  }
  svg += "</g>\n";
}

enum class Metric { aggregate, asr, per_request };

inline Point point_of(const MetricsRow& r, double x, Metric m) {
  switch (m) {
    case Metric::aggregate: return {x, r.mean_aggregate_qos, r.std_aggregate_qos};
    case Metric::asr: return {x, r.mean_asr, r.std_asr};
    case Metric::per_request: return {x, r.mean_qos_per_request.value_or(0.0), r.std_qos_per_request.value_or(0.0)};
  }
  return {x, 0.0, 0.0};
}

inline const char* metric_label(Metric m) {
  switch (m) {
    case Metric::aggregate: return "aggregate priority-weighted QoS";
    case Metric::asr: return "assignment success rate";
    case Metric::per_request: return "priority-weighted QoS per request";
  }
  return "";
}

}  // namespace plot_detail

/// Renders the rows of one experiment as a two-panel SVG. Every row must
/// belong to `experiment`.
inline std::string render_svg(const std::string& experiment, const std::vector<MetricsRow>& rows) {
  using namespace plot_detail;
  if (rows.empty()) throw Error(ErrorCode::schema, "no rows to plot for '" + experiment + "'");

  // x value and the parameter that splits series, per family.
  std::string x_label, group_name;
  auto x_of = [&](const MetricsRow& r) -> double {
    if (experiment == "request-sweep") return static_cast<double>(r.num_requests);
    if (experiment == "capacity-sweep") return r.capacity_override.value_or(0.0);
    return static_cast<double>(r.num_sfs);
  };
  auto group_of = [&](const MetricsRow& r) -> std::size_t {
    if (experiment == "request-sweep") return r.num_sfs;
    if (experiment == "capacity-sweep") return 0;
    return r.num_requests;
  };
  std::vector<Metric> metrics{Metric::aggregate, Metric::asr};
  if (experiment == "request-sweep") {
    x_label = "number of requests";
    group_name = "SFs";
  } else if (experiment == "sf-sweep") {
    x_label = "number of SFs";
    group_name = "requests";
  } else if (experiment == "per-request-qos") {
    x_label = "number of SFs";
    group_name = "requests";
    metrics = {Metric::per_request, Metric::aggregate};
  } else if (experiment == "capacity-sweep") {
    x_label = "SF capacity";
  } else {
    throw Error(ErrorCode::schema, "unknown experiment '" + experiment + "'");
  }

  std::map<std::pair<std::string, std::size_t>, std::vector<const MetricsRow*>> groups;
  for (const auto& r : rows) {
    if (r.experiment != experiment) throw Error(ErrorCode::schema, "row of '" + r.experiment + "' in '" + experiment + "'");
    if (r.solver != "proposed" && r.solver != "baseline") throw Error(ErrorCode::schema, "unknown solver '" + r.solver + "'");
    if (experiment == "capacity-sweep" && !r.capacity_override)
      throw Error(ErrorCode::schema, "capacity-sweep row without capacity_override");
    groups[{r.solver, group_of(r)}].push_back(&r);
  }

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::vector<Panel> panels;
  for (Metric m : metrics) {
    Panel p{metric_label(m), x_label, metric_label(m), {}};
    std::size_t colour = 0;
    std::map<std::size_t, std::size_t> colour_of;
    for (const auto& [key, members] : groups) {
      const auto& [solver, group] = key;
      if (!colour_of.count(group)) colour_of[group] = colour++;
      Series s;
      s.label = solver + (group_name.empty() ? "" : ", " + std::to_string(group) + " " + group_name);
      s.color = palette[colour_of[group] % std::size(palette)];
      s.dashed = solver == "baseline";
      for (const MetricsRow* r : members) {
        if (m == Metric::per_request && !r->mean_qos_per_request) continue;
        s.points.push_back(point_of(*r, x_of(*r), m));
      }
      std::stable_sort(s.points.begin(), s.points.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
      p.series.push_back(std::move(s));
    }
    panels.push_back(std::move(p));
  }

  const double w = 560, h = 400;
  const double total_w = w * static_cast<double>(panels.size());
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(total_w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(total_w) + " " + num(h) + "\" font-family=\"sans-serif\">\n";
  svg += "<title>" + escape(experiment) + "</title>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) draw_panel(svg, panels[i], w * static_cast<double>(i), 0, w, h);
  svg += "</svg>\n";
  return svg;
}

/// One SVG per experiment present in `rows`, keyed by experiment name.
inline std::map<std::string, std::string> render_plots(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::schema, "CSV has no data rows");
  std::map<std::string, std::vector<MetricsRow>> by_experiment;
  for (const auto& r : rows) by_experiment[r.experiment].push_back(r);
  std::map<std::string, std::string> out;
  for (const auto& [name, subset] : by_experiment) out[name] = render_svg(name, subset);
  return out;
}

}  // namespace crsf
