#pragma once

// Per-run CSV files, comparison tables and SVG success-rate charts.
//
// CSV layout (one row per epoch, reals at 6 significant digits with trailing zeros kept):
//
//   epoch,success_rate,mean_return,wall_clock_s,env_steps
//   1,0.750000,-31.2500,1.24180,500

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "offpolicy/bench/run.hpp"

namespace offpolicy::bench {

inline constexpr std::string_view kCsvHeader = "epoch,success_rate,mean_return,wall_clock_s,env_steps";

inline std::string format_real(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%#.6g", v);
  return buf;
}

inline std::string format_csv_row(const EpochReport& r) {
  return std::to_string(r.epoch) + ',' + format_real(r.success_rate) + ',' + format_real(r.mean_return) + ',' +
         format_real(r.wall_clock_seconds) + ',' + std::to_string(r.env_steps);
}

inline std::string csv_text(const std::vector<EpochReport>& reports) {
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& r : reports) {
    s += format_csv_row(r);
    s += '\n';
  }
  return s;
}

inline void write_csv(const std::vector<EpochReport>& reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << csv_text(reports);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void write_csv(const RunResult& result, const std::filesystem::path& path) { write_csv(result.reports, path); }

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

inline double parse_real(const std::string& field, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty()) throw std::runtime_error(where + ": bad number '" + field + "'");
  return v;
}

inline std::uint64_t parse_count(const std::string& field, const std::string& where) {
  if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos)
    throw std::runtime_error(where + ": bad count '" + field + "'");
  try {
    return std::stoull(field);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": count out of range '" + field + "'");
  }
}

}  // namespace detail

inline std::vector<EpochReport> parse_csv(std::istream& in, const std::string& name = "csv") {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error(name + ": missing or wrong header");
  std::vector<EpochReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    const auto f = detail::split(line, ',');
    if (f.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
    EpochReport r;
    r.epoch = detail::parse_count(f[0], where);
    r.success_rate = detail::parse_real(f[1], where);
    r.mean_return = detail::parse_real(f[2], where);
    r.wall_clock_seconds = detail::parse_real(f[3], where);
    r.env_steps = detail::parse_count(f[4], where);
    reports.push_back(r);
  }
  return reports;
}

inline std::vector<EpochReport> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_csv(in, path.string());
}

/// Algorithm, task and seed recovered from a `<algo>_<task>_seed<k>` file stem.
struct RunName {
  agents::Algorithm algorithm = agents::Algorithm::DDPG;
  env::Task task = env::Task::Reach;
  std::uint64_t seed = 0;
};

inline std::optional<RunName> parse_run_name(const std::string& stem) {
  const auto parts = detail::split(stem, '_');
  if (parts.size() != 3 || parts[2].rfind("seed", 0) != 0) return std::nullopt;
  auto algo = agents::parse_algorithm(parts[0]);
  auto task = env::parse_task(parts[1]);
  const std::string digits = parts[2].substr(4);
  if (!algo || !task || digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    return std::nullopt;
  return RunName{*algo, *task, std::stoull(digits)};
}

struct RunSummary {
  std::string label;
  env::Task task = env::Task::Reach;
  double total_seconds = 0.0;
  double final_success = 0.0;
  double last10_success = 0.0;
};

inline RunSummary summarize(std::string label, env::Task task, const std::vector<EpochReport>& reports) {
  if (reports.empty()) throw std::runtime_error(label + ": no epochs");
  RunSummary s;
  s.label = std::move(label);
  s.task = task;
  for (const auto& r : reports) s.total_seconds += r.wall_clock_seconds;
  s.final_success = reports.back().success_rate;
  s.last10_success = tail_success(reports, 10);
  return s;
}

inline RunSummary summarize_file(const std::filesystem::path& path) {
  const auto name = parse_run_name(path.stem().string());
  if (!name) throw std::runtime_error(path.string() + ": file name is not <algo>_<task>_seed<k>.csv");
  return summarize(path.stem().string(), name->task, read_csv(path));
}

/// Rows sorted by total wall-clock, ascending; ties keep input order.
inline std::string format_comparison(std::vector<RunSummary> rows) {
  if (rows.size() < 2) throw std::invalid_argument("compare: need at least two runs");
  for (const auto& r : rows)
    if (r.task != rows.front().task)
      throw std::invalid_argument("compare: " + r.label + " is a " + std::string(env::to_string(r.task)) +
                                  " run, expected " + std::string(env::to_string(rows.front().task)));
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RunSummary& a, const RunSummary& b) { return a.total_seconds < b.total_seconds; });
  std::size_t width = 3;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %12s %8s %8s\n", static_cast<int>(width), "run", "total_s", "final", "last10");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %12.2f %8.3f %8.3f\n", static_cast<int>(width), r.label.c_str(),
                  r.total_seconds, r.final_success, r.last10_success);
    out += buf;
  }
  return out;
}

inline std::string compare_runs(const std::vector<std::filesystem::path>& paths) {
  std::vector<RunSummary> rows;
  for (const auto& p : paths) rows.push_back(summarize_file(p));
  return format_comparison(std::move(rows));
}

// ---- SVG chart ----

struct ChartSeries {
  std::string label;
  env::Task task = env::Task::Reach;
  std::vector<EpochReport> reports;
};

inline ChartSeries series_from(const RunResult& r) { return {r.config.run_name(), r.config.task, r.reports}; }

inline ChartSeries series_from_file(const std::filesystem::path& path) {
  const auto name = parse_run_name(path.stem().string());
  if (!name) throw std::runtime_error(path.string() + ": file name is not <algo>_<task>_seed<k>.csv");
  return {path.stem().string(), name->task, read_csv(path)};
}

inline std::string xml_escape(std::string_view s) {
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

/// Success rate against epoch, one polyline per series. x spans 0..epochs, y spans 0..1.
inline std::string svg_chart(const std::vector<ChartSeries>& series) {
  if (series.empty()) throw std::invalid_argument("chart: no runs");
  const env::Task task = series.front().task;
  const std::size_t epochs = series.front().reports.size();
  if (epochs == 0) throw std::invalid_argument("chart: " + series.front().label + " has no epochs");
  for (const auto& s : series) {
    if (s.task != task)
      throw std::invalid_argument("chart: " + s.label + " is a " + std::string(env::to_string(s.task)) +
                                  " run, expected " + std::string(env::to_string(task)));
    if (s.reports.size() != epochs) throw std::invalid_argument("chart: " + s.label + " has a different epoch count");
  }

  constexpr double W = 720, H = 440, left = 60, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  const auto px = [&](double epoch) { return left + pw * epoch / static_cast<double>(epochs); };
  const auto py = [&](double rate) { return top + ph * (1.0 - rate); };
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream o;
  char buf[128];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
    << "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
    << "<title>" << xml_escape(env::to_string(task)) << " success rate</title>\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
    << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"16\">" << xml_escape(env::to_string(task)) << "</text>\n";

  o << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
    << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(epochs)) << "\" y2=\""
    << num(py(0)) << "\"/>\n"
    << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(left) << "\" y2=\"" << num(py(1))
    << "\"/>\n</g>\n";
  o << "<g id=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double rate = i / 5.0;
    o << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(py(rate)) << "\" x2=\"" << num(left) << "\" y2=\""
      << num(py(rate)) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(rate) + 4) << "\" text-anchor=\"end\">" << num(rate)
      << "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, (epochs + 4) / 5);
  for (std::size_t e = 0; e <= epochs; e += step) {
    o << "<line x1=\"" << num(px(e)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(e)) << "\" y2=\""
      << num(py(0) + 4) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(px(e)) << "\" y=\"" << num(py(0) + 18) << "\" text-anchor=\"middle\">" << e << "</text>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 10) << "\" text-anchor=\"middle\">epoch</text>\n"
    << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << num(top + ph / 2) << ")\">success rate</text>\n</g>\n";

  o << "<g id=\"series\" fill=\"none\" stroke-width=\"2\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    o << "<polyline stroke=\"" << kColors[i % 6] << "\" points=\"";
    for (std::size_t k = 0; k < series[i].reports.size(); ++k) {
      const auto& r = series[i].reports[k];
      if (k) o << ' ';
      o << num(px(static_cast<double>(r.epoch))) << ',' << num(py(std::clamp(r.success_rate, 0.0, 1.0)));
    }
    o << "\"/>\n";
  }
  o << "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 10 + 20.0 * static_cast<double>(i);
    o << "<g class=\"legend-entry\"><line x1=\"" << num(W - right + 15) << "\" y1=\"" << num(y) << "\" x2=\""
      << num(W - right + 40) << "\" y2=\"" << num(y) << "\" stroke=\"" << kColors[i % 6]
      << "\" stroke-width=\"2\"/><text x=\"" << num(W - right + 46) << "\" y=\"" << num(y + 4) << "\">"
      << xml_escape(series[i].label) << "</text></g>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

inline void write_svg_chart(const std::vector<ChartSeries>& series, const std::filesystem::path& path) {
  const std::string text = svg_chart(series);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void write_svg_chart(const std::vector<RunResult>& results, const std::filesystem::path& path) {
  std::vector<ChartSeries> s;
  for (const auto& r : results) s.push_back(series_from(r));
  write_svg_chart(s, path);
}

}  // namespace offpolicy::bench
