#pragma once

// Trajectory recording, one control step per line:
//
//   step_index,state_0,...,state_{n-1},action_0,...,action_3,reward,done
//
// `state` is the network input before the action (observation, achieved goal,
// desired goal). Reals use %.17g so values read back exactly; done is 0 or 1.
// The first line is a '#' comment naming the columns.

#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace offpolicy::env {

struct TrajectoryRow {
  std::size_t step_index = 0;
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  bool done = false;
};

inline std::string trajectory_header(std::size_t state_dim, std::size_t action_dim) {
  std::string h = "# step_index";
  for (std::size_t i = 0; i < state_dim; ++i) h += ",s" + std::to_string(i);
  for (std::size_t i = 0; i < action_dim; ++i) h += ",a" + std::to_string(i);
  h += ",reward,done";
  return h;
}

inline std::string format_trajectory_row(const TrajectoryRow& row) {
  std::string line = std::to_string(row.step_index);
  char buf[32];
  auto append = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += ',';
    line += buf;
  };
  for (double v : row.state) append(v);
  for (double v : row.action) append(v);
  append(row.reward);
  line += row.done ? ",1" : ",0";
  return line;
}

class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& path, std::size_t state_dim, std::size_t action_dim)
      : path_(path), out_(path), state_dim_(state_dim), action_dim_(action_dim) {
    if (!out_) throw std::runtime_error("cannot open trajectory file " + path);
    out_ << trajectory_header(state_dim, action_dim) << '\n';
  }

  void write(const TrajectoryRow& row) {
    if (row.state.size() != state_dim_ || row.action.size() != action_dim_) {
      throw std::invalid_argument("trajectory row width does not match header");
    }
    out_ << format_trajectory_row(row) << '\n';
    if (!out_) throw std::runtime_error("write failed for trajectory file " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t state_dim_;
  std::size_t action_dim_;
};

inline TrajectoryRow parse_trajectory_row(const std::string& line, std::size_t state_dim, std::size_t action_dim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (fields.size() != 1 + state_dim + action_dim + 2) throw std::invalid_argument("trajectory row: wrong field count");
  TrajectoryRow row;
  row.step_index = std::stoul(fields[0]);
  for (std::size_t i = 0; i < state_dim; ++i) row.state.push_back(std::stod(fields[1 + i]));
  for (std::size_t i = 0; i < action_dim; ++i) row.action.push_back(std::stod(fields[1 + state_dim + i]));
  row.reward = std::stod(fields[1 + state_dim + action_dim]);
  row.done = fields.back() == "1";
  return row;
}

}  // namespace offpolicy::env
