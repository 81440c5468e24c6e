#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quadloco/environment.hpp"

namespace quadloco {

/// Shortest decimal that round-trips the double, so logs are byte-stable
/// across runs and readable without being padded to 17 digits everywhere.
inline std::string csv_num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_num(int v) { return std::to_string(v); }

/// CSV with a two-line provenance preamble. Every artifact carries the tool
/// version and the hash of the resolved config that produced it.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw IoError("cannot write: " + path);
    out_ << "# tool_version=" << kVersion << "\n";
    out_ << "# config_hash=" << config_hash << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

struct CsvFile {
  std::vector<std::string> preamble;  // '#' lines, stripped
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string preamble_value(const std::string& key) const {
    for (const std::string& line : preamble) {
      const auto eq = line.find('=');
      if (eq != std::string::npos && line.substr(0, eq) == key)
        return line.substr(eq + 1);
    }
    return "";
  }

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw IoError("csv: no column named " + name);
  }
};

inline CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read: " + path);
  CsvFile file;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      file.preamble.push_back(body);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      file.columns = cells;
      header_seen = true;
    } else {
      file.rows.push_back(cells);
    }
  }
  return file;
}

inline std::vector<std::string> trace_columns() {
  std::vector<std::string> cols = {"time",
                                   "base_x", "base_y", "base_z",
                                   "quat_w", "quat_x", "quat_y", "quat_z",
                                   "vel_x", "vel_y", "vel_z",
                                   "angvel_x", "angvel_y", "angvel_z"};
  for (int i = 0; i < kNumJoints; ++i) cols.push_back("q" + std::to_string(i));
  for (int i = 0; i < kNumJoints; ++i) cols.push_back("qv" + std::to_string(i));
  for (int i = 0; i < kNumJoints; ++i) cols.push_back("tau" + std::to_string(i));
  for (int leg = 0; leg < kNumLegs; ++leg)
    for (const char* ax : {"x", "y", "z"})
      cols.push_back(std::string("foot_") + kLegNames[leg] + "_" + ax);
  for (int leg = 0; leg < kNumLegs; ++leg)
    cols.push_back(std::string("contact_") + kLegNames[leg]);
  cols.insert(cols.end(), {"tg_phase_lf", "tg_frequency", "delta_h"});
  for (int i = 0; i < kActionDim; ++i) cols.push_back("a" + std::to_string(i));
  cols.insert(cols.end(), {"r_v", "r_vo", "r_tau", "r_terrain", "r_height",
                           "r_smooth", "r_total"});
  return cols;
}

inline std::vector<std::string> trace_row(const StepRecord& r) {
  std::vector<std::string> cells;
  auto put = [&](double v) { cells.push_back(csv_num(v)); };
  put(r.time);
  put(r.base_position.x());
  put(r.base_position.y());
  put(r.base_position.z());
  put(r.base_orientation.w());
  put(r.base_orientation.x());
  put(r.base_orientation.y());
  put(r.base_orientation.z());
  for (int i = 0; i < 3; ++i) put(r.base_linear_velocity[i]);
  for (int i = 0; i < 3; ++i) put(r.base_angular_velocity[i]);
  for (int i = 0; i < kNumJoints; ++i) put(r.q[i]);
  for (int i = 0; i < kNumJoints; ++i) put(r.qv[i]);
  for (int i = 0; i < kNumJoints; ++i) put(r.tau[i]);
  for (int leg = 0; leg < kNumLegs; ++leg)
    for (int ax = 0; ax < 3; ++ax) put(r.foot_world[leg][ax]);
  for (int leg = 0; leg < kNumLegs; ++leg)
    cells.push_back(r.contact[leg] ? "1" : "0");
  put(r.phase_lf);
  put(r.tg_frequency);
  put(r.delta_h);
  for (int i = 0; i < kActionDim; ++i) put(r.action[i]);
  put(r.reward.r_v);
  put(r.reward.r_vo);
  put(r.reward.r_tau);
  put(r.reward.r_terrain);
  put(r.reward.r_height);
  put(r.reward.r_smooth);
  put(r.reward.total);
  return cells;
}

inline void write_trace(const std::string& path, const std::string& config_hash,
                        const std::vector<StepRecord>& records) {
  CsvWriter w(path, config_hash, trace_columns());
  for (const StepRecord& r : records) w.row(trace_row(r));
}

}  // namespace quadloco
