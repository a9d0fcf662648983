// SPDX-License-Identifier: Apache-2.0
#include "gesture/track_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gesture/error.hpp"
#include "gesture/numfmt.hpp"

namespace gesture {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MalformedFile, "cannot open " + path.string());
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(Errc::MalformedFile, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                           std::to_string(table.header.size()) + " fields");
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) {
      const auto v = parse_double(f);
      if (!v) throw Error(Errc::MalformedFile, path.string() + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
      row.push_back(*v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty() || table.header.front() != "t_s") {
    throw Error(Errc::MalformedFile, path.string() + ": missing t_s header");
  }
  if (table.rows.empty()) throw Error(Errc::MalformedFile, path.string() + ": no rows");
  return table;
}

double infer_fps(const Table& table, const std::filesystem::path& path) {
  if (table.rows.size() < 2) return kDefaultFps;
  const double dt = table.rows[1][0] - table.rows[0][0];
  if (!(dt > 0.0)) throw Error(Errc::MalformedFile, path.string() + ": time column not increasing");
  const double fps = 1.0 / dt;
  const double whole = std::round(fps);
  return std::abs(fps - whole) < 1e-6 ? whole : fps;
}

}  // namespace

void write_track_csv(const TimedPoseTrack& track, const std::filesystem::path& path) {
  auto out = open_out(path);
  const Eigen::Index dim = track.frames.empty() ? 0 : track.frames.front().size();
  out << "t_s";
  for (Eigen::Index k = 0; k < dim; ++k) out << ",c" << (k + 1);
  out << '\n';
  for (std::size_t f = 0; f < track.frames.size(); ++f) {
    out << format_double(static_cast<double>(f) / track.fps);
    for (Eigen::Index k = 0; k < dim; ++k) out << ',' << format_double(track.frames[f](k));
    out << '\n';
  }
  finish(out, path);
}

TimedPoseTrack read_track_csv(const std::filesystem::path& path) {
  const Table table = read_numeric_csv(path);
  if (table.header.size() < 2) throw Error(Errc::MalformedFile, path.string() + ": no pose columns");
  TimedPoseTrack track;
  track.fps = infer_fps(table, path);
  for (const auto& row : table.rows) {
    GestureVector p(static_cast<Eigen::Index>(row.size() - 1));
    for (std::size_t k = 1; k < row.size(); ++k) p(static_cast<Eigen::Index>(k - 1)) = row[k];
    track.frames.push_back(std::move(p));
  }
  return track;
}

void write_attention_csv(const AttentionMatrix& attention, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "frame";
  for (const Token& w : attention.words) out << ',' << w;
  out << '\n';
  for (Eigen::Index r = 0; r < attention.values.rows(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < attention.values.cols(); ++c) out << ',' << format_double(attention.values(r, c));
    out << '\n';
  }
  finish(out, path);
}

void write_trajectory_csv(const JointTrajectory& trajectory, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t_s";
  for (std::size_t d = 0; d < kNumDof; ++d) out << ',' << dof_name(static_cast<Dof>(d));
  out << '\n';
  for (std::size_t f = 0; f < trajectory.rows.size(); ++f) {
    out << format_double(static_cast<double>(f) / trajectory.fps);
    for (double v : trajectory.rows[f].values) out << ',' << format_double(v);
    out << '\n';
  }
  finish(out, path);
}

JointTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  const Table table = read_numeric_csv(path);
  if (table.header.size() != kNumDof + 1) {
    throw Error(Errc::MalformedFile, path.string() + ": expected " + std::to_string(kNumDof) + " joint columns");
  }
  for (std::size_t d = 0; d < kNumDof; ++d) {
    if (table.header[d + 1] != dof_name(static_cast<Dof>(d))) {
      throw Error(Errc::MalformedFile, path.string() + ": unexpected column " + table.header[d + 1]);
    }
  }
  JointTrajectory trajectory;
  trajectory.fps = infer_fps(table, path);
  for (const auto& row : table.rows) {
    JointAngles a;
    for (std::size_t d = 0; d < kNumDof; ++d) a.values[d] = row[d + 1];
    trajectory.rows.push_back(a);
  }
  return trajectory;
}

}  // namespace gesture
