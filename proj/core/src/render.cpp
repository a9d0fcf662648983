// SPDX-License-Identifier: Apache-2.0
#include "gesture/render.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "gesture/error.hpp"
#include "gesture/numfmt.hpp"

namespace gesture {
namespace {

constexpr std::array<std::pair<Joint, Joint>, 7> kBones = {{
    {Joint::Neck, Joint::Head},
    {Joint::Neck, Joint::LShoulder},
    {Joint::LShoulder, Joint::LElbow},
    {Joint::LElbow, Joint::LWrist},
    {Joint::Neck, Joint::RShoulder},
    {Joint::RShoulder, Joint::RElbow},
    {Joint::RElbow, Joint::RWrist},
}};

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace

std::string render_svg(const NormalizedPose& pose) {
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-4 -3 8 8\" width=\"400\" height=\"400\">\n"
      "<rect x=\"-4\" y=\"-3\" width=\"8\" height=\"8\" fill=\"white\"/>\n"
      "<g stroke=\"black\" stroke-width=\"0.12\" stroke-linecap=\"round\">\n";
  for (const auto& [a, b] : kBones) {
    svg += "<line x1=\"" + format_double(pose[a].x) + "\" y1=\"" + format_double(pose[a].y) + "\" x2=\"" +
           format_double(pose[b].x) + "\" y2=\"" + format_double(pose[b].y) + "\"/>\n";
  }
  svg += "</g>\n<circle cx=\"" + format_double(pose[Joint::Head].x) + "\" cy=\"" +
         format_double(pose[Joint::Head].y) + "\" r=\"0.35\" fill=\"none\" stroke=\"black\" stroke-width=\"0.12\"/>\n";
  svg += "</svg>\n";
  return svg;
}

std::vector<std::string> render_frames(std::span<const NormalizedPose> poses, double fps,
                                       const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::string> names;
  names.reserve(poses.size());
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < poses.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.svg", f);
    write_file(out_dir / name, render_svg(poses[f]));
    names.emplace_back(name);
    frames.push_back({{"index", f}, {"t_s", static_cast<double>(f) / fps}, {"file", name}});
  }
  nlohmann::ordered_json manifest;
  manifest["fps"] = fps;
  manifest["count"] = poses.size();
  manifest["frames"] = std::move(frames);
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return names;
}

std::vector<std::string> render_track(const TimedPoseTrack& track, const PcaModel& pca,
                                      const std::filesystem::path& out_dir) {
  std::vector<NormalizedPose> poses;
  poses.reserve(track.frames.size());
  for (const GestureVector& p : track.frames) poses.push_back(decode_pose(pca, p));
  return render_frames(poses, track.fps, out_dir);
}

}  // namespace gesture
