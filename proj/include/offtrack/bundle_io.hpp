#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "offtrack/trajectory.hpp"

// Tracking bundle on disk:
//   manifest.json            sequence ids, frame rate, pitch dims, agent metadata
//   seq_<id>.csv             header frame,time_s,agent_<k>_x,agent_<k>_y
//   mask_<id>.csv (optional) header frame,agent_<k> with binary columns
// UTF-8, decimal point, LF line endings.

namespace ot {

namespace fs = std::filesystem;

struct BundleSequence {
  std::string id;
  int n_frames = 0;
  std::optional<Team> possession;
};

struct BundleManifest {
  double frame_rate_hz = 25.0;
  PitchSpec pitch;
  std::vector<AgentMeta> agents;
  std::vector<BundleSequence> sequences;
};

namespace detail {

// Shortest round-trip formatting so save -> load is bit-exact.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& file, int line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(file + ":" + std::to_string(line) + ": bad numeric field '" +
                     std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

inline BundleManifest load_manifest(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  OT_REQUIRE(in.good(), IoError, "cannot open " + mpath.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(mpath.string() + ": " + e.what());
  }
  BundleManifest m;
  try {
    m.frame_rate_hz = j.at("frame_rate_hz").get<double>();
    m.pitch.length_m = j.at("pitch").at("length_m").get<double>();
    m.pitch.width_m = j.at("pitch").at("width_m").get<double>();
    for (const auto& a : j.at("agents")) {
      AgentMeta meta;
      meta.team = team_from_name(a.at("team").get<std::string>());
      meta.shirt = a.value("shirt", 0);
      m.agents.push_back(meta);
    }
    for (const auto& s : j.at("sequences")) {
      BundleSequence seq;
      seq.id = s.at("id").get<std::string>();
      seq.n_frames = s.at("frames").get<int>();
      if (s.contains("possession"))
        seq.possession = team_from_name(s.at("possession").get<std::string>());
      m.sequences.push_back(seq);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(mpath.string() + ": " + e.what());
  }
  return m;
}

inline void save_manifest(const fs::path& dir, const BundleManifest& m) {
  nlohmann::json j;
  j["frame_rate_hz"] = m.frame_rate_hz;
  j["pitch"] = {{"length_m", m.pitch.length_m}, {"width_m", m.pitch.width_m}};
  j["agents"] = nlohmann::json::array();
  for (const auto& a : m.agents)
    j["agents"].push_back({{"team", team_name(a.team)}, {"shirt", a.shirt}});
  j["sequences"] = nlohmann::json::array();
  for (const auto& s : m.sequences) {
    nlohmann::json js = {{"id", s.id}, {"frames", s.n_frames}};
    if (s.possession) js["possession"] = team_name(*s.possession);
    j["sequences"].push_back(js);
  }
  fs::create_directories(dir);
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  OT_REQUIRE(out.good(), IoError, "cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << "\n";
}

inline TrajectoryTensor load_sequence_csv(const fs::path& dir,
                                          const BundleManifest& m,
                                          const BundleSequence& seq) {
  const fs::path cpath = dir / ("seq_" + seq.id + ".csv");
  std::ifstream in(cpath, std::ios::binary);
  OT_REQUIRE(in.good(), IoError, "cannot open " + cpath.string());
  const int n_agents = static_cast<int>(m.agents.size());
  TrajectoryTensor out(n_agents, seq.n_frames, 2, m.agents, m.frame_rate_hz,
                       m.pitch);
  std::string line;
  int line_no = 0;
  // Header.
  OT_REQUIRE(std::getline(in, line), ParseError, cpath.string() + ": empty file");
  ++line_no;
  {
    std::string expect = "frame,time_s";
    for (int k = 0; k < n_agents; ++k)
      expect += ",agent_" + std::to_string(k) + "_x,agent_" + std::to_string(k) + "_y";
    if (!line.empty() && line.back() == '\r') line.pop_back();
    OT_REQUIRE(line == expect, SchemaError,
               cpath.string() + ": header does not match agent metadata");
  }
  int frame = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<int>(fields.size()) != 2 + 2 * n_agents)
      throw SchemaError(cpath.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(2 + 2 * n_agents) +
                        " fields, got " + std::to_string(fields.size()));
    OT_REQUIRE(frame < seq.n_frames, SchemaError,
               cpath.string() + ": more rows than manifest frame count");
    for (int k = 0; k < n_agents; ++k) {
      // A blank coordinate means the agent is missing from the raw data; such
      // rows are rejected because retained sequences must be complete.
      if (fields[2 + 2 * k].empty() || fields[3 + 2 * k].empty())
        throw SchemaError(cpath.string() + ":" + std::to_string(line_no) +
                          ": missing coordinate for agent " + std::to_string(k));
      out.at(k, frame, 0) =
          detail::parse_double(fields[2 + 2 * k], cpath.string(), line_no);
      out.at(k, frame, 1) =
          detail::parse_double(fields[3 + 2 * k], cpath.string(), line_no);
    }
    ++frame;
  }
  OT_REQUIRE(frame == seq.n_frames, SchemaError,
             cpath.string() + ": row count " + std::to_string(frame) +
                 " does not match manifest frames " + std::to_string(seq.n_frames));
  out.validate();
  return out;
}

inline void save_sequence_csv(const fs::path& dir, const std::string& id,
                              const TrajectoryTensor& t) {
  const fs::path cpath = dir / ("seq_" + id + ".csv");
  std::ofstream out(cpath, std::ios::binary);
  OT_REQUIRE(out.good(), IoError, "cannot write " + cpath.string());
  out << "frame,time_s";
  for (int k = 0; k < t.n_agents(); ++k)
    out << ",agent_" << k << "_x,agent_" << k << "_y";
  out << "\n";
  for (int s = 0; s < t.n_frames(); ++s) {
    out << s << "," << detail::format_double(s / t.frame_rate_hz());
    for (int k = 0; k < t.n_agents(); ++k)
      out << "," << detail::format_double(t.at(k, s, 0)) << ","
          << detail::format_double(t.at(k, s, 1));
    out << "\n";
  }
}

inline MaskTensor load_mask_csv(const fs::path& dir, const BundleManifest& m,
                                const BundleSequence& seq) {
  const fs::path cpath = dir / ("mask_" + seq.id + ".csv");
  std::ifstream in(cpath, std::ios::binary);
  OT_REQUIRE(in.good(), IoError, "cannot open " + cpath.string());
  const int n_agents = static_cast<int>(m.agents.size());
  MaskTensor mask(n_agents, seq.n_frames, /*fill=*/false);
  std::string line;
  int line_no = 0;
  OT_REQUIRE(std::getline(in, line), ParseError, cpath.string() + ": empty file");
  ++line_no;
  int frame = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<int>(fields.size()) != 1 + n_agents)
      throw SchemaError(cpath.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(1 + n_agents) + " fields");
    OT_REQUIRE(frame < seq.n_frames, SchemaError,
               cpath.string() + ": more rows than manifest frame count");
    for (int k = 0; k < n_agents; ++k) {
      const auto f = fields[1 + k];
      if (f == "0")
        mask.set(k, frame, 0);
      else if (f == "1")
        mask.set(k, frame, 1);
      else
        throw ParseError(cpath.string() + ":" + std::to_string(line_no) +
                         ": mask entries must be 0 or 1");
    }
    ++frame;
  }
  OT_REQUIRE(frame == seq.n_frames, SchemaError,
             cpath.string() + ": mask row count mismatch");
  mask.validate();
  return mask;
}

inline void save_mask_csv(const fs::path& dir, const std::string& id,
                          const MaskTensor& mask) {
  const fs::path cpath = dir / ("mask_" + id + ".csv");
  std::ofstream out(cpath, std::ios::binary);
  OT_REQUIRE(out.good(), IoError, "cannot write " + cpath.string());
  out << "frame";
  for (int k = 0; k < mask.n_agents(); ++k) out << ",agent_" << k;
  out << "\n";
  for (int s = 0; s < mask.n_frames(); ++s) {
    out << s;
    for (int k = 0; k < mask.n_agents(); ++k) out << "," << mask.at(k, s);
    out << "\n";
  }
}

inline bool has_mask(const fs::path& dir, const std::string& id) {
  return fs::exists(dir / ("mask_" + id + ".csv"));
}

// One TrajectoryTensor per manifest sequence.
inline std::vector<TrajectoryTensor> load_tracking_bundle(const fs::path& dir) {
  const BundleManifest m = load_manifest(dir);
  std::vector<TrajectoryTensor> out;
  out.reserve(m.sequences.size());
  for (const auto& seq : m.sequences) out.push_back(load_sequence_csv(dir, m, seq));
  return out;
}

// Full windows (trajectory + mask when present; all-ones otherwise).
inline std::vector<SequenceWindow> load_windows(const fs::path& dir,
                                                int warmup_frames = 0) {
  const BundleManifest m = load_manifest(dir);
  std::vector<SequenceWindow> out;
  out.reserve(m.sequences.size());
  for (const auto& seq : m.sequences) {
    SequenceWindow w;
    w.trajectory = load_sequence_csv(dir, m, seq);
    w.mask = has_mask(dir, seq.id)
                 ? load_mask_csv(dir, m, seq)
                 : MaskTensor(w.trajectory.n_agents(), w.trajectory.n_frames());
    w.source_id = seq.id;
    w.warmup_frames = warmup_frames;
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace ot
