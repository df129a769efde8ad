#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "offtrack/common.hpp"

namespace ot {

struct PitchSpec {
  double length_m = 105.0;
  double width_m = 68.0;

  void validate() const {
    OT_REQUIRE(length_m > width_m && width_m > 0.0, ArgumentError,
               "PitchSpec requires length_m > width_m > 0");
  }
};

enum class Team { kHome, kAway, kBall };

inline std::string team_name(Team t) {
  switch (t) {
    case Team::kHome: return "home";
    case Team::kAway: return "away";
    case Team::kBall: return "ball";
  }
  return "home";
}

inline Team team_from_name(const std::string& s) {
  if (s == "home") return Team::kHome;
  if (s == "away") return Team::kAway;
  if (s == "ball") return Team::kBall;
  throw ParseError("unknown team id: " + s);
}

struct AgentMeta {
  Team team = Team::kHome;
  int shirt = 0;
};

// Agent positions over a window, [N agents][frames][d dims], meters on pitch.
// Immutable by convention after construction; operations return new tensors.
class TrajectoryTensor {
 public:
  TrajectoryTensor() = default;

  TrajectoryTensor(int n_agents, int n_frames, int dims,
                   std::vector<AgentMeta> agent_meta, double frame_rate_hz,
                   PitchSpec pitch, bool football_mode = true)
      : n_agents_(n_agents),
        n_frames_(n_frames),
        dims_(dims),
        agent_meta_(std::move(agent_meta)),
        frame_rate_hz_(frame_rate_hz),
        pitch_(pitch),
        football_mode_(football_mode),
        values_(static_cast<std::size_t>(n_agents) * n_frames * dims, 0.0) {
    OT_REQUIRE(n_agents >= 1 && n_frames >= 1 && dims >= 1, ArgumentError,
               "TrajectoryTensor requires positive shape");
    OT_REQUIRE(static_cast<int>(agent_meta_.size()) == n_agents, ArgumentError,
               "agent_meta size must match agent count");
    OT_REQUIRE(frame_rate_hz_ > 0.0, ArgumentError, "frame_rate_hz must be positive");
    pitch_.validate();
  }

  int n_agents() const { return n_agents_; }
  int n_frames() const { return n_frames_; }
  int dims() const { return dims_; }
  double frame_rate_hz() const { return frame_rate_hz_; }
  void set_frame_rate_hz(double hz) { frame_rate_hz_ = hz; }
  const PitchSpec& pitch() const { return pitch_; }
  const std::vector<AgentMeta>& agent_meta() const { return agent_meta_; }
  bool football_mode() const { return football_mode_; }

  double& at(int agent, int frame, int dim) {
    return values_[index(agent, frame, dim)];
  }
  double at(int agent, int frame, int dim) const {
    return values_[index(agent, frame, dim)];
  }

  Eigen::Vector2d pos2(int agent, int frame) const {
    return {at(agent, frame, 0), at(agent, frame, 1)};
  }
  void set_pos2(int agent, int frame, const Eigen::Vector2d& p) {
    at(agent, frame, 0) = p.x();
    at(agent, frame, 1) = p.y();
  }

  // All agents at one frame, [N][d].
  Eigen::MatrixXd frame_slice(int frame) const {
    Eigen::MatrixXd out(n_agents_, dims_);
    for (int i = 0; i < n_agents_; ++i)
      for (int k = 0; k < dims_; ++k) out(i, k) = at(i, frame, k);
    return out;
  }

  int ball_index() const {
    for (int i = 0; i < n_agents_; ++i)
      if (agent_meta_[i].team == Team::kBall) return i;
    return -1;
  }

  // Shape and value checks: finite values, positions within pitch bounds plus
  // a 5 m margin, exactly one ball agent in football mode.
  void validate() const {
    const double margin = 5.0;
    for (int i = 0; i < n_agents_; ++i) {
      for (int t = 0; t < n_frames_; ++t) {
        for (int k = 0; k < dims_; ++k) {
          const double v = at(i, t, k);
          OT_REQUIRE(std::isfinite(v), SchemaError, "non-finite position value");
        }
        if (dims_ == 2) {
          const double x = at(i, t, 0), y = at(i, t, 1);
          OT_REQUIRE(x >= -margin && x <= pitch_.length_m + margin &&
                         y >= -margin && y <= pitch_.width_m + margin,
                     SchemaError, "position outside pitch bounds + 5 m margin");
        }
      }
    }
    if (football_mode_) {
      int balls = 0;
      for (const auto& m : agent_meta_)
        if (m.team == Team::kBall) ++balls;
      OT_REQUIRE(balls == 1, SchemaError,
                 "football mode requires exactly one ball agent");
    }
  }

  bool same_shape(const TrajectoryTensor& o) const {
    return n_agents_ == o.n_agents_ && n_frames_ == o.n_frames_ && dims_ == o.dims_;
  }

 private:
  std::size_t index(int agent, int frame, int dim) const {
    return (static_cast<std::size_t>(agent) * n_frames_ + frame) * dims_ + dim;
  }

  int n_agents_ = 0;
  int n_frames_ = 0;
  int dims_ = 0;
  std::vector<AgentMeta> agent_meta_;
  double frame_rate_hz_ = 1.0;
  PitchSpec pitch_;
  bool football_mode_ = true;
  std::vector<double> values_;
};

// Per agent-timestep observability, [N][frames]; all dims of an agent share
// one mask value.
class MaskTensor {
 public:
  MaskTensor() = default;
  MaskTensor(int n_agents, int n_frames, bool fill = true)
      : n_agents_(n_agents),
        n_frames_(n_frames),
        m_(static_cast<std::size_t>(n_agents) * n_frames, fill ? 1 : 0) {
    OT_REQUIRE(n_agents >= 1 && n_frames >= 1, ArgumentError,
               "MaskTensor requires positive shape");
  }

  int n_agents() const { return n_agents_; }
  int n_frames() const { return n_frames_; }

  int at(int agent, int frame) const {
    return m_[static_cast<std::size_t>(agent) * n_frames_ + frame];
  }
  void set(int agent, int frame, int v) {
    OT_REQUIRE(v == 0 || v == 1, ArgumentError, "mask entries must be 0 or 1");
    m_[static_cast<std::size_t>(agent) * n_frames_ + frame] =
        static_cast<std::uint8_t>(v);
  }

  Eigen::VectorXd frame_slice(int frame) const {
    Eigen::VectorXd out(n_agents_);
    for (int i = 0; i < n_agents_; ++i) out(i) = at(i, frame);
    return out;
  }

  std::size_t count_observed() const {
    std::size_t c = 0;
    for (auto v : m_) c += v;
    return c;
  }

  // Every agent must be observed at least once (the sweeps need an anchor).
  void validate() const {
    for (int i = 0; i < n_agents_; ++i) {
      bool seen = false;
      for (int t = 0; t < n_frames_ && !seen; ++t) seen = at(i, t) == 1;
      OT_REQUIRE(seen, SchemaError, "mask invariant violated: agent " +
                                        std::to_string(i) + " never observed");
    }
  }

  bool operator==(const MaskTensor& o) const {
    return n_agents_ == o.n_agents_ && n_frames_ == o.n_frames_ && m_ == o.m_;
  }

 private:
  int n_agents_ = 0;
  int n_frames_ = 0;
  std::vector<std::uint8_t> m_;
};

struct SequenceWindow {
  TrajectoryTensor trajectory;
  MaskTensor mask;
  std::string source_id;
  int warmup_frames = 0;
};

}  // namespace ot
