#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "offtrack/bundle_io.hpp"
#include "offtrack/rng.hpp"
#include "offtrack/tracking_ops.hpp"
#include "offtrack/trajectory.hpp"

namespace ot {

// Social-force-style match generator. Players accelerate toward a blend of
// their formation anchor and the ball, repel each other at short range, and
// carry Ornstein-Uhlenbeck acceleration noise. The ball flies between players
// on exponentially timed kicks. noise_scale = attraction_gain =
// repulsion_gain = 0 gives exactly linear trajectories.
struct SynthConfig {
  int n_players_per_team = 11;
  int duration_frames = 60;
  double frame_rate_hz = 6.25;
  double ball_kick_rate_hz = 0.35;
  double attraction_gain = 0.9;    // 1/s^2 toward the blended target point
  double repulsion_gain = 8.0;     // m/s^2 peak at contact
  double noise_scale = 1.2;        // m/s^2 OU stationary std
  double max_speed = 9.0;          // m/s
  std::uint64_t seed = 1;
  PitchSpec pitch;
  // Integrator substeps per emitted frame; emitted data is the downsampled
  // fine-grid trajectory.
  int substeps = 4;

  void validate() const {
    OT_REQUIRE(n_players_per_team >= 1, ArgumentError, "need at least one player per team");
    OT_REQUIRE(duration_frames >= 2, ArgumentError, "duration_frames must be >= 2");
    OT_REQUIRE(frame_rate_hz > 0.0, ArgumentError, "frame_rate_hz must be positive");
    OT_REQUIRE(attraction_gain >= 0.0 && repulsion_gain >= 0.0 && noise_scale >= 0.0,
               ArgumentError, "gains and scales must be >= 0");
    OT_REQUIRE(max_speed > 0.0, ArgumentError, "max_speed must be positive");
    OT_REQUIRE(substeps >= 1, ArgumentError, "substeps must be >= 1");
    pitch.validate();
  }
};

namespace detail {

// 4-4-2-ish anchor grid for one team, x in [x_lo, x_hi].
inline std::vector<Eigen::Vector2d> formation_anchors(int n, const PitchSpec& pitch,
                                                      bool left_side) {
  std::vector<Eigen::Vector2d> anchors;
  anchors.reserve(n);
  const int n_lines = std::max(1, (n + 3) / 4);
  const double x_lo = left_side ? 0.18 * pitch.length_m : 0.55 * pitch.length_m;
  const double x_hi = left_side ? 0.45 * pitch.length_m : 0.82 * pitch.length_m;
  int placed = 0;
  for (int line = 0; line < n_lines && placed < n; ++line) {
    const int in_line = std::min(4, n - placed);
    const double fx = n_lines == 1 ? 0.5 : static_cast<double>(line) / (n_lines - 1);
    const double x = left_side ? x_lo + fx * (x_hi - x_lo) : x_hi - fx * (x_hi - x_lo);
    for (int k = 0; k < in_line; ++k) {
      const double fy = (k + 1.0) / (in_line + 1.0);
      anchors.emplace_back(x, fy * pitch.width_m);
      ++placed;
    }
  }
  return anchors;
}

}  // namespace detail

inline TrajectoryTensor generate_match(const SynthConfig& cfg) {
  cfg.validate();
  const int n_players = 2 * cfg.n_players_per_team;
  const int n_agents = n_players + 1;  // ball is agent 0
  const PitchSpec& pitch = cfg.pitch;

  std::vector<AgentMeta> meta(n_agents);
  meta[0] = {Team::kBall, 0};
  for (int k = 0; k < cfg.n_players_per_team; ++k) {
    meta[1 + k] = {Team::kHome, k + 1};
    meta[1 + cfg.n_players_per_team + k] = {Team::kAway, k + 1};
  }

  std::vector<Eigen::Vector2d> anchors(n_agents, Eigen::Vector2d::Zero());
  {
    const auto home = detail::formation_anchors(cfg.n_players_per_team, pitch, true);
    const auto away = detail::formation_anchors(cfg.n_players_per_team, pitch, false);
    for (int k = 0; k < cfg.n_players_per_team; ++k) {
      anchors[1 + k] = home[k];
      anchors[1 + cfg.n_players_per_team + k] = away[k];
    }
  }

  Rng rng(mix64(cfg.seed, 0x53594e5448ull));  // "SYNTH" stream tag
  const double dt = 1.0 / (cfg.frame_rate_hz * cfg.substeps);
  const double ou_tau = 1.5;
  const double ou_decay = std::exp(-dt / ou_tau);
  const double ou_diffuse = cfg.noise_scale * std::sqrt(1.0 - ou_decay * ou_decay);

  const bool force_free = cfg.attraction_gain == 0.0 && cfg.repulsion_gain == 0.0 &&
                          cfg.noise_scale == 0.0;
  const double duration_s = (cfg.duration_frames - 1) / cfg.frame_rate_hz;

  std::vector<Eigen::Vector2d> pos(n_agents), vel(n_agents),
      ou(n_agents, Eigen::Vector2d::Zero());
  // Players start near their anchors with a mild random velocity. In
  // force-free mode the velocity bound and an inset start box keep every
  // straight line strictly inside the pitch, so no clamp ever fires and the
  // emitted trajectories are exactly linear.
  const double vcap =
      force_free ? std::min(1.0, 0.4 * pitch.width_m / std::max(duration_s, 1.0))
                 : 1.5;
  const double inset = force_free ? vcap * duration_s + 1.0 : 0.0;
  for (int i = 1; i < n_agents; ++i) {
    pos[i] = anchors[i] + Eigen::Vector2d(rng.normal(), rng.normal()) * 2.0;
    pos[i].x() = std::clamp(pos[i].x(), inset, pitch.length_m - inset);
    pos[i].y() = std::clamp(pos[i].y(), inset, pitch.width_m - inset);
    vel[i] = {rng.uniform(-vcap, vcap), rng.uniform(-vcap, vcap)};
  }
  pos[0] = {0.5 * pitch.length_m, 0.5 * pitch.width_m};
  vel[0] = force_free ? Eigen::Vector2d(rng.uniform(-vcap, vcap), rng.uniform(-vcap, vcap))
                      : Eigen::Vector2d(rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0));

  double next_kick = force_free ? std::numeric_limits<double>::infinity()
                                : rng.exponential(cfg.ball_kick_rate_hz);
  const double ball_friction = force_free ? 0.0 : 0.25;  // 1/s

  const int total_steps = (cfg.duration_frames - 1) * cfg.substeps + 1;
  TrajectoryTensor fine(n_agents, total_steps, 2, meta,
                        cfg.frame_rate_hz * cfg.substeps, pitch);

  double clock = 0.0;
  for (int s = 0; s < total_steps; ++s) {
    for (int i = 0; i < n_agents; ++i) fine.set_pos2(i, s, pos[i]);
    if (s + 1 == total_steps) break;

    // Ball kicks: retarget toward a random player's current position.
    clock += dt;
    if (clock >= next_kick) {
      next_kick = clock + rng.exponential(cfg.ball_kick_rate_hz);
      const int receiver = 1 + static_cast<int>(rng.uniform_index(n_players));
      Eigen::Vector2d dir = pos[receiver] - pos[0];
      const double norm = dir.norm();
      if (norm > 1e-9) dir /= norm;
      vel[0] = dir * rng.uniform(8.0, 16.0);
    }

    // Player accelerations.
    std::vector<Eigen::Vector2d> acc(n_agents, Eigen::Vector2d::Zero());
    for (int i = 1; i < n_agents; ++i) {
      const Eigen::Vector2d target = 0.5 * (anchors[i] + pos[0]);
      acc[i] += cfg.attraction_gain * (target - pos[i]);
      if (cfg.repulsion_gain > 0.0) {
        const double radius = 3.0;
        for (int j = 1; j < n_agents; ++j) {
          if (j == i) continue;
          const Eigen::Vector2d diff = pos[i] - pos[j];
          const double d = diff.norm();
          if (d < radius && d > 1e-9)
            acc[i] += cfg.repulsion_gain * (radius - d) / radius * diff / d;
        }
      }
      if (cfg.noise_scale > 0.0) {
        ou[i] = ou_decay * ou[i] +
                ou_diffuse * Eigen::Vector2d(rng.normal(), rng.normal());
        acc[i] += ou[i];
      }
    }

    // Integrate; clamp speed and pitch bounds.
    for (int i = 0; i < n_agents; ++i) {
      if (i == 0) {
        vel[0] *= std::exp(-ball_friction * dt);
      } else {
        vel[i] += acc[i] * dt;
        const double speed = vel[i].norm();
        if (speed > cfg.max_speed) vel[i] *= cfg.max_speed / speed;
      }
      pos[i] += vel[i] * dt;
      if (pos[i].x() < 0.0) { pos[i].x() = 0.0; vel[i].x() = std::abs(vel[i].x()); }
      if (pos[i].x() > pitch.length_m) { pos[i].x() = pitch.length_m; vel[i].x() = -std::abs(vel[i].x()); }
      if (pos[i].y() < 0.0) { pos[i].y() = 0.0; vel[i].y() = std::abs(vel[i].y()); }
      if (pos[i].y() > pitch.width_m) { pos[i].y() = pitch.width_m; vel[i].y() = -std::abs(vel[i].y()); }
    }
  }

  TrajectoryTensor out = cfg.substeps == 1 ? fine : downsample(fine, cfg.substeps);
  out.validate();
  return out;
}

// Writes a bundle of n_sequences matches with per-sequence derived seeds
// cfg.seed + i. Possession alternates per sequence and the emitted data is
// realigned so the possessing team attacks rightward.
inline void generate_benchmark(const SynthConfig& cfg, int n_sequences,
                               const std::filesystem::path& out_dir) {
  OT_REQUIRE(n_sequences >= 1, ArgumentError, "n_sequences must be >= 1");
  cfg.validate();
  BundleManifest manifest;
  manifest.frame_rate_hz = cfg.frame_rate_hz;
  manifest.pitch = cfg.pitch;

  std::vector<TrajectoryTensor> seqs;
  seqs.reserve(n_sequences);
  for (int i = 0; i < n_sequences; ++i) {
    SynthConfig one = cfg;
    one.seed = cfg.seed + static_cast<std::uint64_t>(i);
    TrajectoryTensor t = generate_match(one);
    const Team possession = i % 2 == 0 ? Team::kHome : Team::kAway;
    t = realign_attack_direction(t, possession);
    if (i == 0) manifest.agents = t.agent_meta();
    char id[16];
    std::snprintf(id, sizeof(id), "%06d", i);
    BundleSequence seq;
    seq.id = id;
    seq.n_frames = t.n_frames();
    seq.possession = possession;
    manifest.sequences.push_back(seq);
    seqs.push_back(std::move(t));
  }
  save_manifest(out_dir, manifest);
  for (std::size_t i = 0; i < seqs.size(); ++i)
    save_sequence_csv(out_dir, manifest.sequences[i].id, seqs[i]);
}

// Force-free preset: zero gains, generous speed cap, players seeded well
// inside the pitch so no clamp is ever hit and every trajectory is exactly
// linear.
inline SynthConfig force_free_config(std::uint64_t seed, int duration_frames = 60) {
  SynthConfig cfg;
  cfg.attraction_gain = 0.0;
  cfg.repulsion_gain = 0.0;
  cfg.noise_scale = 0.0;
  cfg.max_speed = 50.0;
  cfg.duration_frames = duration_frames;
  cfg.seed = seed;
  return cfg;
}

}  // namespace ot
