#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "offtrack/rng.hpp"
#include "offtrack/trajectory.hpp"

namespace ot {

// Keeps every factor-th frame starting at index 0; divides the frame rate.
inline TrajectoryTensor downsample(const TrajectoryTensor& t, int factor) {
  OT_REQUIRE(factor >= 1, ArgumentError, "downsample factor must be >= 1");
  const int out_frames = (t.n_frames() + factor - 1) / factor;
  TrajectoryTensor out(t.n_agents(), out_frames, t.dims(), t.agent_meta(),
                       t.frame_rate_hz() / factor, t.pitch(), t.football_mode());
  for (int i = 0; i < t.n_agents(); ++i)
    for (int s = 0; s < out_frames; ++s)
      for (int k = 0; k < t.dims(); ++k) out.at(i, s, k) = t.at(i, s * factor, k);
  return out;
}

// Mean x-velocity of one team over the window, averaged over agents and
// per-frame finite differences.
inline double mean_x_velocity(const TrajectoryTensor& t, Team team) {
  double sum = 0.0;
  long count = 0;
  for (int i = 0; i < t.n_agents(); ++i) {
    if (t.agent_meta()[i].team != team) continue;
    for (int s = 0; s + 1 < t.n_frames(); ++s) {
      sum += (t.at(i, s + 1, 0) - t.at(i, s, 0)) * t.frame_rate_hz();
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

// Reflects all x coordinates about pitch center if the possessing team's mean
// x-velocity over the window is negative, so possession always attacks
// rightward. Idempotent.
inline TrajectoryTensor realign_attack_direction(const TrajectoryTensor& t,
                                                 Team possession) {
  OT_REQUIRE(possession == Team::kHome || possession == Team::kAway,
             ArgumentError, "possession must be home or away");
  if (mean_x_velocity(t, possession) >= 0.0) return t;
  TrajectoryTensor out = t;
  const double length = t.pitch().length_m;
  for (int i = 0; i < t.n_agents(); ++i)
    for (int s = 0; s < t.n_frames(); ++s) out.at(i, s, 0) = length - t.at(i, s, 0);
  return out;
}

// gt ⊙ m + est ⊙ (1 − m), rows are agents.
inline Eigen::MatrixXd masked_mix(const Eigen::MatrixXd& gt,
                                  const Eigen::MatrixXd& est,
                                  const Eigen::VectorXd& m) {
  OT_REQUIRE(gt.rows() == est.rows() && gt.cols() == est.cols() &&
                 m.size() == gt.rows(),
             ArgumentError, "masked_mix shape mismatch");
  Eigen::MatrixXd out(gt.rows(), gt.cols());
  for (Eigen::Index i = 0; i < gt.rows(); ++i)
    out.row(i) = m(i) * gt.row(i) + (1.0 - m(i)) * est.row(i);
  return out;
}

// Deterministic shuffle under seed; eval count = floor(fraction * total).
inline std::pair<std::vector<SequenceWindow>, std::vector<SequenceWindow>>
split_train_eval(const std::vector<SequenceWindow>& windows, double eval_fraction,
                 std::uint64_t seed) {
  OT_REQUIRE(!windows.empty(), ArgumentError, "split_train_eval: empty input");
  OT_REQUIRE(eval_fraction > 0.0 && eval_fraction < 1.0, ArgumentError,
             "eval_fraction must lie in (0, 1)");
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix64(seed, 0x53504c4954ull));  // "SPLIT" stream tag
  // Fisher-Yates with our own RNG so the permutation is platform-stable.
  for (std::size_t i = windows.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t n_eval = static_cast<std::size_t>(
      std::floor(eval_fraction * static_cast<double>(windows.size())));
  std::vector<SequenceWindow> eval_set, train_set;
  eval_set.reserve(n_eval);
  train_set.reserve(windows.size() - n_eval);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k < n_eval)
      eval_set.push_back(windows[order[k]]);
    else
      train_set.push_back(windows[order[k]]);
  }
  return {std::move(train_set), std::move(eval_set)};
}

}  // namespace ot
