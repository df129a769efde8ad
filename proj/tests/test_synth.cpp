#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "offtrack/bundle_io.hpp"
#include "offtrack/synth.hpp"

namespace fs = std::filesystem;
using namespace ot;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("offtrack_synth_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(Synth, ForceFreeModeIsExactlyLinear) {
  SynthConfig cfg = force_free_config(99, 60);
  const TrajectoryTensor t = generate_match(cfg);
  for (int i = 0; i < t.n_agents(); ++i) {
    const Eigen::Vector2d p0 = t.pos2(i, 0);
    const Eigen::Vector2d p1 = t.pos2(i, 1);
    const Eigen::Vector2d v = p1 - p0;
    for (int s = 2; s < t.n_frames(); ++s) {
      const Eigen::Vector2d expect = p0 + v * s;
      EXPECT_NEAR((t.pos2(i, s) - expect).norm(), 0.0, 1e-9)
          << "agent " << i << " frame " << s;
    }
  }
}

TEST(Synth, DeterministicUnderSeed) {
  SynthConfig cfg;
  cfg.duration_frames = 40;
  cfg.seed = 77;
  const TrajectoryTensor a = generate_match(cfg);
  const TrajectoryTensor b = generate_match(cfg);
  for (int i = 0; i < a.n_agents(); ++i)
    for (int s = 0; s < a.n_frames(); ++s)
      for (int k = 0; k < 2; ++k) EXPECT_EQ(a.at(i, s, k), b.at(i, s, k));
}

TEST(Synth, StepDisplacementRespectsSpeedCap) {
  SynthConfig cfg;
  cfg.duration_frames = 60;
  cfg.seed = 5;
  const TrajectoryTensor t = generate_match(cfg);
  const double cap = cfg.max_speed / cfg.frame_rate_hz + 1e-9;
  for (int i = 1; i < t.n_agents(); ++i)
    for (int s = 0; s + 1 < t.n_frames(); ++s)
      EXPECT_LE((t.pos2(i, s + 1) - t.pos2(i, s)).norm(), cap);
}

TEST(Synth, PositionsStayOnPitch) {
  SynthConfig cfg;
  cfg.duration_frames = 80;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    cfg.seed = seed;
    const TrajectoryTensor t = generate_match(cfg);
    for (int i = 0; i < t.n_agents(); ++i)
      for (int s = 0; s < t.n_frames(); ++s) {
        EXPECT_GE(t.at(i, s, 0), 0.0);
        EXPECT_LE(t.at(i, s, 0), cfg.pitch.length_m);
        EXPECT_GE(t.at(i, s, 1), 0.0);
        EXPECT_LE(t.at(i, s, 1), cfg.pitch.width_m);
      }
  }
}

TEST(Synth, MeanSpeedInHumanPlausibleBand) {
  SynthConfig cfg;
  cfg.duration_frames = 50;
  double total_speed = 0.0;
  long count = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = 1000 + seed;
    const TrajectoryTensor t = generate_match(cfg);
    for (int i = 1; i < t.n_agents(); ++i) {
      double dist = 0.0;
      for (int s = 0; s + 1 < t.n_frames(); ++s)
        dist += (t.pos2(i, s + 1) - t.pos2(i, s)).norm();
      total_speed += dist / ((t.n_frames() - 1) / t.frame_rate_hz());
      ++count;
    }
  }
  const double mean_speed = total_speed / count;
  EXPECT_GE(mean_speed, 1.0);
  EXPECT_LE(mean_speed, 8.0);
}

TEST(Benchmark, ManifestListsRequestedSequences) {
  const fs::path dir = temp_dir("count");
  SynthConfig cfg;
  cfg.duration_frames = 12;
  generate_benchmark(cfg, 3, dir);
  const BundleManifest m = load_manifest(dir);
  EXPECT_EQ(m.sequences.size(), 3u);
}

TEST(Benchmark, RerunIsByteIdentical) {
  const fs::path a = temp_dir("bytes_a");
  const fs::path b = temp_dir("bytes_b");
  SynthConfig cfg;
  cfg.duration_frames = 20;
  cfg.seed = 31;
  generate_benchmark(cfg, 2, a);
  generate_benchmark(cfg, 2, b);
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  EXPECT_EQ(slurp(a / "seq_000000.csv"), slurp(b / "seq_000000.csv"));
  EXPECT_EQ(slurp(a / "seq_000001.csv"), slurp(b / "seq_000001.csv"));
}

TEST(Benchmark, LoadableWithZeroRejects) {
  const fs::path dir = temp_dir("load");
  SynthConfig cfg;
  cfg.duration_frames = 60;
  generate_benchmark(cfg, 25, dir);
  const auto seqs = load_tracking_bundle(dir);
  EXPECT_EQ(seqs.size(), 25u);
  for (const auto& t : seqs) EXPECT_NO_THROW(t.validate());
}
