#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "offtrack/trajectory.hpp"

namespace ot {

// Broadcast camera: position with z > 0, rectangular field of view, aimed at
// the ball each frame.
struct CameraConfig {
  Eigen::Vector3d position{52.5, -25.0, 12.0};
  double h_fov_rad = 35.0 * M_PI / 180.0;
  double v_fov_rad = 22.5 * M_PI / 180.0;

  void validate() const {
    OT_REQUIRE(position.z() > 0.0, ConfigError, "camera height must be positive");
    OT_REQUIRE(h_fov_rad > 0.0 && h_fov_rad < M_PI, ConfigError,
               "h_fov must lie in (0, pi)");
    OT_REQUIRE(v_fov_rad > 0.0 && v_fov_rad < M_PI, ConfigError,
               "v_fov must lie in (0, pi)");
  }
};

inline CameraConfig load_camera_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  OT_REQUIRE(in.good(), IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  CameraConfig cam;
  try {
    const auto& p = j.at("position");
    cam.position = {p.at(0).get<double>(), p.at(1).get<double>(),
                    p.at(2).get<double>()};
    cam.h_fov_rad = j.at("h_fov_deg").get<double>() * M_PI / 180.0;
    cam.v_fov_rad = j.at("v_fov_deg").get<double>() * M_PI / 180.0;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  cam.validate();
  return cam;
}

inline void save_camera_config(const std::filesystem::path& path,
                               const CameraConfig& cam) {
  nlohmann::json j;
  j["position"] = {cam.position.x(), cam.position.y(), cam.position.z()};
  j["h_fov_deg"] = cam.h_fov_rad * 180.0 / M_PI;
  j["v_fov_deg"] = cam.v_fov_rad * 180.0 / M_PI;
  std::ofstream out(path, std::ios::binary);
  OT_REQUIRE(out.good(), IoError, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Clipped projection of the view frustum onto the pitch plane. Vertices are
// counterclockwise; the polygon is convex by construction.
struct ViewPolygon {
  std::vector<Eigen::Vector2d> vertices;

  bool empty() const { return vertices.size() < 3; }

  double area() const {
    double a = 0.0;
    const auto n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = vertices[i];
      const auto& q = vertices[(i + 1) % n];
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }

  // Boundary counts as inside.
  bool contains(const Eigen::Vector2d& pt, double eps = 1e-9) const {
    const auto n = vertices.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = vertices[i];
      const auto& q = vertices[(i + 1) % n];
      const double cross =
          (q.x() - p.x()) * (pt.y() - p.y()) - (q.y() - p.y()) * (pt.x() - p.x());
      if (cross < -eps) return false;
    }
    return true;
  }
};

namespace detail {

// Rays at or above the horizon never hit the pitch plane; they are replaced
// by a far ground point at this distance before clipping.
inline constexpr double kHorizonDistanceM = 10000.0;

inline Eigen::Vector2d ray_ground_point(const Eigen::Vector3d& origin,
                                        const Eigen::Vector3d& dir) {
  if (dir.z() < 0.0) {
    const double s = -origin.z() / dir.z();
    return {origin.x() + s * dir.x(), origin.y() + s * dir.y()};
  }
  Eigen::Vector2d horiz(dir.x(), dir.y());
  const double norm = horiz.norm();
  OT_REQUIRE(norm > 0.0, NumericError, "degenerate vertical frustum ray");
  horiz /= norm;
  return Eigen::Vector2d(origin.x(), origin.y()) + kHorizonDistanceM * horiz;
}

// Sutherland-Hodgman clip of a polygon against one half-plane
// {p : n.dot(p) <= c}.
inline std::vector<Eigen::Vector2d> clip_half_plane(
    const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& n, double c) {
  std::vector<Eigen::Vector2d> out;
  const auto sz = poly.size();
  for (std::size_t i = 0; i < sz; ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % sz];
    const double da = n.dot(a) - c;
    const double db = n.dot(b) - c;
    const bool ina = da <= 0.0;
    const bool inb = db <= 0.0;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

inline std::vector<Eigen::Vector2d> clip_to_pitch(
    std::vector<Eigen::Vector2d> poly, const PitchSpec& pitch) {
  poly = clip_half_plane(poly, {-1.0, 0.0}, 0.0);
  poly = clip_half_plane(poly, {1.0, 0.0}, pitch.length_m);
  poly = clip_half_plane(poly, {0.0, -1.0}, 0.0);
  poly = clip_half_plane(poly, {0.0, 1.0}, pitch.width_m);
  return poly;
}

inline std::vector<Eigen::Vector2d> dedupe_vertices(
    const std::vector<Eigen::Vector2d>& poly, double eps = 1e-12) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& p : poly) {
    if (out.empty() || (out.back() - p).norm() > eps) out.push_back(p);
  }
  if (out.size() >= 2 && (out.front() - out.back()).norm() <= eps) out.pop_back();
  return out;
}

}  // namespace detail

// Casts the four frustum-corner rays (offsets ±h_fov/2, ±v_fov/2 about the
// camera-to-target normal), intersects them with the pitch plane, and clips
// the quadrilateral against the pitch rectangle.
inline ViewPolygon view_polygon(const CameraConfig& cam,
                                const Eigen::Vector2d& target,
                                const PitchSpec& pitch) {
  cam.validate();
  const Eigen::Vector3d target3(target.x(), target.y(), 0.0);
  Eigen::Vector3d forward = target3 - cam.position;
  const double dist = forward.norm();
  OT_REQUIRE(dist > 0.0, ConfigError, "camera coincides with its target");
  forward /= dist;
  OT_REQUIRE(forward.z() < 0.0, ConfigError,
             "camera normal points away from the pitch plane");

  // Camera basis: right on the ground plane, up completing the frame.
  Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
  OT_REQUIRE(right.norm() > 1e-12, ConfigError,
             "camera looking straight down is unsupported");
  right.normalize();
  const Eigen::Vector3d up = right.cross(forward);

  const double th = std::tan(0.5 * cam.h_fov_rad);
  const double tv = std::tan(0.5 * cam.v_fov_rad);
  // Counterclockwise on the pitch once projected: near-left, near-right,
  // far-right, far-left (near edge = below the optical axis).
  const double corners[4][2] = {{-th, -tv}, {th, -tv}, {th, tv}, {-th, tv}};

  std::vector<Eigen::Vector2d> quad;
  quad.reserve(4);
  for (const auto& c : corners) {
    const Eigen::Vector3d dir = forward + c[0] * right + c[1] * up;
    quad.push_back(detail::ray_ground_point(cam.position, dir));
  }
  // Ensure counterclockwise orientation before clipping.
  double a2 = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const auto& p = quad[i];
    const auto& q = quad[(i + 1) % quad.size()];
    a2 += p.x() * q.y() - q.x() * p.y();
  }
  if (a2 < 0.0) std::reverse(quad.begin(), quad.end());

  ViewPolygon poly;
  poly.vertices = detail::dedupe_vertices(detail::clip_to_pitch(quad, pitch));
  return poly;
}

// Per frame: aim at the ball, mask players by polygon containment. The ball
// is always observed; the first and last warmup_frames frames are forced to 1
// for all agents.
inline MaskTensor make_mask(const TrajectoryTensor& traj, const CameraConfig& cam,
                            int warmup_frames) {
  OT_REQUIRE(warmup_frames >= 0, ArgumentError, "warmup_frames must be >= 0");
  const int ball = traj.ball_index();
  OT_REQUIRE(ball >= 0, ConfigError, "make_mask requires a ball agent");
  const PitchSpec& pitch = traj.pitch();
  const int n = traj.n_agents();
  const int frames = traj.n_frames();
  MaskTensor mask(n, frames, /*fill=*/false);
  for (int t = 0; t < frames; ++t) {
    Eigen::Vector2d target = traj.pos2(ball, t);
    target.x() = std::clamp(target.x(), 0.0, pitch.length_m);
    target.y() = std::clamp(target.y(), 0.0, pitch.width_m);
    const ViewPolygon poly = view_polygon(cam, target, pitch);
    for (int i = 0; i < n; ++i) {
      const bool in_frame = i == ball || poly.contains(traj.pos2(i, t));
      mask.set(i, t, in_frame ? 1 : 0);
    }
  }
  for (int t = 0; t < std::min(warmup_frames, frames); ++t)
    for (int i = 0; i < n; ++i) mask.set(i, t, 1);
  for (int t = std::max(0, frames - warmup_frames); t < frames; ++t)
    for (int i = 0; i < n; ++i) mask.set(i, t, 1);
  // Warm-up frames guarantee the at-least-one-observation invariant. Without
  // them a player can stay off-frame for the whole window, so the raw mask is
  // returned unvalidated and downstream consumers check it.
  if (warmup_frames > 0) mask.validate();
  return mask;
}

struct CoverageStats {
  double mean_in_frame = 0.0;
  double std_in_frame = 0.0;
  double mean_visible_run_s = 0.0;
  double std_visible_run_s = 0.0;
};

// Mean/std of per-frame in-frame counts over all frames, and of maximal
// consecutive visible runs (in seconds) with the warm-up frames excluded from
// the run statistics. Population std convention.
inline CoverageStats coverage_stats(const MaskTensor& mask, double frame_rate_hz,
                                    bool exclude_ball, int ball_index = -1,
                                    int warmup_frames = 0) {
  OT_REQUIRE(frame_rate_hz > 0.0, ArgumentError, "frame_rate_hz must be positive");
  const int n = mask.n_agents();
  const int frames = mask.n_frames();
  CoverageStats out;

  std::vector<int> counts(frames, 0);
  for (int t = 0; t < frames; ++t)
    for (int i = 0; i < n; ++i) {
      if (exclude_ball && i == ball_index) continue;
      counts[t] += mask.at(i, t);
    }
  double sum = 0.0;
  for (int c : counts) sum += c;
  out.mean_in_frame = sum / frames;
  double dev2 = 0.0;
  for (int c : counts) dev2 += (c - out.mean_in_frame) * (c - out.mean_in_frame);
  out.std_in_frame = std::sqrt(dev2 / frames);

  const int lo = std::min(warmup_frames, frames);
  const int hi = std::max(lo, frames - warmup_frames);
  std::vector<double> runs;
  for (int i = 0; i < n; ++i) {
    if (exclude_ball && i == ball_index) continue;
    int len = 0;
    for (int t = lo; t < hi; ++t) {
      if (mask.at(i, t) == 1) {
        ++len;
      } else if (len > 0) {
        runs.push_back(len / frame_rate_hz);
        len = 0;
      }
    }
    if (len > 0) runs.push_back(len / frame_rate_hz);
  }
  if (!runs.empty()) {
    double rs = 0.0;
    for (double r : runs) rs += r;
    out.mean_visible_run_s = rs / runs.size();
    double rdev2 = 0.0;
    for (double r : runs)
      rdev2 += (r - out.mean_visible_run_s) * (r - out.mean_visible_run_s);
    out.std_visible_run_s = std::sqrt(rdev2 / runs.size());
  }
  return out;
}

}  // namespace ot
