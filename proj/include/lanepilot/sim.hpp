#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lanepilot/actuation.hpp"
#include "lanepilot/imaging.hpp"
#include "lanepilot/pipeline.hpp"

namespace lanepilot::sim {

enum class TileKind {
  kStraightNS,
  kStraightEW,
  kCurveNE,
  kCurveNW,
  kCurveSE,
  kCurveSW,
};

bool is_curve(TileKind kind);
std::string_view tile_kind_name(TileKind kind);

struct Tile {
  int row = 0;  // grows toward +y (north)
  int col = 0;  // grows toward +x (east)
  TileKind kind = TileKind::kStraightEW;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, counterclockwise from +x, in (-pi, pi]
};

double normalize_angle(double theta);

// One tile's share of the lane centerline: a straight piece or a
// quarter-circle arc, oriented along the direction of travel.
struct CenterPiece {
  bool arc = false;
  // Straight: start point and unit heading.
  double x0 = 0.0, y0 = 0.0, hx = 0.0, hy = 0.0;
  // Arc: center, radius, start angle, signed sweep (+ counterclockwise).
  double cx = 0.0, cy = 0.0, radius = 0.0, start_angle = 0.0, sweep = 0.0;
  double length = 0.0;
  double s_begin = 0.0;  // arc length at the piece start along the loop

  Pose point_at(double s_local) const;
};

struct Track {
  std::vector<Tile> tiles;  // loop order
  std::vector<CenterPiece> centerline;  // one piece per tile, same order
  int grid_rows = 0;
  int grid_cols = 0;
  double tile_size = 0.585;
  double lane_width = 0.22;
  // The vehicle lane lies right of the travel direction unless mirrored.
  bool mirrored = false;

  std::optional<int> tile_at(double x, double y) const;
  double loop_length() const;

  // Nearest centerline point. offset > 0 means the query lies left of the
  // lane center with respect to the travel direction.
  struct Projection {
    double s = 0.0;
    double offset = 0.0;
    double heading = 0.0;
    int piece = 0;
  };
  Projection project(double x, double y) const;
  Pose point_at(double s) const;

  std::vector<int> grid_index;  // row-major, -1 for cells off the loop
};

struct TrackParams {
  double tile_size = 0.585;
  double lane_width = 0.22;
  bool mirrored = false;

  friend bool operator==(const TrackParams&, const TrackParams&) = default;
};

// Outer ring of a 6x5 grid: 18 tiles, four left-hand corners when driven
// counterclockwise. The mirrored variant reflects the map about the vertical
// axis, so the loop runs clockwise and the vehicle keeps to the left lane.
Track build_default_track(const TrackParams& params = {});

// Pose on the lane center at the middle of a tile, heading along the loop.
Pose lane_start_pose(const Track& track, int tile_index);

Pose mirror_pose(const Track& track, const Pose& pose);

// Road paint dimensions in meters.
struct Markings {
  double center_width = 0.025;
  double dash_on = 0.10;
  double dash_off = 0.10;
  double edge_width = 0.05;
};

struct Rgb {
  std::uint8_t r, g, b;
};
inline constexpr Rgb kRoadGray{40, 40, 40};
inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kYellow{255, 220, 0};
inline constexpr Rgb kGrass{20, 60, 20};
inline constexpr Rgb kSky{120, 170, 220};

Rgb ground_color(const Track& track, double x, double y,
                 const Markings& markings = {});

struct CameraModel {
  double height = 0.11;   // m above ground
  double pitch = 0.35;    // rad, downward
  double fov = 1.2;       // horizontal, rad
  int width = 320;
  int height_px = 240;

  double focal() const;
  // Continuous row of the horizon; pixel centers above it see sky.
  double horizon_row() const;

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

void validate(const CameraModel& camera);

// Pinhole ground-plane ray casting from the vehicle pose.
imaging::Frame render_frame(const Track& track, const Pose& pose,
                            const CameraModel& camera,
                            const Markings& markings = {});

// Ground hit of the ray through image point (u, v) (continuous pixel
// coordinates); absent at or above the horizon.
std::optional<std::pair<double, double>> pixel_to_ground(
    const Pose& pose, const CameraModel& camera, double u, double v);
std::optional<std::pair<double, double>> ground_to_pixel(
    const Pose& pose, const CameraModel& camera, double x, double y);

// Exact arc integration for constant wheel speeds over dt.
Pose step_kinematics(const Pose& pose, const actuation::WheelCommand& wheels,
                     double wheelbase, double dt);

struct LaneMetrics {
  double lateral_offset = 0.0;
  std::optional<int> tile_index;
  bool in_lane = false;
};

LaneMetrics lane_metrics(const Track& track, const Pose& pose,
                         double exit_margin = 0.03);

// Produces a steering angle (degrees, positive right) each step.
class Driver {
 public:
  virtual ~Driver() = default;

  virtual bool needs_frame() const { return false; }

  struct Input {
    const imaging::Frame* frame = nullptr;  // set when needs_frame()
    const Pose* pose = nullptr;
    const Track* track = nullptr;
  };
  struct Output {
    double steering = 0.0;
    std::optional<double> angle;
    int direction = 0;
    // Path curvature (1/m, positive left). When set the episode skips the
    // PID and turns at cruise_speed * curvature.
    std::optional<double> curvature;
  };
  virtual Output steer(const Input& input) = 0;

  // Annotated view of the last processed frame, if the driver has one.
  virtual std::optional<imaging::Frame> overlay() const { return std::nullopt; }
};

class VisionDriver final : public Driver {
 public:
  VisionDriver(PerceptionParams perception, guidance::GuidanceParams guidance,
               DriveParams drive);

  bool needs_frame() const override { return true; }
  Output steer(const Input& input) override;
  std::optional<imaging::Frame> overlay() const override;

 private:
  LaneFollower follower_;
};

// Pure pursuit of a ground-truth centerline point ahead. Bypasses vision
// and the PID, so it checks the track, kinematics and exit logic on their
// own. Curvature is capped at 1 / min_radius_m.
class OracleDriver final : public Driver {
 public:
  explicit OracleDriver(double lookahead_m = 0.25, double min_radius_m = 0.1)
      : lookahead_(lookahead_m), min_radius_(min_radius_m) {}

  Output steer(const Input& input) override;

 private:
  double lookahead_;
  double min_radius_;
};

class ConstantDriver final : public Driver {
 public:
  explicit ConstantDriver(double steering_deg) : steering_(steering_deg) {}
  Output steer(const Input&) override { return {steering_, steering_, 0, std::nullopt}; }

 private:
  double steering_;
};

struct EpisodeParams {
  double frame_rate = 30.0;
  double cap_seconds = 60.0;
  int frame_delay = 0;
  double exit_margin = 0.03;
  DriveParams drive;
  CameraModel camera;
  Markings markings;
};

struct RunMetrics {
  double survival = 0.0;  // seconds
  int tiles_traversed = 0;
  int steps = 0;
  bool lane_exit = false;
  std::optional<int> exit_tile;  // tile containing the last in-lane pose
  double distance = 0.0;         // meters driven
};

// Per-step records for logs and determinism checks.
struct StepRecord {
  int step = 0;
  double t = 0.0;
  Pose pose;
  double offset = 0.0;
  std::optional<int> tile;
  bool in_lane = true;
  std::optional<double> angle;
  double steering = 0.0;  // applied after the delay queue
  int direction = 0;
};

struct EpisodeObserver {
  std::function<void(const StepRecord&)> on_step;
  // Directory for frame_%06d.ppm / overlay_%06d.ppm; empty disables dumps.
  std::filesystem::path dump_dir;
};

RunMetrics run_episode(const Track& track, int start_tile,
                       const EpisodeParams& params, Driver& driver,
                       const EpisodeObserver* observer = nullptr);

std::string format_pose_log_line(const StepRecord& record);

}  // namespace lanepilot::sim
