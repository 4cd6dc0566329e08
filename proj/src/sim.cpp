#include "lanepilot/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numbers>

#include "lanepilot/errors.hpp"

namespace lanepilot::sim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

struct GridDir {
  int drow;
  int dcol;

  friend bool operator==(const GridDir&, const GridDir&) = default;
};

TileKind curve_kind(bool north, bool east) {
  if (north) return east ? TileKind::kCurveNE : TileKind::kCurveNW;
  return east ? TileKind::kCurveSE : TileKind::kCurveSW;
}

// Sides are given as outward grid directions from the tile.
TileKind kind_from_sides(GridDir a, GridDir b) {
  if (a.dcol == 0 && b.dcol == 0) return TileKind::kStraightNS;
  if (a.drow == 0 && b.drow == 0) return TileKind::kStraightEW;
  const GridDir vertical = a.drow != 0 ? a : b;
  const GridDir horizontal = a.drow != 0 ? b : a;
  return curve_kind(vertical.drow > 0, horizontal.dcol > 0);
}

double dash_on(double along, const Markings& m) {
  const double period = m.dash_on + m.dash_off;
  // Dashes are centered on the tile middle so the pattern is mirror symmetric.
  return std::fmod(std::abs(along) + m.dash_on / 2.0, period) < m.dash_on;
}

}  // namespace

bool is_curve(TileKind kind) {
  return kind != TileKind::kStraightNS && kind != TileKind::kStraightEW;
}

std::string_view tile_kind_name(TileKind kind) {
  switch (kind) {
    case TileKind::kStraightNS: return "straight_NS";
    case TileKind::kStraightEW: return "straight_EW";
    case TileKind::kCurveNE: return "curve_NE";
    case TileKind::kCurveNW: return "curve_NW";
    case TileKind::kCurveSE: return "curve_SE";
    case TileKind::kCurveSW: return "curve_SW";
  }
  return "?";
}

double normalize_angle(double theta) {
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Pose CenterPiece::point_at(double s_local) const {
  if (!arc) {
    return {x0 + hx * s_local, y0 + hy * s_local, std::atan2(hy, hx)};
  }
  const double a = start_angle + sweep * (s_local / length);
  const double turn = sweep > 0.0 ? 1.0 : -1.0;
  return {cx + radius * std::cos(a), cy + radius * std::sin(a),
          normalize_angle(a + turn * kHalfPi)};
}

std::optional<int> Track::tile_at(double x, double y) const {
  const double col_f = std::floor(x / tile_size);
  const double row_f = std::floor(y / tile_size);
  if (col_f < 0 || row_f < 0 || col_f >= grid_cols || row_f >= grid_rows) {
    return std::nullopt;
  }
  const int idx =
      grid_index[static_cast<std::size_t>(row_f) * grid_cols +
                 static_cast<std::size_t>(col_f)];
  if (idx < 0) return std::nullopt;
  return idx;
}

double Track::loop_length() const {
  if (centerline.empty()) return 0.0;
  return centerline.back().s_begin + centerline.back().length;
}

Track::Projection Track::project(double x, double y) const {
  Projection best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    const CenterPiece& p = centerline[i];
    double s_local;
    if (!p.arc) {
      s_local = std::clamp((x - p.x0) * p.hx + (y - p.y0) * p.hy, 0.0,
                           p.length);
    } else {
      const double phi = std::atan2(y - p.cy, x - p.cx);
      const double rel = normalize_angle(phi - p.start_angle) *
                         (p.sweep > 0.0 ? 1.0 : -1.0);
      // Angles behind the start clamp to 0; the arc spans a quarter turn.
      const double clamped =
          rel < -kPi / 4.0 - kPi / 2.0 ? kHalfPi : std::clamp(rel, 0.0, kHalfPi);
      s_local = clamped * p.radius;
    }
    const Pose near = p.point_at(s_local);
    const double dx = x - near.x;
    const double dy = y - near.y;
    const double dist = std::hypot(dx, dy);
    if (dist < best_dist) {
      best_dist = dist;
      const double left = -std::sin(near.theta) * dx + std::cos(near.theta) * dy;
      best.s = p.s_begin + s_local;
      best.offset = left >= 0.0 ? dist : -dist;
      best.heading = near.theta;
      best.piece = static_cast<int>(i);
    }
  }
  return best;
}

Pose Track::point_at(double s) const {
  const double total = loop_length();
  double wrapped = std::fmod(s, total);
  if (wrapped < 0.0) wrapped += total;
  auto it = std::upper_bound(
      centerline.begin(), centerline.end(), wrapped,
      [](double v, const CenterPiece& p) { return v < p.s_begin; });
  const CenterPiece& piece = *std::prev(it);
  return piece.point_at(wrapped - piece.s_begin);
}

Track build_default_track(const TrackParams& params) {
  if (!(params.tile_size > 0.0) || !(params.lane_width > 0.0) ||
      params.lane_width >= params.tile_size / 2.0) {
    throw ContractViolation("track: need 0 < lane_width < tile_size / 2");
  }
  constexpr int kCols = 6;
  constexpr int kRows = 5;

  // Counterclockwise ring starting just east of the south-west corner.
  std::vector<std::pair<int, int>> cells;
  for (int c = 1; c < kCols; ++c) cells.emplace_back(0, c);
  for (int r = 1; r < kRows; ++r) cells.emplace_back(r, kCols - 1);
  for (int c = kCols - 2; c >= 0; --c) cells.emplace_back(kRows - 1, c);
  for (int r = kRows - 2; r >= 0; --r) cells.emplace_back(r, 0);
  if (params.mirrored) {
    for (auto& [r, c] : cells) c = kCols - 1 - c;
  }

  Track track;
  track.grid_rows = kRows;
  track.grid_cols = kCols;
  track.tile_size = params.tile_size;
  track.lane_width = params.lane_width;
  track.mirrored = params.mirrored;
  track.grid_index.assign(kRows * kCols, -1);

  const int n = static_cast<int>(cells.size());
  const double T = params.tile_size;
  const double lane_sign = params.mirrored ? -1.0 : 1.0;  // +1 right lane
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [pr, pc] = cells[(i + n - 1) % n];
    const auto [r, c] = cells[i];
    const auto [nr, nc] = cells[(i + 1) % n];
    const GridDir in{r - pr, c - pc};
    const GridDir out{nr - r, nc - c};
    track.tiles.push_back({r, c, kind_from_sides({-in.drow, -in.dcol}, out)});
    track.grid_index[static_cast<std::size_t>(r) * kCols + c] = i;

    const double center_x = (c + 0.5) * T;
    const double center_y = (r + 0.5) * T;
    CenterPiece piece;
    piece.s_begin = s;
    if (in == out) {
      const double hx = in.dcol;
      const double hy = in.drow;
      // Right-hand normal of the heading is (hy, -hx).
      const double off = lane_sign * params.lane_width / 2.0;
      piece.x0 = center_x - hx * T / 2.0 + off * hy;
      piece.y0 = center_y - hy * T / 2.0 - off * hx;
      piece.hx = hx;
      piece.hy = hy;
      piece.length = T;
    } else {
      const double turn = in.dcol * out.drow - in.drow * out.dcol;  // +1 left
      piece.arc = true;
      piece.cx = center_x + (out.dcol - in.dcol) * T / 2.0;
      piece.cy = center_y + (out.drow - in.drow) * T / 2.0;
      piece.radius = T / 2.0 + lane_sign * turn * params.lane_width / 2.0;
      piece.start_angle = std::atan2(-out.drow, -out.dcol);
      piece.sweep = turn * kHalfPi;
      piece.length = piece.radius * kHalfPi;
    }
    s += piece.length;
    track.centerline.push_back(piece);
  }
  return track;
}

Pose lane_start_pose(const Track& track, int tile_index) {
  if (tile_index < 0 ||
      tile_index >= static_cast<int>(track.centerline.size())) {
    throw ContractViolation("tile index outside the track");
  }
  const CenterPiece& piece = track.centerline[tile_index];
  return piece.point_at(piece.length / 2.0);
}

Pose mirror_pose(const Track& track, const Pose& pose) {
  return {track.grid_cols * track.tile_size - pose.x, pose.y,
          normalize_angle(kPi - pose.theta)};
}

Rgb ground_color(const Track& track, double x, double y,
                 const Markings& markings) {
  const auto idx = track.tile_at(x, y);
  if (!idx) return kGrass;
  const Tile& tile = track.tiles[*idx];
  const double T = track.tile_size;
  const double x_min = tile.col * T;
  const double y_min = tile.row * T;
  double lateral = 0.0;
  double along = 0.0;
  switch (tile.kind) {
    case TileKind::kStraightEW:
      lateral = y - (y_min + T / 2.0);
      along = x - (x_min + T / 2.0);
      break;
    case TileKind::kStraightNS:
      lateral = x - (x_min + T / 2.0);
      along = y - (y_min + T / 2.0);
      break;
    default: {
      const bool north = tile.kind == TileKind::kCurveNE ||
                         tile.kind == TileKind::kCurveNW;
      const bool east = tile.kind == TileKind::kCurveNE ||
                        tile.kind == TileKind::kCurveSE;
      const double kx = east ? x_min + T : x_min;
      const double ky = north ? y_min + T : y_min;
      const double rho = std::hypot(x - kx, y - ky);
      lateral = rho - T / 2.0;
      const double mid = std::atan2((y_min + T / 2.0) - ky,
                                    (x_min + T / 2.0) - kx);
      along = normalize_angle(std::atan2(y - ky, x - kx) - mid) * (T / 2.0);
      break;
    }
  }
  const double a = std::abs(lateral);
  if (a > T / 2.0) return kGrass;
  if (a <= markings.center_width / 2.0 && dash_on(along, markings)) {
    return kYellow;
  }
  if (a >= track.lane_width && a <= track.lane_width + markings.edge_width) {
    return kWhite;
  }
  return kRoadGray;
}

double CameraModel::focal() const {
  return (width / 2.0) / std::tan(fov / 2.0);
}

double CameraModel::horizon_row() const {
  return height_px / 2.0 - focal() * std::tan(pitch);
}

void validate(const CameraModel& camera) {
  if (!(camera.pitch > 0.0 && camera.pitch < kHalfPi)) {
    throw ContractViolation("camera pitch must lie in (0, pi/2)");
  }
  if (!(camera.fov > 0.0 && camera.fov < kPi)) {
    throw ContractViolation("camera fov must lie in (0, pi)");
  }
  if (!(camera.height > 0.0) || camera.width < 3 || camera.height_px < 4) {
    throw ContractViolation("camera height and image size must be positive");
  }
}

std::optional<std::pair<double, double>> pixel_to_ground(
    const Pose& pose, const CameraModel& camera, double u, double v) {
  const double f = camera.focal();
  const double xr = (u - camera.width / 2.0) / f;
  const double yd = (v - camera.height_px / 2.0) / f;
  const double sp = std::sin(camera.pitch);
  const double cp = std::cos(camera.pitch);
  const double den = sp + yd * cp;
  if (den <= 0.0) return std::nullopt;
  const double t = camera.height / den;
  const double forward = t * (cp - yd * sp);
  const double right = t * xr;
  const double ct = std::cos(pose.theta);
  const double st = std::sin(pose.theta);
  return std::pair{pose.x + forward * ct + right * st,
                   pose.y + forward * st - right * ct};
}

std::optional<std::pair<double, double>> ground_to_pixel(
    const Pose& pose, const CameraModel& camera, double x, double y) {
  const double dx = x - pose.x;
  const double dy = y - pose.y;
  const double ct = std::cos(pose.theta);
  const double st = std::sin(pose.theta);
  const double forward = dx * ct + dy * st;
  const double right = dx * st - dy * ct;
  const double sp = std::sin(camera.pitch);
  const double cp = std::cos(camera.pitch);
  const double zc = forward * cp + camera.height * sp;
  if (zc <= 0.0) return std::nullopt;
  const double yc = -forward * sp + camera.height * cp;
  const double f = camera.focal();
  return std::pair{camera.width / 2.0 + f * right / zc,
                   camera.height_px / 2.0 + f * yc / zc};
}

imaging::Frame render_frame(const Track& track, const Pose& pose,
                            const CameraModel& camera,
                            const Markings& markings) {
  validate(camera);
  imaging::Frame frame(camera.width, camera.height_px, 3);
  const double f = camera.focal();
  const double sp = std::sin(camera.pitch);
  const double cp = std::cos(camera.pitch);
  const double ct = std::cos(pose.theta);
  const double st = std::sin(pose.theta);
  for (int v = 0; v < camera.height_px; ++v) {
    auto row = frame.row(v);
    const double yd = (v + 0.5 - camera.height_px / 2.0) / f;
    const double den = sp + yd * cp;
    if (den <= 0.0) {
      for (int u = 0; u < camera.width; ++u) {
        row[3 * u] = kSky.r;
        row[3 * u + 1] = kSky.g;
        row[3 * u + 2] = kSky.b;
      }
      continue;
    }
    const double t = camera.height / den;
    const double forward = t * (cp - yd * sp);
    const double base_x = pose.x + forward * ct;
    const double base_y = pose.y + forward * st;
    for (int u = 0; u < camera.width; ++u) {
      const double right = t * (u + 0.5 - camera.width / 2.0) / f;
      const Rgb c =
          ground_color(track, base_x + right * st, base_y - right * ct, markings);
      row[3 * u] = c.r;
      row[3 * u + 1] = c.g;
      row[3 * u + 2] = c.b;
    }
  }
  return frame;
}

Pose step_kinematics(const Pose& pose, const actuation::WheelCommand& wheels,
                     double wheelbase, double dt) {
  if (!(dt > 0.0)) {
    throw ContractViolation("step_kinematics: dt must be positive");
  }
  if (!(wheelbase > 0.0)) {
    throw ContractViolation("step_kinematics: wheelbase must be positive");
  }
  const double v = (wheels.left + wheels.right) / 2.0;
  const double omega = (wheels.right - wheels.left) / wheelbase;
  if (std::abs(omega) < 1e-9) {
    return {pose.x + v * dt * std::cos(pose.theta),
            pose.y + v * dt * std::sin(pose.theta), pose.theta};
  }
  const double radius = v / omega;
  const double theta_end = pose.theta + omega * dt;
  return {pose.x + radius * (std::sin(theta_end) - std::sin(pose.theta)),
          pose.y - radius * (std::cos(theta_end) - std::cos(pose.theta)),
          normalize_angle(theta_end)};
}

LaneMetrics lane_metrics(const Track& track, const Pose& pose,
                         double exit_margin) {
  LaneMetrics m;
  m.lateral_offset = track.project(pose.x, pose.y).offset;
  m.tile_index = track.tile_at(pose.x, pose.y);
  m.in_lane = m.tile_index.has_value() &&
              std::abs(m.lateral_offset) <=
                  track.lane_width / 2.0 + exit_margin;
  return m;
}

VisionDriver::VisionDriver(PerceptionParams perception,
                           guidance::GuidanceParams guidance, DriveParams drive)
    : follower_(perception, guidance, drive) {}

Driver::Output VisionDriver::steer(const Input& input) {
  const auto decision = follower_.decide(*input.frame);
  return {decision.steering.angle, decision.angle, decision.direction, std::nullopt};
}

std::optional<imaging::Frame> VisionDriver::overlay() const {
  const Perception& p = follower_.last_perception();
  if (p.cropped.empty()) return std::nullopt;
  return lines::draw_overlay(p.cropped, p.segments, p.guides, p.lookahead_row);
}

Driver::Output OracleDriver::steer(const Input& input) {
  const Pose& pose = *input.pose;
  const auto proj = input.track->project(pose.x, pose.y);
  const Pose target = input.track->point_at(proj.s + lookahead_);
  const double dx = target.x - pose.x;
  const double dy = target.y - pose.y;
  const double forward = dx * std::cos(pose.theta) + dy * std::sin(pose.theta);
  const double right = dx * std::sin(pose.theta) - dy * std::cos(pose.theta);
  const double angle = std::atan2(right, forward) * 180.0 / kPi;
  // arc through the target: kappa = 2 * lateral / distance^2
  const double d2 = dx * dx + dy * dy;
  const double kmax = 1.0 / min_radius_;
  const double kappa = d2 > 0.0 ? std::clamp(-2.0 * right / d2, -kmax, kmax) : 0.0;
  return {angle, angle, 0, kappa};
}

RunMetrics run_episode(const Track& track, int start_tile,
                       const EpisodeParams& params, Driver& driver,
                       const EpisodeObserver* observer) {
  if (start_tile < 0 || start_tile >= static_cast<int>(track.tiles.size()) ||
      is_curve(track.tiles[start_tile].kind)) {
    throw ContractViolation("run_episode: start tile must be a straight tile");
  }
  if (!(params.frame_rate > 0.0) || !(params.cap_seconds > 0.0) ||
      params.frame_delay < 0) {
    throw ContractViolation("run_episode: invalid timing parameters");
  }
  const double dt = 1.0 / params.frame_rate;
  const long max_steps = std::lround(params.cap_seconds * params.frame_rate);
  const bool dump = observer && !observer->dump_dir.empty();

  Pose pose = lane_start_pose(track, start_tile);
  actuation::PidController pid = make_pid(params.drive);
  std::deque<Driver::Output> pending;
  RunMetrics metrics;
  int current_tile = start_tile;
  char name[32];

  for (long k = 0; k < max_steps; ++k) {
    imaging::Frame frame;
    if (driver.needs_frame() || dump) {
      frame = render_frame(track, pose, params.camera, params.markings);
    }
    Driver::Input input;
    input.frame = frame.empty() ? nullptr : &frame;
    input.pose = &pose;
    input.track = &track;
    const Driver::Output out = driver.steer(input);

    pending.push_back(out);
    Driver::Output applied;
    if (static_cast<int>(pending.size()) > params.frame_delay) {
      applied = pending.front();
      pending.pop_front();
    }
    double omega;
    if (applied.curvature) {
      omega = params.drive.cruise_speed * *applied.curvature;
    } else {
      auto [next_pid, w] = actuation::pid_step(pid, -applied.steering, dt);
      pid = next_pid;
      omega = w;
    }
    const auto wheels =
        actuation::wheel_speeds(params.drive.cruise_speed, omega,
                                params.drive.wheelbase, params.drive.v_max);
    const Pose next = step_kinematics(pose, wheels, params.drive.wheelbase, dt);
    metrics.distance += std::hypot(next.x - pose.x, next.y - pose.y);
    pose = next;

    if (dump) {
      std::snprintf(name, sizeof name, "frame_%06ld.ppm", k);
      imaging::write_image(observer->dump_dir / name, frame);
      if (auto ov = driver.overlay()) {
        std::snprintf(name, sizeof name, "overlay_%06ld.ppm", k);
        imaging::write_image(observer->dump_dir / name, *ov);
      }
    }

    const LaneMetrics lm = lane_metrics(track, pose, params.exit_margin);
    if (metrics.tiles_traversed == 0 && metrics.distance > 0.0) {
      metrics.tiles_traversed = 1;
    }
    if (lm.tile_index && *lm.tile_index != current_tile) {
      current_tile = *lm.tile_index;
      ++metrics.tiles_traversed;
    }
    metrics.steps = static_cast<int>(k + 1);
    metrics.survival = static_cast<double>(k + 1) / params.frame_rate;

    if (observer && observer->on_step) {
      StepRecord rec;
      rec.step = static_cast<int>(k);
      rec.t = metrics.survival;
      rec.pose = pose;
      rec.offset = lm.lateral_offset;
      rec.tile = lm.tile_index;
      rec.in_lane = lm.in_lane;
      rec.angle = out.angle;
      rec.steering = applied.steering;
      rec.direction = out.direction;
      observer->on_step(rec);
    }
    if (!lm.in_lane) {
      metrics.lane_exit = true;
      metrics.exit_tile = lm.tile_index ? *lm.tile_index : current_tile;
      break;
    }
  }
  return metrics;
}

std::string format_pose_log_line(const StepRecord& r) {
  char buf[160];
  char tile[16] = "NA";
  if (r.tile) std::snprintf(tile, sizeof tile, "%d", *r.tile);
  std::snprintf(buf, sizeof buf, "%d,%.4f,%.6f,%.6f,%.6f,%.6f,%s,%d", r.step,
                r.t, r.pose.x, r.pose.y, r.pose.theta, r.offset, tile,
                r.in_lane ? 1 : 0);
  return buf;
}

}  // namespace lanepilot::sim
