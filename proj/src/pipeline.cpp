#include "lanepilot/pipeline.hpp"

#include "lanepilot/edges.hpp"

namespace lanepilot {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(StageTimings* timings) : timings_(timings) {}

  void lap(Stage stage) {
    if (!timings_) return;
    const auto now = Clock::now();
    (*timings_)[static_cast<std::size_t>(stage)] += now - start_;
    start_ = now;
  }

 private:
  StageTimings* timings_;
  Clock::time_point start_ = Clock::now();
};

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kPreprocess: return "preprocess";
    case Stage::kBlur: return "blur";
    case Stage::kCanny: return "canny";
    case Stage::kHough: return "hough";
    case Stage::kAggregate: return "aggregate";
    case Stage::kGuidance: return "guidance";
    case Stage::kPid: return "pid";
    case Stage::kCount: break;
  }
  return "?";
}

Perception perceive(const imaging::Frame& rgb, const PerceptionParams& params,
                    StageTimings* timings) {
  StageTimer timer(timings);
  Perception out;
  out.cropped = imaging::crop_bottom_half(rgb);
  const imaging::Frame gray = imaging::to_grayscale(out.cropped);
  const imaging::BinaryMask band =
      imaging::band_threshold(gray, params.threshold_lo, params.threshold_hi);
  const imaging::Frame marking = imaging::apply_mask(gray, band);
  timer.lap(Stage::kPreprocess);

  const imaging::Frame blurred =
      imaging::gaussian_blur(marking, params.blur_radius, params.blur_sigma);
  timer.lap(Stage::kBlur);

  const imaging::BinaryMask edge_map =
      edges::canny(blurred, params.canny_low, params.canny_high);
  timer.lap(Stage::kCanny);

  const lines::HoughAccumulator acc =
      lines::hough_accumulate(edge_map, params.rho_res, params.theta_res);
  out.segments = lines::extract_segments(edge_map, acc, params.segments);
  timer.lap(Stage::kHough);

  const int width = out.cropped.width();
  const int height = out.cropped.height();
  out.lookahead_row = params.lookahead_fraction * height;
  out.guides = lines::aggregate_guides(out.segments, width, height,
                                       out.lookahead_row, params.guides);
  timer.lap(Stage::kAggregate);

  if (out.guides) {
    out.angle = guidance::deviation_angle(*out.guides, width, height,
                                          out.lookahead_row);
  }
  timer.lap(Stage::kGuidance);
  return out;
}

actuation::PidController make_pid(const DriveParams& drive) {
  actuation::PidController pid;
  pid.kp = drive.pid_kp;
  pid.ki = drive.pid_ki;
  pid.kd = drive.pid_kd;
  pid.integral_limit = drive.pid_integral_limit;
  return pid;
}

LaneFollower::LaneFollower(PerceptionParams perception,
                           guidance::GuidanceParams guidance, DriveParams drive)
    : perception_(perception), guidance_(guidance), drive_(drive),
      pid_(make_pid(drive)) {}

LaneFollower::Decision LaneFollower::decide(const imaging::Frame& rgb,
                                            StageTimings* timings) {
  last_ = perceive(rgb, perception_, timings);
  StageTimer timer(timings);
  auto [next, cmd] = guidance::update_state(state_, last_.angle, guidance_);
  state_ = next;
  timer.lap(Stage::kGuidance);
  return {last_.angle, cmd, state_.direction};
}

LaneFollower::Decision LaneFollower::decide_without_frame() {
  last_ = Perception{};
  auto [next, cmd] = guidance::update_state(state_, std::nullopt, guidance_);
  state_ = next;
  return {std::nullopt, cmd, state_.direction};
}

actuation::WheelCommand LaneFollower::actuate(double steering_deg, double dt,
                                              StageTimings* timings) {
  StageTimer timer(timings);
  auto [next, omega] = actuation::pid_step(pid_, -steering_deg, dt);
  pid_ = next;
  const auto wheels = actuation::wheel_speeds(drive_.cruise_speed, omega,
                                              drive_.wheelbase, drive_.v_max);
  timer.lap(Stage::kPid);
  return wheels;
}

}  // namespace lanepilot
