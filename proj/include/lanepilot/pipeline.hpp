#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <string_view>
#include <vector>

#include "lanepilot/actuation.hpp"
#include "lanepilot/guidance.hpp"
#include "lanepilot/imaging.hpp"
#include "lanepilot/lines.hpp"

namespace lanepilot {

// Tunables of the perception chain: crop, grayscale, band threshold,
// blur, Canny, Hough, guide aggregation.
struct PerceptionParams {
  int threshold_lo = 180;
  int threshold_hi = 245;
  int blur_radius = 2;
  double blur_sigma = 1.4;
  int canny_low = 50;
  int canny_high = 150;
  double rho_res = 1.0;
  double theta_res = 1.0;
  lines::SegmentParams segments;
  lines::GuideParams guides;
  double lookahead_fraction = 0.25;  // of the cropped height, from its top

  friend bool operator==(const PerceptionParams&,
                         const PerceptionParams&) = default;
};

struct DriveParams {
  double cruise_speed = 0.22;  // m/s
  double wheelbase = 0.1;      // m
  double v_max = 0.5;          // m/s
  // Closed-loop tuned; a derivative term destabilizes the 30 Hz loop.
  double pid_kp = 0.013;
  double pid_ki = 0.0;
  double pid_kd = 0.0;
  double pid_integral_limit = 50.0;

  friend bool operator==(const DriveParams&, const DriveParams&) = default;
};

enum class Stage : std::size_t {
  kPreprocess,
  kBlur,
  kCanny,
  kHough,
  kAggregate,
  kGuidance,
  kPid,
  kCount,
};

std::string_view stage_name(Stage stage);

using StageTimings =
    std::array<std::chrono::nanoseconds, static_cast<std::size_t>(Stage::kCount)>;

struct Perception {
  imaging::Frame cropped;  // RGB bottom half, kept for overlays
  std::vector<lines::Segment> segments;
  std::optional<lines::GuidePair> guides;
  std::optional<double> angle;  // degrees; absent when no lane was found
  double lookahead_row = 0.0;
};

// Runs the image-processing procedure on one RGB frame.
Perception perceive(const imaging::Frame& rgb, const PerceptionParams& params,
                    StageTimings* timings = nullptr);

// Everything downstream of the camera for one vehicle: perception, the
// direction memory and the PID/wheel mapping. One instance per episode.
class LaneFollower {
 public:
  LaneFollower(PerceptionParams perception, guidance::GuidanceParams guidance,
               DriveParams drive);

  struct Decision {
    std::optional<double> angle;
    guidance::SteeringCommand steering;
    int direction = 0;
  };

  // Perception plus control logic; updates the direction memory.
  Decision decide(const imaging::Frame& rgb, StageTimings* timings = nullptr);

  // Control logic for a frame that could not be processed.
  Decision decide_without_frame();

  // PID on -steering, then the wheel split at cruise speed.
  actuation::WheelCommand actuate(double steering_deg, double dt,
                                  StageTimings* timings = nullptr);

  const Perception& last_perception() const { return last_; }
  const guidance::ControllerState& state() const { return state_; }

 private:
  PerceptionParams perception_;
  guidance::GuidanceParams guidance_;
  DriveParams drive_;
  guidance::ControllerState state_;
  actuation::PidController pid_;
  Perception last_;
};

actuation::PidController make_pid(const DriveParams& drive);

}  // namespace lanepilot
