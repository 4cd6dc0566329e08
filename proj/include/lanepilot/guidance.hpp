#pragma once

#include <optional>
#include <utility>

#include "lanepilot/lines.hpp"

namespace lanepilot::guidance {

// Direction memory: the last committed turn, plus bookkeeping for recovery.
struct ControllerState {
  int direction = 0;  // -1 left, 0 straight, +1 right
  double last_angle = 0.0;
  int frames_without_lane = 0;

  friend bool operator==(const ControllerState&,
                         const ControllerState&) = default;
};

struct SteeringCommand {
  double angle = 0.0;  // degrees, positive steers right
};

struct GuidanceParams {
  double deadband_deg = 5.0;
  double recovery_angle_deg = 25.0;
  double max_steer_deg = 30.0;
  int give_up_frames = 0;  // 0: keep recovering indefinitely

  friend bool operator==(const GuidanceParams&,
                         const GuidanceParams&) = default;
};

// Angle from the bottom-center of the frame to the aim point, in degrees;
// positive when the aim point is right of center.
double deviation_angle(const lines::GuidePair& guides, int frame_width,
                       int frame_height, double lookahead_row);

std::pair<ControllerState, SteeringCommand> update_state(
    const ControllerState& state, std::optional<double> angle,
    const GuidanceParams& params = {});

}  // namespace lanepilot::guidance
