#include "lanepilot/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lanepilot/errors.hpp"

namespace lanepilot::guidance {

double deviation_angle(const lines::GuidePair& guides, int frame_width,
                       int frame_height, double lookahead_row) {
  const double baseline = frame_height - lookahead_row;
  if (!(baseline > 0.0)) {
    throw ContractViolation("deviation_angle: lookahead row must lie above "
                            "the bottom of the frame");
  }
  const double offset = guides.guide_x - frame_width / 2.0;
  return std::atan(offset / baseline) * 180.0 / std::numbers::pi;
}

std::pair<ControllerState, SteeringCommand> update_state(
    const ControllerState& state, std::optional<double> angle,
    const GuidanceParams& params) {
  ControllerState next = state;
  SteeringCommand cmd;
  if (angle) {
    const double a = *angle;
    cmd.angle = std::clamp(a, -params.max_steer_deg, params.max_steer_deg);
    next.direction =
        std::abs(a) > params.deadband_deg ? (a > 0.0 ? 1 : -1) : 0;
    next.last_angle = a;
    next.frames_without_lane = 0;
    return {next, cmd};
  }
  next.frames_without_lane = state.frames_without_lane + 1;
  if (params.give_up_frames > 0 &&
      next.frames_without_lane > params.give_up_frames) {
    cmd.angle = 0.0;
  } else {
    const double recovery =
        std::min(params.recovery_angle_deg, params.max_steer_deg);
    cmd.angle = state.direction * recovery;
  }
  return {next, cmd};
}

}  // namespace lanepilot::guidance
