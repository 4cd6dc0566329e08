#include "lanepilot/actuation.hpp"

#include <algorithm>
#include <cmath>

#include "lanepilot/errors.hpp"

namespace lanepilot::actuation {

std::pair<PidController, double> pid_step(const PidController& pid,
                                          double error, double dt) {
  if (!(dt > 0.0)) {
    throw ContractViolation("pid_step: dt must be positive");
  }
  PidController next = pid;
  next.integral = std::clamp(pid.integral + error * dt, -pid.integral_limit,
                             pid.integral_limit);
  const double derivative = (error - pid.prev_error) / dt;
  const double output =
      pid.kp * error + pid.ki * next.integral + pid.kd * derivative;
  next.prev_error = error;
  return {next, output};
}

WheelCommand wheel_speeds(double v, double omega, double wheelbase,
                          double v_max) {
  if (!(wheelbase > 0.0)) {
    throw ContractViolation("wheel_speeds: wheelbase must be positive");
  }
  WheelCommand cmd{v - omega * wheelbase / 2.0, v + omega * wheelbase / 2.0};
  const double peak = std::max(std::abs(cmd.left), std::abs(cmd.right));
  if (peak > v_max) {
    const double scale = v_max / peak;
    cmd.left *= scale;
    cmd.right *= scale;
  }
  return cmd;
}

}  // namespace lanepilot::actuation
