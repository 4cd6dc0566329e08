#pragma once

#include <utility>

namespace lanepilot::actuation {

// PID on the steering error (degrees), producing a yaw-rate demand (rad/s).
struct PidController {
  double kp = 0.05;
  double ki = 0.0;
  double kd = 0.01;
  double integral_limit = 50.0;  // degree-seconds
  double integral = 0.0;
  double prev_error = 0.0;
};

struct WheelCommand {
  double left = 0.0;   // m/s
  double right = 0.0;  // m/s
};

std::pair<PidController, double> pid_step(const PidController& pid,
                                          double error, double dt);

// Differential drive split. If either wheel would exceed v_max both are
// scaled by the same factor, which keeps the turning radius.
WheelCommand wheel_speeds(double v, double omega, double wheelbase,
                          double v_max = 0.5);

}  // namespace lanepilot::actuation
