#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "lanepilot/imaging.hpp"

namespace lanepilot::lines {

// Vote counts indexed (rho_index, theta_index). Theta bin k is centered at
// k * theta_resolution degrees; rho bin r at (r - rho_offset) * rho_resolution
// with rho = (x - x_origin) cos(theta) + y sin(theta) in integer pixel
// coordinates. x_origin is the middle column, so a mirrored mask votes into
// exactly the mirrored cells.
struct HoughAccumulator {
  int rho_bins = 0;
  int theta_bins = 0;
  int rho_offset = 0;
  double x_origin = 0.0;
  double rho_resolution = 1.0;
  double theta_resolution = 1.0;
  std::vector<int> votes;  // rho-major

  int at(int rho_index, int theta_index) const {
    return votes[static_cast<std::size_t>(rho_index) * theta_bins +
                 theta_index];
  }
  double rho_of(int rho_index) const {
    return (rho_index - rho_offset) * rho_resolution;
  }
  double theta_radians(int theta_index) const;
  long long total_votes() const;
};

// Sub-pixel segment in pixel-center coordinates (pixel (x, y) sits at
// (x + 0.5, y + 0.5)), so mirroring a frame of width W maps x to W - x.
struct Segment {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double length() const { return std::hypot(x2 - x1, y2 - y1); }
};

// Lane line in image coordinates, stored as x = dx_dy * y + x0 so steep
// lines stay well conditioned.
struct GuideLine {
  double dx_dy = 0.0;
  double x0 = 0.0;

  double x_at(double y) const { return dx_dy * y + x0; }
  // y = slope * x + intercept; infinite for a vertical line.
  double slope() const { return 1.0 / dx_dy; }
  double intercept() const { return -x0 / dx_dy; }
};

struct GuidePair {
  std::optional<GuideLine> left;   // negative image slope
  std::optional<GuideLine> right;  // positive image slope
  double guide_x = 0.0;            // aim point abscissa at the lookahead row
};

struct SegmentParams {
  int vote_min = 20;
  double min_len = 10.0;
  double max_gap = 4.0;

  friend bool operator==(const SegmentParams&, const SegmentParams&) = default;
};

struct GuideParams {
  double slope_min = 0.3;
  // Nominal lane width at the lookahead row, as a fraction of frame width.
  double lane_width_fraction = 0.68;

  friend bool operator==(const GuideParams&, const GuideParams&) = default;
};

HoughAccumulator hough_accumulate(const imaging::BinaryMask& edges,
                                  double rho_res, double theta_res);

// Accumulator cells that are >= vote_min and >= all 8 neighbours (theta
// wraps around, with rho negated), ordered by descending votes, ties by
// ascending (rho_index, theta_index).
struct Peak {
  int rho_index;
  int theta_index;
  int votes;
};
std::vector<Peak> find_peaks(const HoughAccumulator& acc, int vote_min);

std::vector<Segment> extract_segments(const imaging::BinaryMask& edges,
                                      const HoughAccumulator& acc,
                                      const SegmentParams& params);

std::optional<GuidePair> aggregate_guides(std::span<const Segment> segments,
                                          int frame_width, int frame_height,
                                          double lookahead_row,
                                          const GuideParams& params);

// Draws segments (green) and guide lines (magenta) plus the aim point (red)
// onto an RGB copy of the frame.
imaging::Frame draw_overlay(const imaging::Frame& frame,
                            std::span<const Segment> segments,
                            const std::optional<GuidePair>& guides,
                            double lookahead_row);

}  // namespace lanepilot::lines
