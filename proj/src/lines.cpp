#include "lanepilot/lines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lanepilot/errors.hpp"

namespace lanepilot::lines {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Pixel {
  int x;
  int y;
};

std::vector<Pixel> collect_edges(const imaging::BinaryMask& edges) {
  std::vector<Pixel> pixels;
  for (int y = 0; y < edges.height(); ++y) {
    for (int x = 0; x < edges.width(); ++x) {
      if (edges.test(x, y)) pixels.push_back({x, y});
    }
  }
  return pixels;
}

// Total-least-squares fit through pixel centers, returning the segment
// spanned by projecting the first and last pixel (in walk order) onto it.
std::optional<Segment> fit_run(std::span<const Pixel> run) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : run) {
    mx += p.x + 0.5;
    my += p.y + 0.5;
  }
  mx /= static_cast<double>(run.size());
  my /= static_cast<double>(run.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : run) {
    const double dx = p.x + 0.5 - mx;
    const double dy = p.y + 0.5 - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx + syy == 0.0) return std::nullopt;
  const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double ux = std::cos(phi);
  const double uy = std::sin(phi);
  auto project = [&](const Pixel& p, double& ox, double& oy) {
    const double t = (p.x + 0.5 - mx) * ux + (p.y + 0.5 - my) * uy;
    ox = mx + t * ux;
    oy = my + t * uy;
  };
  Segment s;
  project(run.front(), s.x1, s.y1);
  project(run.back(), s.x2, s.y2);
  return s;
}

}  // namespace

double HoughAccumulator::theta_radians(int theta_index) const {
  return theta_index * theta_resolution * kDegToRad;
}

long long HoughAccumulator::total_votes() const {
  long long total = 0;
  for (int v : votes) total += v;
  return total;
}

HoughAccumulator hough_accumulate(const imaging::BinaryMask& edges,
                                  double rho_res, double theta_res) {
  if (!(rho_res > 0.0)) {
    throw ContractViolation("hough_accumulate: rho_res must be positive");
  }
  if (!(theta_res > 0.0)) {
    throw ContractViolation("hough_accumulate: theta_res must be positive");
  }
  const double bins = 180.0 / theta_res;
  const long theta_bins = std::lround(bins);
  if (theta_bins < 1 || std::abs(bins - theta_bins) > 1e-9) {
    throw ContractViolation("hough_accumulate: theta_res must divide 180");
  }

  HoughAccumulator acc;
  acc.rho_resolution = rho_res;
  acc.theta_resolution = theta_res;
  acc.theta_bins = static_cast<int>(theta_bins);
  acc.x_origin = 0.5 * (edges.width() - 1);
  const double diag = std::hypot(edges.width(), edges.height());
  acc.rho_offset = static_cast<int>(std::ceil(diag / rho_res));
  acc.rho_bins = 2 * acc.rho_offset + 1;
  acc.votes.assign(static_cast<std::size_t>(acc.rho_bins) * acc.theta_bins, 0);

  std::vector<double> cos_table(acc.theta_bins);
  std::vector<double> sin_table(acc.theta_bins);
  // Bins k and theta_bins - k are mirror images; keep their cosines exact
  // negatives so mirrored pixels round identically.
  for (int k = 0; 2 * k <= acc.theta_bins; ++k) {
    cos_table[k] = std::cos(acc.theta_radians(k)) / rho_res;
    sin_table[k] = std::sin(acc.theta_radians(k)) / rho_res;
    if (k > 0 && k < acc.theta_bins) {
      cos_table[acc.theta_bins - k] = -cos_table[k];
      sin_table[acc.theta_bins - k] = sin_table[k];
    }
  }
  for (int y = 0; y < edges.height(); ++y) {
    for (int x = 0; x < edges.width(); ++x) {
      if (!edges.test(x, y)) continue;
      const double xc = x - acc.x_origin;
      for (int k = 0; k < acc.theta_bins; ++k) {
        const long r =
            std::lround(xc * cos_table[k] + y * sin_table[k]) + acc.rho_offset;
        ++acc.votes[static_cast<std::size_t>(r) * acc.theta_bins + k];
      }
    }
  }
  return acc;
}

std::vector<Peak> find_peaks(const HoughAccumulator& acc, int vote_min) {
  std::vector<Peak> peaks;
  for (int r = 0; r < acc.rho_bins; ++r) {
    for (int t = 0; t < acc.theta_bins; ++t) {
      const int v = acc.at(r, t);
      if (v < vote_min || v == 0) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dt = -1; dt <= 1; ++dt) {
          if (dr == 0 && dt == 0) continue;
          int rr = r + dr;
          int tt = t + dt;
          if (tt < 0 || tt >= acc.theta_bins) {
            // theta and theta + 180 describe the same line with rho negated
            tt = (tt + acc.theta_bins) % acc.theta_bins;
            rr = acc.rho_bins - 1 - rr;
          }
          if (rr < 0 || rr >= acc.rho_bins) continue;
          if (acc.at(rr, tt) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({r, t, v});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.votes > b.votes; });
  return peaks;
}

std::vector<Segment> extract_segments(const imaging::BinaryMask& edges,
                                      const HoughAccumulator& acc,
                                      const SegmentParams& params) {
  if (params.vote_min <= 0 || !(params.min_len > 0.0) ||
      !(params.max_gap > 0.0)) {
    throw ContractViolation("extract_segments: parameters must be positive");
  }
  const std::vector<Pixel> pixels = collect_edges(edges);
  std::vector<char> consumed(pixels.size(), 0);
  std::vector<Segment> segments;

  struct OnLine {
    double t;
    std::size_t index;
  };
  std::vector<OnLine> band;
  std::vector<Pixel> run;
  std::vector<std::size_t> run_indices;

  for (const Peak& peak : find_peaks(acc, params.vote_min)) {
    const double theta = acc.theta_radians(peak.theta_index);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double rho = acc.rho_of(peak.rho_index);

    band.clear();
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      if (consumed[i]) continue;
      const double x = pixels[i].x - acc.x_origin;
      const double y = pixels[i].y;
      if (std::abs(x * c + y * s - rho) <= acc.rho_resolution) {
        band.push_back({-x * s + y * c, i});
      }
    }
    if (band.size() < 2) continue;
    // Row-major input order makes the stable sort deterministic on ties.
    std::stable_sort(band.begin(), band.end(),
                     [](const OnLine& a, const OnLine& b) { return a.t < b.t; });

    auto flush = [&](std::size_t begin, std::size_t end) {
      if (end - begin < 2) return;
      if (band[end - 1].t - band[begin].t < params.min_len) return;
      run.clear();
      run_indices.clear();
      for (std::size_t k = begin; k < end; ++k) {
        run.push_back(pixels[band[k].index]);
        run_indices.push_back(band[k].index);
      }
      const auto seg = fit_run(run);
      if (!seg || seg->length() < params.min_len) return;
      segments.push_back(*seg);
      for (std::size_t idx : run_indices) consumed[idx] = 1;
    };

    std::size_t begin = 0;
    for (std::size_t k = 1; k < band.size(); ++k) {
      if (band[k].t - band[k - 1].t > params.max_gap + 1.0) {
        flush(begin, k);
        begin = k;
      }
    }
    flush(begin, band.size());
  }
  return segments;
}

std::optional<GuidePair> aggregate_guides(std::span<const Segment> segments,
                                          int frame_width, int frame_height,
                                          double lookahead_row,
                                          const GuideParams& params) {
  if (lookahead_row < 0.0 || lookahead_row >= frame_height) {
    throw ContractViolation("aggregate_guides: lookahead row outside frame");
  }
  struct Cluster {
    double weight = 0.0;
    double dx_dy = 0.0;
    double x_at_lookahead = 0.0;
  };
  Cluster left, right;
  const double center = frame_width / 2.0;

  for (const Segment& seg : segments) {
    const double dx = seg.x2 - seg.x1;
    const double dy = seg.y2 - seg.y1;
    const double len = seg.length();
    if (len <= 0.0 || dy == 0.0) continue;
    if (std::abs(dy) < params.slope_min * std::abs(dx)) continue;
    const double dx_dy = dx / dy;
    const double x_at = seg.x1 + dx_dy * (lookahead_row - seg.y1);
    bool is_left;
    if (dx == 0.0) {
      is_left = x_at < center;
    } else {
      is_left = dx_dy < 0.0;  // y down: negative slope
    }
    Cluster& cluster = is_left ? left : right;
    cluster.weight += len;
    cluster.dx_dy += len * dx_dy;
    cluster.x_at_lookahead += len * x_at;
  }

  auto to_line = [&](const Cluster& cl) -> std::optional<GuideLine> {
    if (cl.weight <= 0.0) return std::nullopt;
    GuideLine line;
    line.dx_dy = cl.dx_dy / cl.weight;
    line.x0 = cl.x_at_lookahead / cl.weight - line.dx_dy * lookahead_row;
    return line;
  };

  GuidePair pair;
  pair.left = to_line(left);
  pair.right = to_line(right);
  const double half_lane = 0.5 * params.lane_width_fraction * frame_width;
  if (pair.left && pair.right) {
    pair.guide_x = 0.5 * (pair.left->x_at(lookahead_row) +
                          pair.right->x_at(lookahead_row));
  } else if (pair.left) {
    pair.guide_x = pair.left->x_at(lookahead_row) + half_lane;
  } else if (pair.right) {
    pair.guide_x = pair.right->x_at(lookahead_row) - half_lane;
  } else {
    return std::nullopt;
  }
  return pair;
}

imaging::Frame draw_overlay(const imaging::Frame& frame,
                            std::span<const Segment> segments,
                            const std::optional<GuidePair>& guides,
                            double lookahead_row) {
  imaging::Frame out(frame.width(), frame.height(), 3);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = frame.channels() == 3 ? frame.at(x, y, c)
                                                : frame.at(x, y, 0);
      }
    }
  }
  auto plot = [&](double fx, double fy, std::uint8_t r, std::uint8_t g,
                  std::uint8_t b) {
    const int x = static_cast<int>(std::floor(fx));
    const int y = static_cast<int>(std::floor(fy));
    if (x < 0 || y < 0 || x >= out.width() || y >= out.height()) return;
    out.at(x, y, 0) = r;
    out.at(x, y, 1) = g;
    out.at(x, y, 2) = b;
  };
  for (const Segment& s : segments) {
    const int steps = static_cast<int>(std::ceil(s.length())) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      plot(s.x1 + t * (s.x2 - s.x1), s.y1 + t * (s.y2 - s.y1), 0, 255, 0);
    }
  }
  if (guides) {
    for (const auto& line : {guides->left, guides->right}) {
      if (!line) continue;
      for (int y = 0; y < out.height(); ++y) {
        plot(line->x_at(y + 0.5), y + 0.5, 255, 0, 255);
      }
    }
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        plot(guides->guide_x + dx, lookahead_row + dy, 255, 0, 0);
      }
    }
  }
  return out;
}

}  // namespace lanepilot::lines
