// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "lanepilot/bench.hpp"
#include "lanepilot/edges.hpp"
#include "lanepilot/imaging.hpp"
#include "lanepilot/lines.hpp"
#include "lanepilot/pipeline.hpp"
#include "lanepilot/sim.hpp"
#include "oracles.hpp"

using namespace lanepilot;
namespace fs = std::filesystem;

#ifndef LANE_PILOT_CLI
#define LANE_PILOT_CLI "lane-pilot"
#endif

namespace {

constexpr double kPi = std::numbers::pi;

struct Result {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Result cv_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(2024);
  int blur_bad = 0, canny_bad = 0;
  for (int i = 0; i < 200; ++i) {
    const imaging::Frame img = oracle::random_gray(rng, 16, 16);
    const imaging::Frame got = imaging::gaussian_blur(img, 2, 1.4);
    const imaging::Frame want = oracle::blur_2d(img, 2, 1.4);
    for (std::size_t k = 0; k < got.data().size(); ++k) {
      if (std::abs(int(got.data()[k]) - int(want.data()[k])) > 1) {
        ++blur_bad;
        break;
      }
    }
  }
  for (int i = 0; i < 200; ++i) {
    imaging::Frame img = oracle::random_blocks(rng, 64, 64);
    if (i % 2) img = imaging::gaussian_blur(img, 2, 1.4);
    if (!(edges::canny(img, 50, 150) == oracle::canny(img, 50, 150))) ++canny_bad;
  }
  const double secs = seconds_since(t0);
  return {blur_bad == 0 && canny_bad == 0 && secs < 30.0,
          fmt("blur mismatches %d/200, canny mismatches %d/200, %.2f s", blur_bad,
              canny_bad, secs)};
}

Result hough_recovery() {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> th(0.0, 180.0), jit(-1.0, 1.0);
  int hits = 0;
  for (int i = 0; i < 100; ++i) {
    imaging::BinaryMask m(160, 120);
    std::uniform_real_distribution<double> cx(48.0, 112.0), cy(36.0, 84.0);
    const double theta = th(rng), t = theta * kPi / 180.0;
    const double px = cx(rng), py = cy(rng);
    const double rho = (px - 79.5) * std::cos(t) + py * std::sin(t);  // middle column origin
    for (double s = -400; s <= 400; s += 0.7) {
      const double j = jit(rng);
      const int x = static_cast<int>(std::lround(px - s * std::sin(t) + j * std::cos(t)));
      const int y = static_cast<int>(std::lround(py + s * std::cos(t) + j * std::sin(t)));
      if (x >= 0 && y >= 0 && x < 160 && y < 120) m.set(x, y);
    }
    const auto acc = lines::hough_accumulate(m, 1.0, 1.0);
    const auto peaks = lines::find_peaks(acc, 1);
    if (peaks.empty()) continue;
    double dt = std::abs(peaks[0].theta_index * acc.theta_resolution - theta);
    double dr = std::abs(acc.rho_of(peaks[0].rho_index) - rho);
    if (dt > 90.0) {
      dt = 180.0 - dt;
      dr = std::abs(acc.rho_of(peaks[0].rho_index) + rho);
    }
    hits += dt <= 2.0 && dr <= 2.0;
  }
  return {hits >= 95, fmt("%d/100 lines recovered", hits)};
}

Result mirror_antisymmetry() {
  const sim::Track track = sim::build_default_track();
  const sim::CameraModel camera;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> s(0.0, track.loop_length());
  std::uniform_real_distribution<double> off(-0.04, 0.04), head(-0.25, 0.25);
  double worst = 0.0;
  int detected = 0;
  for (int i = 0; i < 50; ++i) {
    const sim::Pose c = track.point_at(s(rng));
    const double o = off(rng);
    // offset > 0 is left of the travel direction
    const sim::Pose p{c.x - o * std::sin(c.theta), c.y + o * std::cos(c.theta),
                      sim::normalize_angle(c.theta + head(rng))};
    const imaging::Frame frame = sim::render_frame(track, p, camera);
    LaneFollower a({}, {}, {}), b({}, {}, {});
    const auto da = a.decide(frame);
    const auto db = b.decide(imaging::mirror_horizontal(frame));
    detected += da.angle.has_value();
    worst = std::max(worst, std::abs(da.steering.angle + db.steering.angle));
  }
  return {worst <= 0.5, fmt("max |s + s_mirror| = %.4f deg, lane seen in %d/50", worst,
                            detected)};
}

Result kinematics_exact() {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> w(-0.5, 0.5), th(-kPi, kPi);
  std::uniform_int_distribution<int> steps(1, 300);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const sim::Pose p{w(rng), w(rng), th(rng)};
    const double l = w(rng), r = w(rng);
    const int n = steps(rng);
    sim::Pose q = p;
    for (int k = 0; k < n; ++k) q = sim::step_kinematics(q, {l, r}, 0.1, 1.0 / 30);
    const double t = n / 30.0, v = 0.5 * (l + r), om = (r - l) / 0.1;
    double ex, ey;
    if (std::abs(om) < 1e-12) {
      ex = p.x + v * t * std::cos(p.theta);
      ey = p.y + v * t * std::sin(p.theta);
    } else {
      const double R = v / om, th1 = p.theta + om * t;
      ex = p.x + R * (std::sin(th1) - std::sin(p.theta));
      ey = p.y - R * (std::cos(th1) - std::cos(p.theta));
    }
    worst = std::max(worst, std::hypot(q.x - ex, q.y - ey));
  }
  return {worst <= 1e-9, fmt("max position error %.3g m over 1000 commands", worst)};
}

Result oracle_survives() {
  const bench::BenchConfig config;
  const sim::Track track = sim::build_default_track(config.track);
  sim::EpisodeParams p;
  p.drive = config.drive;
  p.camera = config.camera;
  std::string detail;
  bool ok = true;
  for (int tile : config.start_tiles) {
    sim::OracleDriver driver;
    const auto m = sim::run_episode(track, tile, p, driver);
    ok = ok && !m.lane_exit && m.survival >= 60.0 - 1e-9;
    detail += fmt("%s%d:%.1f", detail.empty() ? "" : " ", tile, m.survival);
  }
  return {ok, "tile:survival " + detail};
}

struct DelayStats {
  bench::ScoreTable table;
  int curve_exits = 0;
  int straight_exits = 0;
};

DelayStats run_with_delay(int delay) {
  bench::BenchConfig config;
  config.frame_delay = delay;
  DelayStats s;
  s.table = bench::run_benchmark(config);
  const sim::Track track = sim::build_default_track(config.track);
  for (const auto& r : s.table.rows) {
    if (!r.metrics.lane_exit || !r.metrics.exit_tile) continue;
    (sim::is_curve(track.tiles[*r.metrics.exit_tile].kind) ? s.curve_exits : s.straight_exits)++;
  }
  return s;
}

Result parity(const DelayStats& d0, double secs) {
  const auto& t = d0.table;
  return {t.tiles_sum >= 12 && t.survival_sum_s() >= 37.0 && secs < 300.0,
          fmt("cumulative %.1f s / %d tiles in %.1f s wall", t.survival_sum_s(), t.tiles_sum,
              secs)};
}

Result performance() {
  const auto r = bench::profile_pipeline({}, 300);
  return {r.frames_per_second >= 30.0,
          fmt("%.1f frames/s at %dx%d", r.frames_per_second, r.width, r.height)};
}

Result failure_mode(const DelayStats& d0, const DelayStats& d6) {
  const bool drops = d6.table.survival_tenths_sum < d0.table.survival_tenths_sum;
  const bool curves = d6.curve_exits > 0 && d6.curve_exits > d6.straight_exits;
  return {drops && curves,
          fmt("d0 %.1f s, d6 %.1f s; d6 exits: %d curve, %d straight",
              d0.table.survival_sum_s(), d6.table.survival_sum_s(), d6.curve_exits,
              d6.straight_exits)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result determinism() {
  const fs::path dir = fs::temp_directory_path() / "lp_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path a = dir / "a.csv", b = dir / "b.csv";
  const std::string cli = LANE_PILOT_CLI;
  const auto run = [&](const fs::path& out, int jobs) {
    const std::string cmd = "\"" + cli + "\" run --out \"" + out.string() + "\" --jobs " +
                            std::to_string(jobs) + " > /dev/null";
    return std::system(cmd.c_str());
  };
  const int ra = run(a, 1), rb = run(b, 2);
  const std::string ca = slurp(a), cb = slurp(b);
  fs::remove_all(dir);
  return {ra == 0 && rb == 0 && !ca.empty() && ca == cb,
          fmt("exit codes %d/%d, %zu and %zu bytes, %s", ra, rb, ca.size(), cb.size(),
              ca == cb ? "identical" : "different")};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int n, const char* name, const Result& r) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name
              << "): " << r.detail << std::endl;
    failures += !r.pass;
  };
  const auto guarded = [](const std::function<Result()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Result{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "cv oracle equivalence", guarded(cv_oracles));
  report(2, "hough recovery", guarded(hough_recovery));
  report(3, "mirror antisymmetry", guarded(mirror_antisymmetry));
  report(4, "kinematics exactness", guarded(kinematics_exact));
  report(5, "oracle closed loop", guarded(oracle_survives));

  DelayStats d0, d6;
  double d0_secs = 0.0;
  const Result bench_run = guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    d0 = run_with_delay(0);
    d0_secs = seconds_since(t0);
    d6 = run_with_delay(6);
    return Result{true, ""};
  });
  report(6, "closed-loop parity", bench_run.pass ? parity(d0, d0_secs) : bench_run);
  report(7, "performance", guarded(performance));
  report(8, "delayed-response failure mode",
         bench_run.pass ? failure_mode(d0, d6) : bench_run);
  report(9, "determinism", guarded(determinism));

  std::cout << (failures ? "FAILED " : "ALL PASSED ") << 9 - failures << "/9" << std::endl;
  return failures ? 1 : 0;
}
