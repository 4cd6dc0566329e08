#include "lanepilot/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include "lanepilot/errors.hpp"

namespace lanepilot::bench {

namespace {

std::string format_tenths(long tenths) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ld.%ld", tenths / 10, tenths % 10);
  return buf;
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
}

double percentile_ms(std::vector<double> samples, double q) {
  std::sort(samples.begin(), samples.end());
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(samples.size())));
  return samples[std::clamp<std::size_t>(rank, 1, samples.size()) - 1];
}

double median_ms(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

}  // namespace

std::string format_csv(const ScoreTable& table) {
  std::string out = "episode,start_tile,survival_s,tiles\n";
  for (const auto& row : table.rows) {
    out += std::to_string(row.episode) + "," + std::to_string(row.start_tile) +
           "," + format_tenths(row.survival_tenths) + "," +
           std::to_string(row.tiles) + "\n";
  }
  out += "cumulative,," + format_tenths(table.survival_tenths_sum) + "," +
         std::to_string(table.tiles_sum) + "\n";
  return out;
}

std::string format_table(const ScoreTable& table) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %6s  %s\n", "episode",
                "start_tile", "survival_s", "tiles", "score");
  out += buf;
  for (const auto& row : table.rows) {
    const std::string s = format_tenths(row.survival_tenths);
    std::snprintf(buf, sizeof buf, "%-12d %10d %10s %6d  %s/%d%s\n",
                  row.episode, row.start_tile, s.c_str(), row.tiles, s.c_str(),
                  row.tiles,
                  row.metrics.lane_exit ? "  (lane exit)" : "");
    out += buf;
  }
  const std::string total = format_tenths(table.survival_tenths_sum);
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %6d  %s/%d\n", "cumulative",
                "", total.c_str(), table.tiles_sum, total.c_str(),
                table.tiles_sum);
  out += buf;
  return out;
}

sim::RunMetrics run_vision_episode(const BenchConfig& config, int start_tile,
                                   const sim::EpisodeObserver* observer) {
  const sim::Track track = sim::build_default_track(config.track);
  sim::VisionDriver driver(config.perception, config.guidance, config.drive);
  return sim::run_episode(track, start_tile, config.episode_params(), driver,
                          observer);
}

ScoreTable run_benchmark(const BenchConfig& config, int jobs,
                         const std::filesystem::path& dump_dir) {
  validate(config);
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  const sim::Track track = sim::build_default_track(config.track);
  const sim::EpisodeParams params = config.episode_params();
  const std::size_t n = config.start_tiles.size();
  std::vector<EpisodeRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        sim::EpisodeObserver observer;
        std::vector<std::string> pose_log;
        std::vector<std::string> angle_log;
        if (!dump_dir.empty()) {
          observer.dump_dir = dump_dir / ("episode_" + std::to_string(i + 1));
          std::filesystem::create_directories(observer.dump_dir);
          observer.on_step = [&](const sim::StepRecord& r) {
            pose_log.push_back(sim::format_pose_log_line(r));
            angle_log.push_back(format_angle_log_line(r.step, r.angle,
                                                      r.steering, r.direction));
          };
        }
        sim::VisionDriver driver(config.perception, config.guidance,
                                 config.drive);
        const int tile = config.start_tiles[i];
        EpisodeRow row;
        row.episode = static_cast<int>(i + 1);
        row.start_tile = tile;
        row.metrics = sim::run_episode(track, tile, params, driver,
                                       dump_dir.empty() ? nullptr : &observer);
        row.survival_tenths = std::lround(row.metrics.survival * 10.0);
        row.tiles = row.metrics.tiles_traversed;
        if (!dump_dir.empty()) {
          pose_log.insert(pose_log.begin(), "step,t,x,y,theta,offset,tile,in_lane");
          write_lines(observer.dump_dir / "pose_log.csv", pose_log);
          write_lines(observer.dump_dir / "angle_log.csv", angle_log);
        }
        rows[i] = std::move(row);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int threads = std::min<int>(jobs, static_cast<int>(n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ScoreTable table;
  table.rows = std::move(rows);
  for (const auto& row : table.rows) {
    table.survival_tenths_sum += row.survival_tenths;
    table.tiles_sum += row.tiles;
  }
  return table;
}

std::string format_angle_log_line(int frame_index, std::optional<double> angle,
                                  double steering, int direction) {
  char angle_buf[32] = "NA";
  if (angle) std::snprintf(angle_buf, sizeof angle_buf, "%.3f", *angle);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d,%s,%.3f,%d", frame_index, angle_buf,
                steering, direction);
  return buf;
}

ProcessSummary process_frames(const BenchConfig& config,
                              const std::filesystem::path& input_dir,
                              const std::filesystem::path& overlay_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(input_dir, ec)) {
    throw IoError("input directory " + input_dir.string() + " not found");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  if (!overlay_dir.empty()) fs::create_directories(overlay_dir);

  LaneFollower follower(config.perception, config.guidance, config.drive);
  ProcessSummary summary;
  char name[32];
  for (std::size_t i = 0; i < files.size(); ++i) {
    const int index = static_cast<int>(i);
    ++summary.frames;
    std::optional<imaging::Frame> frame;
    try {
      frame = imaging::read_image(files[i]);
      if (frame->channels() != 3 || frame->height() < 2) {
        throw ParseError(ParseErrorKind::kMalformedHeader,
                         "expected an RGB frame");
      }
    } catch (const Error&) {
      frame.reset();
    }
    if (!frame) {
      ++summary.failures;
      const auto d = follower.decide_without_frame();
      summary.log_lines.push_back(format_angle_log_line(
          index, std::nullopt, d.steering.angle, d.direction));
      continue;
    }
    const auto d = follower.decide(*frame);
    summary.log_lines.push_back(
        format_angle_log_line(index, d.angle, d.steering.angle, d.direction));
    if (!overlay_dir.empty()) {
      const Perception& p = follower.last_perception();
      std::snprintf(name, sizeof name, "overlay_%06d.ppm", index);
      imaging::write_image(overlay_dir / name,
                           lines::draw_overlay(p.cropped, p.segments, p.guides,
                                               p.lookahead_row));
    }
  }
  return summary;
}

ProfileReport profile_pipeline(const BenchConfig& config, int iterations) {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  validate(config);
  using Clock = std::chrono::steady_clock;
  const sim::Track track = sim::build_default_track(config.track);
  const sim::Pose pose = sim::lane_start_pose(track, config.start_tiles.front());
  const imaging::Frame frame = sim::render_frame(track, pose, config.camera);

  LaneFollower follower(config.perception, config.guidance, config.drive);
  const double dt = 1.0 / config.frame_rate;
  constexpr std::size_t kStages = static_cast<std::size_t>(Stage::kCount);
  std::vector<std::vector<double>> stage_ms(kStages);
  std::vector<double> total_ms;

  auto to_ms = [](auto d) {
    return std::chrono::duration<double, std::milli>(d).count();
  };
  for (int i = 0; i < iterations; ++i) {
    StageTimings timings{};
    const auto start = Clock::now();
    const auto decision = follower.decide(frame, &timings);
    follower.actuate(decision.steering.angle, dt, &timings);
    total_ms.push_back(to_ms(Clock::now() - start));
    for (std::size_t s = 0; s < kStages; ++s) {
      stage_ms[s].push_back(to_ms(timings[s]));
    }
  }

  ProfileReport report;
  report.iterations = iterations;
  report.width = frame.width();
  report.height = frame.height();
  for (std::size_t s = 0; s < kStages; ++s) {
    report.stages.push_back({std::string(stage_name(static_cast<Stage>(s))),
                             median_ms(stage_ms[s]),
                             percentile_ms(stage_ms[s], 0.95)});
  }
  report.end_to_end_median_ms = median_ms(total_ms);
  report.end_to_end_p95_ms = percentile_ms(total_ms, 0.95);
  report.frames_per_second = report.end_to_end_median_ms > 0.0
                                 ? 1000.0 / report.end_to_end_median_ms
                                 : 0.0;
  return report;
}

std::string format_profile(const ProfileReport& r) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "profile: %d iterations at %dx%d\n",
                r.iterations, r.width, r.height);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-12s %12s %12s\n", "stage", "median_ms",
                "p95_ms");
  out += buf;
  for (const auto& s : r.stages) {
    std::snprintf(buf, sizeof buf, "%-12s %12.4f %12.4f\n", s.name.c_str(),
                  s.median_ms, s.p95_ms);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-12s %12.4f %12.4f\n", "end_to_end",
                r.end_to_end_median_ms, r.end_to_end_p95_ms);
  out += buf;
  std::snprintf(buf, sizeof buf, "frames_per_second %.1f\n",
                r.frames_per_second);
  out += buf;
  return out;
}

}  // namespace lanepilot::bench
