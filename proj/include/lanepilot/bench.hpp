#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lanepilot/config.hpp"
#include "lanepilot/sim.hpp"

namespace lanepilot::bench {

struct EpisodeRow {
  int episode = 0;  // 1-based
  int start_tile = 0;
  // Survival in tenths of a second, the reported precision.
  long survival_tenths = 0;
  int tiles = 0;
  sim::RunMetrics metrics;  // unrounded episode result

  double survival_s() const { return survival_tenths / 10.0; }
};

struct ScoreTable {
  std::vector<EpisodeRow> rows;
  long survival_tenths_sum = 0;
  int tiles_sum = 0;

  double survival_sum_s() const { return survival_tenths_sum / 10.0; }
};

// The CSV written by `run`; cumulative row last.
std::string format_csv(const ScoreTable& table);
// Human-readable table with `survival/tiles` score pairs.
std::string format_table(const ScoreTable& table);

// One episode per configured start tile, vision-driven. Episodes run on up
// to `jobs` threads; rows stay in configuration order. When dump_dir is
// non-empty each episode writes frames, overlays and logs into
// dump_dir/episode_<n>/.
ScoreTable run_benchmark(const BenchConfig& config, int jobs = 1,
                         const std::filesystem::path& dump_dir = {});

// Single episode with the configured vision pipeline.
sim::RunMetrics run_vision_episode(const BenchConfig& config, int start_tile,
                                   const sim::EpisodeObserver* observer = nullptr);

struct ProcessSummary {
  int frames = 0;
  int failures = 0;
  std::vector<std::string> log_lines;
};

// Processes the *.ppm files of input_dir in lexicographic order, carrying the
// direction memory across frames. Unreadable frames log NA and count as
// failures. Overlays go to overlay_dir when it is non-empty.
ProcessSummary process_frames(const BenchConfig& config,
                              const std::filesystem::path& input_dir,
                              const std::filesystem::path& overlay_dir = {});

std::string format_angle_log_line(int frame_index, std::optional<double> angle,
                                  double steering, int direction);

struct StageStats {
  std::string name;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct ProfileReport {
  int iterations = 0;
  int width = 0;
  int height = 0;
  std::vector<StageStats> stages;
  double end_to_end_median_ms = 0.0;
  double end_to_end_p95_ms = 0.0;
  double frames_per_second = 0.0;  // from the end-to-end median
};

ProfileReport profile_pipeline(const BenchConfig& config, int iterations);
std::string format_profile(const ProfileReport& report);

}  // namespace lanepilot::bench
