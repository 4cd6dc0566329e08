#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lanepilot/guidance.hpp"
#include "lanepilot/pipeline.hpp"
#include "lanepilot/sim.hpp"

namespace lanepilot::bench {

// Every tunable of the system. Defaults match the owning modules.
struct BenchConfig {
  PerceptionParams perception;
  guidance::GuidanceParams guidance;
  DriveParams drive;
  sim::CameraModel camera;
  sim::TrackParams track;
  double exit_margin = 0.03;
  double frame_rate = 30.0;
  double episode_cap_s = 60.0;
  int frame_delay = 0;
  std::vector<int> start_tiles{0, 3, 7, 11, 14};
  std::string output_csv;
  std::string dump_frames_dir;
  int jobs = 1;
  long seed = 0;  // reserved; the pipeline is deterministic

  sim::EpisodeParams episode_params() const;

  friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

// Flat `key = value` text with '#' comments. Unknown or repeated keys and
// out-of-range values throw ConfigError.
BenchConfig parse_config(std::string_view text);
BenchConfig load_config(const std::filesystem::path& path);

// Applies one key on top of an existing config (CLI overrides).
void set_value(BenchConfig& config, std::string_view key,
               std::string_view value);
std::string get_value(const BenchConfig& config, std::string_view key);
std::vector<std::string_view> config_keys();

// Complete commented listing; parse_config(dump_config(c)) == c.
std::string dump_config(const BenchConfig& config);

// Checks every field against the owning module's preconditions.
void validate(const BenchConfig& config);

}  // namespace lanepilot::bench
