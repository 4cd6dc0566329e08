#include "lanepilot/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lanepilot/errors.hpp"

namespace lanepilot::bench {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const char* expected) {
  throw ConfigError("key '" + std::string(key) + "': '" + std::string(value) +
                    "' is not " + expected);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    bad_value(key, value, std::is_integral_v<T> ? "an integer" : "a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) bad_value(key, value, "a finite number");
  }
  return out;
}

template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "a boolean");
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(parse_number<int>(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

struct Field {
  std::string_view key;
  std::string_view section;  // a non-empty section starts a new block in dumps
  std::function<std::string(const BenchConfig&)> get;
  std::function<void(BenchConfig&, std::string_view)> set;
};

template <typename T>
Field number(std::string_view key, std::string_view section,
             T BenchConfig::*outer) {
  return {key, section,
          [outer](const BenchConfig& c) { return format_number(c.*outer); },
          [outer, key](BenchConfig& c, std::string_view v) {
            c.*outer = parse_number<T>(key, v);
          }};
}

// Accessor-based variant for nested members.
template <typename T, typename Access>
Field nested(std::string_view key, std::string_view section, Access access) {
  return {key, section,
          [access](const BenchConfig& c) {
            return format_number(access(const_cast<BenchConfig&>(c)));
          },
          [access, key](BenchConfig& c, std::string_view v) {
            access(c) = parse_number<T>(key, v);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using C = BenchConfig;
    std::vector<Field> f;
    f.push_back(nested<int>("threshold_lo", "imaging",
                            [](C& c) -> int& { return c.perception.threshold_lo; }));
    f.push_back(nested<int>("threshold_hi", "",
                            [](C& c) -> int& { return c.perception.threshold_hi; }));
    f.push_back(nested<int>("blur_radius", "",
                            [](C& c) -> int& { return c.perception.blur_radius; }));
    f.push_back(nested<double>("blur_sigma", "",
                               [](C& c) -> double& { return c.perception.blur_sigma; }));
    f.push_back(nested<int>("canny_low", "edges",
                            [](C& c) -> int& { return c.perception.canny_low; }));
    f.push_back(nested<int>("canny_high", "",
                            [](C& c) -> int& { return c.perception.canny_high; }));
    f.push_back(nested<double>("hough_rho_res", "lines",
                               [](C& c) -> double& { return c.perception.rho_res; }));
    f.push_back(nested<double>("hough_theta_res", "",
                               [](C& c) -> double& { return c.perception.theta_res; }));
    f.push_back(nested<int>("hough_vote_min", "",
                            [](C& c) -> int& { return c.perception.segments.vote_min; }));
    f.push_back(nested<double>("segment_min_len", "",
                               [](C& c) -> double& { return c.perception.segments.min_len; }));
    f.push_back(nested<double>("segment_max_gap", "",
                               [](C& c) -> double& { return c.perception.segments.max_gap; }));
    f.push_back(nested<double>("guide_slope_min", "",
                               [](C& c) -> double& { return c.perception.guides.slope_min; }));
    f.push_back(nested<double>(
        "guide_lane_width_fraction", "",
        [](C& c) -> double& { return c.perception.guides.lane_width_fraction; }));
    f.push_back(nested<double>("lookahead_fraction", "",
                               [](C& c) -> double& { return c.perception.lookahead_fraction; }));
    f.push_back(nested<double>("deadband_deg", "guidance",
                               [](C& c) -> double& { return c.guidance.deadband_deg; }));
    f.push_back(nested<double>("recovery_angle_deg", "",
                               [](C& c) -> double& { return c.guidance.recovery_angle_deg; }));
    f.push_back(nested<double>("max_steer_deg", "",
                               [](C& c) -> double& { return c.guidance.max_steer_deg; }));
    f.push_back(nested<int>("give_up_frames", "",
                            [](C& c) -> int& { return c.guidance.give_up_frames; }));
    f.push_back(nested<double>("pid_kp", "actuation",
                               [](C& c) -> double& { return c.drive.pid_kp; }));
    f.push_back(nested<double>("pid_ki", "",
                               [](C& c) -> double& { return c.drive.pid_ki; }));
    f.push_back(nested<double>("pid_kd", "",
                               [](C& c) -> double& { return c.drive.pid_kd; }));
    f.push_back(nested<double>("pid_integral_limit", "",
                               [](C& c) -> double& { return c.drive.pid_integral_limit; }));
    f.push_back(nested<double>("cruise_speed", "",
                               [](C& c) -> double& { return c.drive.cruise_speed; }));
    f.push_back(nested<double>("wheelbase", "",
                               [](C& c) -> double& { return c.drive.wheelbase; }));
    f.push_back(nested<double>("v_max", "",
                               [](C& c) -> double& { return c.drive.v_max; }));
    f.push_back(nested<double>("camera_height", "camera",
                               [](C& c) -> double& { return c.camera.height; }));
    f.push_back(nested<double>("camera_pitch", "",
                               [](C& c) -> double& { return c.camera.pitch; }));
    f.push_back(nested<double>("camera_fov", "",
                               [](C& c) -> double& { return c.camera.fov; }));
    f.push_back(nested<int>("image_width", "",
                            [](C& c) -> int& { return c.camera.width; }));
    f.push_back(nested<int>("image_height", "",
                            [](C& c) -> int& { return c.camera.height_px; }));
    f.push_back(nested<double>("tile_size", "track",
                               [](C& c) -> double& { return c.track.tile_size; }));
    f.push_back(nested<double>("lane_width", "",
                               [](C& c) -> double& { return c.track.lane_width; }));
    f.push_back({"track_mirrored", "",
                 [](const C& c) { return std::string(c.track.mirrored ? "true" : "false"); },
                 [](C& c, std::string_view v) {
                   c.track.mirrored = parse_bool("track_mirrored", v);
                 }});
    f.push_back(number("exit_margin", "", &C::exit_margin));
    f.push_back(number("frame_rate", "episode", &C::frame_rate));
    f.push_back(number("episode_cap_s", "", &C::episode_cap_s));
    f.push_back(number("frame_delay", "", &C::frame_delay));
    f.push_back({"start_tiles", "",
                 [](const C& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.start_tiles.size(); ++i) {
                     if (i) out += ',';
                     out += std::to_string(c.start_tiles[i]);
                   }
                   return out;
                 },
                 [](C& c, std::string_view v) {
                   c.start_tiles = parse_int_list("start_tiles", v);
                 }});
    f.push_back(number("jobs", "run", &C::jobs));
    f.push_back(number("seed", "", &C::seed));
    f.push_back({"output_csv", "",
                 [](const C& c) { return c.output_csv; },
                 [](C& c, std::string_view v) { c.output_csv = std::string(v); }});
    f.push_back({"dump_frames_dir", "",
                 [](const C& c) { return c.dump_frames_dir; },
                 [](C& c, std::string_view v) { c.dump_frames_dir = std::string(v); }});
    return f;
  }();
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

sim::EpisodeParams BenchConfig::episode_params() const {
  sim::EpisodeParams p;
  p.frame_rate = frame_rate;
  p.cap_seconds = episode_cap_s;
  p.frame_delay = frame_delay;
  p.exit_margin = exit_margin;
  p.drive = drive;
  p.camera = camera;
  return p;
}

void set_value(BenchConfig& config, std::string_view key,
               std::string_view value) {
  find_field(key).set(config, trim(value));
}

std::string get_value(const BenchConfig& config, std::string_view key) {
  return find_field(key).get(config);
}

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

BenchConfig parse_config(std::string_view text) {
  BenchConfig config;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                        std::string(key) + "'");
    }
    set_value(config, key, line.substr(eq + 1));
  }
  validate(config);
  return config;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const BenchConfig& config) {
  std::string out = "# lane-pilot configuration\n";
  for (const auto& f : fields()) {
    if (!f.section.empty()) {
      out += "\n# ";
      out += f.section;
      out += '\n';
    }
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

void validate(const BenchConfig& c) {
  const auto& p = c.perception;
  require(p.threshold_lo >= 0 && p.threshold_hi <= 255 &&
              p.threshold_lo <= p.threshold_hi,
          "threshold band must satisfy 0 <= threshold_lo <= threshold_hi <= 255");
  require(p.blur_radius >= 1, "blur_radius must be >= 1");
  require(p.blur_sigma > 0.0, "blur_sigma must be > 0");
  require(p.canny_low > 0 && p.canny_low <= p.canny_high,
          "canny thresholds must satisfy 0 < canny_low <= canny_high");
  require(p.rho_res > 0.0, "hough_rho_res must be > 0");
  const double bins = 180.0 / p.theta_res;
  require(p.theta_res > 0.0 && std::abs(bins - std::round(bins)) < 1e-9,
          "hough_theta_res must divide 180");
  require(p.segments.vote_min > 0, "hough_vote_min must be > 0");
  require(p.segments.min_len > 0.0, "segment_min_len must be > 0");
  require(p.segments.max_gap > 0.0, "segment_max_gap must be > 0");
  require(p.guides.slope_min >= 0.0, "guide_slope_min must be >= 0");
  require(p.guides.lane_width_fraction > 0.0,
          "guide_lane_width_fraction must be > 0");
  require(p.lookahead_fraction >= 0.0 && p.lookahead_fraction < 1.0,
          "lookahead_fraction must lie in [0, 1)");

  const auto& g = c.guidance;
  require(g.deadband_deg >= 0.0, "deadband_deg must be >= 0");
  require(g.max_steer_deg > 0.0 && g.max_steer_deg < 90.0,
          "max_steer_deg must lie in (0, 90)");
  require(g.recovery_angle_deg >= 0.0, "recovery_angle_deg must be >= 0");
  require(g.give_up_frames >= 0, "give_up_frames must be >= 0");

  const auto& d = c.drive;
  require(d.pid_integral_limit >= 0.0, "pid_integral_limit must be >= 0");
  require(d.wheelbase > 0.0, "wheelbase must be > 0");
  require(d.v_max > 0.0, "v_max must be > 0");
  require(d.cruise_speed >= 0.0 && d.cruise_speed <= d.v_max,
          "cruise_speed must lie in [0, v_max]");

  try {
    sim::validate(c.camera);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  require(c.camera.height_px >= 4 && c.camera.width >= 3,
          "image must be at least 3x4 pixels");
  require(c.track.tile_size > 0.0 && c.track.lane_width > 0.0 &&
              c.track.lane_width < c.track.tile_size / 2.0,
          "track needs 0 < lane_width < tile_size / 2");
  require(c.exit_margin >= 0.0, "exit_margin must be >= 0");
  require(c.frame_rate > 0.0, "frame_rate must be > 0");
  require(c.episode_cap_s > 0.0, "episode_cap_s must be > 0");
  require(c.frame_delay >= 0, "frame_delay must be >= 0");
  require(c.jobs >= 1, "jobs must be >= 1");

  require(!c.start_tiles.empty(), "start_tiles must not be empty");
  const sim::Track track = sim::build_default_track(c.track);
  std::set<int> distinct;
  for (int t : c.start_tiles) {
    require(t >= 0 && t < static_cast<int>(track.tiles.size()),
            "start tile " + std::to_string(t) + " is not on the track");
    require(!sim::is_curve(track.tiles[t].kind),
            "start tile " + std::to_string(t) + " is not a straight tile");
    require(distinct.insert(t).second,
            "start tile " + std::to_string(t) + " is listed twice");
  }
}

}  // namespace lanepilot::bench
