#include "lanepilot/lane_pilot.h"

#include <cstring>
#include <fstream>
#include <string>

#include "lanepilot/bench.hpp"
#include "lanepilot/errors.hpp"

struct lp_config {
  lanepilot::bench::BenchConfig value;
};

struct lp_score_table {
  lanepilot::bench::ScoreTable value;
  lanepilot::sim::Track track;
};

struct lp_profile_report {
  lanepilot::bench::ProfileReport value;
};

struct lp_lane_follower {
  lanepilot::LaneFollower follower;
  double dt;
};

namespace {

thread_local std::string g_last_error;

lp_status fail(lp_status status, const char* message) {
  g_last_error = message;
  return status;
}

// Runs fn and translates exceptions into status codes.
template <typename Fn>
lp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LP_OK;
  } catch (const lanepilot::ContractViolation& e) {
    return fail(LP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const lanepilot::DegenerateInput& e) {
    return fail(LP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const lanepilot::ConfigError& e) {
    return fail(LP_ERR_CONFIG, e.what());
  } catch (const lanepilot::ParseError& e) {
    return fail(LP_ERR_PARSE, e.what());
  } catch (const lanepilot::IoError& e) {
    return fail(LP_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(LP_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(LP_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(LP_ERR_RUNTIME, "unknown error");
  }
}

lp_status copy_out(const std::string& text, char* buf, size_t cap,
                   size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf || cap < text.size() + 1) {
    return fail(LP_ERR_BUFFER_TOO_SMALL, "output buffer too small");
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return LP_OK;
}

bool has_text(const char* s) { return s && *s; }

}  // namespace

extern "C" {

const char* lp_version(void) { return "1.0.0"; }

const char* lp_status_string(lp_status status) {
  switch (status) {
    case LP_OK: return "ok";
    case LP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LP_ERR_CONFIG: return "configuration error";
    case LP_ERR_PARSE: return "parse error";
    case LP_ERR_IO: return "i/o error";
    case LP_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case LP_ERR_RUNTIME: return "runtime error";
  }
  return "unknown status";
}

const char* lp_last_error(void) { return g_last_error.c_str(); }

lp_status lp_config_create(lp_config** out) {
  if (!out) return fail(LP_ERR_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] { *out = new lp_config{}; });
}

lp_status lp_config_load_file(const char* path, lp_config** out) {
  if (!path || !out) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    *out = new lp_config{lanepilot::bench::load_config(path)};
  });
}

lp_status lp_config_parse(const char* text, lp_config** out) {
  if (!text || !out) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    *out = new lp_config{lanepilot::bench::parse_config(text)};
  });
}

void lp_config_destroy(lp_config* config) { delete config; }

lp_status lp_config_set(lp_config* config, const char* key,
                        const char* value) {
  if (!config || !key || !value) {
    return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  }
  return guarded([&] { lanepilot::bench::set_value(config->value, key, value); });
}

lp_status lp_config_get(const lp_config* config, const char* key, char* buf,
                        size_t cap, size_t* needed) {
  if (!config || !key) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  std::string text;
  const lp_status st = guarded(
      [&] { text = lanepilot::bench::get_value(config->value, key); });
  return st == LP_OK ? copy_out(text, buf, cap, needed) : st;
}

lp_status lp_config_validate(const lp_config* config) {
  if (!config) return fail(LP_ERR_INVALID_ARGUMENT, "config is NULL");
  return guarded([&] { lanepilot::bench::validate(config->value); });
}

lp_status lp_config_dump(const lp_config* config, char* buf, size_t cap,
                         size_t* needed) {
  if (!config) return fail(LP_ERR_INVALID_ARGUMENT, "config is NULL");
  return copy_out(lanepilot::bench::dump_config(config->value), buf, cap,
                  needed);
}

lp_status lp_run_benchmark(const lp_config* config, int jobs,
                           const char* dump_dir, lp_score_table** out) {
  if (!config || !out) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    auto table = lanepilot::bench::run_benchmark(
        config->value, jobs,
        has_text(dump_dir) ? std::filesystem::path(dump_dir)
                           : std::filesystem::path());
    *out = new lp_score_table{std::move(table),
                              lanepilot::sim::build_default_track(
                                  config->value.track)};
  });
}

void lp_score_table_destroy(lp_score_table* table) { delete table; }

size_t lp_score_table_size(const lp_score_table* table) {
  return table ? table->value.rows.size() : 0;
}

lp_status lp_score_table_row(const lp_score_table* table, size_t index,
                             lp_episode_row* out) {
  if (!table || !out) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  if (index >= table->value.rows.size()) {
    return fail(LP_ERR_INVALID_ARGUMENT, "row index out of range");
  }
  const auto& row = table->value.rows[index];
  out->episode = row.episode;
  out->start_tile = row.start_tile;
  out->survival_s = row.survival_s();
  out->tiles = row.tiles;
  out->lane_exit = row.metrics.lane_exit ? 1 : 0;
  out->exit_tile = row.metrics.exit_tile ? *row.metrics.exit_tile : -1;
  out->exit_on_curve =
      row.metrics.exit_tile &&
              lanepilot::sim::is_curve(
                  table->track.tiles[*row.metrics.exit_tile].kind)
          ? 1
          : 0;
  return LP_OK;
}

lp_status lp_score_table_totals(const lp_score_table* table,
                                double* survival_s, int* tiles) {
  if (!table) return fail(LP_ERR_INVALID_ARGUMENT, "table is NULL");
  if (survival_s) *survival_s = table->value.survival_sum_s();
  if (tiles) *tiles = table->value.tiles_sum;
  return LP_OK;
}

lp_status lp_score_table_csv(const lp_score_table* table, char* buf,
                             size_t cap, size_t* needed) {
  if (!table) return fail(LP_ERR_INVALID_ARGUMENT, "table is NULL");
  return copy_out(lanepilot::bench::format_csv(table->value), buf, cap, needed);
}

lp_status lp_score_table_text(const lp_score_table* table, char* buf,
                              size_t cap, size_t* needed) {
  if (!table) return fail(LP_ERR_INVALID_ARGUMENT, "table is NULL");
  return copy_out(lanepilot::bench::format_table(table->value), buf, cap,
                  needed);
}

lp_status lp_score_table_write_csv(const lp_score_table* table,
                                   const char* path) {
  if (!table || !path) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lanepilot::IoError(std::string("cannot write ") + path);
    out << lanepilot::bench::format_csv(table->value);
    if (!out) throw lanepilot::IoError(std::string("short write to ") + path);
  });
}

lp_status lp_process_frames(const lp_config* config, const char* input_dir,
                            const char* log_path, const char* overlay_dir,
                            lp_process_summary* summary) {
  if (!config || !input_dir || !log_path) {
    return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  }
  return guarded([&] {
    const auto result = lanepilot::bench::process_frames(
        config->value, input_dir,
        has_text(overlay_dir) ? std::filesystem::path(overlay_dir)
                              : std::filesystem::path());
    std::ofstream out(log_path);
    if (!out) throw lanepilot::IoError(std::string("cannot write ") + log_path);
    for (const auto& line : result.log_lines) out << line << '\n';
    if (summary) {
      summary->frames = result.frames;
      summary->failures = result.failures;
    }
  });
}

lp_status lp_profile(const lp_config* config, int iterations,
                     lp_profile_report** out) {
  if (!config || !out) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    *out = new lp_profile_report{
        lanepilot::bench::profile_pipeline(config->value, iterations)};
  });
}

void lp_profile_report_destroy(lp_profile_report* report) { delete report; }

double lp_profile_report_fps(const lp_profile_report* report) {
  return report ? report->value.frames_per_second : 0.0;
}

lp_status lp_profile_report_text(const lp_profile_report* report, char* buf,
                                 size_t cap, size_t* needed) {
  if (!report) return fail(LP_ERR_INVALID_ARGUMENT, "report is NULL");
  return copy_out(lanepilot::bench::format_profile(report->value), buf, cap,
                  needed);
}

lp_status lp_lane_follower_create(const lp_config* config,
                                  lp_lane_follower** out) {
  if (!config || !out) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    const auto& c = config->value;
    lanepilot::bench::validate(c);
    *out = new lp_lane_follower{
        lanepilot::LaneFollower(c.perception, c.guidance, c.drive),
        1.0 / c.frame_rate};
  });
}

void lp_lane_follower_destroy(lp_lane_follower* follower) { delete follower; }

lp_status lp_lane_follower_step(lp_lane_follower* follower, const uint8_t* rgb,
                                int width, int height, lp_decision* out) {
  if (!follower || !rgb || !out) {
    return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  }
  if (width <= 0 || height <= 0) {
    return fail(LP_ERR_INVALID_ARGUMENT, "frame dimensions must be positive");
  }
  return guarded([&] {
    const std::size_t n = static_cast<std::size_t>(width) * height * 3;
    lanepilot::imaging::Frame frame(width, height, 3,
                                    std::vector<std::uint8_t>(rgb, rgb + n));
    const auto d = follower->follower.decide(frame);
    const auto wheels = follower->follower.actuate(d.steering.angle,
                                                   follower->dt);
    out->has_angle = d.angle ? 1 : 0;
    out->angle_deg = d.angle.value_or(0.0);
    out->steering_deg = d.steering.angle;
    out->direction = d.direction;
    out->wheel_left = wheels.left;
    out->wheel_right = wheels.right;
  });
}

lp_status lp_render_start_frame(const lp_config* config, int tile,
                                uint8_t* rgb, size_t cap) {
  if (!config || !rgb) return fail(LP_ERR_INVALID_ARGUMENT, "NULL argument");
  const auto& cam = config->value.camera;
  if (cap < static_cast<size_t>(cam.width) * cam.height_px * 3) {
    return fail(LP_ERR_BUFFER_TOO_SMALL, "rgb buffer too small for the frame");
  }
  return guarded([&] {
    const auto& c = config->value;
    const auto track = lanepilot::sim::build_default_track(c.track);
    const auto frame = lanepilot::sim::render_frame(
        track, lanepilot::sim::lane_start_pose(track, tile), c.camera);
    std::memcpy(rgb, frame.data().data(), frame.data().size());
  });
}

}  // extern "C"
