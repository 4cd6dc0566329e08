// lane-pilot command line front end. Talks to the library only through the
// C API in lane_pilot.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lanepilot/lane_pilot.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct ConfigDeleter {
  void operator()(lp_config* c) const { lp_config_destroy(c); }
};
struct TableDeleter {
  void operator()(lp_score_table* t) const { lp_score_table_destroy(t); }
};
struct ReportDeleter {
  void operator()(lp_profile_report* r) const { lp_profile_report_destroy(r); }
};
using ConfigPtr = std::unique_ptr<lp_config, ConfigDeleter>;

int exit_code(lp_status st) {
  switch (st) {
    case LP_OK: return kExitOk;
    case LP_ERR_CONFIG:
    case LP_ERR_INVALID_ARGUMENT: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report(lp_status st, const char* what) {
  std::fprintf(stderr, "lane-pilot: %s: %s (%s)\n", what, lp_last_error(),
               lp_status_string(st));
  return exit_code(st);
}

template <typename Getter>
std::string fetch_text(Getter&& get) {
  size_t needed = 0;
  get(nullptr, 0, &needed);
  std::string text(needed, '\0');
  if (get(text.data(), text.size(), &needed) != LP_OK) return {};
  text.resize(needed - 1);
  return text;
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

// Loads the config file (or defaults) and applies overrides. Returns an exit
// code, 0 on success.
int load_config(const CommonOptions& opts, ConfigPtr& out) {
  lp_config* raw = nullptr;
  lp_status st = opts.config_path.empty()
                     ? lp_config_create(&raw)
                     : lp_config_load_file(opts.config_path.c_str(), &raw);
  if (st != LP_OK) return report(st, "loading config");
  out.reset(raw);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "lane-pilot: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return kExitConfig;
    }
    st = lp_config_set(out.get(), kv.substr(0, eq).c_str(),
                       kv.substr(eq + 1).c_str());
    if (st != LP_OK) return report(st, "applying --set");
  }
  return kExitOk;
}

int set_key(lp_config* config, const char* key, const std::string& value) {
  const lp_status st = lp_config_set(config, key, value.c_str());
  return st == LP_OK ? kExitOk : report(st, key);
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "key = value config file");
  cmd->add_option("--set", opts.overrides,
                  "override one config key, as key=value (repeatable)");
}

std::string get_key(const lp_config* config, const char* key) {
  return fetch_text([&](char* buf, size_t cap, size_t* needed) {
    return lp_config_get(config, key, buf, cap, needed);
  });
}

int cmd_run(const CommonOptions& common, const std::string& out_path,
            const std::string& dump_dir, int jobs, bool jobs_set, long seed,
            bool seed_set) {
  ConfigPtr config;
  if (int rc = load_config(common, config)) return rc;
  if (!out_path.empty()) {
    if (int rc = set_key(config.get(), "output_csv", out_path)) return rc;
  }
  if (!dump_dir.empty()) {
    if (int rc = set_key(config.get(), "dump_frames_dir", dump_dir)) return rc;
  }
  if (jobs_set) {
    if (int rc = set_key(config.get(), "jobs", std::to_string(jobs))) return rc;
  }
  if (seed_set) {
    if (int rc = set_key(config.get(), "seed", std::to_string(seed))) return rc;
  }
  lp_status st = lp_config_validate(config.get());
  if (st != LP_OK) return report(st, "config");

  const std::string csv_path = get_key(config.get(), "output_csv");
  const std::string frames_dir = get_key(config.get(), "dump_frames_dir");
  const int workers = std::stoi(get_key(config.get(), "jobs"));

  lp_score_table* raw = nullptr;
  st = lp_run_benchmark(config.get(), workers,
                        frames_dir.empty() ? nullptr : frames_dir.c_str(),
                        &raw);
  if (st != LP_OK) return report(st, "run");
  std::unique_ptr<lp_score_table, TableDeleter> table(raw);

  std::fputs(fetch_text([&](char* buf, size_t cap, size_t* needed) {
               return lp_score_table_text(table.get(), buf, cap, needed);
             }).c_str(),
             stdout);
  if (!csv_path.empty()) {
    st = lp_score_table_write_csv(table.get(), csv_path.c_str());
    if (st != LP_OK) return report(st, "writing csv");
  }
  return kExitOk;
}

int cmd_process(const CommonOptions& common, const std::string& input,
                const std::string& log_path, const std::string& overlays) {
  ConfigPtr config;
  if (int rc = load_config(common, config)) return rc;
  lp_process_summary summary{};
  const lp_status st = lp_process_frames(
      config.get(), input.c_str(), log_path.c_str(),
      overlays.empty() ? nullptr : overlays.c_str(), &summary);
  if (st != LP_OK) return report(st, "process");
  if (summary.frames == 0) {
    std::fprintf(stderr, "lane-pilot: warning: no .ppm frames in %s\n",
                 input.c_str());
  }
  if (summary.failures > 0) {
    std::fprintf(stderr, "lane-pilot: %d of %d frames could not be read\n",
                 summary.failures, summary.frames);
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_profile(const CommonOptions& common, int iterations) {
  ConfigPtr config;
  if (int rc = load_config(common, config)) return rc;
  lp_profile_report* raw = nullptr;
  const lp_status st = lp_profile(config.get(), iterations, &raw);
  if (st != LP_OK) return report(st, "profile");
  std::unique_ptr<lp_profile_report, ReportDeleter> rep(raw);
  std::fputs(fetch_text([&](char* buf, size_t cap, size_t* needed) {
               return lp_profile_report_text(rep.get(), buf, cap, needed);
             }).c_str(),
             stdout);
  return kExitOk;
}

int cmd_dump_config(const CommonOptions& common) {
  ConfigPtr config;
  if (int rc = load_config(common, config)) return rc;
  std::fputs(fetch_text([&](char* buf, size_t cap, size_t* needed) {
               return lp_config_dump(config.get(), buf, cap, needed);
             }).c_str(),
             stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane-pilot: classical-vision lane following in a closed-loop "
               "track simulator"};
  app.require_subcommand(1);

  CommonOptions run_common, process_common, profile_common, dump_common;

  auto* run = app.add_subcommand("run", "five-episode lane-following benchmark");
  add_common(run, run_common);
  std::string out_path, dump_dir;
  int jobs = 1;
  long seed = 0;
  run->add_option("--out", out_path, "CSV score table output");
  run->add_option("--dump-frames", dump_dir,
                  "write per-step frames, overlays and logs here");
  auto* jobs_opt = run->add_option("--jobs", jobs, "parallel episodes")
                       ->check(CLI::PositiveNumber);
  auto* seed_opt =
      run->add_option("--seed", seed, "reserved; the pipeline is deterministic");

  auto* process = app.add_subcommand("process", "run perception on PPM frames");
  add_common(process, process_common);
  std::string input, log_path, overlays;
  process->add_option("--input", input, "directory of .ppm frames")->required();
  process->add_option("--log", log_path, "angle log output")->required();
  process->add_option("--overlays", overlays, "directory for overlay images");

  auto* profile = app.add_subcommand("profile", "per-stage timing report");
  add_common(profile, profile_common);
  int iterations = 200;
  profile->add_option("--iterations", iterations, "timed iterations")
      ->check(CLI::PositiveNumber);

  auto* dump = app.add_subcommand("dump-config", "print the full configuration");
  add_common(dump, dump_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*run) {
    return cmd_run(run_common, out_path, dump_dir, jobs, jobs_opt->count() > 0,
                   seed, seed_opt->count() > 0);
  }
  if (*process) return cmd_process(process_common, input, log_path, overlays);
  if (*profile) return cmd_profile(profile_common, iterations);
  if (*dump) return cmd_dump_config(dump_common);
  return kExitConfig;
}
