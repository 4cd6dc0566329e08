/*
 * lane_pilot C API.
 *
 * Handles are opaque and owned by the caller; every *_create / *_load /
 * *_run call that returns a handle has a matching *_destroy. Functions
 * return LP_OK or an error status; the message for the most recent failure
 * on the calling thread is available from lp_last_error().
 *
 * String outputs use the two-call pattern: pass buf = NULL (or a short
 * buffer) to learn the required size in *needed (including the NUL), then
 * call again with a large enough buffer.
 */
#ifndef LANE_PILOT_H
#define LANE_PILOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LANEPILOT_BUILDING)
#    define LANEPILOT_API __declspec(dllexport)
#  else
#    define LANEPILOT_API __declspec(dllimport)
#  endif
#else
#  define LANEPILOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lp_status {
  LP_OK = 0,
  LP_ERR_INVALID_ARGUMENT = 1, /* NULL handle or violated precondition */
  LP_ERR_CONFIG = 2,           /* bad config text, key or value */
  LP_ERR_PARSE = 3,            /* malformed image file */
  LP_ERR_IO = 4,               /* file system failure */
  LP_ERR_BUFFER_TOO_SMALL = 5, /* see *needed */
  LP_ERR_RUNTIME = 6           /* anything else */
} lp_status;

typedef struct lp_config lp_config;
typedef struct lp_score_table lp_score_table;
typedef struct lp_profile_report lp_profile_report;
typedef struct lp_lane_follower lp_lane_follower;

typedef struct lp_episode_row {
  int episode;    /* 1-based */
  int start_tile;
  double survival_s; /* one decimal place */
  int tiles;
  int lane_exit;  /* nonzero when the episode ended by leaving the lane */
  int exit_tile;  /* -1 when lane_exit is zero */
  int exit_on_curve;
} lp_episode_row;

typedef struct lp_process_summary {
  int frames;
  int failures;
} lp_process_summary;

typedef struct lp_decision {
  int has_angle;        /* zero when no lane was detected */
  double angle_deg;     /* deviation angle, valid when has_angle */
  double steering_deg;  /* positive steers right */
  int direction;        /* -1, 0, +1 */
  double wheel_left;    /* m/s */
  double wheel_right;   /* m/s */
} lp_decision;

LANEPILOT_API const char* lp_version(void);
LANEPILOT_API const char* lp_status_string(lp_status status);
LANEPILOT_API const char* lp_last_error(void);

/* Configuration */
LANEPILOT_API lp_status lp_config_create(lp_config** out);
LANEPILOT_API lp_status lp_config_load_file(const char* path, lp_config** out);
LANEPILOT_API lp_status lp_config_parse(const char* text, lp_config** out);
LANEPILOT_API void lp_config_destroy(lp_config* config);
LANEPILOT_API lp_status lp_config_set(lp_config* config, const char* key,
                                      const char* value);
LANEPILOT_API lp_status lp_config_get(const lp_config* config, const char* key,
                                      char* buf, size_t cap, size_t* needed);
LANEPILOT_API lp_status lp_config_validate(const lp_config* config);
LANEPILOT_API lp_status lp_config_dump(const lp_config* config, char* buf,
                                       size_t cap, size_t* needed);

/* Benchmark: one vision-driven episode per configured start tile.
 * dump_dir may be NULL or empty. */
LANEPILOT_API lp_status lp_run_benchmark(const lp_config* config, int jobs,
                                         const char* dump_dir,
                                         lp_score_table** out);
LANEPILOT_API void lp_score_table_destroy(lp_score_table* table);
LANEPILOT_API size_t lp_score_table_size(const lp_score_table* table);
LANEPILOT_API lp_status lp_score_table_row(const lp_score_table* table,
                                           size_t index, lp_episode_row* out);
LANEPILOT_API lp_status lp_score_table_totals(const lp_score_table* table,
                                              double* survival_s, int* tiles);
LANEPILOT_API lp_status lp_score_table_csv(const lp_score_table* table,
                                           char* buf, size_t cap,
                                           size_t* needed);
LANEPILOT_API lp_status lp_score_table_text(const lp_score_table* table,
                                            char* buf, size_t cap,
                                            size_t* needed);
LANEPILOT_API lp_status lp_score_table_write_csv(const lp_score_table* table,
                                                 const char* path);

/* Offline frames. log_path receives one line per frame; overlay_dir may be
 * NULL or empty. Returns LP_OK even when some frames failed; inspect
 * summary->failures. */
LANEPILOT_API lp_status lp_process_frames(const lp_config* config,
                                          const char* input_dir,
                                          const char* log_path,
                                          const char* overlay_dir,
                                          lp_process_summary* summary);

/* Timing of the perception and control chain on one rendered frame. */
LANEPILOT_API lp_status lp_profile(const lp_config* config, int iterations,
                                   lp_profile_report** out);
LANEPILOT_API void lp_profile_report_destroy(lp_profile_report* report);
LANEPILOT_API double lp_profile_report_fps(const lp_profile_report* report);
LANEPILOT_API lp_status lp_profile_report_text(const lp_profile_report* report,
                                               char* buf, size_t cap,
                                               size_t* needed);

/* Streaming use: feed RGB frames, get steering and wheel speeds back. */
LANEPILOT_API lp_status lp_lane_follower_create(const lp_config* config,
                                                lp_lane_follower** out);
LANEPILOT_API void lp_lane_follower_destroy(lp_lane_follower* follower);
LANEPILOT_API lp_status lp_lane_follower_step(lp_lane_follower* follower,
                                              const uint8_t* rgb, int width,
                                              int height, lp_decision* out);

/* Renders the simulator camera view at the lane center of a tile. rgb must
 * hold image_width * image_height * 3 bytes, else LP_ERR_BUFFER_TOO_SMALL. */
LANEPILOT_API lp_status lp_render_start_frame(const lp_config* config,
                                              int tile, uint8_t* rgb,
                                              size_t cap);

#ifdef __cplusplus
}
#endif

#endif /* LANE_PILOT_H */
