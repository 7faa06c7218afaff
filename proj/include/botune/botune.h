/* C interface of the botune library. All functions return a bt_status;
 * on failure bt_last_error() describes the problem (thread-local, valid
 * until the next call on the same thread). Strings returned through char**
 * out-parameters are owned by the caller and released with bt_free_string. */
#ifndef BOTUNE_BOTUNE_H
#define BOTUNE_BOTUNE_H

#include <stddef.h>

#if defined(BOTUNE_BUILDING)
#define BT_API __attribute__((visibility("default")))
#else
#define BT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bt_status {
  BT_OK = 0,
  BT_ERR_INVALID_ARGUMENT = 1,
  BT_ERR_CONFIG = 2,
  BT_ERR_OUT_OF_BOUNDS = 3, /* parameter vector outside the safety bounds */
  BT_ERR_ILL_CONDITIONED = 4,
  BT_ERR_DIVERGED = 5,
  BT_ERR_STATE = 6,
  BT_ERR_IO = 7,
  BT_ERR_INTERNAL = 8
} bt_status;

typedef struct bt_campaign bt_campaign;

BT_API const char* bt_version(void);
BT_API const char* bt_last_error(void);
BT_API void bt_free_string(char* s);

/* Starts a fresh campaign. output_dir may be NULL: the config's output.dir,
 * then $BOTUNE_OUTPUT_DIR, then "botune_out" are used. */
BT_API bt_status bt_campaign_create(const char* config_path, const char* output_dir, bt_campaign** out);
BT_API bt_status bt_campaign_create_from_string(const char* config_json, const char* output_dir,
                                                bt_campaign** out);
/* Continues the campaign logged in output_dir. */
BT_API bt_status bt_campaign_resume(const char* output_dir, bt_campaign** out);
BT_API void bt_campaign_destroy(bt_campaign* c);

/* Runs one evaluation; *done is set to 1 when the budget is spent. The
 * run-log record is returned through record_json unless it is NULL. */
BT_API bt_status bt_campaign_step(bt_campaign* c, int* done, char** record_json);
BT_API bt_status bt_campaign_progress(const bt_campaign* c, size_t* evaluated, size_t* total);
/* Writes report.json and plot files; *report_json may be NULL. */
BT_API bt_status bt_campaign_finish(bt_campaign* c, char** report_json);
BT_API bt_status bt_campaign_output_dir(const bt_campaign* c, char** path);

/* method: "random" or "grid". n_evals = 0 uses init + budget (random) or the
 * full grid. */
BT_API bt_status bt_baseline(const char* config_path, const char* output_dir, const char* method,
                             size_t points_per_dim, size_t n_evals, char** report_json);

/* theta = {t_set [s], t_obs [s], p1 [1/s], p2 [1/s]}. */
BT_API bt_status bt_evaluate(const char* config_path, const double theta[4], int secondary,
                             char** result_json);

BT_API bt_status bt_report(const char* output_dir, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif
