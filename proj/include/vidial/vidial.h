/* Visual-context dialog generation: C interface. All functions return a
 * vidial_status; on failure vidial_last_error() describes the problem for
 * the calling thread. */
#ifndef VIDIAL_VIDIAL_H
#define VIDIAL_VIDIAL_H

#include <stddef.h>

#if defined(VIDIAL_BUILDING_LIBRARY)
#define VIDIAL_API __attribute__((visibility("default")))
#else
#define VIDIAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vidial_status {
  VIDIAL_OK = 0,
  VIDIAL_ERR_USAGE,
  VIDIAL_ERR_IO,
  VIDIAL_ERR_BAD_MAGIC,
  VIDIAL_ERR_ZERO_DIM,
  VIDIAL_ERR_TRUNCATED,
  VIDIAL_ERR_TRAILING_DATA,
  VIDIAL_ERR_NON_FINITE,
  VIDIAL_ERR_EMPTY_OBJECT_SET,
  VIDIAL_ERR_INDEX_OUT_OF_RANGE,
  VIDIAL_ERR_EPISODE_TOO_SHORT,
  VIDIAL_ERR_MALFORMED_RECORD,
  VIDIAL_ERR_SPEC_INVALID,
  VIDIAL_ERR_CONTEXT_EMPTY,
  VIDIAL_ERR_DIM_MISMATCH,
  VIDIAL_ERR_EMPTY_TARGET,
  VIDIAL_ERR_EMPTY_DATASET,
  VIDIAL_ERR_VERSION_MISMATCH,
  VIDIAL_ERR_CORRUPT_CHECKPOINT,
  VIDIAL_ERR_EMPTY_UTTERANCE,
  VIDIAL_ERR_NO_NEGATIVES,
  VIDIAL_ERR_EMPTY_NBEST,
  VIDIAL_ERR_MODE_MISMATCH,
  VIDIAL_ERR_INVALID_WEIGHTS,
  VIDIAL_ERR_LENGTH_MISMATCH,
  VIDIAL_ERR_INVALID_ORDER,
  VIDIAL_ERR_SPLIT_OVERLAP,
  VIDIAL_ERR_UNBALANCED,
  VIDIAL_ERR_NUMERIC_FAILURE,
  VIDIAL_ERR_INTERNAL
} vidial_status;

typedef struct vidial_config vidial_config;

/* Defaults, with VIDIAL_SEED applied when set. */
VIDIAL_API vidial_status vidial_config_create(vidial_config** out);
/* Reads `dotted.key = value` lines; relative paths resolve against the file. */
VIDIAL_API vidial_status vidial_config_load(const char* path, vidial_config** out);
/* Relative paths resolve against the working directory. */
VIDIAL_API vidial_status vidial_config_set(vidial_config* cfg, const char* key, const char* value);
VIDIAL_API void vidial_config_destroy(vidial_config* cfg);

VIDIAL_API size_t vidial_config_key_count(void);
VIDIAL_API const char* vidial_config_key(size_t index);

/* Synthetic corpus: episodes.jsonl, coarse.vdf, objects.vof, manifest.json. */
VIDIAL_API vidial_status vidial_synth(const vidial_config* cfg, const char* out_dir);
/* target: "forward", "backward" or "disc". Also writes <out_ckpt>.loss. */
VIDIAL_API vidial_status vidial_train(const vidial_config* cfg, const char* target, const char* out_ckpt);
VIDIAL_API vidial_status vidial_generate(const vidial_config* cfg, const char* out_responses);
VIDIAL_API vidial_status vidial_eval(const vidial_config* cfg, const char* responses, const char* out_report);

VIDIAL_API const char* vidial_last_error(void);
VIDIAL_API const char* vidial_status_name(vidial_status status);
/* 0 for success, 1 for usage and validation failures, 2 otherwise. */
VIDIAL_API int vidial_status_exit_code(vidial_status status);
VIDIAL_API const char* vidial_version(void);

#ifdef __cplusplus
}
#endif

#endif
