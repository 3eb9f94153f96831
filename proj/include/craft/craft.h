#ifndef CRAFT_CRAFT_H
#define CRAFT_CRAFT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CRAFT_BUILDING_LIBRARY)
#    define CRAFT_API __declspec(dllexport)
#  else
#    define CRAFT_API __declspec(dllimport)
#  endif
#else
#  define CRAFT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. On failure a message is kept per thread
 * and can be read with craft_last_error() until the next failing call. */
typedef enum craft_status {
  CRAFT_OK = 0,
  CRAFT_E_ARGUMENT = 1,
  CRAFT_E_IO = 2,
  CRAFT_E_PARSE = 3,
  CRAFT_E_VALIDATION = 4,
  CRAFT_E_SIMULATION = 5,
  CRAFT_E_SAMPLING = 6,
  CRAFT_E_TYPE = 7,
  CRAFT_E_EVALUATION = 8,
  CRAFT_E_STAGE = 9,
  CRAFT_E_INTERNAL = 10
} craft_status;

typedef struct craft_pipeline craft_pipeline;
typedef struct craft_scene craft_scene;
typedef struct craft_trace craft_trace;

CRAFT_API const char* craft_version(void);
CRAFT_API const char* craft_engine_version(void);
CRAFT_API const char* craft_status_name(craft_status status);
/* Empty string when no call on this thread has failed. */
CRAFT_API const char* craft_last_error(void);
/* Releases strings returned through char** out parameters. NULL is ignored. */
CRAFT_API void craft_string_free(char* s);

/* Pipeline over an output directory. config_json may be NULL for defaults. */
CRAFT_API craft_status craft_pipeline_create(const char* config_json, const char* out_dir, craft_pipeline** out);
CRAFT_API void craft_pipeline_destroy(craft_pipeline* p);
/* stage: "generate", "validate", "balance", "split", "export" or "all".
 * A stage failure returns CRAFT_E_STAGE; see craft_pipeline_failed_stage. */
CRAFT_API craft_status craft_pipeline_run(craft_pipeline* p, const char* stage);
/* Name of the stage that failed last, or NULL. cause receives the underlying status. */
CRAFT_API const char* craft_pipeline_failed_stage(const craft_pipeline* p, craft_status* cause);
/* Normalized configuration as JSON. */
CRAFT_API craft_status craft_pipeline_config(const craft_pipeline* p, char** json);
/* Contents of manifest.json in the output directory. */
CRAFT_API craft_status craft_pipeline_manifest(const craft_pipeline* p, char** json);

/* catalog_path NULL uses the bundled catalog. */
CRAFT_API craft_status craft_scene_sample(const char* catalog_path, int layout_id, uint64_t seed, craft_scene** out);
CRAFT_API craft_status craft_scene_from_json(const char* json, craft_scene** out);
CRAFT_API craft_status craft_scene_to_json(const craft_scene* s, char** json);
CRAFT_API void craft_scene_destroy(craft_scene* s);

/* The trace keeps a copy of its scene for event extraction and rendering. */
CRAFT_API craft_status craft_simulate(const craft_scene* s, double duration, craft_trace** out);
CRAFT_API craft_status craft_trace_tick_count(const craft_trace* t, int* ticks);
CRAFT_API craft_status craft_trace_to_jsonl(const craft_trace* t, char** jsonl);
CRAFT_API craft_status craft_trace_graph(const craft_trace* t, double collision_speed, char** json);
CRAFT_API craft_status craft_trace_describe(const craft_trace* t, double collision_speed, char** json);
/* Writes frame_%03d.png files into dir; frames receives the count when non-NULL. */
CRAFT_API craft_status craft_trace_render(const craft_trace* t, int fps, int resolution, const char* dir, int* frames);
CRAFT_API void craft_trace_destroy(craft_trace* t);

/* Exported video directory helpers. */
CRAFT_API craft_status craft_video_describe(const char* video_dir, char** json);
/* Evaluates a program on an exported video; answer is the rendered answer or "INVALID". */
CRAFT_API craft_status craft_video_answer(const char* video_dir, const char* program, char** answer);

/* Statistics over dataset_dir/{train,val,test}.jsonl. */
CRAFT_API craft_status craft_dataset_stats(const char* dataset_dir, char** json);
/* kind: "Random", "AT-Random", "MFA" or "AT-MFA"; eval_split: "val" or "test". */
CRAFT_API craft_status craft_dataset_baseline(const char* dataset_dir, const char* kind, const char* eval_split,
                                              uint64_t seed, char** json);

/* Parses and typechecks a program; json holds root type, inline and pretty forms. */
CRAFT_API craft_status craft_program_check(const char* program, int allow_placeholders, char** json);

#ifdef __cplusplus
}
#endif

#endif
