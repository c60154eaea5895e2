/* cyclesem C API: everything the shared library exports.
 *
 * Conventions:
 *   - status codes mirror the CLI exit codes (config error = 3, missing
 *     prerequisite artifact = 4); cs_last_error() returns a thread-local
 *     message for the most recent failing call on this thread.
 *   - images are row-major float arrays of h*w values in [0,1]; semantic
 *     maps are planar c*h*w float arrays.
 *   - pipeline entry points take a full experiment-config JSON document
 *     (see README for the schema) and write artifacts under its out_dir.
 *   - cs_model is an opaque handle to a loaded checkpoint; handles are
 *     immutable after open and safe to share across threads.
 */
#ifndef CYCLESEM_CAPI_H
#define CYCLESEM_CAPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CS_API __declspec(dllexport)
#else
#define CS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
    CS_OK = 0,
    CS_ERR = 1,          /* runtime / IO / invalid argument */
    CS_ERR_USAGE = 2,    /* reserved for the CLI: unknown subcommand */
    CS_ERR_CONFIG = 3,   /* invalid config; message names the field path */
    CS_ERR_MISSING = 4,  /* missing prerequisite artifact; message names it */
} cs_status;

CS_API const char* cs_version(void);
CS_API const char* cs_last_error(void);

/* ---- pipeline subcommands ---- */

CS_API cs_status cs_gen_data(const char* config_json);
CS_API cs_status cs_train_seg(const char* config_json);
CS_API cs_status cs_train_synth(const char* config_json);
CS_API cs_status cs_train_ae(const char* config_json);

/* model: "cycle" or "ae"; mode: "continuous" or "discrete" (ignored for ae).
 * data_dir/split/mode may be NULL to use <out_dir>/data, "test", and the
 * config's mode. Residual maps land in <out_dir>/residuals/<tag>. */
CS_API cs_status cs_infer(const char* config_json, const char* model, const char* mode,
                          const char* data_dir, const char* split, const char* tag,
                          int median_filter);

/* Pools residuals/<tag> against the split's masks. When report_json_out is
 * non-NULL the EvalReport JSON is copied into it (fails if cap is too
 * small); the report is always written to <out_dir>/eval/report_<tag>.json. */
CS_API cs_status cs_eval(const char* config_json, const char* tag, const char* data_dir,
                         const char* split, char* report_json_out, size_t out_cap);

CS_API cs_status cs_ablation(const char* config_json, const char* data_dir, const char* split);

CS_API cs_status cs_report(const char* config_json, const char* tag, const char* data_dir,
                           const char* split, int max_rows);

/* ---- checkpoints as opaque handles ---- */

typedef struct cs_model cs_model;

/* prefix is the checkpoint path without .bin/.json */
CS_API cs_status cs_model_open(const char* checkpoint_prefix, cs_model** out);
CS_API void cs_model_close(cs_model* m);
/* "segmentor" | "generator" | "discriminator" | "autoencoder" */
CS_API cs_status cs_model_kind(const cs_model* m, char* buf, size_t cap);
CS_API cs_status cs_model_resolution(const cs_model* m, int* out);
CS_API cs_status cs_model_num_classes(const cs_model* m, int* out);

/* ---- array operations ---- */

/* probs_out must hold num_classes*h*w floats */
CS_API cs_status cs_segment(const cs_model* segmentor, const float* image, int h, int w,
                            float* probs_out);
CS_API cs_status cs_synthesize(const cs_model* generator, const float* semantic, int c, int h,
                               int w, float* image_out);
/* discrete_mode != 0 routes argmax one-hots into the generator */
CS_API cs_status cs_reconstruct(const cs_model* segmentor, const cs_model* generator,
                                const float* image, int h, int w, int discrete_mode,
                                float* recon_out);
CS_API cs_status cs_ae_reconstruct(const cs_model* autoencoder, const float* image, int h, int w,
                                   float* recon_out);
CS_API cs_status cs_residual(const float* image, const float* recon, size_t count, float* out);

/* labels: 1 = lesion pixel. Both metrics need both classes present
 * (cs_best_dice needs at least one positive). */
CS_API cs_status cs_auprc(const float* scores, const uint8_t* labels, size_t count, double* out);
CS_API cs_status cs_best_dice(const float* scores, const uint8_t* labels, size_t count,
                              double* dice_out, double* threshold_out);

#ifdef __cplusplus
}
#endif

#endif /* CYCLESEM_CAPI_H */
