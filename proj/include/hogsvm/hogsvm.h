/*
 * hogsvm C API.
 *
 * Every object is an opaque handle owned by the caller and released with the
 * matching *_free function (NULL is accepted). Functions that can fail return
 * a hogsvm_status; on failure hogsvm_last_error() describes the error for the
 * calling thread, prefixed by the stage that raised it.
 */
#ifndef HOGSVM_H
#define HOGSVM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(HOGSVM_BUILDING)
#define HOGSVM_API __declspec(dllexport)
#else
#define HOGSVM_API __declspec(dllimport)
#endif
#else
#define HOGSVM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hogsvm_status {
  HOGSVM_OK = 0,
  HOGSVM_E_INVALID_ARGUMENT = 1,
  HOGSVM_E_CONTRACT = 2,
  HOGSVM_E_GEOMETRY = 3,
  HOGSVM_E_STREAM_PROTOCOL = 4,
  HOGSVM_E_PARSE = 5,
  HOGSVM_E_IO = 6,
  HOGSVM_E_DOMAIN = 7,
  HOGSVM_E_TRAINING = 8,
  HOGSVM_E_INTERNAL = 9
} hogsvm_status;

typedef struct hogsvm_frame hogsvm_frame;
typedef struct hogsvm_model hogsvm_model;             /* quantized hyperplane */
typedef struct hogsvm_float_model hogsvm_float_model; /* real-valued hyperplane */
typedef struct hogsvm_detections hogsvm_detections;
typedef struct hogsvm_report hogsvm_report;

typedef struct hogsvm_detection {
  int32_t x;
  int32_t y;
  int32_t w;
  int32_t h;
  double score;
} hogsvm_detection;

typedef struct hogsvm_detect_options {
  int32_t ppc;        /* 1, 2, 4 or 8 */
  double threshold;   /* detection iff score > threshold */
  double iou;         /* NMS overlap threshold */
  int32_t apply_nms;  /* non-zero: run NMS on the thresholded windows */
} hogsvm_detect_options;

typedef enum hogsvm_dump_stage {
  HOGSVM_DUMP_CELLS = 0,
  HOGSVM_DUMP_BLOCKS = 1
} hogsvm_dump_stage;

typedef struct hogsvm_train_options {
  double lambda;
  int32_t epochs;
  uint64_t seed;
} hogsvm_train_options;

typedef struct hogsvm_bench_report {
  int32_t width;
  int32_t height;
  int32_t ppc;
  int32_t reps;
  int32_t threads;
  uint64_t cells_per_frame;
  uint64_t blocks_per_frame;
  uint64_t windows_per_frame;
  uint64_t detections_per_frame;
  double total_seconds;
  double frames_per_second;
  double megapixels_per_second;
  double gradient_ms;
  double histogram_ms;
  double normalize_ms;
  double svm_ms;
  double nms_ms;
} hogsvm_bench_report;

HOGSVM_API const char* hogsvm_version(void);
HOGSVM_API const char* hogsvm_status_string(hogsvm_status status);
/* Message of the last failed call on this thread ("" if none). */
HOGSVM_API const char* hogsvm_last_error(void);

/*
 * Text results are copied into caller buffers: at most `capacity` bytes
 * including the terminating NUL are written, and `*needed` (if non-NULL)
 * receives the full length + 1. A NULL buffer with capacity 0 queries size.
 */

/* Frames. Load accepts binary P5/P6 (maxval 255) with dimensions that are
 * multiples of 8; P6 is converted with (77R + 150G + 29B) >> 8. */
HOGSVM_API hogsvm_status hogsvm_frame_load(const char* path, hogsvm_frame** out);
HOGSVM_API hogsvm_status hogsvm_frame_create(int32_t width, int32_t height,
                                             const uint8_t* pixels, hogsvm_frame** out);
HOGSVM_API hogsvm_status hogsvm_frame_save_pgm(const hogsvm_frame* frame, const char* path);
HOGSVM_API int32_t hogsvm_frame_width(const hogsvm_frame* frame);
HOGSVM_API int32_t hogsvm_frame_height(const hogsvm_frame* frame);
HOGSVM_API void hogsvm_frame_free(hogsvm_frame* frame);

/* Quantized models ("HOGSVM1" text files). */
HOGSVM_API hogsvm_status hogsvm_model_load(const char* path, hogsvm_model** out);
HOGSVM_API hogsvm_status hogsvm_model_from_raw(const int64_t* weights, size_t count,
                                               int64_t bias_raw, hogsvm_model** out);
HOGSVM_API hogsvm_status hogsvm_model_save(const hogsvm_model* model, const char* path);
HOGSVM_API void hogsvm_model_free(hogsvm_model* model);

/* Float models ("HOGSVMF1" text files). */
HOGSVM_API hogsvm_status hogsvm_float_model_load(const char* path, hogsvm_float_model** out);
HOGSVM_API hogsvm_status hogsvm_float_model_save(const hogsvm_float_model* model,
                                                 const char* path);
/* `scale` (nullable) receives the power-of-two rescaling applied before quantization. */
HOGSVM_API hogsvm_status hogsvm_float_model_quantize(const hogsvm_float_model* model,
                                                     hogsvm_model** out, double* scale);
HOGSVM_API void hogsvm_float_model_free(hogsvm_float_model* model);

/* Detection. `options` may be NULL for the defaults. */
HOGSVM_API void hogsvm_detect_options_default(hogsvm_detect_options* options);
HOGSVM_API hogsvm_status hogsvm_detect(const hogsvm_frame* frame, const hogsvm_model* model,
                                       const hogsvm_detect_options* options,
                                       hogsvm_detections** out);
HOGSVM_API size_t hogsvm_detections_count(const hogsvm_detections* detections);
HOGSVM_API hogsvm_status hogsvm_detections_get(const hogsvm_detections* detections,
                                               size_t index, hogsvm_detection* out);
/* "x y w h score" lines. */
HOGSVM_API hogsvm_status hogsvm_detections_format(const hogsvm_detections* detections,
                                                  char* buffer, size_t capacity,
                                                  size_t* needed);
HOGSVM_API hogsvm_status hogsvm_detections_write(const hogsvm_detections* detections,
                                                 const char* path);
HOGSVM_API void hogsvm_detections_free(hogsvm_detections* detections);

/* Fixed-point path vs. floating-point reference on one frame. The quantized
 * model is derived from `float_model`. */
HOGSVM_API hogsvm_status hogsvm_compare(const hogsvm_frame* frame,
                                        const hogsvm_float_model* float_model, int32_t ppc,
                                        double threshold, hogsvm_report** out);
/* Looks up a numeric field by its key in the "key=value" text. */
HOGSVM_API hogsvm_status hogsvm_report_get(const hogsvm_report* report, const char* key,
                                           double* value);
HOGSVM_API hogsvm_status hogsvm_report_format(const hogsvm_report* report, char* buffer,
                                              size_t capacity, size_t* needed);
HOGSVM_API void hogsvm_report_free(hogsvm_report* report);

/* Stage dumps: row-major, little-endian int32 raw values; 9 per cell or 36 per block. */
HOGSVM_API hogsvm_status hogsvm_dump(const hogsvm_frame* frame, int32_t ppc,
                                     hogsvm_dump_stage stage, const char* path);

/* Training. `accuracy` (nullable) receives the training-set accuracy. */
HOGSVM_API void hogsvm_train_options_default(hogsvm_train_options* options);
HOGSVM_API hogsvm_status hogsvm_train_manifest(const char* manifest,
                                               const hogsvm_train_options* options,
                                               hogsvm_float_model** out, double* accuracy);
HOGSVM_API hogsvm_status hogsvm_train_synthetic(int32_t per_class,
                                                const hogsvm_train_options* options,
                                                hogsvm_float_model** out, double* accuracy);

/* Throughput. `model` may be NULL (all-zero model). */
HOGSVM_API hogsvm_status hogsvm_bench(const hogsvm_frame* frame, const hogsvm_model* model,
                                      const hogsvm_detect_options* options, int32_t reps,
                                      int32_t threads, hogsvm_bench_report* out);
HOGSVM_API hogsvm_status hogsvm_bench_report_format(const hogsvm_bench_report* report,
                                                    char* buffer, size_t capacity,
                                                    size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* HOGSVM_H */
