#include "hogsvm/hogsvm.h"

#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "hogsvm/detector.hpp"
#include "hogsvm/image.hpp"
#include "hogsvm/oracle.hpp"
#include "hogsvm/serialize.hpp"
#include "hogsvm/trainer.hpp"

struct hogsvm_frame {
  hogsvm::Frame frame;
};

struct hogsvm_model {
  hogsvm::SvmModel model;
};

struct hogsvm_float_model {
  hogsvm::FloatModel model;
};

struct hogsvm_detections {
  std::vector<hogsvm::Detection> items;
};

struct hogsvm_report {
  hogsvm::ErrorReport report;
  std::string text;
};

namespace {

thread_local std::string t_last_error;

hogsvm_status status_of(hogsvm::ErrorKind kind) {
  using hogsvm::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidArgument: return HOGSVM_E_INVALID_ARGUMENT;
    case ErrorKind::kContract: return HOGSVM_E_CONTRACT;
    case ErrorKind::kGeometry: return HOGSVM_E_GEOMETRY;
    case ErrorKind::kStreamProtocol: return HOGSVM_E_STREAM_PROTOCOL;
    case ErrorKind::kParse: return HOGSVM_E_PARSE;
    case ErrorKind::kIo: return HOGSVM_E_IO;
    case ErrorKind::kDomain: return HOGSVM_E_DOMAIN;
    case ErrorKind::kTraining: return HOGSVM_E_TRAINING;
  }
  return HOGSVM_E_INTERNAL;
}

// Runs `body`, translating exceptions into a status plus a stage-prefixed message.
template <class Body>
hogsvm_status guarded(const char* stage, Body&& body) noexcept {
  try {
    body();
    t_last_error.clear();
    return HOGSVM_OK;
  } catch (const hogsvm::Error& e) {
    t_last_error = std::string(stage) + ": " + hogsvm::to_string(e.kind()) + ": " + e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    t_last_error = std::string(stage) + ": internal error: " + e.what();
    return HOGSVM_E_INTERNAL;
  } catch (...) {
    t_last_error = std::string(stage) + ": internal error";
    return HOGSVM_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) hogsvm::fail(hogsvm::ErrorKind::kInvalidArgument, what);
}

hogsvm_status copy_text(const std::string& text, char* buffer, size_t capacity, size_t* needed) {
  if (needed != nullptr) *needed = text.size() + 1;
  if (buffer == nullptr) {
    if (capacity != 0) {
      t_last_error = "format: null buffer with non-zero capacity";
      return HOGSVM_E_INVALID_ARGUMENT;
    }
    return HOGSVM_OK;
  }
  if (capacity == 0) return HOGSVM_OK;
  const size_t n = std::min(capacity - 1, text.size());
  std::memcpy(buffer, text.data(), n);
  buffer[n] = '\0';
  return HOGSVM_OK;
}

hogsvm::DetectorOptions to_options(const hogsvm_detect_options* in) {
  hogsvm_detect_options o;
  hogsvm_detect_options_default(&o);
  if (in != nullptr) o = *in;
  hogsvm::DetectorOptions out;
  out.ppc = o.ppc;
  out.threshold = o.threshold;
  out.iou = o.iou;
  return out;
}

hogsvm::TrainOptions to_train_options(const hogsvm_train_options* in) {
  hogsvm_train_options o;
  hogsvm_train_options_default(&o);
  if (in != nullptr) o = *in;
  return {o.lambda, o.epochs, o.seed};
}

}  // namespace

extern "C" {

const char* hogsvm_version(void) { return "1.0.0"; }

const char* hogsvm_status_string(hogsvm_status status) {
  switch (status) {
    case HOGSVM_OK: return "ok";
    case HOGSVM_E_INVALID_ARGUMENT: return "invalid argument";
    case HOGSVM_E_CONTRACT: return "contract violation";
    case HOGSVM_E_GEOMETRY: return "geometry error";
    case HOGSVM_E_STREAM_PROTOCOL: return "stream protocol error";
    case HOGSVM_E_PARSE: return "parse error";
    case HOGSVM_E_IO: return "i/o error";
    case HOGSVM_E_DOMAIN: return "domain error";
    case HOGSVM_E_TRAINING: return "training error";
    case HOGSVM_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hogsvm_last_error(void) { return t_last_error.c_str(); }

hogsvm_status hogsvm_frame_load(const char* path, hogsvm_frame** out) {
  return guarded("load_image", [&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto f = std::make_unique<hogsvm_frame>(hogsvm_frame{hogsvm::load_image(path)});
    *out = f.release();
  });
}

hogsvm_status hogsvm_frame_create(int32_t width, int32_t height, const uint8_t* pixels,
                                  hogsvm_frame** out) {
  return guarded("frame_create", [&] {
    require(pixels != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    hogsvm::require_cell_aligned(width, height);
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    auto f = std::make_unique<hogsvm_frame>(
        hogsvm_frame{hogsvm::Frame(width, height, std::vector<std::uint8_t>(pixels, pixels + n))});
    *out = f.release();
  });
}

hogsvm_status hogsvm_frame_save_pgm(const hogsvm_frame* frame, const char* path) {
  return guarded("save_image", [&] {
    require(frame != nullptr && path != nullptr, "null argument");
    hogsvm::save_pgm(frame->frame, path);
  });
}

int32_t hogsvm_frame_width(const hogsvm_frame* frame) { return frame ? frame->frame.width : 0; }
int32_t hogsvm_frame_height(const hogsvm_frame* frame) { return frame ? frame->frame.height : 0; }
void hogsvm_frame_free(hogsvm_frame* frame) { delete frame; }

hogsvm_status hogsvm_model_load(const char* path, hogsvm_model** out) {
  return guarded("load_model", [&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto m = std::make_unique<hogsvm_model>(hogsvm_model{hogsvm::load_model(path)});
    *out = m.release();
  });
}

hogsvm_status hogsvm_model_from_raw(const int64_t* weights, size_t count, int64_t bias_raw,
                                    hogsvm_model** out) {
  return guarded("model_from_raw", [&] {
    require(weights != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto m = std::make_unique<hogsvm_model>(
        hogsvm_model{hogsvm::SvmModel::from_raw({weights, count}, bias_raw)});
    *out = m.release();
  });
}

hogsvm_status hogsvm_model_save(const hogsvm_model* model, const char* path) {
  return guarded("save_model", [&] {
    require(model != nullptr && path != nullptr, "null argument");
    hogsvm::save_model(model->model, path);
  });
}

void hogsvm_model_free(hogsvm_model* model) { delete model; }

hogsvm_status hogsvm_float_model_load(const char* path, hogsvm_float_model** out) {
  return guarded("load_float_model", [&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto m = std::make_unique<hogsvm_float_model>(
        hogsvm_float_model{hogsvm::load_float_model(path)});
    *out = m.release();
  });
}

hogsvm_status hogsvm_float_model_save(const hogsvm_float_model* model, const char* path) {
  return guarded("save_float_model", [&] {
    require(model != nullptr && path != nullptr, "null argument");
    hogsvm::save_float_model(model->model, path);
  });
}

hogsvm_status hogsvm_float_model_quantize(const hogsvm_float_model* model, hogsvm_model** out,
                                          double* scale) {
  return guarded("quantize_model", [&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    hogsvm::QuantizedModel q = hogsvm::quantize_model(model->model);
    if (scale != nullptr) *scale = q.scale;
    *out = std::make_unique<hogsvm_model>(hogsvm_model{std::move(q.model)}).release();
  });
}

void hogsvm_float_model_free(hogsvm_float_model* model) { delete model; }

void hogsvm_detect_options_default(hogsvm_detect_options* options) {
  if (options == nullptr) return;
  options->ppc = 4;
  options->threshold = 0.0;
  options->iou = 0.5;
  options->apply_nms = 1;
}

hogsvm_status hogsvm_detect(const hogsvm_frame* frame, const hogsvm_model* model,
                            const hogsvm_detect_options* options, hogsvm_detections** out) {
  return guarded("detect", [&] {
    require(frame != nullptr && model != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const hogsvm::DetectorOptions opts = to_options(options);
    std::vector<hogsvm::Detection> dets = hogsvm::run_pipeline(frame->frame, model->model, opts).detections;
    if (options == nullptr || options->apply_nms != 0) dets = hogsvm::nms(std::move(dets), opts.iou);
    *out = std::make_unique<hogsvm_detections>(hogsvm_detections{std::move(dets)}).release();
  });
}

size_t hogsvm_detections_count(const hogsvm_detections* detections) {
  return detections ? detections->items.size() : 0;
}

hogsvm_status hogsvm_detections_get(const hogsvm_detections* detections, size_t index,
                                    hogsvm_detection* out) {
  return guarded("detections_get", [&] {
    require(detections != nullptr && out != nullptr, "null argument");
    require(index < detections->items.size(), "detection index out of range");
    const hogsvm::Detection& d = detections->items[index];
    *out = {d.x, d.y, d.w, d.h, d.score};
  });
}

hogsvm_status hogsvm_detections_format(const hogsvm_detections* detections, char* buffer,
                                       size_t capacity, size_t* needed) {
  std::string text;
  const hogsvm_status s = guarded("format_detections", [&] {
    require(detections != nullptr, "null argument");
    text = hogsvm::format_detections(detections->items);
  });
  return s != HOGSVM_OK ? s : copy_text(text, buffer, capacity, needed);
}

hogsvm_status hogsvm_detections_write(const hogsvm_detections* detections, const char* path) {
  return guarded("write_detections", [&] {
    require(detections != nullptr && path != nullptr, "null argument");
    hogsvm::write_file_text(path, hogsvm::format_detections(detections->items));
  });
}

void hogsvm_detections_free(hogsvm_detections* detections) { delete detections; }

hogsvm_status hogsvm_compare(const hogsvm_frame* frame, const hogsvm_float_model* float_model,
                             int32_t ppc, double threshold, hogsvm_report** out) {
  return guarded("compare", [&] {
    require(frame != nullptr && float_model != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const hogsvm::QuantizedModel q = hogsvm::quantize_model(float_model->model);
    auto r = std::make_unique<hogsvm_report>();
    r->report = hogsvm::compare_paths(frame->frame, q.model, float_model->model, ppc, threshold);
    r->text = hogsvm::format_report(r->report);
    *out = r.release();
  });
}

hogsvm_status hogsvm_report_get(const hogsvm_report* report, const char* key, double* value) {
  return guarded("report_get", [&] {
    require(report != nullptr && key != nullptr && value != nullptr, "null argument");
    const std::string needle = std::string(key) + "=";
    std::size_t pos = 0;
    while (pos < report->text.size()) {
      const std::size_t end = report->text.find('\n', pos);
      const std::string line = report->text.substr(pos, end - pos);
      if (line.rfind(needle, 0) == 0) {
        *value = std::stod(line.substr(needle.size()));
        return;
      }
      if (end == std::string::npos) break;
      pos = end + 1;
    }
    hogsvm::fail(hogsvm::ErrorKind::kInvalidArgument, "unknown report key '" + std::string(key) + "'");
  });
}

hogsvm_status hogsvm_report_format(const hogsvm_report* report, char* buffer, size_t capacity,
                                   size_t* needed) {
  if (report == nullptr) {
    t_last_error = "report_format: null argument";
    return HOGSVM_E_INVALID_ARGUMENT;
  }
  return copy_text(report->text, buffer, capacity, needed);
}

void hogsvm_report_free(hogsvm_report* report) { delete report; }

hogsvm_status hogsvm_dump(const hogsvm_frame* frame, int32_t ppc, hogsvm_dump_stage stage,
                          const char* path) {
  return guarded("dump", [&] {
    require(frame != nullptr && path != nullptr, "null argument");
    require(stage == HOGSVM_DUMP_CELLS || stage == HOGSVM_DUMP_BLOCKS, "unknown dump stage");
    const hogsvm::GradientField field = hogsvm::run_gradient_stage(frame->frame, ppc);
    const hogsvm::CellGrid cells = hogsvm::run_histogram_stage(field, ppc);
    if (stage == HOGSVM_DUMP_CELLS) {
      hogsvm::write_file_bytes(path, hogsvm::serialize_cells(cells));
    } else {
      hogsvm::write_file_bytes(path, hogsvm::serialize_blocks(hogsvm::run_normalize_stage(cells)));
    }
  });
}

void hogsvm_train_options_default(hogsvm_train_options* options) {
  if (options == nullptr) return;
  const hogsvm::TrainOptions d;
  options->lambda = d.lambda;
  options->epochs = d.epochs;
  options->seed = d.seed;
}

hogsvm_status hogsvm_train_manifest(const char* manifest, const hogsvm_train_options* options,
                                    hogsvm_float_model** out, double* accuracy) {
  return guarded("train", [&] {
    require(manifest != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const std::vector<hogsvm::Sample> samples = hogsvm::load_manifest(manifest);
    hogsvm::FloatModel m = hogsvm::train(samples, to_train_options(options));
    if (accuracy != nullptr) *accuracy = hogsvm::accuracy(samples, m);
    *out = std::make_unique<hogsvm_float_model>(hogsvm_float_model{std::move(m)}).release();
  });
}

hogsvm_status hogsvm_train_synthetic(int32_t per_class, const hogsvm_train_options* options,
                                     hogsvm_float_model** out, double* accuracy) {
  return guarded("train", [&] {
    require(out != nullptr, "null argument");
    *out = nullptr;
    const hogsvm::TrainOptions opts = to_train_options(options);
    const hogsvm::SyntheticSet set = hogsvm::synthetic_dataset(per_class, opts.seed);
    hogsvm::FloatModel m = hogsvm::train(set.samples, opts);
    if (accuracy != nullptr) *accuracy = hogsvm::accuracy(set.samples, m);
    *out = std::make_unique<hogsvm_float_model>(hogsvm_float_model{std::move(m)}).release();
  });
}

hogsvm_status hogsvm_bench(const hogsvm_frame* frame, const hogsvm_model* model,
                           const hogsvm_detect_options* options, int32_t reps, int32_t threads,
                           hogsvm_bench_report* out) {
  return guarded("bench", [&] {
    require(frame != nullptr && out != nullptr, "null argument");
    const hogsvm::SvmModel zero;
    const hogsvm::SvmModel& m = model != nullptr ? model->model : zero;
    const hogsvm::BenchReport r = hogsvm::bench(frame->frame, m, to_options(options), reps, threads);
    *out = {r.width,
            r.height,
            r.ppc,
            r.reps,
            r.threads,
            r.cells_per_frame,
            r.blocks_per_frame,
            r.windows_per_frame,
            r.detections_per_frame,
            r.total_seconds,
            r.frames_per_second,
            r.megapixels_per_second,
            r.mean_stage_seconds.gradient * 1e3,
            r.mean_stage_seconds.histogram * 1e3,
            r.mean_stage_seconds.normalize * 1e3,
            r.mean_stage_seconds.svm * 1e3,
            r.mean_stage_seconds.nms * 1e3};
  });
}

hogsvm_status hogsvm_bench_report_format(const hogsvm_bench_report* report, char* buffer,
                                         size_t capacity, size_t* needed) {
  if (report == nullptr) {
    t_last_error = "bench_report_format: null argument";
    return HOGSVM_E_INVALID_ARGUMENT;
  }
  hogsvm::BenchReport r;
  r.width = report->width;
  r.height = report->height;
  r.ppc = report->ppc;
  r.reps = report->reps;
  r.threads = report->threads;
  r.cells_per_frame = report->cells_per_frame;
  r.blocks_per_frame = report->blocks_per_frame;
  r.windows_per_frame = report->windows_per_frame;
  r.detections_per_frame = report->detections_per_frame;
  r.total_seconds = report->total_seconds;
  r.frames_per_second = report->frames_per_second;
  r.megapixels_per_second = report->megapixels_per_second;
  r.mean_stage_seconds = {report->gradient_ms / 1e3, report->histogram_ms / 1e3,
                          report->normalize_ms / 1e3, report->svm_ms / 1e3, report->nms_ms / 1e3};
  return copy_text(hogsvm::format_bench_report(r), buffer, capacity, needed);
}

}  // extern "C"
