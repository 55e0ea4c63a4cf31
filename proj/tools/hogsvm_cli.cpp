// hogsvm command-line tool. Talks to the library exclusively through hogsvm.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hogsvm/hogsvm.h"

namespace {

struct Failure {
  hogsvm_status status;
};

void check(hogsvm_status status) {
  if (status != HOGSVM_OK) throw Failure{status};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using FramePtr = std::unique_ptr<hogsvm_frame, Deleter<hogsvm_frame, hogsvm_frame_free>>;
using ModelPtr = std::unique_ptr<hogsvm_model, Deleter<hogsvm_model, hogsvm_model_free>>;
using FloatModelPtr =
    std::unique_ptr<hogsvm_float_model, Deleter<hogsvm_float_model, hogsvm_float_model_free>>;
using DetectionsPtr =
    std::unique_ptr<hogsvm_detections, Deleter<hogsvm_detections, hogsvm_detections_free>>;
using ReportPtr = std::unique_ptr<hogsvm_report, Deleter<hogsvm_report, hogsvm_report_free>>;

template <class Format>
std::string read_text(Format&& format) {
  std::size_t needed = 0;
  check(format(nullptr, 0, &needed));
  std::string text(needed, '\0');
  check(format(text.data(), text.size(), &needed));
  text.resize(needed - 1);
  return text;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << text;
  if (!out) {
    std::fprintf(stderr, "hogsvm: output: cannot write %s\n", out_path.c_str());
    throw Failure{HOGSVM_E_IO};
  }
}

FramePtr load_frame(const std::string& path) {
  hogsvm_frame* f = nullptr;
  check(hogsvm_frame_load(path.c_str(), &f));
  return FramePtr(f);
}

// Uniform random 8-bit frame, used when bench is given --random instead of an image.
FramePtr random_frame(const std::string& size, std::uint64_t seed) {
  int w = 0;
  int h = 0;
  char x = 0;
  std::istringstream in(size);
  if (!(in >> w >> x >> h) || x != 'x' || w <= 0 || h <= 0) {
    std::fprintf(stderr, "hogsvm: --random expects WIDTHxHEIGHT, got '%s'\n", size.c_str());
    throw Failure{HOGSVM_E_INVALID_ARGUMENT};
  }
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (auto& p : pixels) p = static_cast<std::uint8_t>(rng() & 0xFF);
  hogsvm_frame* f = nullptr;
  check(hogsvm_frame_create(w, h, pixels.data(), &f));
  return FramePtr(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-point HOG + linear SVM pedestrian detector"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hogsvm_version()));

  int ppc = 4;
  double threshold = 0.0;
  double iou = 0.5;
  std::string model_path;
  std::string out_path;
  std::string input;
  std::string dump_stage;
  int reps = 10;
  int threads = 1;
  std::uint64_t seed = 1;
  double lambda = 1e-4;
  int epochs = 20;
  int synthetic = 0;
  std::string random_size;

  auto add_ppc = [&](CLI::App* cmd) {
    cmd->add_option("--ppc", ppc, "Pixels per clock (1, 2, 4 or 8)")
        ->check(CLI::IsMember({1, 2, 4, 8}))
        ->capture_default_str();
  };

  CLI::App* detect = app.add_subcommand("detect", "Detect pedestrians; writes NMS-filtered windows");
  detect->add_option("image", input, "Input PGM/PPM")->required();
  detect->add_option("--model", model_path, "Quantized model (HOGSVM1)")->required();
  add_ppc(detect);
  detect->add_option("--threshold", threshold, "Score threshold")->capture_default_str();
  detect->add_option("--iou", iou, "NMS IoU threshold")->capture_default_str();
  detect->add_option("--out", out_path, "Detection file (default: stdout)");

  CLI::App* compare = app.add_subcommand("compare", "Fixed-point vs floating-point error report");
  compare->add_option("image", input, "Input PGM/PPM")->required();
  compare->add_option("--model", model_path, "Float model (HOGSVMF1)")->required();
  add_ppc(compare);
  compare->add_option("--threshold", threshold, "Score threshold")->capture_default_str();
  compare->add_option("--out", out_path, "Report file (default: stdout)");

  CLI::App* train = app.add_subcommand("train", "Train a linear SVM on HOG features");
  auto* manifest_opt = train->add_option("manifest", input, "Sample manifest ('<label> <path>' lines)");
  auto* synth_opt = train->add_option("--synthetic", synthetic, "Use N generated samples per class");
  manifest_opt->excludes(synth_opt);
  train->add_option("--lambda", lambda, "Regularization strength")->capture_default_str();
  train->add_option("--epochs", epochs, "Passes over the data")->capture_default_str();
  train->add_option("--seed", seed, "Shuffle / generator seed")->capture_default_str();
  train->add_option("--out", out_path, "Output prefix: writes PREFIX.float and PREFIX.fixed")
      ->required();

  CLI::App* bench = app.add_subcommand("bench", "Throughput benchmark");
  auto* bench_image = bench->add_option("image", input, "Input PGM/PPM");
  auto* bench_random =
      bench->add_option("--random", random_size, "Use a random WIDTHxHEIGHT frame instead");
  bench_image->excludes(bench_random);
  bench->add_option("--model", model_path, "Quantized model (default: all-zero)");
  add_ppc(bench);
  bench->add_option("--threshold", threshold, "Score threshold")->capture_default_str();
  bench->add_option("--iou", iou, "NMS IoU threshold")->capture_default_str();
  bench->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--threads", threads, "Worker threads (frame-level)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--seed", seed, "Seed for --random")->capture_default_str();
  bench->add_option("--out", out_path, "Report file (default: stdout)");

  CLI::App* dump = app.add_subcommand("dump", "Write cell or block raw values");
  dump->add_option("image", input, "Input PGM/PPM")->required();
  dump->add_option("--dump", dump_stage, "Stage")->required()->check(CLI::IsMember({"cells", "blocks"}));
  add_ppc(dump);
  dump->add_option("--out", out_path, "Blob file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    hogsvm_detect_options options;
    hogsvm_detect_options_default(&options);
    options.ppc = ppc;
    options.threshold = threshold;
    options.iou = iou;

    if (detect->parsed()) {
      FramePtr frame = load_frame(input);
      hogsvm_model* m = nullptr;
      check(hogsvm_model_load(model_path.c_str(), &m));
      ModelPtr model(m);
      hogsvm_detections* d = nullptr;
      check(hogsvm_detect(frame.get(), model.get(), &options, &d));
      DetectionsPtr dets(d);
      emit(read_text([&](char* b, std::size_t c, std::size_t* n) {
             return hogsvm_detections_format(dets.get(), b, c, n);
           }),
           out_path);
    } else if (compare->parsed()) {
      FramePtr frame = load_frame(input);
      hogsvm_float_model* m = nullptr;
      check(hogsvm_float_model_load(model_path.c_str(), &m));
      FloatModelPtr model(m);
      hogsvm_report* r = nullptr;
      check(hogsvm_compare(frame.get(), model.get(), ppc, threshold, &r));
      ReportPtr report(r);
      emit(read_text([&](char* b, std::size_t c, std::size_t* n) {
             return hogsvm_report_format(report.get(), b, c, n);
           }),
           out_path);
    } else if (train->parsed()) {
      if (input.empty() && synthetic <= 0) {
        std::fprintf(stderr, "hogsvm: train: give a manifest or --synthetic N\n");
        return 2;
      }
      hogsvm_train_options topts;
      hogsvm_train_options_default(&topts);
      topts.lambda = lambda;
      topts.epochs = epochs;
      topts.seed = seed;
      hogsvm_float_model* fm = nullptr;
      double acc = 0.0;
      if (!input.empty()) {
        check(hogsvm_train_manifest(input.c_str(), &topts, &fm, &acc));
      } else {
        check(hogsvm_train_synthetic(synthetic, &topts, &fm, &acc));
      }
      FloatModelPtr float_model(fm);
      hogsvm_model* qm = nullptr;
      double scale = 1.0;
      check(hogsvm_float_model_quantize(float_model.get(), &qm, &scale));
      ModelPtr model(qm);
      const std::string float_path = out_path + ".float";
      const std::string fixed_path = out_path + ".fixed";
      check(hogsvm_float_model_save(float_model.get(), float_path.c_str()));
      check(hogsvm_model_save(model.get(), fixed_path.c_str()));
      std::printf("training_accuracy=%.6f\nquantization_scale=%.17g\nfloat_model=%s\nfixed_model=%s\n",
                  acc, scale, float_path.c_str(), fixed_path.c_str());
    } else if (bench->parsed()) {
      if (input.empty() && random_size.empty()) {
        std::fprintf(stderr, "hogsvm: bench: give an image or --random WIDTHxHEIGHT\n");
        return 2;
      }
      FramePtr frame = input.empty() ? random_frame(random_size, seed) : load_frame(input);
      ModelPtr model;
      if (!model_path.empty()) {
        hogsvm_model* m = nullptr;
        check(hogsvm_model_load(model_path.c_str(), &m));
        model.reset(m);
      }
      hogsvm_bench_report report;
      check(hogsvm_bench(frame.get(), model.get(), &options, reps, threads, &report));
      emit(read_text([&](char* b, std::size_t c, std::size_t* n) {
             return hogsvm_bench_report_format(&report, b, c, n);
           }),
           out_path);
    } else if (dump->parsed()) {
      FramePtr frame = load_frame(input);
      check(hogsvm_dump(frame.get(), ppc, dump_stage == "cells" ? HOGSVM_DUMP_CELLS : HOGSVM_DUMP_BLOCKS,
                        out_path.c_str()));
    }
  } catch (const Failure& f) {
    const char* msg = hogsvm_last_error();
    if (msg != nullptr && msg[0] != '\0') {
      std::fprintf(stderr, "hogsvm: %s\n", msg);
    } else if (f.status != HOGSVM_OK) {
      std::fprintf(stderr, "hogsvm: %s\n", hogsvm_status_string(f.status));
    }
    return 1;
  }
  return 0;
}
