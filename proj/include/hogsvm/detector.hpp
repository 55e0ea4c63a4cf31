#ifndef HOGSVM_DETECTOR_HPP
#define HOGSVM_DETECTOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hogsvm/gradient.hpp"
#include "hogsvm/histogram.hpp"
#include "hogsvm/normalize.hpp"
#include "hogsvm/svm.hpp"

namespace hogsvm {

struct Detection {
  int x = 0;
  int y = 0;
  int w = kWindowWidth;
  int h = kWindowHeight;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectorOptions {
  int ppc = 4;
  double threshold = 0.0;
  double iou = 0.5;
  PrecisionProfile profile{};
  TangentLut tangents = exact_tangent_lut();
};

/// Wall-clock seconds spent in each stage of one run.
struct StageTimings {
  double gradient = 0.0;
  double histogram = 0.0;
  double normalize = 0.0;
  double svm = 0.0;
  double nms = 0.0;
};

/// Saturation events per stage; only the magnitude stage is expected to be non-zero.
struct StageSaturations {
  std::uint64_t gradient = 0;
  std::uint64_t histogram = 0;
  std::uint64_t normalize = 0;
  std::uint64_t svm = 0;
};

struct PipelineResult {
  CellGrid cells;
  BlockGrid blocks;
  ScoreMap scores;
  std::vector<Detection> detections;  // thresholded, before NMS
  StageTimings timings;
  StageSaturations saturations;
};

/// Runs every fixed-point stage over the frame and thresholds the scores.
PipelineResult run_pipeline(const Frame& frame, const SvmModel& model,
                            const DetectorOptions& options = {});

/// Windows with score > threshold, in raster anchor order.
std::vector<Detection> detections_from_scores(const ScoreMap& scores, double threshold);

/// Pre-NMS detections. Throws kGeometry for frames that are not cell aligned
/// or smaller than one window.
std::vector<Detection> detect_frame(const Frame& frame, const SvmModel& model, int ppc = 4,
                                    double threshold = 0.0);

/// true iff IoU(a, b) > threshold; exact integer areas.
bool iou_exceeds(const Detection& a, const Detection& b, double threshold) noexcept;

/// Greedy NMS. Order: descending score, ties by smaller y then smaller x.
std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold = 0.5);

struct BenchReport {
  int width = 0;
  int height = 0;
  int ppc = 0;
  int reps = 0;
  int threads = 1;
  std::uint64_t cells_per_frame = 0;
  std::uint64_t blocks_per_frame = 0;
  std::uint64_t windows_per_frame = 0;
  std::uint64_t detections_per_frame = 0;  // after NMS
  double total_seconds = 0.0;
  double frames_per_second = 0.0;
  double megapixels_per_second = 0.0;
  StageTimings mean_stage_seconds;
};

/// Runs the full pipeline plus NMS `reps` times. With threads > 1 the
/// repetitions are spread over worker threads (frame-level parallelism).
/// Throws kContract if repetitions disagree on any count.
BenchReport bench(const Frame& frame, const SvmModel& model, const DetectorOptions& options,
                  int reps, int threads = 1);

std::string format_bench_report(const BenchReport& report);

/// One "x y w h score" line per detection.
std::string format_detections(std::span<const Detection> detections);

}  // namespace hogsvm

#endif  // HOGSVM_DETECTOR_HPP
