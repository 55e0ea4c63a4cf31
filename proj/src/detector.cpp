#include "hogsvm/detector.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <mutex>
#include <sstream>
#include <thread>

namespace hogsvm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool ranks_before(const Detection& a, const Detection& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

}  // namespace

PipelineResult run_pipeline(const Frame& frame, const SvmModel& model,
                            const DetectorOptions& options) {
  require_detection_geometry(frame.width, frame.height);
  require_ppc(options.ppc, frame.width);
  PipelineResult result;

  auto t = Clock::now();
  SaturationScope grad_sat;
  const GradientField field = run_gradient_stage(frame, options.ppc, options.profile, options.tangents);
  result.saturations.gradient = grad_sat.count();
  result.timings.gradient = seconds_since(t);

  t = Clock::now();
  SaturationScope hist_sat;
  result.cells = run_histogram_stage(field, options.ppc, options.profile);
  result.saturations.histogram = hist_sat.count();
  result.timings.histogram = seconds_since(t);

  t = Clock::now();
  SaturationScope norm_sat;
  result.blocks = run_normalize_stage(result.cells, options.profile);
  result.saturations.normalize = norm_sat.count();
  result.timings.normalize = seconds_since(t);

  t = Clock::now();
  SaturationScope svm_sat;
  result.scores = score_windows(result.blocks, model, options.profile);
  result.detections = detections_from_scores(result.scores, options.threshold);
  result.saturations.svm = svm_sat.count();
  result.timings.svm = seconds_since(t);
  return result;
}

std::vector<Detection> detections_from_scores(const ScoreMap& scores, double threshold) {
  std::vector<Detection> out;
  for (int r = 0; r < scores.rows; ++r) {
    for (int c = 0; c < scores.cols; ++c) {
      const Fx s = scores.at(r, c);
      if (classify(s, threshold)) {
        out.push_back({c * kCellSize, r * kCellSize, kWindowWidth, kWindowHeight, s.to_double()});
      }
    }
  }
  return out;
}

std::vector<Detection> detect_frame(const Frame& frame, const SvmModel& model, int ppc,
                                    double threshold) {
  DetectorOptions options;
  options.ppc = ppc;
  options.threshold = threshold;
  return run_pipeline(frame, model, options).detections;
}

bool iou_exceeds(const Detection& a, const Detection& b, double threshold) noexcept {
  const long long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = static_cast<long long>(a.w) * a.h + static_cast<long long>(b.w) * b.h - inter;
  if (uni <= 0) return false;
  return static_cast<long double>(inter) > static_cast<long double>(threshold) * uni;
}

std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold) {
  std::sort(detections.begin(), detections.end(), ranks_before);
  std::vector<Detection> kept;
  std::vector<bool> suppressed(detections.size(), false);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(detections[i]);
    for (std::size_t j = i + 1; j < detections.size(); ++j) {
      if (!suppressed[j] && iou_exceeds(detections[i], detections[j], iou_threshold)) {
        suppressed[j] = true;
      }
    }
  }
  return kept;
}

std::string format_detections(std::span<const Detection> detections) {
  std::string out;
  char buf[64];
  for (const Detection& d : detections) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d.score);
    out += std::to_string(d.x) + ' ' + std::to_string(d.y) + ' ' + std::to_string(d.w) + ' ' +
           std::to_string(d.h) + ' ' + std::string(buf, end) + '\n';
  }
  return out;
}

BenchReport bench(const Frame& frame, const SvmModel& model, const DetectorOptions& options,
                  int reps, int threads) {
  if (reps < 1) fail(ErrorKind::kInvalidArgument, "reps must be at least 1");
  if (threads < 1) fail(ErrorKind::kInvalidArgument, "threads must be at least 1");
  threads = std::min(threads, reps);
  BenchReport report;
  report.width = frame.width;
  report.height = frame.height;
  report.ppc = options.ppc;
  report.reps = reps;
  report.threads = threads;

  std::mutex mu;
  bool have_counts = false;
  bool mismatch = false;
  auto one_rep = [&]() {
    PipelineResult r = run_pipeline(frame, model, options);
    const auto t = Clock::now();
    const std::size_t kept = nms(std::move(r.detections), options.iou).size();
    r.timings.nms = seconds_since(t);
    std::lock_guard lock(mu);
    const std::uint64_t cells = static_cast<std::uint64_t>(r.cells.rows) * r.cells.cols;
    const std::uint64_t blocks = static_cast<std::uint64_t>(r.blocks.rows) * r.blocks.cols;
    const std::uint64_t windows = static_cast<std::uint64_t>(r.scores.rows) * r.scores.cols;
    if (!have_counts) {
      report.cells_per_frame = cells;
      report.blocks_per_frame = blocks;
      report.windows_per_frame = windows;
      report.detections_per_frame = kept;
      have_counts = true;
    } else if (cells != report.cells_per_frame || blocks != report.blocks_per_frame ||
               windows != report.windows_per_frame || kept != report.detections_per_frame) {
      mismatch = true;
    }
    report.mean_stage_seconds.gradient += r.timings.gradient;
    report.mean_stage_seconds.histogram += r.timings.histogram;
    report.mean_stage_seconds.normalize += r.timings.normalize;
    report.mean_stage_seconds.svm += r.timings.svm;
    report.mean_stage_seconds.nms += r.timings.nms;
  };

  const auto start = Clock::now();
  if (threads == 1) {
    for (int i = 0; i < reps; ++i) one_rep();
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      const int share = reps / threads + (t < reps % threads ? 1 : 0);
      pool.emplace_back([&, t, share]() {
        try {
          for (int i = 0; i < share; ++i) one_rep();
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  report.total_seconds = seconds_since(start);
  if (mismatch) fail(ErrorKind::kContract, "benchmark repetitions produced different counts");

  const double n = static_cast<double>(reps);
  report.mean_stage_seconds.gradient /= n;
  report.mean_stage_seconds.histogram /= n;
  report.mean_stage_seconds.normalize /= n;
  report.mean_stage_seconds.svm /= n;
  report.mean_stage_seconds.nms /= n;
  if (report.total_seconds > 0.0) {
    report.frames_per_second = n / report.total_seconds;
    report.megapixels_per_second =
        n * static_cast<double>(frame.pixels.size()) / 1e6 / report.total_seconds;
  }
  return report;
}

std::string format_bench_report(const BenchReport& r) {
  std::ostringstream out;
  out.precision(6);
  out << "width=" << r.width << '\n'
      << "height=" << r.height << '\n'
      << "ppc=" << r.ppc << '\n'
      << "reps=" << r.reps << '\n'
      << "threads=" << r.threads << '\n'
      << "cells_per_frame=" << r.cells_per_frame << '\n'
      << "blocks_per_frame=" << r.blocks_per_frame << '\n'
      << "windows_per_frame=" << r.windows_per_frame << '\n'
      << "detections_per_frame=" << r.detections_per_frame << '\n'
      << "total_seconds=" << r.total_seconds << '\n'
      << "frames_per_second=" << r.frames_per_second << '\n'
      << "megapixels_per_second=" << r.megapixels_per_second << '\n'
      << "stage_gradient_ms=" << r.mean_stage_seconds.gradient * 1e3 << '\n'
      << "stage_histogram_ms=" << r.mean_stage_seconds.histogram * 1e3 << '\n'
      << "stage_normalize_ms=" << r.mean_stage_seconds.normalize * 1e3 << '\n'
      << "stage_svm_ms=" << r.mean_stage_seconds.svm * 1e3 << '\n'
      << "stage_nms_ms=" << r.mean_stage_seconds.nms * 1e3 << '\n';
  return out.str();
}

}  // namespace hogsvm
