#ifndef HOGSVM_ORACLE_HPP
#define HOGSVM_ORACLE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hogsvm/gradient.hpp"
#include "hogsvm/stream.hpp"
#include "hogsvm/svm.hpp"

// Exact double-precision HOG+SVM. Bin centres (20k + 10 degrees), border
// handling and layout match the fixed-point path, so the two differ only
// where the fixed-point path approximates.
namespace hogsvm::oracle {

inline constexpr double kDefaultEpsilon = 1e-6;

struct Gradient {
  int gx = 0;
  int gy = 0;
  double magnitude = 0.0;
  double theta = 0.0;  // degrees in [0, 180); 0 for a zero gradient
};

Gradient gradient_at(const Frame& frame, int x, int y);

/// Folds atan2(gy, gx) into [0, 180) degrees.
double unsigned_orientation(int gx, int gy);

/// Bilinear vote between the two bins whose centres bracket theta.
struct Vote {
  int lo = 0;
  int hi = 1;
  double lo_weight = 1.0;
  double hi_weight = 0.0;
};
Vote bilinear_vote(double theta);

/// Bracketing pair under the half-open [c_k, c_k+1) convention.
BinPair bin_pair(double theta);

using Histogram = std::array<double, kBins>;
using BlockVector = std::array<double, 36>;

Histogram cell_histogram(const Frame& frame, int cell_row, int cell_col);

/// Cells in feature order [H(i,j), H(i+1,j), H(i,j+1), H(i+1,j+1)].
BlockVector block_normalize(std::span<const Histogram, 4> cells,
                            double epsilon = kDefaultEpsilon);

/// Whole-frame reference features.
struct Hog {
  int cell_rows = 0;
  int cell_cols = 0;
  std::vector<double> cells;   // 9 per cell
  std::vector<double> blocks;  // 36 per block, (rows-1) x (cols-1)

  std::span<const double> cell(int r, int c) const {
    return {cells.data() + (static_cast<std::size_t>(r) * cell_cols + c) * kBins, kBins};
  }
  std::span<const double> block(int r, int c) const {
    return {blocks.data() + (static_cast<std::size_t>(r) * (cell_cols - 1) + c) * 36, 36};
  }
};

Hog compute_hog(const Frame& frame, double epsilon = kDefaultEpsilon);

/// 3780-entry window vector: the 105 block vectors in block-raster order.
std::vector<double> window_feature(const Hog& hog, int anchor_row, int anchor_col);
/// Feature of a frame that is exactly one 64x128 window.
std::vector<double> window_feature(const Frame& window, double epsilon = kDefaultEpsilon);

/// w.f + b. Throws kContract unless `features` has 3780 entries.
double score(std::span<const double> features, const FloatModel& model);

}  // namespace hogsvm::oracle

namespace hogsvm {

/// Per-stage error of the fixed-point path against the oracle on one frame.
struct ErrorReport {
  int width = 0;
  int height = 0;
  std::uint64_t pixels = 0;
  std::uint64_t windows = 0;
  double model_scale = 1.0;

  double magnitude_max_abs_error = 0.0;
  double magnitude_mean_abs_error = 0.0;
  std::uint64_t magnitude_saturations = 0;
  std::uint64_t nonzero_gradients = 0;
  std::uint64_t bin_pair_disagreements = 0;
  double bin_pair_disagreement_rate = 0.0;

  double block_feature_max_abs_error = 0.0;
  double block_feature_mean_abs_error = 0.0;

  double score_max_abs_error = 0.0;
  double score_mean_abs_error = 0.0;

  std::uint64_t classification_disagreements = 0;
  double classification_disagreement_rate = 0.0;
  /// Largest per-window bound on |fixed score - float score|.
  double quantization_margin = 0.0;
  double max_abs_float_score_at_disagreement = 0.0;
  /// Disagreements whose |float score| exceeds that window's own bound (expected 0).
  std::uint64_t disagreements_beyond_margin = 0;

  std::uint64_t histogram_saturations = 0;
  std::uint64_t normalize_saturations = 0;
  std::uint64_t svm_saturations = 0;
};

/// Runs both paths. The float model is rescaled by quantization_scale() so it
/// sits on the same scale as a fixed model quantized from it.
ErrorReport compare_paths(const Frame& frame, const SvmModel& fixed_model,
                          const FloatModel& float_model, int ppc = 4, double threshold = 0.0);

/// Flat "key=value" lines in a fixed order.
std::string format_report(const ErrorReport& report);

}  // namespace hogsvm

#endif  // HOGSVM_ORACLE_HPP
