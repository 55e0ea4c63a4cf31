#ifndef HOGSVM_SVM_HPP
#define HOGSVM_SVM_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hogsvm/fixedpoint.hpp"
#include "hogsvm/normalize.hpp"

namespace hogsvm {

inline constexpr int kWindowWidth = 64;
inline constexpr int kWindowHeight = 128;
inline constexpr int kWindowCellCols = kWindowWidth / kCellSize;    // 8
inline constexpr int kWindowCellRows = kWindowHeight / kCellSize;   // 16
inline constexpr int kWindowBlockCols = kWindowCellCols - 1;        // 7
inline constexpr int kWindowBlockRows = kWindowCellRows - 1;        // 15
inline constexpr int kWindowBlocks = kWindowBlockCols * kWindowBlockRows;
inline constexpr int kWindowFeatureLen = kWindowBlocks * kBlockLen;  // 3780

/// Index of weight (block_row, block_col, k) in the canonical flat layout.
constexpr int weight_index(int block_row, int block_col, int k) noexcept {
  return (block_row * kWindowBlockCols + block_col) * kBlockLen + k;
}

/// Quantized hyperplane: 3780 coefficients plus a bias.
class SvmModel {
 public:
  /// All-zero model in the given profile.
  explicit SvmModel(const PrecisionProfile& profile = default_profile());

  /// Throws kContract on a wrong weight count or any value outside its format.
  static SvmModel from_raw(std::span<const std::int64_t> weights, std::int64_t bias,
                           const PrecisionProfile& profile = default_profile());

  Fx weight(int block_row, int block_col, int k) const;
  std::span<const std::int32_t> block_weights(int block_row, int block_col) const {
    return {weights_.data() + weight_index(block_row, block_col, 0), kBlockLen};
  }
  std::span<const std::int32_t> weights_raw() const noexcept { return weights_; }
  const Fx& bias() const noexcept { return bias_; }
  FxFormat coefficient_format() const noexcept { return coefficient_format_; }

  friend bool operator==(const SvmModel&, const SvmModel&) = default;

 private:
  std::vector<std::int32_t> weights_;
  Fx bias_;
  FxFormat coefficient_format_;
};

/// Real-valued hyperplane for training and the reference path.
struct FloatModel {
  std::vector<double> weights = std::vector<double>(kWindowFeatureLen, 0.0);
  double bias = 0.0;

  friend bool operator==(const FloatModel&, const FloatModel&) = default;
};

/// Power-of-two factor 2^-k (k >= 0, minimal) that brings every weight
/// strictly inside the coefficient range and the bias inside the bias range.
/// Scaling by a positive factor preserves every score's sign and ordering.
double quantization_scale(const FloatModel& model,
                          const PrecisionProfile& profile = default_profile());

/// One score per cell-aligned window anchor, in the svm_prediction format.
struct ScoreMap {
  int rows = 0;
  int cols = 0;
  FxFormat format{33, 19};
  std::vector<std::int64_t> raw;

  Fx at(int r, int c) const {
    return make_fx_unchecked(raw[static_cast<std::size_t>(r) * cols + c], format);
  }
  bool empty() const noexcept { return raw.empty(); }
};

/// Window anchors for a cell grid; zero when a window does not fit.
constexpr int anchor_rows(int cell_rows) noexcept {
  return cell_rows >= kWindowCellRows ? cell_rows - (kWindowCellRows - 1) : 0;
}
constexpr int anchor_cols(int cell_cols) noexcept {
  return cell_cols >= kWindowCellCols ? cell_cols - (kWindowCellCols - 1) : 0;
}

/// Block-serial scorer. Each arriving block is dotted (as four 9-wide
/// partial products) with the matching weight block of every window that
/// covers it, and added to that window's partial score. A window's bias is
/// added when its last block arrives.
class WindowScorer {
 public:
  WindowScorer(int block_rows, int block_cols, const SvmModel& model,
               const PrecisionProfile& profile = default_profile());

  void push(const BlockFeature& block);
  void push_raw(int block_row, int block_col, std::span<const std::int32_t> values,
                int value_fraction);

  bool done() const noexcept { return next_ == static_cast<std::size_t>(block_rows_) * block_cols_; }
  ScoreMap take();

 private:
  int block_rows_;
  int block_cols_;
  const SvmModel* model_;
  FxFormat prediction_;
  std::int64_t bias_raw_;
  std::size_t next_ = 0;
  ScoreMap map_;
};

ScoreMap score_windows(const BlockGrid& blocks, const SvmModel& model,
                       const PrecisionProfile& profile = default_profile());
ScoreMap score_windows(std::span<const BlockFeature> blocks, int block_rows, int block_cols,
                       const SvmModel& model, const PrecisionProfile& profile = default_profile());

/// Strict: true iff score > threshold.
bool classify(const Fx& score, const Fx& threshold);
/// Threshold given as a real; equivalent to comparing against the exact real value.
bool classify(const Fx& score, double threshold);

// Model files. Quantized: "HOGSVM1", "bias <raw>", then 3780 lines
// "<block_row> <block_col> <idx> <raw>". Float: "HOGSVMF1" with decimals.
std::string format_model(const SvmModel& model);
SvmModel parse_model(std::string_view text, const PrecisionProfile& profile = default_profile());
std::string format_float_model(const FloatModel& model);
FloatModel parse_float_model(std::string_view text);

void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path,
                    const PrecisionProfile& profile = default_profile());
void save_float_model(const FloatModel& model, const std::filesystem::path& path);
FloatModel load_float_model(const std::filesystem::path& path);

}  // namespace hogsvm

#endif  // HOGSVM_SVM_HPP
