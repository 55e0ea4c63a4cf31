#ifndef HOGSVM_NORMALIZE_HPP
#define HOGSVM_NORMALIZE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hogsvm/fixedpoint.hpp"
#include "hogsvm/histogram.hpp"

namespace hogsvm {

inline constexpr int kBlockLen = 4 * kBins;

/// 36 normalized entries ordered [H(i,j), H(i+1,j), H(i,j+1), H(i+1,j+1)].
struct BlockFeature {
  std::array<Fx, kBlockLen> values{};
  int block_row = 0;
  int block_col = 0;
};

/// Four cells of one block in feature order plus their summed squares.
struct BlockInput {
  std::array<CellHistogram, 4> cells{};
  Fx block_sq_sum;
  int block_row = 0;
  int block_col = 0;
};

/// Intermediate values of one normalize_block call.
struct NormScratch {
  std::array<Fx, 4> cell_sq_sum{};
  Fx block_sq_sum;
  Fx inv_norm1;
  Fx inv_norm2;
};

/// 0x5F3759DF initial guess refined by exactly one Newton-Raphson step.
/// Throws kDomain unless x is positive and finite.
float fast_inv_sqrt(float x);

/// fast_inv_sqrt of `x` in single precision, quantized into `out`.
Fx fast_inv_sqrt_fx(const Fx& x, FxFormat out);

/// Sum of squared bins in the profile's prepare_first_norm format.
Fx cell_square_sum(const CellHistogram& cell, const PrecisionProfile& profile = default_profile());

/// L2 -> clip at 0.2 -> L2. The guard term is one LSB of each sum of squares.
BlockFeature normalize_block(const BlockInput& block,
                             const PrecisionProfile& profile = default_profile(),
                             NormScratch* scratch = nullptr);

/// Assembles overlapping 2x2 blocks from cells arriving in raster order,
/// holding the previous cell row and its per-cell square sums.
class BlockStream {
 public:
  BlockStream(int cell_rows, int cell_cols, const PrecisionProfile& profile = default_profile());

  template <class Sink>
  void push(const CellHistogram& cell, Sink&& sink) {
    accept(cell);
    if (row_ >= 1 && col_ >= 1) sink(static_cast<const BlockInput&>(assemble()));
    advance();
  }

  bool done() const noexcept { return row_ == rows_; }

 private:
  struct Slot {
    CellHistogram cell;
    Fx sq_sum;
  };

  void accept(const CellHistogram& cell);
  const BlockInput& assemble();
  void advance() noexcept;

  int rows_;
  int cols_;
  PrecisionProfile profile_;
  int row_ = 0;
  int col_ = 0;
  std::vector<Slot> previous_;
  std::vector<Slot> current_;
  BlockInput out_;
};

std::vector<BlockInput> block_stream(std::span<const CellHistogram> cells, int cell_rows,
                                     int cell_cols,
                                     const PrecisionProfile& profile = default_profile());

/// Dense grid of block features (raw values, 36 per block, row-major).
struct BlockGrid {
  int rows = 0;
  int cols = 0;
  FxFormat format{10, 9};
  std::vector<std::int32_t> raw;

  std::span<const std::int32_t> values(int r, int c) const {
    return {raw.data() + (static_cast<std::size_t>(r) * cols + c) * kBlockLen, kBlockLen};
  }
  BlockFeature block(int r, int c) const;
};

BlockGrid run_normalize_stage(const CellGrid& cells,
                              const PrecisionProfile& profile = default_profile());

/// Row-major blocks, 36 little-endian int32 raw values each.
std::vector<std::uint8_t> serialize_blocks(const BlockGrid& grid);

}  // namespace hogsvm

#endif  // HOGSVM_NORMALIZE_HPP
