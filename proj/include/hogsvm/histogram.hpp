#ifndef HOGSVM_HISTOGRAM_HPP
#define HOGSVM_HISTOGRAM_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hogsvm/fixedpoint.hpp"
#include "hogsvm/gradient.hpp"

namespace hogsvm {

struct CellHistogram {
  std::array<Fx, kBins> bins{};
  int cell_row = 0;
  int cell_col = 0;
};

struct SplitAmounts {
  Fx lo;
  Fx hi;
};

/// Uniform half/half split: both amounts are m >> 1 in the magnitude format.
SplitAmounts split_contribution(const BinnedGradient& bg);

/// Register-bank model of the cell histogram stage: one 9-bin accumulator per
/// cell column of the frame, re-used for every cell row. Lanes of a packet
/// that land in the same bin are summed before the register update.
class CellAccumulator {
 public:
  CellAccumulator(int width, int height, const PrecisionProfile& profile = default_profile());

  /// Emits each cell as soon as its bottom-right pixel has been consumed.
  template <class Sink>
  void push(const GradientPacket& packet, Sink&& sink) {
    const int x = accept(packet);
    if ((y_ % kCellSize) == kCellSize - 1 && ((x + packet.count) % kCellSize) == 0) {
      sink(static_cast<const CellHistogram&>(take(x / kCellSize)));
    }
    advance(packet);
  }

  bool done() const noexcept { return y_ == height_; }

 private:
  int accept(const GradientPacket& packet);
  void advance(const GradientPacket& packet) noexcept;
  const CellHistogram& take(int col);

  int width_;
  int height_;
  FxFormat value_format_;
  int x_ = 0;
  int y_ = 0;
  std::vector<std::array<std::int64_t, kBins>> registers_;
  CellHistogram out_;
};

std::vector<CellHistogram> accumulate_cells(std::span<const GradientPacket> packets, int width,
                                            int height,
                                            const PrecisionProfile& profile = default_profile());

/// Dense grid of cell histograms (raw values, `kBins` per cell, row-major).
struct CellGrid {
  int rows = 0;
  int cols = 0;
  FxFormat format{18, 4};
  std::vector<std::int32_t> raw;

  std::span<const std::int32_t> bins(int r, int c) const {
    return {raw.data() + (static_cast<std::size_t>(r) * cols + c) * kBins, kBins};
  }
  CellHistogram cell(int r, int c) const;
};

CellGrid make_cell_grid(std::span<const CellHistogram> cells, int rows, int cols,
                        FxFormat format);

CellGrid run_histogram_stage(const GradientField& field, int ppc,
                             const PrecisionProfile& profile = default_profile());

/// Row-major cells, 9 little-endian int32 raw values each.
std::vector<std::uint8_t> serialize_cells(const CellGrid& grid);

}  // namespace hogsvm

#endif  // HOGSVM_HISTOGRAM_HPP
