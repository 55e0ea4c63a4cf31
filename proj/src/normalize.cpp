#include "hogsvm/normalize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "hogsvm/serialize.hpp"

namespace hogsvm {

float fast_inv_sqrt(float x) {
  if (!(x > 0.0f) || !std::isfinite(x)) {
    fail(ErrorKind::kDomain, "fast_inv_sqrt requires a positive finite input");
  }
  const std::uint32_t bits = 0x5F3759DFu - (std::bit_cast<std::uint32_t>(x) >> 1);
  const float y = std::bit_cast<float>(bits);
  return y * (1.5f - 0.5f * x * y * y);
}

Fx fast_inv_sqrt_fx(const Fx& x, FxFormat out) {
  // Exact for widths up to 53 bits, then a single rounding to float.
  const auto single = static_cast<float>(x.to_double());
  return fx_quantize(static_cast<double>(fast_inv_sqrt(single)), out);
}

Fx cell_square_sum(const CellHistogram& cell, const PrecisionProfile& profile) {
  wide_int sum = 0;
  for (const Fx& b : cell.bins) sum += static_cast<wide_int>(b.raw()) * b.raw();
  const int fraction = 2 * profile.histogram_value.fraction;
  const FxFormat out = profile.prepare_first_norm;
  return make_fx_unchecked(requantize_raw(sum, fraction, out), out);
}

BlockFeature normalize_block(const BlockInput& block, const PrecisionProfile& profile,
                             NormScratch* scratch) {
  BlockFeature result;
  result.block_row = block.block_row;
  result.block_col = block.block_col;

  const FxFormat acc_fmt = profile.prepare_first_norm;
  const FxFormat mid_fmt = profile.feature_after_first_norm;
  const FxFormat out_fmt = profile.final_feature;

  // First normalization: n1 = 1/sqrt(sum + eps^2), eps^2 = one accumulator LSB.
  const Fx guarded1 = fx_add(block.block_sq_sum, make_fx_unchecked(1, acc_fmt), acc_fmt);
  const Fx n1 = fast_inv_sqrt_fx(guarded1, profile.first_inv_sqrt);

  std::array<Fx, kBlockLen> clipped;
  const Fx clip = fx_quantize(0.2, mid_fmt);
  for (int c = 0; c < 4; ++c) {
    for (int k = 0; k < kBins; ++k) {
      const Fx l2 = fx_mul(block.cells[c].bins[k], n1, mid_fmt);
      clipped[c * kBins + k] = l2.raw() > clip.raw() ? clip : l2;
    }
  }

  // Second normalization: squares stay exact at twice the feature fraction.
  wide_int sum2 = 1;
  for (const Fx& v : clipped) sum2 += static_cast<wide_int>(v.raw()) * v.raw();
  const FxFormat sq_fmt{64, 2 * mid_fmt.fraction};
  const Fx guarded2 = make_fx_unchecked(saturate_raw(sum2, sq_fmt), sq_fmt);
  // An all-zero block scales nothing; skip the (saturating) 1/sqrt(eps^2).
  const Fx n2 = sum2 == 1 ? make_fx_unchecked(profile.second_inv_sqrt.max_raw(),
                                              profile.second_inv_sqrt)
                          : fast_inv_sqrt_fx(guarded2, profile.second_inv_sqrt);

  for (int i = 0; i < kBlockLen; ++i) result.values[i] = fx_mul(clipped[i], n2, out_fmt);

  if (scratch != nullptr) {
    for (int c = 0; c < 4; ++c) scratch->cell_sq_sum[c] = cell_square_sum(block.cells[c], profile);
    scratch->block_sq_sum = block.block_sq_sum;
    scratch->inv_norm1 = n1;
    scratch->inv_norm2 = n2;
  }
  return result;
}

BlockStream::BlockStream(int cell_rows, int cell_cols, const PrecisionProfile& profile)
    : rows_(cell_rows), cols_(cell_cols), profile_(profile) {
  if (cell_rows < 2 || cell_cols < 2) {
    fail(ErrorKind::kGeometry, "block assembly needs at least 2x2 cells (got " +
                                   std::to_string(cell_rows) + "x" + std::to_string(cell_cols) +
                                   ")");
  }
  previous_.resize(static_cast<std::size_t>(cell_cols));
  current_.resize(static_cast<std::size_t>(cell_cols));
}

void BlockStream::accept(const CellHistogram& cell) {
  if (row_ >= rows_) fail(ErrorKind::kStreamProtocol, "cell after end of frame");
  if (cell.cell_row != row_ || cell.cell_col != col_) {
    fail(ErrorKind::kStreamProtocol, "cell (" + std::to_string(cell.cell_row) + "," +
                                         std::to_string(cell.cell_col) + ") out of raster order");
  }
  Slot& slot = current_[static_cast<std::size_t>(col_)];
  slot.cell = cell;
  slot.sq_sum = cell_square_sum(cell, profile_);
}

const BlockInput& BlockStream::assemble() {
  const Slot& tl = previous_[static_cast<std::size_t>(col_ - 1)];
  const Slot& bl = current_[static_cast<std::size_t>(col_ - 1)];
  const Slot& tr = previous_[static_cast<std::size_t>(col_)];
  const Slot& br = current_[static_cast<std::size_t>(col_)];
  out_.cells = {tl.cell, bl.cell, tr.cell, br.cell};
  // Column pair sums, then the previous pair plus the current one.
  const FxFormat fmt = profile_.prepare_first_norm;
  const Fx left = fx_add(tl.sq_sum, bl.sq_sum, fmt);
  const Fx right = fx_add(tr.sq_sum, br.sq_sum, fmt);
  out_.block_sq_sum = fx_add(left, right, fmt);
  out_.block_row = row_ - 1;
  out_.block_col = col_ - 1;
  return out_;
}

void BlockStream::advance() noexcept {
  if (++col_ == cols_) {
    col_ = 0;
    ++row_;
    std::swap(previous_, current_);
  }
}

std::vector<BlockInput> block_stream(std::span<const CellHistogram> cells, int cell_rows,
                                     int cell_cols, const PrecisionProfile& profile) {
  BlockStream stream(cell_rows, cell_cols, profile);
  std::vector<BlockInput> blocks;
  blocks.reserve(static_cast<std::size_t>(cell_rows - 1) * (cell_cols - 1));
  for (const CellHistogram& c : cells) {
    stream.push(c, [&](const BlockInput& b) { blocks.push_back(b); });
  }
  if (!stream.done()) fail(ErrorKind::kStreamProtocol, "cell stream ended before end of frame");
  return blocks;
}

BlockFeature BlockGrid::block(int r, int c) const {
  BlockFeature f;
  f.block_row = r;
  f.block_col = c;
  const auto v = values(r, c);
  for (int k = 0; k < kBlockLen; ++k) f.values[k] = make_fx_unchecked(v[k], format);
  return f;
}

BlockGrid run_normalize_stage(const CellGrid& cells, const PrecisionProfile& profile) {
  BlockStream stream(cells.rows, cells.cols, profile);
  BlockGrid grid;
  grid.rows = cells.rows - 1;
  grid.cols = cells.cols - 1;
  grid.format = profile.final_feature;
  grid.raw.resize(static_cast<std::size_t>(grid.rows) * grid.cols * kBlockLen);
  auto on_block = [&](const BlockInput& in) {
    const BlockFeature f = normalize_block(in, profile);
    std::int32_t* dst =
        grid.raw.data() + (static_cast<std::size_t>(f.block_row) * grid.cols + f.block_col) * kBlockLen;
    for (int k = 0; k < kBlockLen; ++k) dst[k] = static_cast<std::int32_t>(f.values[k].raw());
  };
  for (int r = 0; r < cells.rows; ++r) {
    for (int c = 0; c < cells.cols; ++c) stream.push(cells.cell(r, c), on_block);
  }
  return grid;
}

std::vector<std::uint8_t> serialize_blocks(const BlockGrid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(grid.raw.size() * 4);
  for (std::int32_t v : grid.raw) append_le32(out, v);
  return out;
}

}  // namespace hogsvm
