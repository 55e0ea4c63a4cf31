#include "hogsvm/histogram.hpp"

#include <string>

#include "hogsvm/serialize.hpp"

namespace hogsvm {

SplitAmounts split_contribution(const BinnedGradient& bg) {
  const Fx half = fx_shr(bg.magnitude, 1);
  return {half, half};
}

CellAccumulator::CellAccumulator(int width, int height, const PrecisionProfile& profile)
    : width_(width), height_(height), value_format_(profile.histogram_value) {
  require_cell_aligned(width, height);
  registers_.assign(static_cast<std::size_t>(width / kCellSize), {});
}

int CellAccumulator::accept(const GradientPacket& packet) {
  if (y_ >= height_) fail(ErrorKind::kStreamProtocol, "gradient packet after end of frame");
  if ((x_ == 0 && y_ == 0) != packet.sof) {
    fail(ErrorKind::kStreamProtocol, "start-of-frame flag out of place at row " +
                                         std::to_string(y_));
  }
  if (packet.count == 0 || kCellSize % packet.count != 0) {
    fail(ErrorKind::kStreamProtocol, "packet lane count must divide the cell width");
  }
  if (packet.x != x_ || packet.y != y_) {
    fail(ErrorKind::kStreamProtocol, "gradient packet position (" + std::to_string(packet.x) +
                                         "," + std::to_string(packet.y) + ") expected (" +
                                         std::to_string(x_) + "," + std::to_string(y_) + ")");
  }
  if ((x_ + packet.count == width_) != packet.eol) {
    fail(ErrorKind::kStreamProtocol, "end-of-line flag out of place at row " + std::to_string(y_));
  }

  // Summation tree over the lanes, then one register update per bin.
  std::array<std::int64_t, kBins> tree{};
  for (int l = 0; l < packet.count; ++l) {
    const BinnedGradient& bg = packet.lanes[l];
    const SplitAmounts s = split_contribution(bg);
    tree[bg.bin_lo] += s.lo.raw();
    tree[bg.bin_hi] += s.hi.raw();
  }
  const int from_fraction = packet.lanes[0].magnitude.format().fraction;
  auto& reg = registers_[static_cast<std::size_t>(x_ / kCellSize)];
  for (int b = 0; b < kBins; ++b) {
    if (tree[b] == 0) continue;
    const wide_int widened = requantize_raw(tree[b], from_fraction,
                                            FxFormat{64, value_format_.fraction});
    reg[b] = saturate_raw(static_cast<wide_int>(reg[b]) + widened, value_format_);
  }
  return x_;
}

void CellAccumulator::advance(const GradientPacket& packet) noexcept {
  x_ += packet.count;
  if (x_ == width_) {
    x_ = 0;
    ++y_;
  }
}

const CellHistogram& CellAccumulator::take(int col) {
  auto& reg = registers_[static_cast<std::size_t>(col)];
  out_.cell_row = y_ / kCellSize;
  out_.cell_col = col;
  for (int b = 0; b < kBins; ++b) {
    out_.bins[b] = make_fx_unchecked(reg[b], value_format_);
    reg[b] = 0;
  }
  return out_;
}

std::vector<CellHistogram> accumulate_cells(std::span<const GradientPacket> packets, int width,
                                            int height, const PrecisionProfile& profile) {
  CellAccumulator acc(width, height, profile);
  std::vector<CellHistogram> cells;
  cells.reserve(static_cast<std::size_t>(width / kCellSize) * (height / kCellSize));
  for (const GradientPacket& p : packets) {
    acc.push(p, [&](const CellHistogram& h) { cells.push_back(h); });
  }
  if (!acc.done()) fail(ErrorKind::kStreamProtocol, "gradient stream ended before end of frame");
  return cells;
}

CellHistogram CellGrid::cell(int r, int c) const {
  CellHistogram h;
  h.cell_row = r;
  h.cell_col = c;
  const auto b = bins(r, c);
  for (int k = 0; k < kBins; ++k) h.bins[k] = make_fx_unchecked(b[k], format);
  return h;
}

CellGrid make_cell_grid(std::span<const CellHistogram> cells, int rows, int cols,
                        FxFormat format) {
  if (cells.size() != static_cast<std::size_t>(rows) * cols) {
    fail(ErrorKind::kGeometry, "cell count does not match grid dimensions");
  }
  CellGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.format = format;
  grid.raw.resize(cells.size() * kBins);
  for (const CellHistogram& h : cells) {
    const std::size_t base = (static_cast<std::size_t>(h.cell_row) * cols + h.cell_col) * kBins;
    for (int k = 0; k < kBins; ++k) grid.raw[base + k] = static_cast<std::int32_t>(h.bins[k].raw());
  }
  return grid;
}

CellGrid run_histogram_stage(const GradientField& field, int ppc, const PrecisionProfile& profile) {
  CellAccumulator acc(field.width, field.height, profile);
  CellGrid grid;
  grid.rows = field.height / kCellSize;
  grid.cols = field.width / kCellSize;
  grid.format = profile.histogram_value;
  grid.raw.resize(static_cast<std::size_t>(grid.rows) * grid.cols * kBins);
  auto on_cell = [&](const CellHistogram& h) {
    std::int32_t* dst =
        grid.raw.data() + (static_cast<std::size_t>(h.cell_row) * grid.cols + h.cell_col) * kBins;
    for (int k = 0; k < kBins; ++k) dst[k] = static_cast<std::int32_t>(h.bins[k].raw());
  };
  for_each_gradient_packet(field, ppc, [&](const GradientPacket& p) { acc.push(p, on_cell); });
  return grid;
}

std::vector<std::uint8_t> serialize_cells(const CellGrid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(grid.raw.size() * 4);
  for (std::int32_t v : grid.raw) append_le32(out, v);
  return out;
}

}  // namespace hogsvm
