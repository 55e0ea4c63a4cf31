#include "hogsvm/stream.hpp"

#include <string>

namespace hogsvm {

Frame::Frame(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) fail(ErrorKind::kGeometry, "frame dimensions must be positive");
  pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

Frame::Frame(int w, int h, std::vector<std::uint8_t> data)
    : width(w), height(h), pixels(std::move(data)) {
  if (w <= 0 || h <= 0) fail(ErrorKind::kGeometry, "frame dimensions must be positive");
  if (pixels.size() != static_cast<std::size_t>(w) * h) {
    fail(ErrorKind::kInvalidArgument, "pixel buffer size does not match " + std::to_string(w) +
                                          "x" + std::to_string(h));
  }
}

std::uint8_t Frame::clamped(int x, int y) const {
  x = x < 0 ? 0 : (x >= width ? width - 1 : x);
  y = y < 0 ? 0 : (y >= height ? height - 1 : y);
  return at(x, y);
}

void require_cell_aligned(int width, int height) {
  if (width <= 0 || height <= 0 || width % kCellSize != 0 || height % kCellSize != 0) {
    fail(ErrorKind::kGeometry, "frame " + std::to_string(width) + "x" + std::to_string(height) +
                                   " is not a multiple of the 8-pixel cell size");
  }
}

void require_detection_geometry(int width, int height) {
  require_cell_aligned(width, height);
  if (width < 64 || height < 128) {
    fail(ErrorKind::kGeometry, "frame " + std::to_string(width) + "x" + std::to_string(height) +
                                   " is smaller than one 64x128 window");
  }
}

bool valid_ppc(int ppc) noexcept { return ppc == 1 || ppc == 2 || ppc == 4 || ppc == 8; }

void require_ppc(int ppc, int width) {
  if (!valid_ppc(ppc)) {
    fail(ErrorKind::kInvalidArgument, "ppc must be one of 1, 2, 4, 8 (got " +
                                          std::to_string(ppc) + ")");
  }
  if (width <= 0 || width % ppc != 0) {
    fail(ErrorKind::kInvalidArgument, "ppc " + std::to_string(ppc) +
                                          " does not divide frame width " + std::to_string(width));
  }
}

std::vector<StreamPacket> pack_frame(const Frame& frame, int ppc) {
  require_ppc(ppc, frame.width);
  std::vector<StreamPacket> packets;
  packets.reserve(frame.pixels.size() / ppc);
  for_each_packet(frame, ppc, [&](const StreamPacket& p) { packets.push_back(p); });
  return packets;
}

namespace {

// Validates flag discipline of a whole sequence and returns (ppc, height).
std::pair<int, int> check_sequence(std::span<const StreamPacket> packets, int width) {
  if (packets.empty()) fail(ErrorKind::kStreamProtocol, "empty packet stream");
  const int ppc = packets.front().lanes;
  require_ppc(ppc, width);
  const std::size_t per_row = static_cast<std::size_t>(width / ppc);
  if (packets.size() % per_row != 0) {
    fail(ErrorKind::kStreamProtocol, "packet count is not a whole number of rows");
  }
  return {ppc, static_cast<int>(packets.size() / per_row)};
}

}  // namespace

Frame unpack_frame(std::span<const StreamPacket> packets, int width) {
  const auto [ppc, height] = check_sequence(packets, width);
  ContextStream validator(width, height);
  Frame frame(width, height);
  std::size_t i = 0;
  for (const StreamPacket& p : packets) {
    // Reuse the context stage purely for its protocol checks.
    validator.push(p, [](const ContextPacket&) {});
    for (int l = 0; l < p.lanes; ++l) frame.pixels[i++] = p.pixels[l];
  }
  return frame;
}

ContextStream::ContextStream(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) fail(ErrorKind::kGeometry, "context stream needs a positive size");
  for (auto& row : rows_) row.assign(static_cast<std::size_t>(width), 0);
}

std::uint8_t ContextStream::row_pixel(int row, int x) const { return rows_[row % 3][x]; }

void ContextStream::accept(const StreamPacket& packet) {
  if (y_ >= height_) fail(ErrorKind::kStreamProtocol, "packet after end of frame");
  const bool first = (x_ == 0 && y_ == 0);
  if (first) {
    if (!packet.sof) fail(ErrorKind::kStreamProtocol, "first packet of frame lacks start-of-frame");
    require_ppc(packet.lanes, width_);
    ppc_ = packet.lanes;
  } else {
    if (packet.sof) {
      fail(ErrorKind::kStreamProtocol, "start-of-frame inside frame at row " + std::to_string(y_));
    }
    if (packet.lanes != ppc_) fail(ErrorKind::kStreamProtocol, "lane count changed mid-frame");
  }
  auto& row = rows_[y_ % 3];
  for (int l = 0; l < ppc_; ++l) row[x_ + l] = packet.pixels[l];
  x_ += ppc_;
  const bool row_end = (x_ == width_);
  if (packet.eol != row_end) {
    fail(ErrorKind::kStreamProtocol,
         row_end ? "missing end-of-line at row " + std::to_string(y_)
                 : "unexpected end-of-line at row " + std::to_string(y_));
  }
  if (row_end) {
    x_ = 0;
    ++y_;
  }
}

std::vector<ContextPacket> context_stream(std::span<const StreamPacket> packets, int width) {
  const auto [ppc, height] = check_sequence(packets, width);
  ContextStream stream(width, height);
  std::vector<ContextPacket> out;
  out.reserve(packets.size());
  for (const StreamPacket& p : packets) {
    stream.push(p, [&](const ContextPacket& c) { out.push_back(c); });
  }
  return out;
}

}  // namespace hogsvm
