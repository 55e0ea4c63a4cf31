#ifndef HOGSVM_STREAM_HPP
#define HOGSVM_STREAM_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hogsvm/error.hpp"

namespace hogsvm {

inline constexpr int kCellSize = 8;
inline constexpr int kMaxPpc = 8;

/// Row-major 8-bit grayscale image.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0);
  Frame(int w, int h, std::vector<std::uint8_t> data);

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  /// Edge-replicating access: coordinates are clamped into the frame.
  std::uint8_t clamped(int x, int y) const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Throws kGeometry unless both dimensions are positive multiples of the cell size.
void require_cell_aligned(int width, int height);
/// Throws kGeometry unless the frame is cell aligned and holds at least one 64x128 window.
void require_detection_geometry(int width, int height);

bool valid_ppc(int ppc) noexcept;
/// Throws kInvalidArgument for ppc outside {1,2,4,8} or not dividing `width`.
void require_ppc(int ppc, int width);

/// One bus transaction: `lanes` pixels of a single row.
struct StreamPacket {
  std::array<std::uint8_t, kMaxPpc> pixels{};
  std::uint8_t lanes = 0;
  bool sof = false;
  bool eol = false;
};

/// Calls `sink(const StreamPacket&)` for every packet of `frame` in raster order.
template <class Sink>
void for_each_packet(const Frame& frame, int ppc, Sink&& sink) {
  require_ppc(ppc, frame.width);
  StreamPacket packet;
  packet.lanes = static_cast<std::uint8_t>(ppc);
  const std::uint8_t* src = frame.pixels.data();
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; x += ppc) {
      for (int l = 0; l < ppc; ++l) packet.pixels[l] = *src++;
      packet.sof = (x == 0 && y == 0);
      packet.eol = (x + ppc == frame.width);
      sink(static_cast<const StreamPacket&>(packet));
    }
  }
}

std::vector<StreamPacket> pack_frame(const Frame& frame, int ppc);
/// Inverse of pack_frame; throws kStreamProtocol on a malformed sequence.
Frame unpack_frame(std::span<const StreamPacket> packets, int width);

/// 3x3 neighbourhood, row-major: [0..2] row above, [3..5] centre row, [6..8] row below.
using Context = std::array<std::uint8_t, 9>;

struct ContextPacket {
  std::array<Context, kMaxPpc> contexts{};
  std::uint8_t lanes = 0;
  int x = 0;  // column of lane 0
  int y = 0;
  bool sof = false;
  bool eol = false;
};

/// Recovers per-pixel 3x3 contexts from a packet stream. Two full row
/// buffers stand in for the hardware delay lines; row r is emitted once row
/// r+1 has arrived (or at end of frame). Borders replicate the edge pixel.
class ContextStream {
 public:
  ContextStream(int width, int height);

  /// Consumes one packet and forwards zero or more ContextPackets to `sink`.
  template <class Sink>
  void push(const StreamPacket& packet, Sink&& sink) {
    accept(packet);
    if (x_ != 0) return;  // row still incomplete
    const int finished = y_ - 1;
    if (finished >= 1) emit_row(finished - 1, sink);
    if (finished == height_ - 1) emit_row(finished, sink);
  }

  bool done() const noexcept { return y_ == height_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

 private:
  void accept(const StreamPacket& packet);
  std::uint8_t row_pixel(int row, int x) const;

  template <class Sink>
  void emit_row(int row, Sink& sink) {
    const int up = row > 0 ? row - 1 : 0;
    const int down = row + 1 < height_ ? row + 1 : row;
    ContextPacket out;
    out.lanes = static_cast<std::uint8_t>(ppc_);
    out.y = row;
    for (int x = 0; x < width_; x += ppc_) {
      out.x = x;
      out.sof = (row == 0 && x == 0);
      out.eol = (x + ppc_ == width_);
      for (int l = 0; l < ppc_; ++l) {
        const int cx = x + l;
        const int left = cx > 0 ? cx - 1 : 0;
        const int right = cx + 1 < width_ ? cx + 1 : cx;
        Context& c = out.contexts[l];
        c[0] = row_pixel(up, left);
        c[1] = row_pixel(up, cx);
        c[2] = row_pixel(up, right);
        c[3] = row_pixel(row, left);
        c[4] = row_pixel(row, cx);
        c[5] = row_pixel(row, right);
        c[6] = row_pixel(down, left);
        c[7] = row_pixel(down, cx);
        c[8] = row_pixel(down, right);
      }
      sink(static_cast<const ContextPacket&>(out));
    }
  }

  int width_;
  int height_;
  int ppc_ = 0;
  int x_ = 0;
  int y_ = 0;
  std::array<std::vector<std::uint8_t>, 3> rows_;
};

/// Materialising wrapper; the frame height is inferred from the packet count.
std::vector<ContextPacket> context_stream(std::span<const StreamPacket> packets, int width);

}  // namespace hogsvm

#endif  // HOGSVM_STREAM_HPP
