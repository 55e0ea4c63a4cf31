#ifndef HOGSVM_GRADIENT_HPP
#define HOGSVM_GRADIENT_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "hogsvm/fixedpoint.hpp"
#include "hogsvm/stream.hpp"

namespace hogsvm {

inline constexpr int kBins = 9;

struct GradientPair {
  int gx = 0;
  int gy = 0;
  friend bool operator==(const GradientPair&, const GradientPair&) = default;
};

struct BinPair {
  int lo = 0;
  int hi = 1;
  friend bool operator==(const BinPair&, const BinPair&) = default;
};

struct BinnedGradient {
  Fx magnitude;
  int bin_lo = 0;
  int bin_hi = 1;
};

/// [-1 0 1] masks: gx = right - left, gy = bottom - top.
GradientPair compute_gradients(const Context& ctx) noexcept;

/// max(0.875a + 0.5b, a) built from shifts at `fraction` fractional bits, before saturation.
std::int64_t sra_magnitude_raw(GradientPair g, int fraction) noexcept;

/// SRA magnitude quantized (saturating) to the profile's gradient_magnitude format.
Fx magnitude_sra(GradientPair g, const PrecisionProfile& profile = default_profile());

/// Tangents of the interior bin centres 10, 30, 50 and 70 degrees, at `fraction` bits.
struct TangentLut {
  std::array<std::int64_t, 4> tan_raw{};
  int fraction = 16;
};

/// tan(c) rounded to 16 fractional bits.
const TangentLut& exact_tangent_lut();
/// tan(c) approximated by three signed powers of two (shift-and-add friendly).
const TangentLut& shift_add_tangent_lut();

/// Adjacent bin pair whose centres bracket the unsigned orientation, using
/// only multiply-compare against the tangent LUT. The second quadrant is
/// folded onto the first by negating gx; 90 degrees is decided structurally.
BinPair orient_bin_pair(GradientPair g, const TangentLut& lut = exact_tangent_lut()) noexcept;

BinnedGradient bin_gradient(const Context& ctx, const PrecisionProfile& profile = default_profile(),
                            const TangentLut& lut = exact_tangent_lut());

struct GradientPacket {
  std::array<BinnedGradient, kMaxPpc> lanes{};
  std::uint8_t count = 0;
  int x = 0;
  int y = 0;
  bool sof = false;
  bool eol = false;
};

GradientPacket bin_packet(const ContextPacket& ctx, const PrecisionProfile& profile,
                          const TangentLut& lut);

/// Per-pixel binned gradients of a whole frame, stored compactly.
struct GradientField {
  int width = 0;
  int height = 0;
  FxFormat magnitude_format{11, 3};
  std::vector<std::int32_t> magnitude_raw;
  std::vector<std::uint8_t> bin_lo;

  BinnedGradient at(int x, int y) const;
};

/// Streams the frame through the context and gradient stages at `ppc`.
GradientField run_gradient_stage(const Frame& frame, int ppc,
                                 const PrecisionProfile& profile = default_profile(),
                                 const TangentLut& lut = exact_tangent_lut());

/// Re-streams a gradient field as packets of `ppc` lanes, raster order.
template <class Sink>
void for_each_gradient_packet(const GradientField& field, int ppc, Sink&& sink) {
  require_ppc(ppc, field.width);
  GradientPacket packet;
  packet.count = static_cast<std::uint8_t>(ppc);
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; x += ppc) {
      packet.x = x;
      packet.y = y;
      packet.sof = (x == 0 && y == 0);
      packet.eol = (x + ppc == field.width);
      for (int l = 0; l < ppc; ++l) packet.lanes[l] = field.at(x + l, y);
      sink(static_cast<const GradientPacket&>(packet));
    }
  }
}

}  // namespace hogsvm

#endif  // HOGSVM_GRADIENT_HPP
