#include "hogsvm/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace hogsvm {

namespace {

constexpr std::array<double, 4> kInteriorCentresDeg{10.0, 30.0, 50.0, 70.0};

double tan_deg(double deg) { return std::tan(deg * std::numbers::pi / 180.0); }

TangentLut make_exact_lut() {
  TangentLut lut;
  lut.fraction = 16;
  for (std::size_t i = 0; i < 4; ++i) {
    lut.tan_raw[i] = std::llround(std::ldexp(tan_deg(kInteriorCentresDeg[i]), lut.fraction));
  }
  return lut;
}

// Greedy signed-power-of-two decomposition with three terms.
TangentLut make_shift_add_lut() {
  TangentLut lut;
  lut.fraction = 16;
  for (std::size_t i = 0; i < 4; ++i) {
    const double target = std::ldexp(tan_deg(kInteriorCentresDeg[i]), lut.fraction);
    double residual = target;
    std::int64_t acc = 0;
    for (int term = 0; term < 3 && residual != 0.0; ++term) {
      const double mag = std::fabs(residual);
      const int e = static_cast<int>(std::lround(std::log2(mag)));
      const std::int64_t p = std::int64_t{1} << std::max(e, 0);
      acc += residual > 0 ? p : -p;
      residual = target - static_cast<double>(acc);
    }
    lut.tan_raw[i] = acc;
  }
  return lut;
}

}  // namespace

GradientPair compute_gradients(const Context& ctx) noexcept {
  return {static_cast<int>(ctx[5]) - ctx[3], static_cast<int>(ctx[7]) - ctx[1]};
}

std::int64_t sra_magnitude_raw(GradientPair g, int fraction) noexcept {
  const std::int64_t ax = std::abs(g.gx);
  const std::int64_t ay = std::abs(g.gy);
  const std::int64_t a = std::max(ax, ay) << fraction;
  const std::int64_t b = std::min(ax, ay) << fraction;
  const std::int64_t approx = (a - (a >> 3)) + (b >> 1);
  return std::max(approx, a);
}

Fx magnitude_sra(GradientPair g, const PrecisionProfile& profile) {
  const FxFormat fmt = profile.gradient_magnitude;
  return make_fx_unchecked(saturate_raw(sra_magnitude_raw(g, fmt.fraction), fmt), fmt);
}

const TangentLut& exact_tangent_lut() {
  static const TangentLut lut = make_exact_lut();
  return lut;
}

const TangentLut& shift_add_tangent_lut() {
  static const TangentLut lut = make_shift_add_lut();
  return lut;
}

BinPair orient_bin_pair(GradientPair g, const TangentLut& lut) noexcept {
  std::int64_t gx = g.gx;
  std::int64_t gy = g.gy;
  if (gx == 0 && gy == 0) return {0, 1};
  // Unsigned orientation: fold the lower half-plane onto the upper one.
  if (gy < 0 || (gy == 0 && gx < 0)) {
    gx = -gx;
    gy = -gy;
  }
  if (gx == 0) return {4, 5};
  const std::int64_t lhs = gy << lut.fraction;
  if (gx > 0) {
    int passed = 0;
    for (std::int64_t t : lut.tan_raw) passed += (lhs >= gx * t) ? 1 : 0;
    return passed == 0 ? BinPair{8, 0} : BinPair{passed - 1, passed};
  }
  // Second quadrant: theta = 180 - theta', with theta' measured against -gx.
  const std::int64_t ax = -gx;
  int passed = 0;
  for (std::int64_t t : lut.tan_raw) passed += (lhs > ax * t) ? 1 : 0;
  return passed == 0 ? BinPair{8, 0} : BinPair{8 - passed, 9 - passed};
}

BinnedGradient bin_gradient(const Context& ctx, const PrecisionProfile& profile,
                            const TangentLut& lut) {
  const GradientPair g = compute_gradients(ctx);
  const BinPair pair = orient_bin_pair(g, lut);
  return {magnitude_sra(g, profile), pair.lo, pair.hi};
}

GradientPacket bin_packet(const ContextPacket& ctx, const PrecisionProfile& profile,
                          const TangentLut& lut) {
  GradientPacket out;
  out.count = ctx.lanes;
  out.x = ctx.x;
  out.y = ctx.y;
  out.sof = ctx.sof;
  out.eol = ctx.eol;
  for (int l = 0; l < ctx.lanes; ++l) out.lanes[l] = bin_gradient(ctx.contexts[l], profile, lut);
  return out;
}

BinnedGradient GradientField::at(int x, int y) const {
  const std::size_t i = static_cast<std::size_t>(y) * width + x;
  const int lo = bin_lo[i];
  return {make_fx_unchecked(magnitude_raw[i], magnitude_format), lo, (lo + 1) % kBins};
}

GradientField run_gradient_stage(const Frame& frame, int ppc, const PrecisionProfile& profile,
                                 const TangentLut& lut) {
  require_ppc(ppc, frame.width);
  GradientField field;
  field.width = frame.width;
  field.height = frame.height;
  field.magnitude_format = profile.gradient_magnitude;
  field.magnitude_raw.resize(frame.pixels.size());
  field.bin_lo.resize(frame.pixels.size());

  ContextStream contexts(frame.width, frame.height);
  auto on_context = [&](const ContextPacket& c) {
    const GradientPacket g = bin_packet(c, profile, lut);
    std::size_t i = static_cast<std::size_t>(g.y) * field.width + g.x;
    for (int l = 0; l < g.count; ++l, ++i) {
      field.magnitude_raw[i] = static_cast<std::int32_t>(g.lanes[l].magnitude.raw());
      field.bin_lo[i] = static_cast<std::uint8_t>(g.lanes[l].bin_lo);
    }
  };
  for_each_packet(frame, ppc, [&](const StreamPacket& p) { contexts.push(p, on_context); });
  return field;
}

}  // namespace hogsvm
