#include "hogsvm/fixedpoint.hpp"

#include <cmath>

#include "hogsvm/error.hpp"

namespace hogsvm {

namespace {

thread_local std::uint64_t t_saturations = 0;

void require_valid(const FxFormat& fmt) {
  if (!fmt.valid()) fail(ErrorKind::kContract, "invalid fixed-point format " + to_string(fmt));
}

}  // namespace

double FxFormat::lsb() const noexcept { return std::ldexp(1.0, -fraction); }
double FxFormat::max_value() const noexcept {
  return std::ldexp(static_cast<double>(max_raw()), -fraction);
}
double FxFormat::min_value() const noexcept {
  return std::ldexp(static_cast<double>(min_raw()), -fraction);
}

FxFormat make_format(int width, int fraction) {
  FxFormat fmt{width, fraction};
  require_valid(fmt);
  return fmt;
}

std::string to_string(const FxFormat& fmt) {
  return "(" + std::to_string(fmt.width) + "," + std::to_string(fmt.fraction) + ")";
}

Fx Fx::from_raw(std::int64_t raw, FxFormat fmt) {
  require_valid(fmt);
  if (raw > fmt.max_raw() || raw < fmt.min_raw()) {
    fail(ErrorKind::kContract,
         "raw value " + std::to_string(raw) + " does not fit format " + to_string(fmt));
  }
  return Fx(raw, fmt);
}

double Fx::to_double() const noexcept {
  return std::ldexp(static_cast<double>(raw_), -format_.fraction);
}

std::uint64_t saturation_count() noexcept { return t_saturations; }
void reset_saturation_count() noexcept { t_saturations = 0; }
void note_saturation(std::uint64_t n) noexcept { t_saturations += n; }

std::int64_t requantize_raw(wide_int raw, int from_fraction, FxFormat out) noexcept {
  const wide_int hi = out.max_raw();
  const wide_int lo = out.min_raw();
  const int shift = from_fraction - out.fraction;
  if (shift > 0) {
    raw = shift >= 127 ? (raw < 0 ? -1 : 0) : (raw >> shift);
  } else if (shift < 0) {
    const int up = -shift;
    // Any nonzero value shifted by >= 64 overflows a 64-bit format.
    if (raw != 0 && (up >= 64 || raw > (hi >> up) || raw < (lo >> up))) {
      ++t_saturations;
      return static_cast<std::int64_t>(raw > 0 ? hi : lo);
    }
    raw <<= up;
  }
  if (raw > hi) {
    ++t_saturations;
    return static_cast<std::int64_t>(hi);
  }
  if (raw < lo) {
    ++t_saturations;
    return static_cast<std::int64_t>(lo);
  }
  return static_cast<std::int64_t>(raw);
}

Fx fx_quantize(double value, FxFormat fmt) {
  require_valid(fmt);
  if (std::isnan(value)) fail(ErrorKind::kDomain, "cannot quantize NaN");
  const double scaled = std::floor(std::ldexp(value, fmt.fraction));
  // Clamp in double first so the integer conversion below is defined.
  if (scaled >= std::ldexp(1.0, fmt.width - 1)) {
    ++t_saturations;
    return make_fx_unchecked(fmt.max_raw(), fmt);
  }
  if (scaled < -std::ldexp(1.0, fmt.width - 1)) {
    ++t_saturations;
    return make_fx_unchecked(fmt.min_raw(), fmt);
  }
  return make_fx_unchecked(static_cast<std::int64_t>(scaled), fmt);
}

Fx fx_add(const Fx& a, const Fx& b, FxFormat out) {
  require_valid(out);
  if (a.format() != b.format()) {
    fail(ErrorKind::kContract, "fx_add format mismatch " + to_string(a.format()) + " vs " +
                                   to_string(b.format()));
  }
  const wide_int sum = static_cast<wide_int>(a.raw()) + b.raw();
  return make_fx_unchecked(requantize_raw(sum, a.format().fraction, out), out);
}

Fx fx_sub(const Fx& a, const Fx& b, FxFormat out) {
  require_valid(out);
  if (a.format() != b.format()) {
    fail(ErrorKind::kContract, "fx_sub format mismatch " + to_string(a.format()) + " vs " +
                                   to_string(b.format()));
  }
  const wide_int diff = static_cast<wide_int>(a.raw()) - b.raw();
  return make_fx_unchecked(requantize_raw(diff, a.format().fraction, out), out);
}

Fx fx_mul(const Fx& a, const Fx& b, FxFormat out) {
  require_valid(out);
  const wide_int product = static_cast<wide_int>(a.raw()) * b.raw();
  const int fraction = a.format().fraction + b.format().fraction;
  return make_fx_unchecked(requantize_raw(product, fraction, out), out);
}

Fx fx_shr(const Fx& a, int n) {
  if (n < 0) fail(ErrorKind::kContract, "negative shift count");
  const std::int64_t raw = n >= 63 ? (a.raw() < 0 ? -1 : 0) : (a.raw() >> n);
  return make_fx_unchecked(raw, a.format());
}

Fx fx_convert(const Fx& a, FxFormat out) {
  require_valid(out);
  return make_fx_unchecked(requantize_raw(a.raw(), a.format().fraction, out), out);
}

}  // namespace hogsvm
