#ifndef HOGSVM_FIXEDPOINT_HPP
#define HOGSVM_FIXEDPOINT_HPP

#include <cstdint>
#include <string>

namespace hogsvm {

__extension__ typedef __int128 wide_int;

/// Signed two's-complement fixed-point format: `width` total bits, of which
/// `fraction` are fractional. Valid when 1 <= width <= 64 and
/// 0 <= fraction < width.
struct FxFormat {
  int width = 0;
  int fraction = 0;

  constexpr bool valid() const noexcept {
    return width >= 1 && width <= 64 && fraction >= 0 && fraction < width;
  }
  constexpr std::int64_t max_raw() const noexcept {
    return width == 64 ? INT64_MAX
                       : static_cast<std::int64_t>((std::uint64_t{1} << (width - 1)) - 1);
  }
  constexpr std::int64_t min_raw() const noexcept {
    return width == 64 ? INT64_MIN : -static_cast<std::int64_t>(std::uint64_t{1} << (width - 1));
  }
  double lsb() const noexcept;
  double max_value() const noexcept;
  double min_value() const noexcept;

  friend constexpr bool operator==(const FxFormat&, const FxFormat&) = default;
};

/// Throws kContract when the (width, fraction) pair is not a valid format.
FxFormat make_format(int width, int fraction);

std::string to_string(const FxFormat& fmt);

/// A raw integer interpreted at `format`: value = raw * 2^-fraction.
class Fx {
 public:
  Fx() = default;

  /// Throws kContract when `raw` does not fit in `fmt.width` signed bits.
  static Fx from_raw(std::int64_t raw, FxFormat fmt);

  std::int64_t raw() const noexcept { return raw_; }
  const FxFormat& format() const noexcept { return format_; }
  double to_double() const noexcept;

  friend bool operator==(const Fx&, const Fx&) = default;

 private:
  Fx(std::int64_t raw, FxFormat fmt) : raw_(raw), format_(fmt) {}
  friend Fx make_fx_unchecked(std::int64_t raw, FxFormat fmt) noexcept;

  std::int64_t raw_ = 0;
  FxFormat format_{1, 0};
};

// Internal constructor for hot paths that already guarantee range.
inline Fx make_fx_unchecked(std::int64_t raw, FxFormat fmt) noexcept { return Fx(raw, fmt); }

// Every operation truncates toward -inf and saturates on overflow. Saturation
// events are counted per thread; see saturation_count().

Fx fx_quantize(double value, FxFormat fmt);
Fx fx_add(const Fx& a, const Fx& b, FxFormat out);
Fx fx_sub(const Fx& a, const Fx& b, FxFormat out);
Fx fx_mul(const Fx& a, const Fx& b, FxFormat out);
Fx fx_shr(const Fx& a, int n);
/// Re-express `a` in `out` (shift by the fraction difference, then saturate).
Fx fx_convert(const Fx& a, FxFormat out);

/// Core requantization step: `raw` carries `from_fraction` fractional bits.
std::int64_t requantize_raw(wide_int raw, int from_fraction, FxFormat out) noexcept;

/// Saturate an integer already at the target fraction.
inline std::int64_t saturate_raw(wide_int raw, FxFormat out) noexcept {
  return requantize_raw(raw, out.fraction, out);
}

std::uint64_t saturation_count() noexcept;
void reset_saturation_count() noexcept;
void note_saturation(std::uint64_t n = 1) noexcept;

/// Counts saturations that happen on this thread during its lifetime.
class SaturationScope {
 public:
  SaturationScope() noexcept : start_(saturation_count()) {}
  std::uint64_t count() const noexcept { return saturation_count() - start_; }

 private:
  std::uint64_t start_;
};

/// One format per pipeline stage. The defaults are the hardware's precisions.
struct PrecisionProfile {
  FxFormat gradient_magnitude{11, 3};
  FxFormat histogram_bin_number{4, 0};
  FxFormat histogram_value{18, 4};
  FxFormat prepare_first_norm{42, 8};
  FxFormat first_inv_sqrt{24, 18};
  FxFormat feature_after_first_norm{10, 9};
  FxFormat second_inv_sqrt{22, 16};
  FxFormat final_feature{10, 9};
  FxFormat svm_coefficient{11, 10};
  FxFormat svm_bias{33, 19};
  FxFormat svm_prediction{33, 19};

  friend bool operator==(const PrecisionProfile&, const PrecisionProfile&) = default;
};

inline const PrecisionProfile& default_profile() noexcept {
  static const PrecisionProfile profile{};
  return profile;
}

}  // namespace hogsvm

#endif  // HOGSVM_FIXEDPOINT_HPP
