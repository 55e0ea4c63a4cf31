// Shared generators and naive reference implementations for the tests and
// the acceptance runner.
#ifndef HOGSVM_TESTS_SUPPORT_HPP
#define HOGSVM_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hogsvm/detector.hpp"
#include "hogsvm/gradient.hpp"
#include "hogsvm/histogram.hpp"
#include "hogsvm/normalize.hpp"
#include "hogsvm/svm.hpp"

namespace testing {

using hogsvm::Frame;

inline int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Frame random_frame(std::mt19937_64& rng, int w, int h) {
  Frame f(w, h);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng() & 0xFF);
  return f;
}

// Gentle shading plus a handful of flat-shaded discs and bars: edges of
// moderate contrast, so gradient magnitudes mostly stay well inside (11,3).
inline Frame smooth_frame(std::mt19937_64& rng, int w, int h) {
  Frame f(w, h);
  const double base = uniform(rng, 60, 190);
  const double sx = (uniform01(rng) - 0.5) * 0.4;
  const double sy = (uniform01(rng) - 0.5) * 0.4;
  std::vector<double> img(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img[static_cast<std::size_t>(y) * w + x] = base + sx * x + sy * y;
  }
  const int shapes = uniform(rng, 3, 12);
  for (int s = 0; s < shapes; ++s) {
    const int cx = uniform(rng, 0, w - 1);
    const int cy = uniform(rng, 0, h - 1);
    const int r = uniform(rng, 4, std::max(5, std::min(w, h) / 4));
    const double delta = uniform(rng, -60, 60);
    const bool disc = (rng() & 1) != 0;
    for (int y = std::max(0, cy - r); y < std::min(h, cy + r); ++y) {
      for (int x = std::max(0, cx - r); x < std::min(w, cx + r); ++x) {
        if (!disc || (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
          img[static_cast<std::size_t>(y) * w + x] += delta;
        }
      }
    }
  }
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img[i] + uniform(rng, -4, 4);
    f.pixels[i] = static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(v)), 0, 255));
  }
  return f;
}

inline hogsvm::Context clamped_context(const Frame& f, int x, int y) {
  hogsvm::Context c{};
  int i = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) c[i++] = f.clamped(x + dx, y + dy);
  }
  return c;
}

// Direct per-cell loop that drops m>>1 into both bins of each pixel's pair.
inline std::vector<std::int64_t> naive_cells(const Frame& f,
                                             const hogsvm::PrecisionProfile& profile =
                                                 hogsvm::default_profile()) {
  const int rows = f.height / 8;
  const int cols = f.width / 8;
  std::vector<std::int64_t> out(static_cast<std::size_t>(rows) * cols * 9, 0);
  const int widen = profile.histogram_value.fraction - profile.gradient_magnitude.fraction;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const hogsvm::Context c = clamped_context(f, x, y);
      const hogsvm::GradientPair g{c[5] - c[3], c[7] - c[1]};
      const std::int64_t m = std::min<std::int64_t>(
          hogsvm::sra_magnitude_raw(g, profile.gradient_magnitude.fraction),
          profile.gradient_magnitude.max_raw());
      const hogsvm::BinPair bp = hogsvm::orient_bin_pair(g);
      const std::int64_t half = (m >> 1) << widen;
      std::int64_t* cell = out.data() + (static_cast<std::size_t>(y / 8) * cols + x / 8) * 9;
      cell[bp.lo] += half;
      cell[bp.hi] += half;
    }
  }
  return out;
}

// Per-window 3780-term dot product in exact integers, then one requantization.
inline std::int64_t naive_window_score(const hogsvm::BlockGrid& blocks, const hogsvm::SvmModel& model,
                                       int wr, int wc,
                                       const hogsvm::PrecisionProfile& profile =
                                           hogsvm::default_profile()) {
  using boost::multiprecision::cpp_int;
  cpp_int acc = 0;
  for (int r = 0; r < hogsvm::kWindowBlockRows; ++r) {
    for (int c = 0; c < hogsvm::kWindowBlockCols; ++c) {
      const auto f = blocks.values(wr + r, wc + c);
      const auto w = model.block_weights(r, c);
      for (int k = 0; k < hogsvm::kBlockLen; ++k) acc += cpp_int(f[k]) * w[k];
    }
  }
  const int product_fraction = blocks.format.fraction + model.coefficient_format().fraction;
  const int bias_shift = product_fraction - model.bias().format().fraction;
  cpp_int bias = model.bias().raw();
  if (bias_shift >= 0) {
    acc += bias << bias_shift;
  } else {
    acc = (acc << -bias_shift) + bias;
  }
  const int from = std::max(product_fraction, model.bias().format().fraction);
  const int shift = from - profile.svm_prediction.fraction;
  // Floor division by 2^shift.
  if (shift > 0) {
    const cpp_int d = cpp_int(1) << shift;
    cpp_int q = acc / d;
    if (acc < 0 && q * d != acc) q -= 1;
    acc = q;
  } else if (shift < 0) {
    acc <<= -shift;
  }
  const cpp_int hi = profile.svm_prediction.max_raw();
  const cpp_int lo = profile.svm_prediction.min_raw();
  if (acc > hi) acc = hi;
  if (acc < lo) acc = lo;
  return static_cast<std::int64_t>(acc);
}

inline hogsvm::SvmModel random_model(std::mt19937_64& rng,
                                     const hogsvm::PrecisionProfile& profile = hogsvm::default_profile()) {
  std::vector<std::int64_t> w(hogsvm::kWindowFeatureLen);
  const auto fmt = profile.svm_coefficient;
  for (auto& v : w) v = std::uniform_int_distribution<std::int64_t>(fmt.min_raw(), fmt.max_raw())(rng);
  const std::int64_t bias = std::uniform_int_distribution<std::int64_t>(-(1LL << 24), 1LL << 24)(rng);
  return hogsvm::SvmModel::from_raw(w, bias, profile);
}

inline hogsvm::BlockGrid random_block_grid(std::mt19937_64& rng, int rows, int cols) {
  hogsvm::BlockGrid g;
  g.rows = rows;
  g.cols = cols;
  g.raw.resize(static_cast<std::size_t>(rows) * cols * hogsvm::kBlockLen);
  for (auto& v : g.raw) v = uniform(rng, 0, static_cast<int>(g.format.max_raw()));
  return g;
}

// Reference greedy suppression with exact rational IoU and linear-scan selection.
inline std::vector<hogsvm::Detection> brute_force_nms(std::vector<hogsvm::Detection> remaining,
                                                      double threshold) {
  using boost::multiprecision::cpp_rational;
  const cpp_rational t(threshold);
  std::vector<hogsvm::Detection> kept;
  while (!remaining.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      const auto& a = remaining[i];
      const auto& b = remaining[best];
      if (a.score > b.score || (a.score == b.score && (a.y < b.y || (a.y == b.y && a.x < b.x)))) {
        best = i;
      }
    }
    const hogsvm::Detection top = remaining[best];
    kept.push_back(top);
    std::vector<hogsvm::Detection> next;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (i == best) continue;
      const auto& d = remaining[i];
      const long long ix =
          std::max(0, std::min(top.x + top.w, d.x + d.w) - std::max(top.x, d.x));
      const long long iy =
          std::max(0, std::min(top.y + top.h, d.y + d.h) - std::max(top.y, d.y));
      const long long inter = ix * iy;
      const long long uni = 1LL * top.w * top.h + 1LL * d.w * d.h - inter;
      if (!(cpp_rational(inter, uni) > t)) next.push_back(d);
    }
    remaining = std::move(next);
  }
  return kept;
}

inline std::vector<hogsvm::Detection> random_boxes(std::mt19937_64& rng, int n) {
  std::vector<hogsvm::Detection> d(static_cast<std::size_t>(n));
  for (auto& b : d) {
    b.x = 8 * uniform(rng, 0, 40);
    b.y = 8 * uniform(rng, 0, 30);
    // Coarse scores make ties common.
    b.score = uniform(rng, -20, 20) / 4.0;
  }
  return d;
}

}  // namespace testing

#endif  // HOGSVM_TESTS_SUPPORT_HPP
