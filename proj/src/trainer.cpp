#include "hogsvm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "hogsvm/image.hpp"
#include "hogsvm/oracle.hpp"

namespace hogsvm {

namespace {

double dot(std::span<const double> w, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
  return s;
}

// Portable helpers; std distributions are not specified bit-for-bit.
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void fill_rect(Frame& f, int x0, int y0, int x1, int y1, int value) {
  for (int y = std::max(0, y0); y <= std::min(f.height - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(f.width - 1, x1); ++x) {
      f.at(x, y) = static_cast<std::uint8_t>(value);
    }
  }
}

void fill_disc(Frame& f, int cx, int cy, int r, int value) {
  for (int y = cy - r; y <= cy + r; ++y) {
    for (int x = cx - r; x <= cx + r; ++x) {
      if (x >= 0 && y >= 0 && x < f.width && y < f.height &&
          (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
        f.at(x, y) = static_cast<std::uint8_t>(value);
      }
    }
  }
}

int clamp_u8(int v) { return std::clamp(v, 0, 255); }

}  // namespace

FloatModel train(std::span<const Sample> samples, const TrainOptions& options) {
  if (options.lambda <= 0.0 || !std::isfinite(options.lambda)) {
    fail(ErrorKind::kInvalidArgument, "lambda must be positive");
  }
  if (options.epochs < 1) fail(ErrorKind::kInvalidArgument, "epochs must be at least 1");
  bool has_pos = false;
  bool has_neg = false;
  for (const Sample& s : samples) {
    if (s.features.size() != static_cast<std::size_t>(kWindowFeatureLen)) {
      fail(ErrorKind::kContract, "sample feature length must be 3780");
    }
    if (s.label == 1) {
      has_pos = true;
    } else if (s.label == -1) {
      has_neg = true;
    } else {
      fail(ErrorKind::kContract, "sample label must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) fail(ErrorKind::kTraining, "training needs samples of both labels");

  const std::size_t dim = kWindowFeatureLen + 1;  // last entry: bias feature (constant 1)
  std::vector<double> w(dim, 0.0);
  std::vector<double> avg(dim, 0.0);
  std::vector<double> x(dim, 1.0);
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(options.seed);
  const double radius = 1.0 / std::sqrt(options.lambda);

  std::uint64_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (std::size_t idx : order) {
      ++t;
      const Sample& s = samples[idx];
      std::copy(s.features.begin(), s.features.end(), x.begin());
      const double eta = 1.0 / (options.lambda * static_cast<double>(t));
      const double margin = s.label * dot(w, x);
      const double shrink = 1.0 - eta * options.lambda;
      for (double& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t k = 0; k < dim; ++k) w[k] += eta * s.label * x[k];
      }
      const double norm = std::sqrt(dot(w, w));
      if (norm > radius) {
        const double p = radius / norm;
        for (double& v : w) v *= p;
      }
      // Running mean of the iterates.
      const double a = 1.0 / static_cast<double>(t);
      for (std::size_t k = 0; k < dim; ++k) avg[k] += (w[k] - avg[k]) * a;
    }
  }

  FloatModel model;
  std::copy(avg.begin(), avg.begin() + kWindowFeatureLen, model.weights.begin());
  model.bias = avg[kWindowFeatureLen];
  return model;
}

double accuracy(std::span<const Sample> samples, const FloatModel& model) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const Sample& s : samples) {
    const int predicted = oracle::score(s.features, model) > 0.0 ? 1 : -1;
    if (predicted == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

QuantizedModel quantize_model(const FloatModel& model, const PrecisionProfile& profile) {
  if (model.weights.size() != static_cast<std::size_t>(kWindowFeatureLen)) {
    fail(ErrorKind::kContract, "float model must have 3780 weights");
  }
  QuantizedModel q;
  q.scale = quantization_scale(model, profile);
  std::vector<std::int64_t> raw(kWindowFeatureLen);
  for (int i = 0; i < kWindowFeatureLen; ++i) {
    const double scaled = model.weights[i] * q.scale;
    const Fx v = fx_quantize(scaled, profile.svm_coefficient);
    raw[i] = v.raw();
    q.max_weight_error = std::max(q.max_weight_error, std::fabs(v.to_double() - scaled));
  }
  const double scaled_bias = model.bias * q.scale;
  const Fx b = fx_quantize(scaled_bias, profile.svm_bias);
  q.bias_error = std::fabs(b.to_double() - scaled_bias);
  q.model = SvmModel::from_raw(raw, b.raw(), profile);
  return q;
}

Frame render_synthetic_window(bool positive, std::mt19937_64& rng) {
  Frame f(kWindowWidth, kWindowHeight);
  const int base = uniform_int(rng, 40, 215);
  const int noise = uniform_int(rng, 4, 20);
  const double slope_x = (uniform_real(rng) - 0.5) * 0.6;
  const double slope_y = (uniform_real(rng) - 0.5) * 0.3;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      f.at(x, y) = static_cast<std::uint8_t>(
          clamp_u8(base + static_cast<int>(slope_x * (x - 32) + slope_y * (y - 64))));
    }
  }
  const int contrast = uniform_int(rng, 45, 100) * (rng() % 2 == 0 ? 1 : -1);
  const int ink = clamp_u8(base + contrast);

  if (positive) {
    const int cx = 32 + uniform_int(rng, -3, 3);
    const int top = 14 + uniform_int(rng, -4, 4);
    const int half = uniform_int(rng, 8, 11);
    fill_disc(f, cx, top + 7, uniform_int(rng, 6, 8), ink);
    fill_rect(f, cx - half, top + 15, cx + half, top + 60, ink);
    fill_rect(f, cx - half - 4, top + 17, cx - half - 1, top + 55, ink);
    fill_rect(f, cx + half + 1, top + 17, cx + half + 4, top + 55, ink);
    const int gap = uniform_int(rng, 1, 3);
    fill_rect(f, cx - half + 1, top + 60, cx - gap, top + 104, ink);
    fill_rect(f, cx + gap, top + 60, cx + half - 1, top + 104, ink);
  } else {
    switch (rng() % 3) {
      case 0:
        break;
      case 1: {  // horizontal bars
        const int n = uniform_int(rng, 1, 3);
        for (int i = 0; i < n; ++i) {
          const int w = uniform_int(rng, 20, 60);
          const int h = uniform_int(rng, 4, 10);
          const int x0 = uniform_int(rng, -10, 63 - w / 2);
          const int y0 = uniform_int(rng, 0, 127 - h);
          fill_rect(f, x0, y0, x0 + w, y0 + h, ink);
        }
        break;
      }
      default: {  // scattered blobs
        const int n = uniform_int(rng, 1, 4);
        for (int i = 0; i < n; ++i) {
          const int r = uniform_int(rng, 3, 10);
          const int x0 = uniform_int(rng, 0, 63);
          const int y0 = uniform_int(rng, 0, 127);
          if (rng() % 2 == 0) {
            fill_disc(f, x0, y0, r, ink);
          } else {
            fill_rect(f, x0 - r, y0 - r, x0 + r, y0 + r, ink);
          }
        }
        break;
      }
    }
  }
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(clamp_u8(p + uniform_int(rng, -noise, noise)));
  return f;
}

SyntheticSet synthetic_dataset(int per_class, std::uint64_t seed) {
  if (per_class < 1) fail(ErrorKind::kInvalidArgument, "synthetic set needs at least one sample per class");
  std::mt19937_64 rng(seed);
  SyntheticSet set;
  set.windows.reserve(static_cast<std::size_t>(2 * per_class));
  set.samples.reserve(static_cast<std::size_t>(2 * per_class));
  for (int label : {1, -1}) {
    for (int i = 0; i < per_class; ++i) {
      Frame w = render_synthetic_window(label == 1, rng);
      set.samples.push_back({oracle::window_feature(w), label});
      set.windows.push_back(std::move(w));
    }
  }
  return set;
}

std::vector<Sample> load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) fail(ErrorKind::kIo, "cannot open manifest " + manifest.string());
  const std::filesystem::path dir = manifest.parent_path();
  std::vector<Sample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string label_text;
    std::string path_text;
    if (!(fields >> label_text >> path_text)) {
      fail(ErrorKind::kParse, "manifest line " + std::to_string(line_no) + ": expected '<label> <path>'");
    }
    int label = 0;
    if (label_text == "1" || label_text == "+1") {
      label = 1;
    } else if (label_text == "-1") {
      label = -1;
    } else {
      fail(ErrorKind::kParse, "manifest line " + std::to_string(line_no) + ": label must be +1 or -1");
    }
    std::filesystem::path p(path_text);
    if (p.is_relative()) p = dir / p;
    const Frame window = load_image(p);
    if (window.width != kWindowWidth || window.height != kWindowHeight) {
      fail(ErrorKind::kGeometry, p.string() + " is not 64x128");
    }
    samples.push_back({oracle::window_feature(window), label});
  }
  return samples;
}

}  // namespace hogsvm
