#include "hogsvm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hogsvm/detector.hpp"

namespace hogsvm::oracle {

double unsigned_orientation(int gx, int gy) {
  if (gx == 0 && gy == 0) return 0.0;
  double theta = std::atan2(static_cast<double>(gy), static_cast<double>(gx)) * 180.0 /
                 std::numbers::pi;
  if (theta < 0.0) theta += 180.0;
  if (theta >= 180.0) theta -= 180.0;
  return theta;
}

Gradient gradient_at(const Frame& frame, int x, int y) {
  Gradient g;
  g.gx = static_cast<int>(frame.clamped(x + 1, y)) - frame.clamped(x - 1, y);
  g.gy = static_cast<int>(frame.clamped(x, y + 1)) - frame.clamped(x, y - 1);
  g.magnitude = std::sqrt(static_cast<double>(g.gx) * g.gx + static_cast<double>(g.gy) * g.gy);
  g.theta = unsigned_orientation(g.gx, g.gy);
  return g;
}

Vote bilinear_vote(double theta) {
  // Below the first centre the lower neighbour is bin 8, centred at -10.
  const int lo = theta < 10.0 ? 8 : std::min(static_cast<int>((theta - 10.0) / 20.0), 8);
  const double lo_centre = theta < 10.0 ? -10.0 : 20.0 * lo + 10.0;
  const double hi_weight = (theta - lo_centre) / 20.0;
  return {lo, (lo + 1) % kBins, 1.0 - hi_weight, hi_weight};
}

BinPair bin_pair(double theta) {
  const Vote v = bilinear_vote(theta);
  return {v.lo, v.hi};
}

Histogram cell_histogram(const Frame& frame, int cell_row, int cell_col) {
  Histogram h{};
  for (int dy = 0; dy < kCellSize; ++dy) {
    for (int dx = 0; dx < kCellSize; ++dx) {
      const Gradient g = gradient_at(frame, cell_col * kCellSize + dx, cell_row * kCellSize + dy);
      const Vote v = bilinear_vote(g.theta);
      h[v.lo] += g.magnitude * v.lo_weight;
      h[v.hi] += g.magnitude * v.hi_weight;
    }
  }
  return h;
}

BlockVector block_normalize(std::span<const Histogram, 4> cells, double epsilon) {
  BlockVector f;
  for (int c = 0; c < 4; ++c) {
    for (int k = 0; k < kBins; ++k) f[c * kBins + k] = cells[c][k];
  }
  const double eps2 = epsilon * epsilon;
  double sq = 0.0;
  for (double v : f) sq += v * v;
  const double n1 = 1.0 / std::sqrt(sq + eps2);
  for (double& v : f) v = std::min(v * n1, 0.2);
  sq = 0.0;
  for (double v : f) sq += v * v;
  const double n2 = 1.0 / std::sqrt(sq + eps2);
  for (double& v : f) v *= n2;
  return f;
}

Hog compute_hog(const Frame& frame, double epsilon) {
  require_cell_aligned(frame.width, frame.height);
  Hog hog;
  hog.cell_rows = frame.height / kCellSize;
  hog.cell_cols = frame.width / kCellSize;
  hog.cells.resize(static_cast<std::size_t>(hog.cell_rows) * hog.cell_cols * kBins);
  for (int r = 0; r < hog.cell_rows; ++r) {
    for (int c = 0; c < hog.cell_cols; ++c) {
      const Histogram h = cell_histogram(frame, r, c);
      std::copy(h.begin(), h.end(),
                hog.cells.begin() + (static_cast<std::ptrdiff_t>(r) * hog.cell_cols + c) * kBins);
    }
  }
  if (hog.cell_rows < 2 || hog.cell_cols < 2) return hog;
  const int br = hog.cell_rows - 1;
  const int bc = hog.cell_cols - 1;
  hog.blocks.resize(static_cast<std::size_t>(br) * bc * 36);
  auto load = [&](int r, int c) {
    Histogram h;
    const auto src = hog.cell(r, c);
    std::copy(src.begin(), src.end(), h.begin());
    return h;
  };
  for (int r = 0; r < br; ++r) {
    for (int c = 0; c < bc; ++c) {
      const std::array<Histogram, 4> cells{load(r, c), load(r + 1, c), load(r, c + 1),
                                           load(r + 1, c + 1)};
      const BlockVector v = block_normalize(cells, epsilon);
      std::copy(v.begin(), v.end(), hog.blocks.begin() + (static_cast<std::ptrdiff_t>(r) * bc + c) * 36);
    }
  }
  return hog;
}

std::vector<double> window_feature(const Hog& hog, int anchor_row, int anchor_col) {
  if (anchor_row < 0 || anchor_col < 0 || anchor_row + kWindowBlockRows > hog.cell_rows - 1 ||
      anchor_col + kWindowBlockCols > hog.cell_cols - 1) {
    fail(ErrorKind::kGeometry, "window anchor outside the block grid");
  }
  std::vector<double> f;
  f.reserve(kWindowFeatureLen);
  for (int r = 0; r < kWindowBlockRows; ++r) {
    for (int c = 0; c < kWindowBlockCols; ++c) {
      const auto b = hog.block(anchor_row + r, anchor_col + c);
      f.insert(f.end(), b.begin(), b.end());
    }
  }
  return f;
}

std::vector<double> window_feature(const Frame& window, double epsilon) {
  if (window.width != kWindowWidth || window.height != kWindowHeight) {
    fail(ErrorKind::kGeometry, "window must be 64x128");
  }
  return window_feature(compute_hog(window, epsilon), 0, 0);
}

double score(std::span<const double> features, const FloatModel& model) {
  if (features.size() != static_cast<std::size_t>(kWindowFeatureLen) ||
      model.weights.size() != features.size()) {
    fail(ErrorKind::kContract, "score needs 3780 features and 3780 weights");
  }
  double s = model.bias;
  for (std::size_t i = 0; i < features.size(); ++i) s += model.weights[i] * features[i];
  return s;
}

}  // namespace hogsvm::oracle

namespace hogsvm {

ErrorReport compare_paths(const Frame& frame, const SvmModel& fixed_model,
                          const FloatModel& float_model, int ppc, double threshold) {
  require_detection_geometry(frame.width, frame.height);
  ErrorReport rep;
  rep.width = frame.width;
  rep.height = frame.height;
  rep.pixels = frame.pixels.size();

  // Gradient stage, pixel by pixel.
  const GradientField field = run_gradient_stage(frame, ppc);
  double mag_sum = 0.0;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const oracle::Gradient g = oracle::gradient_at(frame, x, y);
      const BinnedGradient bg = field.at(x, y);
      const double err = std::fabs(bg.magnitude.to_double() - g.magnitude);
      rep.magnitude_max_abs_error = std::max(rep.magnitude_max_abs_error, err);
      mag_sum += err;
      if (sra_magnitude_raw({g.gx, g.gy}, bg.magnitude.format().fraction) >
          bg.magnitude.format().max_raw()) {
        ++rep.magnitude_saturations;
      }
      if (g.gx != 0 || g.gy != 0) {
        ++rep.nonzero_gradients;
        if (oracle::bin_pair(g.theta) != BinPair{bg.bin_lo, bg.bin_hi}) ++rep.bin_pair_disagreements;
      }
    }
  }
  rep.magnitude_mean_abs_error = mag_sum / static_cast<double>(rep.pixels);
  rep.bin_pair_disagreement_rate =
      rep.nonzero_gradients == 0 ? 0.0
                                 : static_cast<double>(rep.bin_pair_disagreements) /
                                       static_cast<double>(rep.nonzero_gradients);

  DetectorOptions options;
  options.ppc = ppc;
  options.threshold = threshold;
  const PipelineResult fixed = run_pipeline(frame, fixed_model, options);
  rep.histogram_saturations = fixed.saturations.histogram;
  rep.normalize_saturations = fixed.saturations.normalize;
  rep.svm_saturations = fixed.saturations.svm;

  const oracle::Hog hog = oracle::compute_hog(frame);
  double feat_sum = 0.0;
  for (std::size_t i = 0; i < hog.blocks.size(); ++i) {
    const double fixed_v = std::ldexp(static_cast<double>(fixed.blocks.raw[i]), -fixed.blocks.format.fraction);
    const double err = std::fabs(fixed_v - hog.blocks[i]);
    rep.block_feature_max_abs_error = std::max(rep.block_feature_max_abs_error, err);
    feat_sum += err;
  }
  rep.block_feature_mean_abs_error =
      hog.blocks.empty() ? 0.0 : feat_sum / static_cast<double>(hog.blocks.size());

  // Float model on the fixed model's scale.
  rep.model_scale = quantization_scale(float_model);
  FloatModel scaled = float_model;
  for (double& w : scaled.weights) w *= rep.model_scale;
  scaled.bias *= rep.model_scale;

  const FxFormat cf = fixed_model.coefficient_format();
  std::vector<double> wq(kWindowFeatureLen);
  std::vector<double> dw(kWindowFeatureLen);
  for (int i = 0; i < kWindowFeatureLen; ++i) {
    wq[i] = std::ldexp(static_cast<double>(fixed_model.weights_raw()[i]), -cf.fraction);
    dw[i] = std::fabs(wq[i] - scaled.weights[i]);
  }
  const double db = std::fabs(fixed_model.bias().to_double() - scaled.bias);

  const ScoreMap& scores = fixed.scores;
  rep.windows = static_cast<std::uint64_t>(scores.rows) * scores.cols;
  double score_sum = 0.0;
  const double ff_scale = std::ldexp(1.0, -fixed.blocks.format.fraction);
  for (int ar = 0; ar < scores.rows; ++ar) {
    for (int ac = 0; ac < scores.cols; ++ac) {
      const std::vector<double> f = oracle::window_feature(hog, ar, ac);
      const double s_float = oracle::score(f, scaled);
      const Fx s_fixed = scores.at(ar, ac);
      const double err = std::fabs(s_fixed.to_double() - s_float);
      rep.score_max_abs_error = std::max(rep.score_max_abs_error, err);
      score_sum += err;

      // |s_fixed - s_float| <= sum |wq - w||f| + sum |wq||ff - f| + |bq - b|.
      double margin = db;
      for (int br = 0; br < kWindowBlockRows; ++br) {
        for (int bc = 0; bc < kWindowBlockCols; ++bc) {
          const auto ff = fixed.blocks.values(ar + br, ac + bc);
          for (int k = 0; k < kBlockLen; ++k) {
            const int i = weight_index(br, bc, k);
            margin += dw[i] * std::fabs(f[i]) + std::fabs(wq[i]) * std::fabs(ff[k] * ff_scale - f[i]);
          }
        }
      }
      rep.quantization_margin = std::max(rep.quantization_margin, margin);
      if (classify(s_fixed, threshold) != (s_float > threshold)) {
        ++rep.classification_disagreements;
        const double a = std::fabs(s_float - threshold);
        rep.max_abs_float_score_at_disagreement =
            std::max(rep.max_abs_float_score_at_disagreement, std::fabs(s_float));
        // Slack covers double rounding in the bound itself.
        if (a > margin * (1.0 + 1e-12) + 1e-12) ++rep.disagreements_beyond_margin;
      }
    }
  }
  if (rep.windows != 0) {
    rep.score_mean_abs_error = score_sum / static_cast<double>(rep.windows);
    rep.classification_disagreement_rate =
        static_cast<double>(rep.classification_disagreements) / static_cast<double>(rep.windows);
  }
  return rep;
}

std::string format_report(const ErrorReport& r) {
  std::ostringstream out;
  out.precision(9);
  out << "width=" << r.width << '\n'
      << "height=" << r.height << '\n'
      << "pixels=" << r.pixels << '\n'
      << "windows=" << r.windows << '\n'
      << "model_scale=" << r.model_scale << '\n'
      << "magnitude_max_abs_error=" << r.magnitude_max_abs_error << '\n'
      << "magnitude_mean_abs_error=" << r.magnitude_mean_abs_error << '\n'
      << "magnitude_saturations=" << r.magnitude_saturations << '\n'
      << "nonzero_gradients=" << r.nonzero_gradients << '\n'
      << "bin_pair_disagreements=" << r.bin_pair_disagreements << '\n'
      << "bin_pair_disagreement_rate=" << r.bin_pair_disagreement_rate << '\n'
      << "block_feature_max_abs_error=" << r.block_feature_max_abs_error << '\n'
      << "block_feature_mean_abs_error=" << r.block_feature_mean_abs_error << '\n'
      << "score_max_abs_error=" << r.score_max_abs_error << '\n'
      << "score_mean_abs_error=" << r.score_mean_abs_error << '\n'
      << "classification_disagreements=" << r.classification_disagreements << '\n'
      << "classification_disagreement_rate=" << r.classification_disagreement_rate << '\n'
      << "quantization_margin=" << r.quantization_margin << '\n'
      << "max_abs_float_score_at_disagreement=" << r.max_abs_float_score_at_disagreement << '\n'
      << "disagreements_beyond_margin=" << r.disagreements_beyond_margin << '\n'
      << "histogram_saturations=" << r.histogram_saturations << '\n'
      << "normalize_saturations=" << r.normalize_saturations << '\n'
      << "svm_saturations=" << r.svm_saturations << '\n';
  return out.str();
}

}  // namespace hogsvm
