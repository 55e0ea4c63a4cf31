#ifndef HOGSVM_TRAINER_HPP
#define HOGSVM_TRAINER_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "hogsvm/stream.hpp"
#include "hogsvm/svm.hpp"

namespace hogsvm {

struct Sample {
  std::vector<double> features;  // 3780 oracle features
  int label = 1;                 // +1 or -1
};

struct TrainOptions {
  double lambda = 1e-4;
  int epochs = 20;
  std::uint64_t seed = 1;
};

/// Primal sub-gradient descent on the hinge loss with step 1/(lambda t),
/// projection onto the ball of radius 1/sqrt(lambda), and the bias carried
/// as a constant-1 feature. Returns the average of all iterates.
/// Throws kTraining unless both labels are present.
FloatModel train(std::span<const Sample> samples, const TrainOptions& options = {});

/// Fraction of samples with sign(w.f + b) == label (score 0 counts as -1).
double accuracy(std::span<const Sample> samples, const FloatModel& model);

struct QuantizedModel {
  SvmModel model;
  double scale = 1.0;              // factor applied before quantization
  double max_weight_error = 0.0;   // max |q(w s) - w s|
  double bias_error = 0.0;
};

/// Rescales by quantization_scale() and floors into the coefficient/bias formats.
QuantizedModel quantize_model(const FloatModel& model,
                              const PrecisionProfile& profile = default_profile());

/// 64x128 training window: a rendered upright figure on a noisy background, or
/// the background with clutter that is not a figure.
Frame render_synthetic_window(bool positive, std::mt19937_64& rng);

struct SyntheticSet {
  std::vector<Frame> windows;
  std::vector<Sample> samples;
};

/// `per_class` positives followed by `per_class` negatives, deterministic in `seed`.
SyntheticSet synthetic_dataset(int per_class, std::uint64_t seed);

/// Manifest lines "<label +1|-1> <path>"; relative paths resolve against the
/// manifest's directory; every image must be 64x128.
std::vector<Sample> load_manifest(const std::filesystem::path& manifest);

}  // namespace hogsvm

#endif  // HOGSVM_TRAINER_HPP
