#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "hogsvm/image.hpp"
#include "hogsvm/oracle.hpp"
#include "hogsvm/trainer.hpp"
#include "support.hpp"

using namespace hogsvm;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInvalidArgument;
}

Sample one_hot(int index, int label) {
  Sample s;
  s.features.assign(kWindowFeatureLen, 0.0);
  s.features[static_cast<std::size_t>(index)] = 1.0;
  s.label = label;
  return s;
}

double norm(const FloatModel& m) {
  double sq = m.bias * m.bias;
  for (double w : m.weights) sq += w * w;
  return std::sqrt(sq);
}

std::vector<Sample> random_samples(std::mt19937_64& rng, int n) {
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.features.resize(kWindowFeatureLen);
    for (double& v : s.features) v = testing::uniform01(rng) * 0.2;
    s.label = i % 2 == 0 ? 1 : -1;
    if (s.label == 1) s.features[0] += 0.5;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("a separable two-sample problem is learned") {
  const std::vector<Sample> data{one_hot(3, 1), one_hot(4000 % kWindowFeatureLen, -1)};
  const FloatModel m = train(data, {1e-2, 50, 7});
  CHECK(accuracy(data, m) == 1.0);
  CHECK(m.weights[3] > 0.0);
  CHECK(m.weights[220] < 0.0);
}

TEST_CASE("flipping every label negates the model") {
  std::mt19937_64 rng(91);
  std::vector<Sample> data = random_samples(rng, 40);
  const FloatModel a = train(data, {1e-3, 5, 11});
  for (Sample& s : data) s.label = -s.label;
  const FloatModel b = train(data, {1e-3, 5, 11});
  double dot = a.bias * b.bias;
  for (int i = 0; i < kWindowFeatureLen; ++i) dot += a.weights[i] * b.weights[i];
  CHECK(dot / (norm(a) * norm(b)) <= -1.0 + 1e-12);
}

TEST_CASE("property: the averaged model stays inside the 1/sqrt(lambda) ball") {
  std::mt19937_64 rng(92);
  const std::vector<Sample> data = random_samples(rng, 30);
  double previous = 0.0;
  for (double lambda : {10.0, 1.0, 1e-2, 1e-4}) {
    const FloatModel m = train(data, {lambda, 4, 3});
    CHECK(norm(m) <= 1.0 / std::sqrt(lambda) * (1.0 + 1e-12));
    CHECK(norm(m) >= previous);  // weaker regularization, larger weights
    previous = norm(m);
  }
}

TEST_CASE("heavy regularization collapses to the majority class") {
  const SyntheticSet set = synthetic_dataset(30, 3);
  std::vector<Sample> data(set.samples.begin(), set.samples.begin() + 40);  // 30 positive, 10 negative
  const FloatModel light = train(data, {1.0, 10, 1});
  const FloatModel heavy = train(data, {1e3, 10, 1});
  CHECK(norm(heavy) < 1e-2 * norm(light));
  for (const Sample& s : data) CHECK(oracle::score(s.features, heavy) > 0.0);
  CHECK(accuracy(data, heavy) == doctest::Approx(0.75));
}

TEST_CASE("training is deterministic in the seed") {
  std::mt19937_64 rng(93);
  const std::vector<Sample> data = random_samples(rng, 20);
  CHECK(train(data, {1e-3, 3, 5}) == train(data, {1e-3, 3, 5}));
  CHECK_FALSE(train(data, {1e-3, 3, 5}) == train(data, {1e-3, 3, 6}));
}

TEST_CASE("training input errors") {
  const std::vector<Sample> pos{one_hot(0, 1), one_hot(1, 1)};
  CHECK(kind_of([&] { train(pos); }) == ErrorKind::kTraining);
  CHECK(kind_of([&] { train(std::vector<Sample>{}); }) == ErrorKind::kTraining);
  std::vector<Sample> bad{one_hot(0, 1), one_hot(1, -1)};
  bad[1].label = 0;
  CHECK(kind_of([&] { train(bad); }) == ErrorKind::kContract);
  bad[1].label = -1;
  bad[1].features.pop_back();
  CHECK(kind_of([&] { train(bad); }) == ErrorKind::kContract);
  const std::vector<Sample> ok{one_hot(0, 1), one_hot(1, -1)};
  CHECK(kind_of([&] { train(ok, {0.0, 1, 1}); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { train(ok, {1e-3, 0, 1}); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("quantize_model examples") {
  FloatModel m;
  QuantizedModel q = quantize_model(m);
  CHECK(q.scale == 1.0);
  for (auto w : q.model.weights_raw()) CHECK(w == 0);
  CHECK(q.model.bias().raw() == 0);

  m.weights[10] = 0.5;
  m.bias = 0.25;
  q = quantize_model(m);
  CHECK(q.model.weights_raw()[10] == 512);
  CHECK(q.model.bias().raw() == (std::int64_t{1} << 17));
  CHECK(q.max_weight_error == 0.0);

  // Floors toward minus infinity.
  m.weights[10] = -0.0001;
  q = quantize_model(m);
  CHECK(q.model.weights_raw()[10] == -1);

  std::mt19937_64 rng(94);
  for (double& w : m.weights) w = (testing::uniform01(rng) - 0.5) * 2.0;
  m.weights[77] = -3.0;
  m.weights[78] = 2.9;
  q = quantize_model(m);
  CHECK(q.scale == 0.25);
  CHECK(q.model.weights_raw()[77] == -768);
  CHECK(q.max_weight_error <= std::ldexp(1.0, -10));
  CHECK(q.bias_error <= std::ldexp(1.0, -19));
  // Relative ordering of the extreme weights survives.
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < q.model.weights_raw().size(); ++i) {
    if (q.model.weights_raw()[i] < q.model.weights_raw()[argmin]) argmin = i;
  }
  CHECK(argmin == 77);
}

TEST_CASE("property: quantization keeps the decision whenever the float score clears the error bound") {
  const SyntheticSet data = synthetic_dataset(30, 21);
  std::mt19937_64 rng(95);
  for (int trial = 0; trial < 6; ++trial) {
    FloatModel m = train(data.samples, {1e-4, 3, static_cast<std::uint64_t>(trial)});
    // Perturb so that some scores fall near zero.
    for (double& w : m.weights) w += (testing::uniform01(rng) - 0.5) * 0.5;
    m.bias += testing::uniform01(rng) - 0.5;
    const QuantizedModel q = quantize_model(m);
    const double lsb = std::ldexp(1.0, -10);
    for (const Sample& s : data.samples) {
      double l1 = 0.0;
      double s_q = q.model.bias().to_double();
      for (int k = 0; k < kWindowFeatureLen; ++k) {
        l1 += std::fabs(s.features[k]);
        s_q += static_cast<double>(q.model.weights_raw()[k]) * lsb * s.features[k];
      }
      const double s_f = oracle::score(s.features, m) * q.scale;
      const double bound = q.max_weight_error * l1 + q.bias_error;
      CHECK(std::fabs(s_q - s_f) <= bound * (1.0 + 1e-9) + 1e-12);
      if (std::fabs(s_f) > bound) CHECK((s_q > 0.0) == (s_f > 0.0));
    }
  }
}

TEST_CASE("synthetic dataset") {
  const SyntheticSet a = synthetic_dataset(6, 42);
  const SyntheticSet b = synthetic_dataset(6, 42);
  REQUIRE(a.samples.size() == 12);
  REQUIRE(a.windows.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(a.samples[i].label == (i < 6 ? 1 : -1));
    CHECK(a.windows[i].width == 64);
    CHECK(a.windows[i].height == 128);
    CHECK(a.windows[i].pixels == b.windows[i].pixels);
    CHECK(a.samples[i].features == oracle::window_feature(a.windows[i]));
  }
  CHECK_FALSE(synthetic_dataset(6, 43).windows[0].pixels == a.windows[0].pixels);
  CHECK(kind_of([] { synthetic_dataset(0, 1); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("a small synthetic problem trains to high accuracy") {
  const SyntheticSet train_set = synthetic_dataset(40, 1);
  const SyntheticSet held_out = synthetic_dataset(40, 2);
  const FloatModel m = train(train_set.samples);
  CHECK(accuracy(train_set.samples, m) >= 0.95);
  CHECK(accuracy(held_out.samples, m) >= 0.9);
}

TEST_CASE("manifest loading") {
  const auto dir = std::filesystem::temp_directory_path() / "hogsvm_test_manifest";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir / "img");
  const SyntheticSet set = synthetic_dataset(1, 5);
  save_pgm(set.windows[0], dir / "img" / "p.pgm");
  save_pgm(set.windows[1], dir / "img" / "n.pgm");
  save_pgm(Frame(64, 64, 3), dir / "img" / "small.pgm");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };

  const auto samples = load_manifest(write("ok.txt", "# comment\n+1 img/p.pgm\n\n-1 " +
                                                         (dir / "img" / "n.pgm").string() + "\r\n"));
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].label == 1);
  CHECK(samples[1].label == -1);
  CHECK(samples[0].features == set.samples[0].features);
  CHECK(samples[1].features == set.samples[1].features);

  CHECK(kind_of([&] { load_manifest(dir / "missing.txt"); }) == ErrorKind::kIo);
  CHECK(kind_of([&] { load_manifest(write("label.txt", "2 img/p.pgm\n")); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { load_manifest(write("short.txt", "+1\n")); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { load_manifest(write("size.txt", "+1 img/small.pgm\n")); }) == ErrorKind::kGeometry);
  CHECK(kind_of([&] { load_manifest(write("gone.txt", "+1 img/none.pgm\n")); }) == ErrorKind::kIo);
}
