#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "hogsvm/detector.hpp"
#include "hogsvm/svm.hpp"
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

SvmModel bias_only(std::int64_t bias_raw) {
  return SvmModel::from_raw(std::vector<std::int64_t>(kWindowFeatureLen, 0), bias_raw);
}

std::string replace_line(const std::string& text, std::size_t line_index, const std::string& with) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < line_index; ++i) start = text.find('\n', start) + 1;
  const std::size_t end = text.find('\n', start);
  return text.substr(0, start) + with + text.substr(end);
}

}  // namespace

TEST_CASE("window geometry constants") {
  CHECK(kWindowBlocks == 105);
  CHECK(kWindowFeatureLen == 3780);
  CHECK(weight_index(14, 6, 35) == 3779);
  CHECK(anchor_cols(480) == 473);
  CHECK(anchor_rows(270) == 255);
  CHECK(anchor_cols(7) == 0);
  CHECK(anchor_rows(15) == 0);
  CHECK(anchor_cols(8) == 1);
}

TEST_CASE("score_windows examples") {
  std::mt19937_64 rng(61);
  SUBCASE("zero weights give the bias everywhere") {
    const BlockGrid g = testing::random_block_grid(rng, 20, 10);
    const SvmModel m = bias_only(-12345);
    const ScoreMap s = score_windows(g, m);
    CHECK(s.rows == 20 + 1 - 15);
    CHECK(s.cols == 10 + 1 - 7);
    for (auto v : s.raw) CHECK(v == -12345);
  }
  SUBCASE("one-hot weight on a single window") {
    const Frame f = testing::smooth_frame(rng, 64, 128);
    const PipelineResult base = run_pipeline(f, SvmModel());
    std::vector<std::int64_t> w(kWindowFeatureLen, 0);
    w[0] = -700;
    const SvmModel m = SvmModel::from_raw(w, 0);
    const ScoreMap s = score_windows(base.blocks, m);
    REQUIRE(s.rows == 1);
    REQUIRE(s.cols == 1);
    // (10,9) x (11,10) lands exactly at frac 19.
    CHECK(s.raw[0] == static_cast<std::int64_t>(base.blocks.values(0, 0)[0]) * -700);
  }
  SUBCASE("4K block grid gives 473 x 255 anchors") {
    BlockGrid g;
    g.rows = 269;
    g.cols = 479;
    g.raw.assign(static_cast<std::size_t>(g.rows) * g.cols * kBlockLen, 0);
    const ScoreMap s = score_windows(g, bias_only(1));
    CHECK(s.cols == 473);
    CHECK(s.rows == 255);
    CHECK(s.raw.size() == 120615);
  }
  SUBCASE("too small for one window gives an empty map") {
    const BlockGrid g = testing::random_block_grid(rng, 14, 30);
    const ScoreMap s = score_windows(g, bias_only(1));
    CHECK(s.empty());
    CHECK(s.rows == 0);
  }
}

TEST_CASE("property: pipelined scores equal the naive per-window dot product") {
  std::mt19937_64 rng(62);
  for (int i = 0; i < 25; ++i) {
    const int rows = testing::uniform(rng, 15, 24);
    const int cols = testing::uniform(rng, 7, 16);
    const BlockGrid g = testing::random_block_grid(rng, rows, cols);
    const SvmModel m = testing::random_model(rng);
    SaturationScope sat;
    const ScoreMap s = score_windows(g, m);
    CHECK(sat.count() == 0);
    for (int r = 0; r < s.rows; ++r) {
      for (int c = 0; c < s.cols; ++c) REQUIRE(s.at(r, c).raw() == testing::naive_window_score(g, m, r, c));
    }
  }
}

TEST_CASE("BlockFeature stream and BlockGrid paths agree") {
  std::mt19937_64 rng(63);
  const BlockGrid g = testing::random_block_grid(rng, 17, 9);
  std::vector<BlockFeature> feats;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) feats.push_back(g.block(r, c));
  }
  const SvmModel m = testing::random_model(rng);
  CHECK(score_windows(feats, g.rows, g.cols, m).raw == score_windows(g, m).raw);
}

TEST_CASE("property: shifting the block grid by one column shifts the score map") {
  std::mt19937_64 rng(64);
  for (int i = 0; i < 5; ++i) {
    const BlockGrid g = testing::random_block_grid(rng, 16, 12);
    BlockGrid shifted = g;
    shifted.cols = g.cols - 1;
    shifted.raw.clear();
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 1; c < g.cols; ++c) {
        const auto v = g.values(r, c);
        shifted.raw.insert(shifted.raw.end(), v.begin(), v.end());
      }
    }
    const SvmModel m = testing::random_model(rng);
    const ScoreMap a = score_windows(g, m);
    const ScoreMap b = score_windows(shifted, m);
    REQUIRE(b.cols == a.cols - 1);
    for (int r = 0; r < b.rows; ++r) {
      for (int c = 0; c < b.cols; ++c) CHECK(b.at(r, c) == a.at(r, c + 1));
    }
  }
}

TEST_CASE("WindowScorer enforces raster order") {
  const SvmModel m = bias_only(0);
  WindowScorer s(15, 7, m);
  const std::array<std::int32_t, kBlockLen> v{};
  s.push_raw(0, 0, v, 9);
  CHECK(kind_of([&] { s.push_raw(0, 2, v, 9); }) == ErrorKind::kStreamProtocol);
  CHECK(kind_of([&] { s.take(); }) == ErrorKind::kStreamProtocol);
}

TEST_CASE("classify examples") {
  const FxFormat f{33, 19};
  const Fx zero = Fx::from_raw(0, f);
  CHECK(classify(fx_quantize(0.5, f), zero));
  CHECK_FALSE(classify(zero, zero));
  CHECK_FALSE(classify(fx_quantize(-0.1, f), zero));
  CHECK(classify(fx_quantize(0.5, f), 0.0));
  CHECK_FALSE(classify(zero, 0.0));
  CHECK_FALSE(classify(fx_quantize(-0.1, f), 0.0));
  // A threshold between two representable scores.
  const Fx s = Fx::from_raw(3, f);
  CHECK(classify(s, std::ldexp(2.5, -19)));
  CHECK_FALSE(classify(s, std::ldexp(3.0, -19)));
  CHECK(kind_of([&] { classify(s, std::nan("")); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("model construction validates ranges") {
  std::vector<std::int64_t> w(kWindowFeatureLen, 0);
  CHECK(kind_of([&] { SvmModel::from_raw(std::span(w).first(3779), 0); }) == ErrorKind::kContract);
  w[5] = 1024;
  CHECK(kind_of([&] { SvmModel::from_raw(w, 0); }) == ErrorKind::kContract);
  w[5] = -1024;
  CHECK_NOTHROW(SvmModel::from_raw(w, 0));
  CHECK(kind_of([&] { SvmModel::from_raw(w, std::int64_t{1} << 32); }) == ErrorKind::kContract);
}

TEST_CASE("quantization_scale picks the largest power-of-two shrink that fits") {
  FloatModel m;
  CHECK(quantization_scale(m) == 1.0);
  m.weights[7] = 0.999;
  CHECK(quantization_scale(m) == 1.0);
  m.weights[7] = 1.0;
  CHECK(quantization_scale(m) == 0.5);
  m.weights[7] = -3.0;
  CHECK(quantization_scale(m) == 0.25);
  m.weights[7] = std::nan("");
  CHECK(kind_of([&] { quantization_scale(m); }) == ErrorKind::kDomain);
}

TEST_CASE("model text round trip and parse errors") {
  std::mt19937_64 rng(65);
  const SvmModel m = testing::random_model(rng);
  const std::string text = format_model(m);
  CHECK(text.rfind("HOGSVM1\nbias ", 0) == 0);
  CHECK(parse_model(text) == m);

  FloatModel fm;
  for (auto& v : fm.weights) v = (testing::uniform01(rng) - 0.5) * 1e-3;
  fm.bias = -0.123456789012345;
  const std::string ftext = format_float_model(fm);
  CHECK(parse_float_model(ftext) == fm);

  const auto dir = std::filesystem::temp_directory_path() / "hogsvm_test_svm";
  std::filesystem::create_directories(dir);
  save_model(m, dir / "m.txt");
  CHECK(load_model(dir / "m.txt") == m);
  save_float_model(fm, dir / "f.txt");
  CHECK(load_float_model(dir / "f.txt") == fm);
  CHECK(kind_of([&] { load_model(dir / "missing.txt"); }) == ErrorKind::kIo);

  CHECK(kind_of([&] { parse_model("HOGSVM2\n" + text.substr(8)); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { parse_model(ftext); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { parse_model(replace_line(text, 1, "bias x")); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { parse_model(replace_line(text, 2, "0 0 1 5")); }) == ErrorKind::kParse);   // duplicate
  CHECK(kind_of([&] { parse_model(replace_line(text, 2, "15 0 0 5")); }) == ErrorKind::kParse);  // out of range
  CHECK(kind_of([&] { parse_model(replace_line(text, 2, "0 0 0 2000")); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { parse_model(replace_line(text, 2, "0 0 0")); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { parse_model(text.substr(0, text.size() / 2)); }) == ErrorKind::kParse);
  CHECK(kind_of([&] { parse_float_model(replace_line(ftext, 1, "bias nan")); }) == ErrorKind::kParse);

  // Any line order is accepted.
  const std::string swapped =
      replace_line(replace_line(text, 2, "0 0 1 " + std::to_string(m.weights_raw()[1])), 3,
                   "0 0 0 " + std::to_string(m.weights_raw()[0]));
  CHECK(parse_model(swapped) == m);
}
