#include "hogsvm/svm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "hogsvm/serialize.hpp"

namespace hogsvm {

SvmModel::SvmModel(const PrecisionProfile& profile)
    : weights_(kWindowFeatureLen, 0),
      bias_(make_fx_unchecked(0, profile.svm_bias)),
      coefficient_format_(profile.svm_coefficient) {}

SvmModel SvmModel::from_raw(std::span<const std::int64_t> weights, std::int64_t bias,
                            const PrecisionProfile& profile) {
  if (weights.size() != static_cast<std::size_t>(kWindowFeatureLen)) {
    fail(ErrorKind::kContract, "model needs " + std::to_string(kWindowFeatureLen) +
                                   " weights, got " + std::to_string(weights.size()));
  }
  SvmModel model(profile);
  const FxFormat fmt = profile.svm_coefficient;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > fmt.max_raw() || weights[i] < fmt.min_raw()) {
      fail(ErrorKind::kContract, "weight " + std::to_string(i) + " raw " +
                                     std::to_string(weights[i]) + " outside " + to_string(fmt));
    }
    model.weights_[i] = static_cast<std::int32_t>(weights[i]);
  }
  model.bias_ = Fx::from_raw(bias, profile.svm_bias);
  return model;
}

Fx SvmModel::weight(int block_row, int block_col, int k) const {
  return make_fx_unchecked(weights_[static_cast<std::size_t>(weight_index(block_row, block_col, k))],
                           coefficient_format_);
}

double quantization_scale(const FloatModel& model, const PrecisionProfile& profile) {
  double max_w = 0.0;
  for (double w : model.weights) {
    if (!std::isfinite(w)) fail(ErrorKind::kDomain, "model weight is not finite");
    max_w = std::max(max_w, std::fabs(w));
  }
  if (!std::isfinite(model.bias)) fail(ErrorKind::kDomain, "model bias is not finite");
  const FxFormat wf = profile.svm_coefficient;
  const FxFormat bf = profile.svm_bias;
  const double w_limit = std::ldexp(1.0, wf.width - 1 - wf.fraction);
  const double b_limit = std::ldexp(1.0, bf.width - 1 - bf.fraction);
  double scale = 1.0;
  while (max_w * scale >= w_limit || std::fabs(model.bias) * scale >= b_limit) scale *= 0.5;
  return scale;
}

WindowScorer::WindowScorer(int block_rows, int block_cols, const SvmModel& model,
                           const PrecisionProfile& profile)
    : block_rows_(block_rows),
      block_cols_(block_cols),
      model_(&model),
      prediction_(profile.svm_prediction) {
  if (block_rows < 0 || block_cols < 0) fail(ErrorKind::kGeometry, "negative block grid");
  bias_raw_ = requantize_raw(model.bias().raw(), model.bias().format().fraction, prediction_);
  map_.format = prediction_;
  map_.rows = anchor_rows(block_rows + 1);
  map_.cols = anchor_cols(block_cols + 1);
  if (map_.rows == 0 || map_.cols == 0) map_.rows = map_.cols = 0;
  map_.raw.assign(static_cast<std::size_t>(map_.rows) * map_.cols, 0);
}

void WindowScorer::push(const BlockFeature& block) {
  std::array<std::int32_t, kBlockLen> raw;
  for (int k = 0; k < kBlockLen; ++k) raw[k] = static_cast<std::int32_t>(block.values[k].raw());
  push_raw(block.block_row, block.block_col, raw, block.values[0].format().fraction);
}

void WindowScorer::push_raw(int block_row, int block_col, std::span<const std::int32_t> values,
                            int value_fraction) {
  const std::size_t expected = next_;
  if (expected >= static_cast<std::size_t>(block_rows_) * block_cols_ ||
      static_cast<std::size_t>(block_row) * block_cols_ + block_col != expected) {
    fail(ErrorKind::kStreamProtocol, "block (" + std::to_string(block_row) + "," +
                                         std::to_string(block_col) + ") out of raster order");
  }
  ++next_;
  if (map_.raw.empty()) return;

  const int product_fraction = value_fraction + model_->coefficient_format().fraction;
  const wide_int hi = prediction_.max_raw();
  const wide_int lo = prediction_.min_raw();
  auto to_prediction = [&](wide_int v) -> std::int64_t {
    if (product_fraction == prediction_.fraction && v <= hi && v >= lo) {
      return static_cast<std::int64_t>(v);
    }
    return requantize_raw(v, product_fraction, prediction_);
  };
  auto sat_add = [&](std::int64_t a, std::int64_t b) -> std::int64_t {
    const wide_int s = static_cast<wide_int>(a) + b;
    if (s > hi || s < lo) return saturate_raw(s, prediction_);
    return static_cast<std::int64_t>(s);
  };

  const int wr_first = std::max(0, block_row - (kWindowBlockRows - 1));
  const int wr_last = std::min(block_row, map_.rows - 1);
  const int wc_first = std::max(0, block_col - (kWindowBlockCols - 1));
  const int wc_last = std::min(block_col, map_.cols - 1);
  const std::int32_t* f = values.data();
  for (int wr = wr_first; wr <= wr_last; ++wr) {
    const int r = block_row - wr;
    for (int wc = wc_first; wc <= wc_last; ++wc) {
      const int c = block_col - wc;
      const std::int32_t* w = model_->block_weights(r, c).data();
      // Four 9-element partial dot products, as fed through the four FIFOs.
      std::int64_t block_sum = 0;
      for (int part = 0; part < 4; ++part) {
        std::int64_t dot = 0;
        for (int k = part * kBins; k < (part + 1) * kBins; ++k) {
          dot += static_cast<std::int64_t>(f[k]) * w[k];
        }
        block_sum = sat_add(block_sum, to_prediction(dot));
      }
      std::int64_t& acc = map_.raw[static_cast<std::size_t>(wr) * map_.cols + wc];
      acc = sat_add(acc, block_sum);
      if (r == kWindowBlockRows - 1 && c == kWindowBlockCols - 1) acc = sat_add(acc, bias_raw_);
    }
  }
}

ScoreMap WindowScorer::take() {
  if (!done()) fail(ErrorKind::kStreamProtocol, "block stream ended before end of frame");
  return std::move(map_);
}

ScoreMap score_windows(const BlockGrid& blocks, const SvmModel& model,
                       const PrecisionProfile& profile) {
  WindowScorer scorer(blocks.rows, blocks.cols, model, profile);
  for (int r = 0; r < blocks.rows; ++r) {
    for (int c = 0; c < blocks.cols; ++c) scorer.push_raw(r, c, blocks.values(r, c), blocks.format.fraction);
  }
  return scorer.take();
}

ScoreMap score_windows(std::span<const BlockFeature> blocks, int block_rows, int block_cols,
                       const SvmModel& model, const PrecisionProfile& profile) {
  WindowScorer scorer(block_rows, block_cols, model, profile);
  for (const BlockFeature& b : blocks) scorer.push(b);
  return scorer.take();
}

bool classify(const Fx& score, const Fx& threshold) {
  const int f = std::max(score.format().fraction, threshold.format().fraction);
  const wide_int s = static_cast<wide_int>(score.raw()) << (f - score.format().fraction);
  const wide_int t = static_cast<wide_int>(threshold.raw()) << (f - threshold.format().fraction);
  return s > t;
}

bool classify(const Fx& score, double threshold) {
  if (std::isnan(threshold)) fail(ErrorKind::kInvalidArgument, "threshold is NaN");
  // For an integer s: s > x  <=>  s > floor(x). long double holds any int64 exactly.
  const long double scaled =
      std::floor(std::ldexp(static_cast<long double>(threshold), score.format().fraction));
  return static_cast<long double>(score.raw()) > scaled;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (end > pos) fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorKind::kParse, "model line " + std::to_string(line_no) + ": bad number '" +
                                std::string(s) + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Parses the shared layout; `on_weight(index, field)` receives the value token.
template <class OnBias, class OnWeight>
void parse_model_text(std::string_view text, std::string_view magic, OnBias&& on_bias,
                      OnWeight&& on_weight) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != magic) {
    fail(ErrorKind::kParse, "model: expected magic '" + std::string(magic) + "'");
  }
  if (lines.size() != static_cast<std::size_t>(2 + kWindowFeatureLen)) {
    fail(ErrorKind::kParse, "model: expected " + std::to_string(2 + kWindowFeatureLen) +
                                " lines, got " + std::to_string(lines.size()));
  }
  const auto bias_fields = split_fields(lines[1]);
  if (bias_fields.size() != 2 || bias_fields[0] != "bias") {
    fail(ErrorKind::kParse, "model line 2: expected 'bias <value>'");
  }
  on_bias(bias_fields[1]);
  std::vector<bool> seen(kWindowFeatureLen, false);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 4) fail(ErrorKind::kParse, "model line " + std::to_string(i + 1) + ": expected 4 fields");
    const int br = parse_number<int>(f[0], i + 1);
    const int bc = parse_number<int>(f[1], i + 1);
    const int k = parse_number<int>(f[2], i + 1);
    if (br < 0 || br >= kWindowBlockRows || bc < 0 || bc >= kWindowBlockCols || k < 0 ||
        k >= kBlockLen) {
      fail(ErrorKind::kParse, "model line " + std::to_string(i + 1) + ": index out of range");
    }
    const int idx = weight_index(br, bc, k);
    if (seen[static_cast<std::size_t>(idx)]) {
      fail(ErrorKind::kParse, "model line " + std::to_string(i + 1) + ": duplicate weight");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    on_weight(idx, f[3], i + 1);
  }
}

template <class ValueFn>
std::string format_model_text(std::string_view magic, const std::string& bias, ValueFn&& value) {
  std::string out;
  out.reserve(kWindowFeatureLen * 16);
  out.append(magic).append("\nbias ").append(bias).append("\n");
  for (int br = 0; br < kWindowBlockRows; ++br) {
    for (int bc = 0; bc < kWindowBlockCols; ++bc) {
      for (int k = 0; k < kBlockLen; ++k) {
        out += std::to_string(br) + ' ' + std::to_string(bc) + ' ' + std::to_string(k) + ' ' +
               value(weight_index(br, bc, k)) + '\n';
      }
    }
  }
  return out;
}

std::string_view as_text(const std::vector<std::uint8_t>& bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

std::string format_model(const SvmModel& model) {
  const auto w = model.weights_raw();
  return format_model_text("HOGSVM1", std::to_string(model.bias().raw()),
                           [&](int i) { return std::to_string(w[static_cast<std::size_t>(i)]); });
}

SvmModel parse_model(std::string_view text, const PrecisionProfile& profile) {
  std::vector<std::int64_t> weights(kWindowFeatureLen, 0);
  std::int64_t bias = 0;
  parse_model_text(
      text, "HOGSVM1", [&](std::string_view s) { bias = parse_number<std::int64_t>(s, 2); },
      [&](int idx, std::string_view s, std::size_t line) {
        weights[static_cast<std::size_t>(idx)] = parse_number<std::int64_t>(s, line);
      });
  try {
    return SvmModel::from_raw(weights, bias, profile);
  } catch (const Error& e) {
    fail(ErrorKind::kParse, std::string("model: ") + e.what());
  }
}

std::string format_float_model(const FloatModel& model) {
  if (model.weights.size() != static_cast<std::size_t>(kWindowFeatureLen)) {
    fail(ErrorKind::kContract, "float model must have 3780 weights");
  }
  return format_model_text("HOGSVMF1", format_double(model.bias), [&](int i) {
    return format_double(model.weights[static_cast<std::size_t>(i)]);
  });
}

FloatModel parse_float_model(std::string_view text) {
  auto finite = [](std::string_view s, std::size_t line) {
    const double v = parse_number<double>(s, line);
    if (!std::isfinite(v)) {
      fail(ErrorKind::kParse, "model line " + std::to_string(line) + ": value is not finite");
    }
    return v;
  };
  FloatModel model;
  parse_model_text(
      text, "HOGSVMF1", [&](std::string_view s) { model.bias = finite(s, 2); },
      [&](int idx, std::string_view s, std::size_t line) {
        model.weights[static_cast<std::size_t>(idx)] = finite(s, line);
      });
  return model;
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
  write_file_text(path, format_model(model));
}

SvmModel load_model(const std::filesystem::path& path, const PrecisionProfile& profile) {
  return parse_model(as_text(read_file_bytes(path)), profile);
}

void save_float_model(const FloatModel& model, const std::filesystem::path& path) {
  write_file_text(path, format_float_model(model));
}

FloatModel load_float_model(const std::filesystem::path& path) {
  return parse_float_model(as_text(read_file_bytes(path)));
}

}  // namespace hogsvm
