// Exercises the shared library strictly through its C header.
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "doctest.h"
#include "hogsvm/hogsvm.h"

namespace {

const std::filesystem::path kDir = std::filesystem::current_path() / "capi_work";

std::string path_of(const char* name) {
  std::filesystem::create_directories(kDir);
  return (kDir / name).string();
}

std::vector<char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

hogsvm_frame* make_frame(int w, int h, unsigned seed) {
  std::vector<uint8_t> px(static_cast<size_t>(w) * h);
  unsigned s = seed;
  for (auto& p : px) {
    s = s * 1103515245u + 12345u;
    p = static_cast<uint8_t>(s >> 16);
  }
  hogsvm_frame* f = nullptr;
  REQUIRE(hogsvm_frame_create(w, h, px.data(), &f) == HOGSVM_OK);
  return f;
}

hogsvm_model* bias_model(int64_t bias_raw) {
  std::vector<int64_t> w(3780, 0);
  hogsvm_model* m = nullptr;
  REQUIRE(hogsvm_model_from_raw(w.data(), w.size(), bias_raw, &m) == HOGSVM_OK);
  return m;
}

std::string format(const hogsvm_detections* d) {
  size_t need = 0;
  REQUIRE(hogsvm_detections_format(d, nullptr, 0, &need) == HOGSVM_OK);
  std::string s(need, '\0');
  REQUIRE(hogsvm_detections_format(d, s.data(), s.size(), nullptr) == HOGSVM_OK);
  s.resize(need - 1);
  return s;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::strlen(hogsvm_version()) > 0);
  CHECK(std::string(hogsvm_status_string(HOGSVM_OK)) == "ok");
  CHECK(std::strlen(hogsvm_status_string(HOGSVM_E_GEOMETRY)) > 0);
}

TEST_CASE("frame creation and geometry errors") {
  hogsvm_frame* f = make_frame(64, 128, 1);
  CHECK(hogsvm_frame_width(f) == 64);
  CHECK(hogsvm_frame_height(f) == 128);
  const std::string pgm = path_of("f.pgm");
  CHECK(hogsvm_frame_save_pgm(f, pgm.c_str()) == HOGSVM_OK);
  hogsvm_frame* g = nullptr;
  CHECK(hogsvm_frame_load(pgm.c_str(), &g) == HOGSVM_OK);
  CHECK(hogsvm_frame_width(g) == 64);
  hogsvm_frame_free(g);
  hogsvm_frame_free(f);
  hogsvm_frame_free(nullptr);

  g = nullptr;
  CHECK(hogsvm_frame_load(path_of("nope.pgm").c_str(), &g) == HOGSVM_E_IO);
  CHECK(g == nullptr);
  CHECK(std::strlen(hogsvm_last_error()) > 0);

  std::ofstream(path_of("bad.pgm"), std::ios::binary) << "P3\n1 1\n255\n0 0 0\n";
  CHECK(hogsvm_frame_load(path_of("bad.pgm").c_str(), &g) == HOGSVM_E_PARSE);

  const std::vector<uint8_t> px(100 * 64, 0);
  CHECK(hogsvm_frame_create(100, 64, px.data(), &g) == HOGSVM_E_GEOMETRY);
  CHECK(std::string(hogsvm_last_error()).find("frame") != std::string::npos);
  CHECK(hogsvm_frame_create(64, 64, nullptr, &g) == HOGSVM_E_INVALID_ARGUMENT);
}

TEST_CASE("model save and load round trip") {
  std::vector<int64_t> w(3780, 3);
  hogsvm_model* m = nullptr;
  CHECK(hogsvm_model_from_raw(w.data(), 3779, 0, &m) == HOGSVM_E_CONTRACT);
  w[9] = 5000;
  CHECK(hogsvm_model_from_raw(w.data(), w.size(), 0, &m) == HOGSVM_E_CONTRACT);
  w[9] = -5;
  REQUIRE(hogsvm_model_from_raw(w.data(), w.size(), 77, &m) == HOGSVM_OK);
  const std::string path = path_of("m.txt");
  CHECK(hogsvm_model_save(m, path.c_str()) == HOGSVM_OK);
  hogsvm_model* back = nullptr;
  CHECK(hogsvm_model_load(path.c_str(), &back) == HOGSVM_OK);
  CHECK(hogsvm_model_save(back, path_of("m2.txt").c_str()) == HOGSVM_OK);
  CHECK(read_all(path) == read_all(path_of("m2.txt")));
  hogsvm_model_free(back);
  hogsvm_model_free(m);

  std::ofstream(path_of("broken.txt")) << "HOGSVM1\nbias 0\n0 0 0 1\n";
  CHECK(hogsvm_model_load(path_of("broken.txt").c_str(), &m) == HOGSVM_E_PARSE);
  CHECK(hogsvm_float_model_load(path_of("missing.txt").c_str(), nullptr) == HOGSVM_E_INVALID_ARGUMENT);
}

TEST_CASE("detect: bias-only models and formatting") {
  hogsvm_frame* f = make_frame(128, 256, 2);
  hogsvm_model* neg = bias_model(-(int64_t{1} << 19));
  hogsvm_model* pos = bias_model(int64_t{1} << 19);

  hogsvm_detections* d = nullptr;
  REQUIRE(hogsvm_detect(f, neg, nullptr, &d) == HOGSVM_OK);
  CHECK(hogsvm_detections_count(d) == 0);
  CHECK(format(d).empty());
  hogsvm_detections_free(d);

  hogsvm_detect_options o;
  hogsvm_detect_options_default(&o);
  CHECK(o.ppc == 4);
  CHECK(o.iou == 0.5);
  o.apply_nms = 0;
  REQUIRE(hogsvm_detect(f, pos, &o, &d) == HOGSVM_OK);
  CHECK(hogsvm_detections_count(d) == 9 * 17);
  hogsvm_detection det;
  REQUIRE(hogsvm_detections_get(d, 0, &det) == HOGSVM_OK);
  CHECK(det.x == 0);
  CHECK(det.w == 64);
  CHECK(det.h == 128);
  CHECK(det.score == 1.0);
  CHECK(hogsvm_detections_get(d, 9 * 17, &det) == HOGSVM_E_INVALID_ARGUMENT);
  const std::string text = format(d);
  CHECK(text.rfind("0 0 64 128 1\n", 0) == 0);

  // Truncating copy always terminates.
  char small[5];
  size_t need = 0;
  CHECK(hogsvm_detections_format(d, small, sizeof small, &need) == HOGSVM_OK);
  CHECK(need == text.size() + 1);
  CHECK(std::string(small) == "0 0 ");
  CHECK(hogsvm_detections_format(d, nullptr, 10, &need) == HOGSVM_E_INVALID_ARGUMENT);

  CHECK(hogsvm_detections_write(d, path_of("d.txt").c_str()) == HOGSVM_OK);
  const auto written = read_all(path_of("d.txt"));
  CHECK(std::string(written.begin(), written.end()) == text);
  hogsvm_detections_free(d);

  // NMS keeps fewer, all equal-scored; the top-left anchor wins ties.
  o.apply_nms = 1;
  REQUIRE(hogsvm_detect(f, pos, &o, &d) == HOGSVM_OK);
  CHECK(hogsvm_detections_count(d) < 9 * 17);
  REQUIRE(hogsvm_detections_get(d, 0, &det) == HOGSVM_OK);
  CHECK(det.x == 0);
  CHECK(det.y == 0);
  hogsvm_detections_free(d);

  o.ppc = 3;
  CHECK(hogsvm_detect(f, pos, &o, &d) == HOGSVM_E_INVALID_ARGUMENT);
  CHECK(std::string(hogsvm_last_error()).rfind("detect:", 0) == 0);

  hogsvm_frame* small_frame = make_frame(64, 120, 3);
  CHECK(hogsvm_detect(small_frame, pos, nullptr, &d) == HOGSVM_E_GEOMETRY);
  hogsvm_frame_free(small_frame);
  hogsvm_model_free(neg);
  hogsvm_model_free(pos);
  hogsvm_frame_free(f);
}

TEST_CASE("training feeds quantization and comparison") {
  hogsvm_train_options to;
  hogsvm_train_options_default(&to);
  to.epochs = 5;
  hogsvm_float_model* fm = nullptr;
  double acc = 0.0;
  REQUIRE(hogsvm_train_synthetic(20, &to, &fm, &acc) == HOGSVM_OK);
  CHECK(acc >= 0.9);
  CHECK(acc <= 1.0);
  CHECK(hogsvm_float_model_save(fm, path_of("fm.txt").c_str()) == HOGSVM_OK);
  hogsvm_float_model* back = nullptr;
  CHECK(hogsvm_float_model_load(path_of("fm.txt").c_str(), &back) == HOGSVM_OK);
  hogsvm_float_model_free(back);

  hogsvm_model* q = nullptr;
  double scale = 0.0;
  REQUIRE(hogsvm_float_model_quantize(fm, &q, &scale) == HOGSVM_OK);
  CHECK(scale > 0.0);
  CHECK(scale <= 1.0);
  hogsvm_model_free(q);

  hogsvm_frame* f = make_frame(64, 128, 4);
  hogsvm_report* r = nullptr;
  REQUIRE(hogsvm_compare(f, fm, 4, 0.0, &r) == HOGSVM_OK);
  double v = -1.0;
  CHECK(hogsvm_report_get(r, "windows", &v) == HOGSVM_OK);
  CHECK(v == 1.0);
  CHECK(hogsvm_report_get(r, "disagreements_beyond_margin", &v) == HOGSVM_OK);
  CHECK(v == 0.0);
  CHECK(hogsvm_report_get(r, "no_such_key", &v) == HOGSVM_E_INVALID_ARGUMENT);
  size_t need = 0;
  CHECK(hogsvm_report_format(r, nullptr, 0, &need) == HOGSVM_OK);
  CHECK(need > 100);
  hogsvm_report_free(r);
  hogsvm_frame_free(f);
  hogsvm_float_model_free(fm);

  to.lambda = -1.0;
  CHECK(hogsvm_train_synthetic(5, &to, &fm, nullptr) == HOGSVM_E_INVALID_ARGUMENT);
  hogsvm_train_options_default(&to);
  std::ofstream(path_of("one_class.txt")) << "+1 f.pgm\n";
  hogsvm_frame* w = make_frame(64, 128, 5);
  REQUIRE(hogsvm_frame_save_pgm(w, path_of("f.pgm").c_str()) == HOGSVM_OK);
  hogsvm_frame_free(w);
  CHECK(hogsvm_train_manifest(path_of("one_class.txt").c_str(), &to, &fm, nullptr) == HOGSVM_E_TRAINING);
  CHECK(std::string(hogsvm_last_error()).find("both labels") != std::string::npos);
}

TEST_CASE("dump layout sizes") {
  hogsvm_frame* f = make_frame(32, 24, 6);
  REQUIRE(hogsvm_dump(f, 2, HOGSVM_DUMP_CELLS, path_of("cells.bin").c_str()) == HOGSVM_OK);
  CHECK(read_all(path_of("cells.bin")).size() == 4u * 3u * 9u * 4u);
  REQUIRE(hogsvm_dump(f, 8, HOGSVM_DUMP_BLOCKS, path_of("blocks.bin").c_str()) == HOGSVM_OK);
  CHECK(read_all(path_of("blocks.bin")).size() == 3u * 2u * 36u * 4u);
  REQUIRE(hogsvm_dump(f, 1, HOGSVM_DUMP_CELLS, path_of("cells1.bin").c_str()) == HOGSVM_OK);
  CHECK(read_all(path_of("cells1.bin")) == read_all(path_of("cells.bin")));
  CHECK(hogsvm_dump(f, 2, static_cast<hogsvm_dump_stage>(7), path_of("x.bin").c_str()) ==
        HOGSVM_E_INVALID_ARGUMENT);
  hogsvm_frame_free(f);
}

TEST_CASE("bench") {
  hogsvm_frame* f = make_frame(128, 128, 7);
  hogsvm_bench_report b;
  REQUIRE(hogsvm_bench(f, nullptr, nullptr, 2, 1, &b) == HOGSVM_OK);
  CHECK(b.width == 128);
  CHECK(b.windows_per_frame == 9);
  CHECK(b.blocks_per_frame == 225);
  CHECK(b.cells_per_frame == 256);
  CHECK(b.detections_per_frame == 0);
  CHECK(b.frames_per_second > 0.0);
  size_t need = 0;
  CHECK(hogsvm_bench_report_format(&b, nullptr, 0, &need) == HOGSVM_OK);
  std::string text(need, '\0');
  CHECK(hogsvm_bench_report_format(&b, text.data(), text.size(), nullptr) == HOGSVM_OK);
  CHECK(text.find("windows_per_frame=9") != std::string::npos);
  CHECK(hogsvm_bench(f, nullptr, nullptr, 0, 1, &b) == HOGSVM_E_INVALID_ARGUMENT);
  hogsvm_frame_free(f);
}
