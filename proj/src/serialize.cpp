#include "hogsvm/serialize.hpp"

#include <fstream>
#include <iterator>

#include "hogsvm/error.hpp"

namespace hogsvm {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::kIo, "read error on " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write error on " + path.string());
}

void write_file_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kContract: return "contract violation";
    case ErrorKind::kGeometry: return "geometry error";
    case ErrorKind::kStreamProtocol: return "stream protocol error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kTraining: return "training error";
  }
  return "unknown error";
}

}  // namespace hogsvm
