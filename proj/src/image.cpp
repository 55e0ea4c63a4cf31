#include "hogsvm/image.hpp"

#include <cctype>
#include <limits>
#include <string>

#include "hogsvm/serialize.hpp"

namespace hogsvm {

const char* to_string(PnmError code) noexcept {
  switch (code) {
    case PnmError::kBadMagic: return "unsupported magic";
    case PnmError::kBadHeader: return "malformed header";
    case PnmError::kBadMaxval: return "unsupported maxval";
    case PnmError::kTruncated: return "truncated payload";
  }
  return "unknown";
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Reads one unsigned decimal token, skipping whitespace and '#' comments.
  long long next_number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) {
      throw PnmParseError(PnmError::kTruncated, std::string("pnm: header ends before ") + what);
    }
    if (!std::isdigit(bytes_[pos_])) {
      throw PnmParseError(PnmError::kBadHeader, std::string("pnm: expected ") + what);
    }
    long long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > std::numeric_limits<int>::max()) {
        throw PnmParseError(PnmError::kBadHeader, std::string("pnm: ") + what + " too large");
      }
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw PnmParseError(PnmError::kBadHeader, "pnm: missing whitespace before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Frame decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw PnmParseError(PnmError::kBadMagic, "pnm: only binary P5 and P6 are supported");
  }
  const bool color = bytes[1] == '6';
  HeaderReader header(bytes);
  const long long width = header.next_number("width");
  const long long height = header.next_number("height");
  const long long maxval = header.next_number("maxval");
  if (width <= 0 || height <= 0) {
    throw PnmParseError(PnmError::kBadHeader, "pnm: dimensions must be positive");
  }
  if (maxval != 255) {
    throw PnmParseError(PnmError::kBadMaxval,
                        "pnm: maxval " + std::to_string(maxval) + " unsupported (need 255)");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t need = count * (color ? 3 : 1);
  if (bytes.size() < offset || bytes.size() - offset < need) {
    throw PnmParseError(PnmError::kTruncated, "pnm: raster has " +
                                                  std::to_string(bytes.size() - std::min(bytes.size(), offset)) +
                                                  " bytes, need " + std::to_string(need));
  }
  std::vector<std::uint8_t> pixels(count);
  const std::uint8_t* src = bytes.data() + offset;
  if (color) {
    for (std::size_t i = 0; i < count; ++i, src += 3) pixels[i] = luma(src[0], src[1], src[2]);
  } else {
    std::copy(src, src + count, pixels.begin());
  }
  return Frame(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

Frame load_image(const std::filesystem::path& path) {
  Frame frame = decode_pnm(read_file_bytes(path));
  require_cell_aligned(frame.width, frame.height);
  return frame;
}

std::vector<std::uint8_t> encode_pgm(const Frame& frame) {
  const std::string header =
      "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
  return out;
}

void save_pgm(const Frame& frame, const std::filesystem::path& path) {
  write_file_bytes(path, encode_pgm(frame));
}

}  // namespace hogsvm
