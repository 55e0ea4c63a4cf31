#ifndef HOGSVM_IMAGE_HPP
#define HOGSVM_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hogsvm/error.hpp"
#include "hogsvm/stream.hpp"

namespace hogsvm {

enum class PnmError {
  kBadMagic,
  kBadHeader,
  kBadMaxval,
  kTruncated,
};

const char* to_string(PnmError code) noexcept;

class PnmParseError : public Error {
 public:
  PnmParseError(PnmError code, const std::string& what)
      : Error(ErrorKind::kParse, what), code_(code) {}
  PnmError code() const noexcept { return code_; }

 private:
  PnmError code_;
};

/// (77 R + 150 G + 29 B) >> 8
constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>((77u * r + 150u * g + 29u * b) >> 8);
}

/// Decodes binary P5 or P6 (maxval 255) of any size; P6 is converted to gray.
Frame decode_pnm(std::span<const std::uint8_t> bytes);

/// decode_pnm plus the cell-size check; throws kGeometry for non-multiples of 8.
Frame load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_pgm(const Frame& frame);
void save_pgm(const Frame& frame, const std::filesystem::path& path);

}  // namespace hogsvm

#endif  // HOGSVM_IMAGE_HPP
