#ifndef HOGSVM_SERIALIZE_HPP
#define HOGSVM_SERIALIZE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hogsvm {

inline void append_le32(std::vector<std::uint8_t>& out, std::int32_t value) {
  const auto u = static_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

inline std::int32_t read_le32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
  return static_cast<std::int32_t>(u);
}

/// Whole-file helpers; both throw kIo on failure.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hogsvm

#endif  // HOGSVM_SERIALIZE_HPP
