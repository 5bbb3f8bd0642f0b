#include "tinycompress/bitpack.hpp"

#include "tinycompress/errors.hpp"

namespace tc {

void pack_bits(std::span<const std::uint32_t> values, unsigned bits, std::vector<std::uint8_t>& out) {
  if (bits == 0 || bits > 32) throw ArgumentError("bit width must lie in [1, 32]");
  const std::uint64_t limit = std::uint64_t{1} << bits;
  std::uint64_t acc = 0;
  unsigned filled = 0;
  for (auto v : values) {
    if (v >= limit) throw ArgumentError("value does not fit in the bit width");
    acc |= static_cast<std::uint64_t>(v) << filled;
    filled += bits;
    while (filled >= 8) {
      out.push_back(static_cast<std::uint8_t>(acc & 0xFF));
      acc >>= 8;
      filled -= 8;
    }
  }
  if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc & 0xFF));
}

std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> in, std::size_t count, unsigned bits) {
  if (bits == 0 || bits > 32) throw ArgumentError("bit width must lie in [1, 32]");
  if (in.size() < packed_bytes(count, bits)) throw ArgumentError("packed buffer too short");
  std::vector<std::uint32_t> out;
  out.reserve(count);
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t acc = 0;
  unsigned filled = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    while (filled < bits) {
      acc |= static_cast<std::uint64_t>(in[pos++]) << filled;
      filled += 8;
    }
    out.push_back(static_cast<std::uint32_t>(acc & mask));
    acc >>= bits;
    filled -= bits;
  }
  return out;
}

}  // namespace tc
