#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tc {

/// Bytes needed for `count` fields of `bits` bits packed back to back.
constexpr std::size_t packed_bytes(std::size_t count, unsigned bits) noexcept { return (count * bits + 7) / 8; }

/// Packs values LSB-first into a contiguous bit stream, padded to a byte only
/// at the end. Each value must fit in `bits` (1..32).
void pack_bits(std::span<const std::uint32_t> values, unsigned bits, std::vector<std::uint8_t>& out);

/// Inverse of pack_bits. `in` must hold at least packed_bytes(count, bits) bytes.
std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> in, std::size_t count, unsigned bits);

}  // namespace tc
