#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mesongs {

// Uniform min/max quantization applied independently to consecutive blocks
// of `block_length` values:
//   S = (max - min) / 2^b,  Z = round(2^b - max / S)
//   code = round(clamp(c / S + Z, 0, 2^b - 1)),  value = (code - Z) * S
// round() is ties-to-even. min/max are stored as float32 and S, Z are always
// derived from the stored pair, so decoding needs nothing else. A block with
// max == min has codes 0 and decodes to min.
struct QuantizedChannel {
  int bit_width = 8;
  std::size_t block_length = 8192;
  std::vector<float> block_min;
  std::vector<float> block_max;
  std::vector<std::uint32_t> codes;

  std::size_t block_count() const { return block_min.size(); }
  bool operator==(const QuantizedChannel&) const = default;
};

struct BlockParams {
  double scale = 0.0;  // S; 0 for a degenerate block
  double zero_point = 0.0;
};

BlockParams block_params(float block_min, float block_max, int bit_width);

// Throws Data error naming the block for non-finite input, Argument error for
// an empty channel, b outside 1..16, or L < 2.
QuantizedChannel block_quantize(std::span<const double> channel, int bit_width, std::size_t block_length);

std::vector<double> block_dequantize(const QuantizedChannel& qc);

// Little-endian, LSB-first packing of `bits`-wide codes.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint32_t> codes, int bits);
std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count, int bits);

}  // namespace mesongs
