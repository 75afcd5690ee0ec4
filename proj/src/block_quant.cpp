#include "mesongs/block_quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mesongs/error.hpp"

namespace mesongs {

namespace {

// Ties-to-even under the default FE_TONEAREST rounding mode.
double round_half_even(double v) { return std::nearbyint(v); }

}  // namespace

BlockParams block_params(float block_min, float block_max, int bit_width) {
  BlockParams p;
  const double lo = block_min;
  const double hi = block_max;
  if (!(hi > lo)) return p;
  const double levels = std::ldexp(1.0, bit_width);
  p.scale = (hi - lo) / levels;
  p.zero_point = round_half_even(levels - hi / p.scale);
  return p;
}

QuantizedChannel block_quantize(std::span<const double> channel, int bit_width, std::size_t block_length) {
  if (channel.empty()) throw_argument("block_quantize: empty channel");
  if (bit_width < 1 || bit_width > 16) throw_argument("block_quantize: bit width must be in 1..16");
  if (block_length < 2) throw_argument("block_quantize: block length must be >= 2");

  QuantizedChannel qc;
  qc.bit_width = bit_width;
  qc.block_length = block_length;
  const std::size_t blocks = (channel.size() + block_length - 1) / block_length;
  qc.block_min.resize(blocks);
  qc.block_max.resize(blocks);
  qc.codes.resize(channel.size());
  const double top = std::ldexp(1.0, bit_width) - 1.0;

  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t begin = b * block_length;
    const std::size_t end = std::min(channel.size(), begin + block_length);
    double lo = channel[begin];
    double hi = channel[begin];
    for (std::size_t i = begin; i < end; ++i) {
      if (!std::isfinite(channel[i])) {
        throw_error(ErrorKind::Data, "block_quantize: non-finite value in block " + std::to_string(b));
      }
      lo = std::min(lo, channel[i]);
      hi = std::max(hi, channel[i]);
    }
    qc.block_min[b] = static_cast<float>(lo);
    qc.block_max[b] = static_cast<float>(hi);
    const BlockParams p = block_params(qc.block_min[b], qc.block_max[b], bit_width);
    for (std::size_t i = begin; i < end; ++i) {
      if (p.scale == 0.0) {
        qc.codes[i] = 0;
        continue;
      }
      const double v = std::clamp(channel[i] / p.scale + p.zero_point, 0.0, top);
      qc.codes[i] = static_cast<std::uint32_t>(round_half_even(v));
    }
  }
  return qc;
}

std::vector<double> block_dequantize(const QuantizedChannel& qc) {
  std::vector<double> out(qc.codes.size());
  for (std::size_t b = 0; b < qc.block_count(); ++b) {
    const std::size_t begin = b * qc.block_length;
    const std::size_t end = std::min(qc.codes.size(), begin + qc.block_length);
    const BlockParams p = block_params(qc.block_min[b], qc.block_max[b], qc.bit_width);
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = p.scale == 0.0 ? static_cast<double>(qc.block_min[b])
                              : (static_cast<double>(qc.codes[i]) - p.zero_point) * p.scale;
    }
  }
  return out;
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint32_t> codes, int bits) {
  std::vector<std::uint8_t> out((codes.size() * static_cast<std::size_t>(bits) + 7) / 8, 0);
  std::size_t bit = 0;
  for (const std::uint32_t code : codes) {
    for (int k = 0; k < bits; ++k, ++bit) {
      if ((code >> k) & 1u) out[bit >> 3] |= static_cast<std::uint8_t>(1u << (bit & 7));
    }
  }
  return out;
}

std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count, int bits) {
  if (bytes.size() * 8 < count * static_cast<std::size_t>(bits)) {
    throw_error(ErrorKind::CorruptStream, "bit-packed stream is truncated");
  }
  std::vector<std::uint32_t> out(count, 0);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t code = 0;
    for (int k = 0; k < bits; ++k, ++bit) {
      code |= static_cast<std::uint32_t>((bytes[bit >> 3] >> (bit & 7)) & 1u) << k;
    }
    out[i] = code;
  }
  return out;
}

}  // namespace mesongs
