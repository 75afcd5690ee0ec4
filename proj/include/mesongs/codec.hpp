#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mesongs/camera.hpp"
#include "mesongs/container.hpp"
#include "mesongs/gaussian_cloud.hpp"

namespace mesongs {

enum class RahtScalesMode { Auto, On, Off };

struct EncoderConfig {
  double tau = 0.66;
  double beta = 0.1;
  int depth = 12;
  int bit_width = 8;
  std::uint32_t block_length = 8192;
  std::uint32_t codebook_size = 4096;
  int vq_iters = 10;
  std::uint32_t vq_batch = 65536;
  RahtScalesMode raht_scales = RahtScalesMode::Auto;
  std::uint64_t seed = 0;
  // Debug: store raw float32 coefficients and the sh_rest rows verbatim
  // instead of block codes and a fitted codebook.
  bool raw_coefficients = false;
};

// Throws ArgumentError naming the offending field.
void validate(const EncoderConfig& config);

// Auto keeps scales out of RAHT at 8 bits or fewer.
bool raht_on_scales(const EncoderConfig& config);

// Important channels in stream order.
inline constexpr int kImportantChannels = 10;
enum Channel : int {
  kOpacity = 0,
  kEulerPhi = 1,
  kEulerTheta = 2,
  kEulerPsi = 3,
  kScale0 = 4,
  kScale1 = 5,
  kScale2 = 6,
  kDc0 = 7,
  kDc1 = 8,
  kDc2 = 9,
};
const char* channel_name(int channel);

struct EncodeStats {
  std::size_t input_count = 0;
  std::size_t pruned_count = 0;  // Gaussians left after pruning
  std::size_t voxel_count = 0;
  std::size_t codebook_size = 0;
  double prune_seconds = 0.0;
  double geometry_seconds = 0.0;
  double transform_seconds = 0.0;
  double vq_seconds = 0.0;
  double pack_seconds = 0.0;
};

// prune -> voxelize/octree -> Euler -> RAHT -> block quantization -> VQ -> pack.
// `cameras` may be null when tau == 0.
std::vector<std::uint8_t> encode(const GaussianCloud& cloud, const CameraSet* cameras, const EncoderConfig& config,
                                 EncodeStats* stats = nullptr);

// Inverse pipeline; rows come out in Morton order with voxel-center
// positions. Fails closed: any inconsistency throws before a cloud is built.
GaussianCloud decode(std::span<const std::uint8_t> bytes);

struct SectionReport {
  std::string name;
  std::uint64_t stored_bytes = 0;
  std::uint64_t raw_bytes = 0;
  double percent = 0.0;
};

struct CompositionReport {
  ContainerHeader header;
  std::uint64_t file_bytes = 0;
  std::uint64_t header_bytes = 0;
  double header_percent = 0.0;
  std::vector<SectionReport> sections;
  // Octree / metadata (incl. header) / important attributes / SH codebook+indices.
  double octree_percent = 0.0;
  double metadata_percent = 0.0;
  double important_percent = 0.0;
  double unimportant_percent = 0.0;
};

CompositionReport inspect(std::span<const std::uint8_t> bytes);

}  // namespace mesongs
