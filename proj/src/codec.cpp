#include "mesongs/codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "mesongs/block_quant.hpp"
#include "mesongs/byte_io.hpp"
#include "mesongs/error.hpp"
#include "mesongs/octree.hpp"
#include "mesongs/parallel.hpp"
#include "mesongs/pruning.hpp"
#include "mesongs/raht.hpp"
#include "mesongs/rotation.hpp"
#include "mesongs/vector_quant.hpp"

namespace mesongs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_scale_channel(int c) { return c >= kScale0 && c <= kScale2; }

int index_bits(std::uint64_t codebook_size) {
  return std::max(1, static_cast<int>(std::bit_width(codebook_size - 1)));
}

std::size_t packed_bytes(std::uint64_t count, int bits) { return static_cast<std::size_t>((count * bits + 7) / 8); }

std::uint64_t block_count_for(std::uint64_t count, std::uint64_t block_length) {
  return (count + block_length - 1) / block_length;
}

struct ChannelMeta {
  bool raht = false;
  std::uint64_t value_count = 0;
  std::vector<float> block_min;
  std::vector<float> block_max;
};

struct Metadata {
  int depth = 1;
  std::array<double, 3> bbox_min{};
  double bbox_size = 1.0;
  std::uint32_t rest_dim = 0;
  std::array<ChannelMeta, kImportantChannels> channels;
};

std::vector<std::uint8_t> write_metadata(const Metadata& meta) {
  ByteWriter w;
  w.put(static_cast<std::uint8_t>(meta.depth));
  for (const double v : meta.bbox_min) w.put(v);
  w.put(meta.bbox_size);
  w.put(meta.rest_dim);
  for (const auto& ch : meta.channels) {
    w.put(static_cast<std::uint8_t>(ch.raht ? 1 : 0));
    w.put(ch.value_count);
    w.put(static_cast<std::uint64_t>(ch.block_min.size()));
    for (std::size_t b = 0; b < ch.block_min.size(); ++b) {
      w.put(ch.block_min[b]);
      w.put(ch.block_max[b]);
    }
  }
  return w.take();
}

Metadata read_metadata(std::span<const std::uint8_t> bytes, const ContainerHeader& header) {
  ByteReader r(bytes, "metadata section");
  Metadata meta;
  meta.depth = r.get<std::uint8_t>();
  for (double& v : meta.bbox_min) v = r.get<double>();
  meta.bbox_size = r.get<double>();
  meta.rest_dim = r.get<std::uint32_t>();
  const std::uint64_t expected_blocks_per_value = header.raw_coefficients() ? 0 : 1;
  for (int c = 0; c < kImportantChannels; ++c) {
    ChannelMeta& ch = meta.channels[c];
    const auto flag = r.get<std::uint8_t>();
    if (flag > 1) throw_corrupt("metadata: bad RAHT flag");
    ch.raht = flag == 1;
    ch.value_count = r.get<std::uint64_t>();
    const auto blocks = r.get<std::uint64_t>();
    const std::uint64_t expected =
        expected_blocks_per_value * block_count_for(ch.value_count, header.block_length);
    if (blocks != expected) throw_corrupt(std::string("metadata: block count mismatch for ") + channel_name(c));
    if (blocks > r.remaining() / 8) throw_corrupt("metadata section is truncated");
    ch.block_min.resize(blocks);
    ch.block_max.resize(blocks);
    for (std::uint64_t b = 0; b < blocks; ++b) {
      ch.block_min[b] = r.get<float>();
      ch.block_max[b] = r.get<float>();
      if (!std::isfinite(ch.block_min[b]) || !std::isfinite(ch.block_max[b]) || ch.block_min[b] > ch.block_max[b]) {
        throw_corrupt(std::string("metadata: invalid block range for ") + channel_name(c));
      }
    }
  }
  if (r.remaining() != 0) throw_corrupt("metadata section has trailing bytes");
  return meta;
}

// Channel c of the merged cloud, rows in Morton order.
std::array<std::vector<double>, kImportantChannels> split_channels(const GaussianCloud& merged) {
  const std::size_t m = merged.size();
  std::array<std::vector<double>, kImportantChannels> ch;
  for (auto& v : ch) v.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto q = merged.rotation(i);
    const EulerAngles e = quat_to_euler({q[0], q[1], q[2], q[3]});
    ch[kOpacity][i] = merged.opacity_logits[i];
    ch[kEulerPhi][i] = e.phi;
    ch[kEulerTheta][i] = e.theta;
    ch[kEulerPsi][i] = e.psi;
    for (int k = 0; k < 3; ++k) {
      ch[kScale0 + k][i] = merged.log_scale(i)[k];
      ch[kDc0 + k][i] = merged.dc(i)[k];
    }
  }
  return ch;
}

}  // namespace

const char* channel_name(int channel) {
  static constexpr std::array<const char*, kImportantChannels> names = {
      "opacity", "euler_phi", "euler_theta", "euler_psi", "scale_0", "scale_1", "scale_2", "dc_0", "dc_1", "dc_2"};
  if (channel < 0 || channel >= kImportantChannels) return "unknown";
  return names[channel];
}

void validate(const EncoderConfig& config) {
  if (!(config.tau >= 0.0 && config.tau < 1.0)) throw_argument("tau must lie in [0, 1)");
  if (!(config.beta > 0.0) || !std::isfinite(config.beta)) throw_argument("beta must be a positive finite number");
  if (config.depth < 1 || config.depth > kMaxOctreeDepth) {
    throw_argument("depth must lie in 1.." + std::to_string(kMaxOctreeDepth));
  }
  if (config.bit_width < 1 || config.bit_width > 16) throw_argument("bits must lie in 1..16");
  if (config.block_length < 2) throw_argument("block length must be at least 2");
  if (config.codebook_size < 1) throw_argument("codebook size must be at least 1");
  if (config.vq_iters < 0) throw_argument("vq iterations must be non-negative");
  if (config.vq_batch < 1) throw_argument("vq batch must be at least 1");
}

bool raht_on_scales(const EncoderConfig& config) {
  switch (config.raht_scales) {
    case RahtScalesMode::On:
      return true;
    case RahtScalesMode::Off:
      return false;
    case RahtScalesMode::Auto:
      break;
  }
  return config.bit_width > 8;
}

std::vector<std::uint8_t> encode(const GaussianCloud& cloud, const CameraSet* cameras, const EncoderConfig& config,
                                 EncodeStats* stats) {
  validate(config);
  if (config.tau > 0.0 && (cameras == nullptr || cameras->empty())) {
    throw_argument("tau > 0 needs cameras for view-dependent importance");
  }
  validate(cloud);
  EncodeStats local;
  local.input_count = cloud.size();

  auto t = Clock::now();
  GaussianCloud kept;
  if (config.tau > 0.0) {
    const ImportanceScores scores = importance_scores(cloud, *cameras, config.beta);
    kept = prune(cloud, scores, config.tau);
  } else {
    kept = cloud;
  }
  if (kept.empty()) throw_error(ErrorKind::Pipeline, "nothing left to encode after pruning");
  local.pruned_count = kept.size();
  local.prune_seconds = seconds_since(t);

  t = Clock::now();
  const Voxelized vox = voxelize(kept, config.depth);
  kept = GaussianCloud();
  const GaussianCloud& merged = vox.merged;
  const std::uint64_t m = merged.size();
  const MergeSchedule schedule = build_merge_schedule(vox.grid.keys, config.depth);
  const Octree tree = encode_octree(vox.grid);
  local.voxel_count = m;
  local.geometry_seconds = seconds_since(t);

  t = Clock::now();
  const bool raw = config.raw_coefficients;
  const bool scales_raht = raht_on_scales(config);
  const auto channels = split_channels(merged);
  std::array<std::vector<double>, kImportantChannels> streams;
  std::array<float, kImportantChannels> dcs{};
  Metadata meta;
  meta.depth = config.depth;
  meta.bbox_min = vox.grid.bbox_min;
  meta.bbox_size = vox.grid.bbox_size;
  meta.rest_dim = static_cast<std::uint32_t>(merged.rest_width());
  parallel_for(kImportantChannels, [&](std::size_t c) {
    const bool use_raht = !is_scale_channel(static_cast<int>(c)) || scales_raht;
    meta.channels[c].raht = use_raht;
    if (use_raht) {
      RahtCoefficients rc = raht_forward(channels[c], schedule);
      dcs[c] = static_cast<float>(rc.dc);
      streams[c] = std::move(rc.ac);
    } else {
      streams[c] = channels[c];
    }
    meta.channels[c].value_count = streams[c].size();
  });

  std::array<std::vector<std::uint8_t>, kImportantChannels> payloads;
  parallel_for(kImportantChannels, [&](std::size_t c) {
    const auto& values = streams[c];
    if (values.empty()) return;
    if (raw) {
      ByteWriter w;
      for (const double v : values) w.put(static_cast<float>(v));
      payloads[c] = w.take();
      return;
    }
    QuantizedChannel qc = block_quantize(values, config.bit_width, config.block_length);
    payloads[c] = pack_bits(qc.codes, config.bit_width);
    meta.channels[c].block_min = std::move(qc.block_min);
    meta.channels[c].block_max = std::move(qc.block_max);
  });
  local.transform_seconds = seconds_since(t);

  t = Clock::now();
  const std::size_t dim = merged.rest_width();
  std::vector<float> codebook;
  std::vector<std::uint32_t> indices;
  std::uint64_t k = 0;
  if (dim > 0) {
    if (raw) {
      k = m;
      codebook.assign(merged.sh_rest.begin(), merged.sh_rest.end());
      indices.resize(m);
      std::iota(indices.begin(), indices.end(), 0u);
    } else {
      VqOptions opts;
      opts.codebook_size = std::min<std::uint64_t>(config.codebook_size, m);
      opts.iters = config.vq_iters;
      opts.batch = config.vq_batch;
      opts.seed = config.seed;
      opts.float32_centroids = true;
      Codebook fitted = vq_fit(merged.sh_rest, dim, opts);
      k = fitted.size();
      codebook.assign(fitted.centroids.begin(), fitted.centroids.end());
      indices = std::move(fitted.indices);
    }
  }
  local.codebook_size = k;
  local.vq_seconds = seconds_since(t);

  t = Clock::now();
  MesonContainer container;
  ContainerHeader& h = container.header;
  h.flags = static_cast<std::uint16_t>((scales_raht ? header_flags::kRahtOnScales : 0) |
                                       (raw ? header_flags::kRawCoefficients : 0));
  h.bit_width = static_cast<std::uint8_t>(config.bit_width);
  h.sh_degree = static_cast<std::uint8_t>(merged.sh_degree);
  h.block_length = config.block_length;
  h.voxel_count = m;
  h.codebook_size = static_cast<std::uint32_t>(k);

  container.section(SectionId::Octree) = serialize_octree(tree);
  {
    ByteWriter w;
    for (const float dc : dcs) w.put(dc);
    container.section(SectionId::DcCoefficients) = w.take();
  }
  {
    ByteWriter w;
    for (const auto& p : payloads) w.put_bytes(p);
    container.section(SectionId::QuantizedImportant) = w.take();
  }
  {
    ByteWriter w;
    for (const float v : codebook) w.put(v);
    container.section(SectionId::VqCodebook) = w.take();
  }
  if (k > 0) container.section(SectionId::VqIndices) = pack_bits(indices, index_bits(k));
  container.section(SectionId::Metadata) = write_metadata(meta);
  std::vector<std::uint8_t> bytes = write_container(container);
  local.pack_seconds = seconds_since(t);

  if (stats != nullptr) *stats = local;
  return bytes;
}

GaussianCloud decode(std::span<const std::uint8_t> bytes) {
  const MesonContainer container = read_container(bytes);
  const ContainerHeader& h = container.header;
  const bool raw = h.raw_coefficients();
  if ((h.flags & ~(header_flags::kRahtOnScales | header_flags::kRawCoefficients)) != 0) {
    throw_corrupt("unknown header flags");
  }

  const Octree tree = deserialize_octree(container.section(SectionId::Octree));
  DecodedOctree geometry = decode_octree(tree);
  const std::uint64_t m = geometry.keys.size();
  if (m != h.voxel_count) throw_corrupt("octree leaf count does not match the header");

  const Metadata meta = read_metadata(container.section(SectionId::Metadata), h);
  if (meta.depth != tree.depth || meta.bbox_min != tree.bbox_min || meta.bbox_size != tree.bbox_size) {
    throw_corrupt("metadata geometry disagrees with the octree section");
  }
  if (meta.rest_dim != sh_rest_width(h.sh_degree)) throw_corrupt("metadata SH width disagrees with the header");
  for (int c = 0; c < kImportantChannels; ++c) {
    const ChannelMeta& ch = meta.channels[c];
    const bool want_raht = !is_scale_channel(c) || h.raht_on_scales();
    if (ch.raht != want_raht) throw_corrupt(std::string("RAHT flag mismatch for ") + channel_name(c));
    if (ch.value_count != (ch.raht ? m - 1 : m)) {
      throw_corrupt(std::string("value count mismatch for ") + channel_name(c));
    }
  }

  const auto& dc_bytes = container.section(SectionId::DcCoefficients);
  if (dc_bytes.size() != kImportantChannels * sizeof(float)) throw_corrupt("DC section has the wrong length");
  std::array<double, kImportantChannels> dcs{};
  {
    ByteReader r(dc_bytes, "DC section");
    for (double& dc : dcs) {
      dc = r.get<float>();
      if (!std::isfinite(dc)) throw_corrupt("non-finite DC coefficient");
    }
  }

  const auto& important = container.section(SectionId::QuantizedImportant);
  std::array<std::span<const std::uint8_t>, kImportantChannels> payloads;
  {
    std::size_t expected = 0;
    for (const auto& ch : meta.channels) {
      expected += raw ? ch.value_count * sizeof(float) : packed_bytes(ch.value_count, h.bit_width);
    }
    if (important.size() != expected) throw_corrupt("quantized section has the wrong length");
    ByteReader r(important, "quantized section");
    for (int c = 0; c < kImportantChannels; ++c) {
      const auto count = meta.channels[c].value_count;
      payloads[c] = r.get_bytes(raw ? count * sizeof(float) : packed_bytes(count, h.bit_width));
    }
  }

  const std::size_t dim = sh_rest_width(h.sh_degree);
  const std::uint64_t k = h.codebook_size;
  if (dim == 0 ? k != 0 : (k == 0 || k > m)) throw_corrupt("codebook size is inconsistent");
  const auto& cb_bytes = container.section(SectionId::VqCodebook);
  const auto& idx_bytes = container.section(SectionId::VqIndices);
  if (cb_bytes.size() != k * dim * sizeof(float)) throw_corrupt("codebook section has the wrong length");
  if (idx_bytes.size() != (k == 0 ? 0 : packed_bytes(m, index_bits(k)))) {
    throw_corrupt("index section has the wrong length");
  }
  std::vector<double> centroids(k * dim);
  {
    ByteReader r(cb_bytes, "codebook section");
    for (double& v : centroids) {
      v = r.get<float>();
      if (!std::isfinite(v)) throw_corrupt("non-finite codebook entry");
    }
  }
  std::vector<double> rest;
  if (k > 0) rest = vq_decode(centroids, dim, unpack_bits(idx_bytes, m, index_bits(k)));

  std::array<std::vector<double>, kImportantChannels> channels;
  parallel_for(kImportantChannels, [&](std::size_t c) {
    const ChannelMeta& ch = meta.channels[c];
    std::vector<double> values;
    if (raw) {
      ByteReader r(payloads[c], "quantized section");
      values.resize(ch.value_count);
      for (double& v : values) {
        v = r.get<float>();
        if (!std::isfinite(v)) throw_corrupt("non-finite raw coefficient");
      }
    } else if (ch.value_count > 0) {
      QuantizedChannel qc;
      qc.bit_width = h.bit_width;
      qc.block_length = h.block_length;
      qc.block_min = ch.block_min;
      qc.block_max = ch.block_max;
      qc.codes = unpack_bits(payloads[c], ch.value_count, h.bit_width);
      values = block_dequantize(qc);
    }
    channels[c] = ch.raht ? raht_inverse({dcs[c], std::move(values)}, geometry.schedule) : std::move(values);
  });

  GaussianCloud out(m, h.sh_degree);
  out.positions = std::move(geometry.centers);
  out.sh_rest = std::move(rest);
  out.opacity_logits = channels[kOpacity];
  for (std::size_t i = 0; i < m; ++i) {
    const Quaternion q = euler_to_quat({channels[kEulerPhi][i], channels[kEulerTheta][i], channels[kEulerPsi][i]});
    std::copy(q.begin(), q.end(), out.rotation(i).begin());
    for (int a = 0; a < 3; ++a) {
      out.log_scale(i)[a] = channels[kScale0 + a][i];
      out.dc(i)[a] = channels[kDc0 + a][i];
    }
  }
  return out;
}

CompositionReport inspect(std::span<const std::uint8_t> bytes) {
  const ContainerLayout layout = read_layout(bytes);
  CompositionReport report;
  report.header = layout.header;
  report.file_bytes = layout.file_bytes;
  report.header_bytes = layout.header_bytes;
  const double total = static_cast<double>(layout.file_bytes);
  const auto pct = [total](std::uint64_t n) { return 100.0 * static_cast<double>(n) / total; };
  report.header_percent = pct(layout.header_bytes);
  report.metadata_percent = report.header_percent;
  for (const auto& e : layout.entries) {
    report.sections.push_back({section_name(e.id), e.stored_size, e.raw_size, pct(e.stored_size)});
    switch (e.id) {
      case SectionId::Octree:
        report.octree_percent += pct(e.stored_size);
        break;
      case SectionId::DcCoefficients:
      case SectionId::QuantizedImportant:
        report.important_percent += pct(e.stored_size);
        break;
      case SectionId::VqCodebook:
      case SectionId::VqIndices:
        report.unimportant_percent += pct(e.stored_size);
        break;
      case SectionId::Metadata:
        report.metadata_percent += pct(e.stored_size);
        break;
    }
  }
  return report;
}

}  // namespace mesongs
