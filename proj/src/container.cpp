#include "mesongs/container.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <string>

#include "mesongs/byte_io.hpp"
#include "mesongs/error.hpp"

namespace mesongs {

namespace {

std::size_t section_slot(SectionId id) {
  const auto it = std::find(kSectionOrder.begin(), kSectionOrder.end(), id);
  if (it == kSectionOrder.end()) throw_corrupt("unknown section id " + std::to_string(static_cast<unsigned>(id)));
  return static_cast<std::size_t>(it - kSectionOrder.begin());
}

// magic(4) version(2) flags(2) bits(1) degree(1) reserved(2) block(4) M(8)
// K(4) section count(4)
constexpr std::size_t kFixedHeaderBytes = 32;
constexpr std::size_t kEntryBytes = 4 + 8 + 8 + 8 + 4;

}  // namespace

const char* section_name(SectionId id) {
  switch (id) {
    case SectionId::Octree:
      return "octree";
    case SectionId::DcCoefficients:
      return "dc_coefficients";
    case SectionId::QuantizedImportant:
      return "quantized_important";
    case SectionId::VqCodebook:
      return "vq_codebook";
    case SectionId::VqIndices:
      return "vq_indices";
    case SectionId::Metadata:
      return "metadata";
  }
  return "unknown";
}

std::vector<std::uint8_t>& MesonContainer::section(SectionId id) { return sections[section_slot(id)]; }
const std::vector<std::uint8_t>& MesonContainer::section(SectionId id) const { return sections[section_slot(id)]; }

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> raw) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -15, 9, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw_error(ErrorKind::Pipeline, "deflateInit2 failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(raw.size())));
  zs.next_in = const_cast<Bytef*>(raw.data());
  zs.avail_in = static_cast<uInt>(raw.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const std::size_t produced = out.size() - zs.avail_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw_error(ErrorKind::Pipeline, "deflate did not finish");
  out.resize(produced);
  return out;
}

std::vector<std::uint8_t> inflate_bytes(std::span<const std::uint8_t> stored, std::uint64_t raw_size) {
  std::vector<std::uint8_t> out(raw_size);
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw_error(ErrorKind::Pipeline, "inflateInit2 failed");
  zs.next_in = const_cast<Bytef*>(stored.data());
  zs.avail_in = static_cast<uInt>(stored.size());
  // One spare byte so an over-long stream shows up as leftover output.
  std::uint8_t spare = 0;
  zs.next_out = out.empty() ? &spare : out.data();
  zs.avail_out = out.empty() ? 1 : static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  const bool exact = rc == Z_STREAM_END && zs.avail_in == 0 &&
                     (out.empty() ? zs.avail_out == 1 : zs.avail_out == 0);
  inflateEnd(&zs);
  if (!exact) throw_corrupt("section does not inflate to its recorded length");
  return out;
}

std::vector<std::uint8_t> write_container(const MesonContainer& container) {
  std::array<std::vector<std::uint8_t>, kSectionOrder.size()> stored;
  for (std::size_t s = 0; s < kSectionOrder.size(); ++s) stored[s] = deflate_bytes(container.sections[s]);

  const ContainerHeader& h = container.header;
  ByteWriter w;
  for (const char c : kContainerMagic) w.put(static_cast<std::uint8_t>(c));
  w.put(h.version);
  w.put(h.flags);
  w.put(h.bit_width);
  w.put(h.sh_degree);
  w.put(std::uint16_t{0});
  w.put(h.block_length);
  w.put(h.voxel_count);
  w.put(h.codebook_size);
  w.put(static_cast<std::uint32_t>(kSectionOrder.size()));

  std::uint64_t offset = kFixedHeaderBytes + kSectionOrder.size() * kEntryBytes + 4;
  for (std::size_t s = 0; s < kSectionOrder.size(); ++s) {
    w.put(static_cast<std::uint32_t>(kSectionOrder[s]));
    w.put(offset);
    w.put(static_cast<std::uint64_t>(stored[s].size()));
    w.put(static_cast<std::uint64_t>(container.sections[s].size()));
    w.put(crc32_of(stored[s]));
    offset += stored[s].size();
  }
  w.put(crc32_of(w.bytes()));
  for (const auto& s : stored) w.put_bytes(s);
  return w.take();
}

ContainerLayout read_layout(std::span<const std::uint8_t> bytes) {
  ContainerLayout layout;
  layout.file_bytes = bytes.size();
  if (bytes.size() < kFixedHeaderBytes || !std::equal(kContainerMagic.begin(), kContainerMagic.end(), bytes.begin(),
                                                      [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw_error(ErrorKind::Format, "not a MesonGS container (bad magic)");
  }
  ByteReader r(bytes.subspan(4), "container header");
  ContainerHeader& h = layout.header;
  h.version = r.get<std::uint16_t>();
  if (h.version != kContainerVersion) {
    throw_error(ErrorKind::Format, "unsupported container version " + std::to_string(h.version));
  }
  h.flags = r.get<std::uint16_t>();
  h.bit_width = r.get<std::uint8_t>();
  h.sh_degree = r.get<std::uint8_t>();
  r.get<std::uint16_t>();
  h.block_length = r.get<std::uint32_t>();
  h.voxel_count = r.get<std::uint64_t>();
  h.codebook_size = r.get<std::uint32_t>();
  const auto count = r.get<std::uint32_t>();
  if (count != kSectionOrder.size()) throw_corrupt("unexpected section count " + std::to_string(count));

  for (std::uint32_t s = 0; s < count; ++s) {
    SectionEntry e;
    e.id = static_cast<SectionId>(r.get<std::uint32_t>());
    e.offset = r.get<std::uint64_t>();
    e.stored_size = r.get<std::uint64_t>();
    e.raw_size = r.get<std::uint64_t>();
    e.crc32 = r.get<std::uint32_t>();
    if (e.id != kSectionOrder[s]) throw_corrupt("section table out of order");
    // DEFLATE cannot expand beyond ~1032:1.
    if (e.raw_size > 1032 * e.stored_size + 64) throw_corrupt("section raw length is implausible");
    layout.entries.push_back(e);
  }
  const std::size_t table_end = 4 + r.position();
  const auto header_crc = r.get<std::uint32_t>();
  if (header_crc != crc32_of(bytes.first(table_end))) throw_corrupt("container header CRC mismatch");
  layout.header_bytes = table_end + 4;

  std::uint64_t expected = layout.header_bytes;
  for (const auto& e : layout.entries) {
    if (e.offset != expected || e.stored_size > bytes.size() - e.offset) {
      throw_corrupt(std::string("section ") + section_name(e.id) + " lies outside the file");
    }
    expected += e.stored_size;
  }
  if (expected != bytes.size()) throw_corrupt("container has trailing bytes");
  if (h.bit_width < 1 || h.bit_width > 16) throw_corrupt("bit width out of range");
  if (h.block_length < 2) throw_corrupt("block length out of range");
  return layout;
}

MesonContainer read_container(std::span<const std::uint8_t> bytes) {
  const ContainerLayout layout = read_layout(bytes);
  for (const auto& e : layout.entries) {
    if (crc32_of(bytes.subspan(e.offset, e.stored_size)) != e.crc32) {
      throw_corrupt(std::string("section ") + section_name(e.id) + " CRC mismatch");
    }
  }
  MesonContainer out;
  out.header = layout.header;
  for (std::size_t s = 0; s < layout.entries.size(); ++s) {
    const auto& e = layout.entries[s];
    out.sections[s] = inflate_bytes(bytes.subspan(e.offset, e.stored_size), e.raw_size);
  }
  return out;
}

}  // namespace mesongs
