#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mesongs {

inline constexpr std::array<char, 4> kContainerMagic = {'M', 'S', 'O', 'N'};
inline constexpr std::uint16_t kContainerVersion = 1;

enum class SectionId : std::uint32_t {
  Octree = 1,
  DcCoefficients = 2,
  QuantizedImportant = 3,
  VqCodebook = 4,
  VqIndices = 5,
  Metadata = 6,
};

inline constexpr std::array<SectionId, 6> kSectionOrder = {
    SectionId::Octree,     SectionId::DcCoefficients, SectionId::QuantizedImportant,
    SectionId::VqCodebook, SectionId::VqIndices,      SectionId::Metadata};

const char* section_name(SectionId id);

namespace header_flags {
inline constexpr std::uint16_t kRahtOnScales = 1u << 0;
inline constexpr std::uint16_t kRawCoefficients = 1u << 1;
}  // namespace header_flags

struct ContainerHeader {
  std::uint16_t version = kContainerVersion;
  std::uint16_t flags = 0;
  std::uint8_t bit_width = 8;
  std::uint8_t sh_degree = 0;
  std::uint32_t block_length = 8192;
  std::uint64_t voxel_count = 0;    // M
  std::uint32_t codebook_size = 0;  // K (0 when there are no 1+ degree SH)

  bool raht_on_scales() const { return (flags & header_flags::kRahtOnScales) != 0; }
  bool raw_coefficients() const { return (flags & header_flags::kRawCoefficients) != 0; }
  bool operator==(const ContainerHeader&) const = default;
};

struct SectionEntry {
  SectionId id = SectionId::Octree;
  std::uint64_t offset = 0;
  std::uint64_t stored_size = 0;  // DEFLATE stream length
  std::uint64_t raw_size = 0;
  std::uint32_t crc32 = 0;  // of the stored bytes
};

// In-memory container: header plus every section's uncompressed payload,
// indexed in kSectionOrder.
struct MesonContainer {
  ContainerHeader header;
  std::array<std::vector<std::uint8_t>, kSectionOrder.size()> sections;

  std::vector<std::uint8_t>& section(SectionId id);
  const std::vector<std::uint8_t>& section(SectionId id) const;
};

// DEFLATE (RFC 1951, raw) at maximum compression; deterministic.
std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> raw);
std::vector<std::uint8_t> inflate_bytes(std::span<const std::uint8_t> stored, std::uint64_t raw_size);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> write_container(const MesonContainer& container);

// Validates magic, version, header CRC, the section table and every section's
// CRC before inflating anything. Throws Format for bad magic/version and
// CorruptStream for everything else.
MesonContainer read_container(std::span<const std::uint8_t> bytes);

struct ContainerLayout {
  ContainerHeader header;
  std::uint64_t header_bytes = 0;  // magic, header fields and section table
  std::vector<SectionEntry> entries;
  std::uint64_t file_bytes = 0;
};

// Header and section table only (checks the header CRC, not the sections).
ContainerLayout read_layout(std::span<const std::uint8_t> bytes);

}  // namespace mesongs
