#include "mesongs/gaussian_cloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mesongs/error.hpp"

namespace mesongs {

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

GaussianCloud::GaussianCloud(std::size_t count, int degree)
    : positions(3 * count),
      rotations(4 * count),
      log_scales(3 * count),
      opacity_logits(count),
      sh_dc(3 * count),
      sh_rest(sh_rest_width(degree) * count),
      sh_degree(degree) {
  if (degree < 0) throw_argument("sh_degree must be >= 0");
  for (std::size_t i = 0; i < count; ++i) rotations[4 * i] = 1.0;
}

GaussianCloud GaussianCloud::select(std::span<const std::size_t> indices) const {
  GaussianCloud out(indices.size(), sh_degree);
  const std::size_t d = rest_width();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    std::copy_n(positions.begin() + 3 * i, 3, out.positions.begin() + 3 * r);
    std::copy_n(rotations.begin() + 4 * i, 4, out.rotations.begin() + 4 * r);
    std::copy_n(log_scales.begin() + 3 * i, 3, out.log_scales.begin() + 3 * r);
    out.opacity_logits[r] = opacity_logits[i];
    std::copy_n(sh_dc.begin() + 3 * i, 3, out.sh_dc.begin() + 3 * r);
    std::copy_n(sh_rest.begin() + d * i, d, out.sh_rest.begin() + d * r);
  }
  return out;
}

void validate(const GaussianCloud& cloud) {
  const std::size_t n = cloud.size();
  if (cloud.sh_degree < 0) throw_argument("sh_degree must be >= 0");
  if (cloud.positions.size() != 3 * n || cloud.rotations.size() != 4 * n || cloud.log_scales.size() != 3 * n ||
      cloud.sh_dc.size() != 3 * n || cloud.sh_rest.size() != cloud.rest_width() * n) {
    throw_argument("GaussianCloud columns disagree on the row count");
  }
  auto check_finite = [](const std::vector<double>& column, std::size_t width, const char* name) {
    for (std::size_t k = 0; k < column.size(); ++k) {
      if (!std::isfinite(column[k])) {
        throw_error(ErrorKind::Data,
                    std::string("non-finite ") + name + " at row " + std::to_string(k / width));
      }
    }
  };
  check_finite(cloud.positions, 3, "position");
  check_finite(cloud.rotations, 4, "rotation");
  check_finite(cloud.log_scales, 3, "log_scale");
  check_finite(cloud.opacity_logits, 1, "opacity");
  check_finite(cloud.sh_dc, 3, "sh_dc");
  if (cloud.rest_width() > 0) check_finite(cloud.sh_rest, cloud.rest_width(), "sh_rest");
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = cloud.rotation(i);
    const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (std::abs(norm - 1.0) > 1e-6) {
      throw_error(ErrorKind::Data, "rotation at row " + std::to_string(i) + " is not unit length");
    }
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ActivatedAttributes activate(const GaussianCloud& cloud) {
  ActivatedAttributes out;
  out.scales.resize(cloud.log_scales.size());
  out.opacities.resize(cloud.opacity_logits.size());
  std::transform(cloud.log_scales.begin(), cloud.log_scales.end(), out.scales.begin(),
                 [](double s) { return std::exp(s); });
  std::transform(cloud.opacity_logits.begin(), cloud.opacity_logits.end(), out.opacities.begin(), sigmoid);
  return out;
}

namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

struct PlyProperty {
  std::string name;
  ScalarType type;
  std::size_t offset;
};

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8:
      return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16:
      return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32:
      return 4;
    case ScalarType::Float64:
      return 8;
  }
  return 0;
}

ScalarType parse_type(const std::string& name) {
  static const std::map<std::string, ScalarType> types = {
      {"char", ScalarType::Int8},     {"int8", ScalarType::Int8},       {"uchar", ScalarType::UInt8},
      {"uint8", ScalarType::UInt8},   {"short", ScalarType::Int16},     {"int16", ScalarType::Int16},
      {"ushort", ScalarType::UInt16}, {"uint16", ScalarType::UInt16},   {"int", ScalarType::Int32},
      {"int32", ScalarType::Int32},   {"uint", ScalarType::UInt32},     {"uint32", ScalarType::UInt32},
      {"float", ScalarType::Float32}, {"float32", ScalarType::Float32}, {"double", ScalarType::Float64},
      {"float64", ScalarType::Float64}};
  const auto it = types.find(name);
  if (it == types.end()) throw_error(ErrorKind::Format, "unsupported PLY property type '" + name + "'");
  return it->second;
}

template <typename T>
double read_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double read_scalar(const char* p, ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
      return read_as<std::int8_t>(p);
    case ScalarType::UInt8:
      return read_as<std::uint8_t>(p);
    case ScalarType::Int16:
      return read_as<std::int16_t>(p);
    case ScalarType::UInt16:
      return read_as<std::uint16_t>(p);
    case ScalarType::Int32:
      return read_as<std::int32_t>(p);
    case ScalarType::UInt32:
      return read_as<std::uint32_t>(p);
    case ScalarType::Float32:
      return read_as<float>(p);
    case ScalarType::Float64:
      return read_as<double>(p);
  }
  return 0.0;
}

int degree_for_rest_count(std::size_t count) {
  int degree = 0;
  while (sh_rest_width(degree) < count) ++degree;
  return degree;
}

}  // namespace

GaussianCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorKind::Io, "cannot open " + path.string());

  std::string line;
  std::getline(in, line);
  if (line != "ply" && line != "ply\r") throw_error(ErrorKind::Format, path.string() + " is not a PLY file");

  std::vector<PlyProperty> props;
  std::size_t vertex_count = 0;
  std::size_t stride = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  bool binary_le = false;
  while (true) {
    if (!std::getline(in, line)) throw_error(ErrorKind::Format, "PLY header is truncated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (keyword == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      if (name == "vertex") {
        if (seen_vertex) throw_error(ErrorKind::Format, "duplicate vertex element");
        vertex_count = count;
        in_vertex = seen_vertex = true;
      } else {
        if (!seen_vertex && count > 0) {
          throw_error(ErrorKind::Format, "element '" + name + "' precedes the vertex element");
        }
        in_vertex = false;
      }
    } else if (keyword == "property") {
      std::string type;
      ls >> type;
      if (type == "list") throw_error(ErrorKind::Format, "list properties are not supported");
      std::string name;
      ls >> name;
      if (in_vertex) {
        const ScalarType t = parse_type(type);
        props.push_back({name, t, stride});
        stride += type_size(t);
      }
    }
  }
  if (!binary_le) throw_error(ErrorKind::Format, "only binary_little_endian PLY is supported");
  if (!seen_vertex) throw_error(ErrorKind::Format, "PLY has no vertex element");

  std::map<std::string, const PlyProperty*> by_name;
  for (const auto& p : props) by_name[p.name] = &p;
  auto require = [&](const std::string& name) -> const PlyProperty* {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw_error(ErrorKind::Format, "PLY is missing property '" + name + "'");
    return it->second;
  };

  std::size_t rest_count = 0;
  for (const auto& p : props) {
    if (p.name.rfind("f_rest_", 0) == 0) ++rest_count;
  }
  const int degree = degree_for_rest_count(rest_count);
  const std::size_t width = sh_rest_width(degree);

  std::vector<const PlyProperty*> pos, dc, rest, scale, rot;
  for (int k = 0; k < 3; ++k) pos.push_back(require(std::string(1, static_cast<char>('x' + k))));
  for (int k = 0; k < 3; ++k) dc.push_back(require("f_dc_" + std::to_string(k)));
  for (std::size_t k = 0; k < width; ++k) rest.push_back(require("f_rest_" + std::to_string(k)));
  const PlyProperty* opacity = require("opacity");
  for (int k = 0; k < 3; ++k) scale.push_back(require("scale_" + std::to_string(k)));
  for (int k = 0; k < 4; ++k) rot.push_back(require("rot_" + std::to_string(k)));

  std::vector<char> payload(vertex_count * stride);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw_error(ErrorKind::Format, "PLY vertex data is truncated");
  }

  GaussianCloud cloud(vertex_count, degree);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const char* row = payload.data() + i * stride;
    auto get = [&](const PlyProperty* p) {
      const double v = read_scalar(row + p->offset, p->type);
      if (!std::isfinite(v)) {
        throw_error(ErrorKind::Data, "non-finite '" + p->name + "' at row " + std::to_string(i));
      }
      return v;
    };
    for (int k = 0; k < 3; ++k) cloud.positions[3 * i + k] = get(pos[k]);
    for (int k = 0; k < 3; ++k) cloud.sh_dc[3 * i + k] = get(dc[k]);
    for (std::size_t k = 0; k < width; ++k) cloud.sh_rest[width * i + k] = get(rest[k]);
    cloud.opacity_logits[i] = get(opacity);
    for (int k = 0; k < 3; ++k) cloud.log_scales[3 * i + k] = get(scale[k]);
    double norm2 = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double v = get(rot[k]);
      cloud.rotations[4 * i + k] = v;
      norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw_error(ErrorKind::Data, "zero rotation quaternion at row " + std::to_string(i));
    // Leave already-unit payloads untouched so save(load(p)) stays bit-exact.
    if (std::abs(norm - 1.0) > 1e-6) {
      for (int k = 0; k < 4; ++k) cloud.rotations[4 * i + k] /= norm;
    }
  }
  return cloud;
}

void save_ply(const GaussianCloud& cloud, const std::filesystem::path& path) {
  validate(cloud);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorKind::Io, "cannot write " + path.string());

  const std::size_t n = cloud.size();
  const std::size_t width = cloud.rest_width();
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\nelement vertex " << n << "\n";
  for (const char* axis : {"x", "y", "z"}) header << "property float " << axis << "\n";
  for (int k = 0; k < 3; ++k) header << "property float f_dc_" << k << "\n";
  for (std::size_t k = 0; k < width; ++k) header << "property float f_rest_" << k << "\n";
  header << "property float opacity\n";
  for (int k = 0; k < 3; ++k) header << "property float scale_" << k << "\n";
  for (int k = 0; k < 4; ++k) header << "property float rot_" << k << "\n";
  header << "end_header\n";
  out << header.str();

  const std::size_t floats_per_row = 3 + 3 + width + 1 + 3 + 4;
  std::vector<float> row(floats_per_row);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (int k = 0; k < 3; ++k) row[c++] = static_cast<float>(cloud.positions[3 * i + k]);
    for (int k = 0; k < 3; ++k) row[c++] = static_cast<float>(cloud.sh_dc[3 * i + k]);
    for (std::size_t k = 0; k < width; ++k) row[c++] = static_cast<float>(cloud.sh_rest[width * i + k]);
    row[c++] = static_cast<float>(cloud.opacity_logits[i]);
    for (int k = 0; k < 3; ++k) row[c++] = static_cast<float>(cloud.log_scales[3 * i + k]);
    for (int k = 0; k < 4; ++k) row[c++] = static_cast<float>(cloud.rotations[4 * i + k]);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw_error(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace mesongs
