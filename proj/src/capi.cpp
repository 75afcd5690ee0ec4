#include "mesongs/mesongs.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <new>
#include <string>
#include <vector>

#include "mesongs/camera.hpp"
#include "mesongs/codec.hpp"
#include "mesongs/error.hpp"
#include "mesongs/gaussian_cloud.hpp"
#include "mesongs/metrics.hpp"
#include "mesongs/parallel.hpp"
#include "mesongs/png.hpp"
#include "mesongs/pruning.hpp"
#include "mesongs/synthetic.hpp"

struct mgs_cloud {
  mesongs::GaussianCloud cloud;
};

struct mgs_cameras {
  mesongs::CameraSet cameras;
};

struct mgs_blob {
  std::vector<std::uint8_t> bytes;
};

struct mgs_quality {
  mesongs::QualityReport report;
};

struct mgs_curve {
  std::vector<mesongs::CurvePoint> points;
};

namespace {

thread_local std::string g_last_error;

mgs_status status_of(mesongs::ErrorKind kind) {
  using mesongs::ErrorKind;
  switch (kind) {
    case ErrorKind::Argument:
      return MGS_ERR_ARGUMENT;
    case ErrorKind::Format:
      return MGS_ERR_FORMAT;
    case ErrorKind::Data:
      return MGS_ERR_DATA;
    case ErrorKind::CorruptStream:
      return MGS_ERR_CORRUPT;
    case ErrorKind::Io:
      return MGS_ERR_IO;
    case ErrorKind::Pipeline:
      return MGS_ERR_PIPELINE;
    case ErrorKind::DegenerateInput:
      return MGS_ERR_DEGENERATE;
  }
  return MGS_ERR_INTERNAL;
}

mgs_status fail(mgs_status status, const char* message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
mgs_status guard(Fn&& fn) {
  try {
    fn();
    return MGS_OK;
  } catch (const mesongs::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MGS_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MGS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MGS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MGS_ERR_INTERNAL, "unknown exception");
  }
}

#define MGS_REQUIRE(cond, what) \
  if (!(cond)) return fail(MGS_ERR_ARGUMENT, what)

mesongs::EncoderConfig to_cpp(const mgs_encoder_config& c) {
  mesongs::EncoderConfig out;
  out.tau = c.tau;
  out.beta = c.beta;
  out.depth = c.depth;
  out.bit_width = c.bit_width;
  out.block_length = c.block_length;
  out.codebook_size = c.codebook_size;
  out.vq_iters = c.vq_iters;
  out.vq_batch = c.vq_batch;
  switch (c.raht_scales) {
    case MGS_RAHT_SCALES_ON:
      out.raht_scales = mesongs::RahtScalesMode::On;
      break;
    case MGS_RAHT_SCALES_OFF:
      out.raht_scales = mesongs::RahtScalesMode::Off;
      break;
    case MGS_RAHT_SCALES_AUTO:
      out.raht_scales = mesongs::RahtScalesMode::Auto;
      break;
    default:
      mesongs::throw_argument("unknown raht-scales mode");
  }
  out.seed = c.seed;
  out.raw_coefficients = c.raw_coefficients != 0;
  return out;
}

}  // namespace

extern "C" {

const char* mgs_version(void) { return "1.0.0"; }

const char* mgs_last_error(void) { return g_last_error.c_str(); }

const char* mgs_status_string(mgs_status status) {
  switch (status) {
    case MGS_OK:
      return "ok";
    case MGS_ERR_ARGUMENT:
      return "argument error";
    case MGS_ERR_FORMAT:
      return "format error";
    case MGS_ERR_DATA:
      return "data error";
    case MGS_ERR_CORRUPT:
      return "corrupt stream";
    case MGS_ERR_IO:
      return "I/O error";
    case MGS_ERR_PIPELINE:
      return "pipeline error";
    case MGS_ERR_DEGENERATE:
      return "degenerate input";
    case MGS_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void mgs_set_threads(unsigned threads) { mesongs::set_thread_count(threads); }

mgs_status mgs_cloud_load_ply(const char* path, mgs_cloud** out) {
  MGS_REQUIRE(path && out, "mgs_cloud_load_ply: null argument");
  *out = nullptr;
  return guard([&] { *out = new mgs_cloud{mesongs::load_ply(path)}; });
}

mgs_status mgs_cloud_save_ply(const mgs_cloud* cloud, const char* path) {
  MGS_REQUIRE(cloud && path, "mgs_cloud_save_ply: null argument");
  return guard([&] { mesongs::save_ply(cloud->cloud, path); });
}

mgs_status mgs_cloud_synthetic(size_t count, uint64_t seed, int sh_degree, mgs_cloud** out) {
  MGS_REQUIRE(out, "mgs_cloud_synthetic: null argument");
  MGS_REQUIRE(sh_degree >= 0 && sh_degree <= 3, "mgs_cloud_synthetic: SH degree must lie in 0..3");
  *out = nullptr;
  return guard([&] { *out = new mgs_cloud{mesongs::synthetic_cloud(count, seed, sh_degree)}; });
}

size_t mgs_cloud_size(const mgs_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

int mgs_cloud_sh_degree(const mgs_cloud* cloud) { return cloud ? cloud->cloud.sh_degree : 0; }

mgs_status mgs_cloud_get(const mgs_cloud* cloud, const char* field, double* out, size_t capacity) {
  MGS_REQUIRE(cloud && field && out, "mgs_cloud_get: null argument");
  const auto& c = cloud->cloud;
  const std::vector<double>* column = nullptr;
  const std::string name = field;
  if (name == "positions") column = &c.positions;
  if (name == "rotations") column = &c.rotations;
  if (name == "log_scales") column = &c.log_scales;
  if (name == "opacity") column = &c.opacity_logits;
  if (name == "sh_dc") column = &c.sh_dc;
  if (name == "sh_rest") column = &c.sh_rest;
  MGS_REQUIRE(column, "mgs_cloud_get: unknown field");
  MGS_REQUIRE(capacity >= column->size(), "mgs_cloud_get: output buffer too small");
  std::copy(column->begin(), column->end(), out);
  return MGS_OK;
}

void mgs_cloud_free(mgs_cloud* cloud) { delete cloud; }

mgs_status mgs_cameras_load_json(const char* path, mgs_cameras** out) {
  MGS_REQUIRE(path && out, "mgs_cameras_load_json: null argument");
  *out = nullptr;
  return guard([&] { *out = new mgs_cameras{mesongs::load_cameras_json(path)}; });
}

mgs_status mgs_cameras_save_json(const mgs_cameras* cameras, const char* path) {
  MGS_REQUIRE(cameras && path, "mgs_cameras_save_json: null argument");
  return guard([&] { mesongs::save_cameras_json(cameras->cameras, path); });
}

mgs_status mgs_cameras_synthetic(size_t count, int width, int height, int held_out, mgs_cameras** out) {
  MGS_REQUIRE(out, "mgs_cameras_synthetic: null argument");
  MGS_REQUIRE(width >= 1 && height >= 1, "mgs_cameras_synthetic: image size must be positive");
  *out = nullptr;
  return guard([&] { *out = new mgs_cameras{mesongs::synthetic_cameras(count, width, height, held_out != 0)}; });
}

size_t mgs_cameras_size(const mgs_cameras* cameras) { return cameras ? cameras->cameras.size() : 0; }

void mgs_cameras_free(mgs_cameras* cameras) { delete cameras; }

mgs_status mgs_blob_read_file(const char* path, mgs_blob** out) {
  MGS_REQUIRE(path && out, "mgs_blob_read_file: null argument");
  *out = nullptr;
  return guard([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) mesongs::throw_error(mesongs::ErrorKind::Io, std::string("cannot open ") + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) mesongs::throw_error(mesongs::ErrorKind::Io, std::string("failed reading ") + path);
    *out = new mgs_blob{std::move(bytes)};
  });
}

mgs_status mgs_blob_write_file(const mgs_blob* blob, const char* path) {
  MGS_REQUIRE(blob && path, "mgs_blob_write_file: null argument");
  return guard([&] {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) mesongs::throw_error(mesongs::ErrorKind::Io, std::string("cannot open ") + path + " for writing");
    os.write(reinterpret_cast<const char*>(blob->bytes.data()), static_cast<std::streamsize>(blob->bytes.size()));
    if (!os.flush()) mesongs::throw_error(mesongs::ErrorKind::Io, std::string("failed writing ") + path);
  });
}

mgs_status mgs_blob_from_bytes(const uint8_t* data, size_t size, mgs_blob** out) {
  MGS_REQUIRE(out && (data || size == 0), "mgs_blob_from_bytes: null argument");
  *out = nullptr;
  return guard([&] { *out = new mgs_blob{std::vector<std::uint8_t>(data, data + size)}; });
}

const uint8_t* mgs_blob_data(const mgs_blob* blob) { return blob ? blob->bytes.data() : nullptr; }

size_t mgs_blob_size(const mgs_blob* blob) { return blob ? blob->bytes.size() : 0; }

void mgs_blob_free(mgs_blob* blob) { delete blob; }

void mgs_encoder_config_default(mgs_encoder_config* config) {
  if (!config) return;
  const mesongs::EncoderConfig d;
  config->tau = d.tau;
  config->beta = d.beta;
  config->depth = d.depth;
  config->bit_width = d.bit_width;
  config->block_length = d.block_length;
  config->codebook_size = d.codebook_size;
  config->vq_iters = d.vq_iters;
  config->vq_batch = d.vq_batch;
  config->raht_scales = MGS_RAHT_SCALES_AUTO;
  config->seed = d.seed;
  config->raw_coefficients = d.raw_coefficients ? 1 : 0;
}

mgs_status mgs_encoder_config_validate(const mgs_encoder_config* config) {
  MGS_REQUIRE(config, "mgs_encoder_config_validate: null argument");
  return guard([&] { mesongs::validate(to_cpp(*config)); });
}

mgs_status mgs_encode(const mgs_cloud* cloud, const mgs_cameras* cameras, const mgs_encoder_config* config,
                      mgs_blob** out, mgs_encode_stats* stats) {
  MGS_REQUIRE(cloud && config && out, "mgs_encode: null argument");
  *out = nullptr;
  return guard([&] {
    mesongs::EncodeStats s;
    auto bytes = mesongs::encode(cloud->cloud, cameras ? &cameras->cameras : nullptr, to_cpp(*config), &s);
    *out = new mgs_blob{std::move(bytes)};
    if (stats) {
      stats->input_count = s.input_count;
      stats->pruned_count = s.pruned_count;
      stats->voxel_count = s.voxel_count;
      stats->codebook_size = s.codebook_size;
      stats->prune_seconds = s.prune_seconds;
      stats->geometry_seconds = s.geometry_seconds;
      stats->transform_seconds = s.transform_seconds;
      stats->vq_seconds = s.vq_seconds;
      stats->pack_seconds = s.pack_seconds;
    }
  });
}

mgs_status mgs_decode(const uint8_t* data, size_t size, mgs_cloud** out) {
  MGS_REQUIRE(out && (data || size == 0), "mgs_decode: null argument");
  *out = nullptr;
  return guard([&] { *out = new mgs_cloud{mesongs::decode({data, size})}; });
}

mgs_status mgs_inspect(const uint8_t* data, size_t size, mgs_composition* out) {
  MGS_REQUIRE(out && (data || size == 0), "mgs_inspect: null argument");
  return guard([&] {
    const mesongs::CompositionReport r = mesongs::inspect({data, size});
    mgs_composition c{};
    c.version = r.header.version;
    c.flags = r.header.flags;
    c.bit_width = r.header.bit_width;
    c.sh_degree = r.header.sh_degree;
    c.block_length = r.header.block_length;
    c.voxel_count = r.header.voxel_count;
    c.codebook_size = r.header.codebook_size;
    c.file_bytes = r.file_bytes;
    c.header_bytes = r.header_bytes;
    c.header_percent = r.header_percent;
    c.section_count = std::min<std::size_t>(r.sections.size(), std::size(c.sections));
    for (std::size_t s = 0; s < c.section_count; ++s) {
      std::strncpy(c.sections[s].name, r.sections[s].name.c_str(), sizeof(c.sections[s].name) - 1);
      c.sections[s].stored_bytes = r.sections[s].stored_bytes;
      c.sections[s].raw_bytes = r.sections[s].raw_bytes;
      c.sections[s].percent = r.sections[s].percent;
    }
    c.octree_percent = r.octree_percent;
    c.metadata_percent = r.metadata_percent;
    c.important_percent = r.important_percent;
    c.unimportant_percent = r.unimportant_percent;
    *out = c;
  });
}

mgs_status mgs_evaluate(const mgs_cloud* reference, const mgs_cloud* test, const mgs_cameras* cameras,
                        size_t max_views, const char* dump_dir, mgs_quality** out) {
  MGS_REQUIRE(reference && test && cameras && out, "mgs_evaluate: null argument");
  *out = nullptr;
  return guard([&] {
    mesongs::EvalViews views;
    auto report = mesongs::evaluate(reference->cloud, test->cloud, cameras->cameras, max_views,
                                    dump_dir ? &views : nullptr);
    if (dump_dir) {
      const std::filesystem::path dir(dump_dir);
      std::filesystem::create_directories(dir);
      for (std::size_t v = 0; v < views.reference.size(); ++v) {
        char stem[32];
        std::snprintf(stem, sizeof(stem), "%03zu.png", v);
        mesongs::write_png(views.reference[v], dir / (std::string("reference_") + stem));
        mesongs::write_png(views.test[v], dir / (std::string("test_") + stem));
      }
    }
    *out = new mgs_quality{std::move(report)};
  });
}

size_t mgs_quality_view_count(const mgs_quality* quality) { return quality ? quality->report.view_psnr.size() : 0; }

double mgs_quality_view_psnr(const mgs_quality* quality, size_t view) {
  return quality && view < quality->report.view_psnr.size() ? quality->report.view_psnr[view] : 0.0;
}

double mgs_quality_view_ssim(const mgs_quality* quality, size_t view) {
  return quality && view < quality->report.view_ssim.size() ? quality->report.view_ssim[view] : 0.0;
}

double mgs_quality_mean_psnr(const mgs_quality* quality) { return quality ? quality->report.mean_psnr : 0.0; }

double mgs_quality_mean_ssim(const mgs_quality* quality) { return quality ? quality->report.mean_ssim : 0.0; }

void mgs_quality_free(mgs_quality* quality) { delete quality; }

mgs_status mgs_prune_curve(const mgs_cloud* cloud, const mgs_cameras* cameras, double beta, size_t samples,
                           mgs_curve** out) {
  MGS_REQUIRE(cloud && cameras && out, "mgs_prune_curve: null argument");
  MGS_REQUIRE(beta > 0.0, "mgs_prune_curve: beta must be positive");
  *out = nullptr;
  return guard([&] {
    const auto scores = mesongs::importance_scores(cloud->cloud, cameras->cameras, beta);
    *out = new mgs_curve{mesongs::quantile_curve(scores.global, samples)};
  });
}

size_t mgs_curve_size(const mgs_curve* curve) { return curve ? curve->points.size() : 0; }

void mgs_curve_point(const mgs_curve* curve, size_t index, double* x_percent, double* y_percent) {
  if (!curve || index >= curve->points.size()) return;
  if (x_percent) *x_percent = curve->points[index].x_percent;
  if (y_percent) *y_percent = curve->points[index].y_percent;
}

void mgs_curve_free(mgs_curve* curve) { delete curve; }

}  // extern "C"
