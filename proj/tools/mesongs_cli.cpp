// Command-line front end. Talks to the codec only through the C interface.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "mesongs/mesongs.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProcessing = 1;
constexpr int kExitUsage = 2;

struct CloudFree {
  void operator()(mgs_cloud* p) const { mgs_cloud_free(p); }
};
struct CamerasFree {
  void operator()(mgs_cameras* p) const { mgs_cameras_free(p); }
};
struct BlobFree {
  void operator()(mgs_blob* p) const { mgs_blob_free(p); }
};
struct QualityFree {
  void operator()(mgs_quality* p) const { mgs_quality_free(p); }
};
struct CurveFree {
  void operator()(mgs_curve* p) const { mgs_curve_free(p); }
};
using Cloud = std::unique_ptr<mgs_cloud, CloudFree>;
using Cameras = std::unique_ptr<mgs_cameras, CamerasFree>;
using Blob = std::unique_ptr<mgs_blob, BlobFree>;
using Quality = std::unique_ptr<mgs_quality, QualityFree>;
using Curve = std::unique_ptr<mgs_curve, CurveFree>;

// Thrown to unwind with an exit code after the message has been printed.
struct Exit {
  int code;
};

void check(mgs_status status) {
  if (status == MGS_OK) return;
  std::cerr << "mesongs: " << mgs_status_string(status) << ": " << mgs_last_error() << "\n";
  throw Exit{status == MGS_ERR_ARGUMENT ? kExitUsage : kExitProcessing};
}

[[noreturn]] void usage_error(const std::string& message) {
  std::cerr << "mesongs: " << message << "\n";
  throw Exit{kExitUsage};
}

// Synthetic scenes: 8 scoring views and 4 held-out evaluation views.
constexpr std::size_t kSyntheticTrainViews = 8;
constexpr std::size_t kSyntheticEvalViews = 4;
constexpr int kSyntheticImageSize = 96;

struct SceneSource {
  std::string ply;
  std::size_t synthetic = 0;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd, const std::string& input_flag, const std::string& input_help) {
    auto* in = cmd->add_option(input_flag, ply, input_help)->type_name("PLY");
    auto* syn = cmd->add_option("--synthetic", synthetic, "Use a generated N-Gaussian scene instead of a PLY")
                    ->type_name("N");
    in->excludes(syn);
  }

  void require(const std::string& input_flag) const {
    if (ply.empty() && synthetic == 0) usage_error("one of " + input_flag + " or --synthetic is required");
  }

  Cloud load() const {
    mgs_cloud* raw = nullptr;
    if (synthetic > 0) {
      check(mgs_cloud_synthetic(synthetic, seed, 3, &raw));
    } else {
      check(mgs_cloud_load_ply(ply.c_str(), &raw));
    }
    return Cloud(raw);
  }
};

Cameras load_cameras(const std::string& path) {
  mgs_cameras* raw = nullptr;
  check(mgs_cameras_load_json(path.c_str(), &raw));
  return Cameras(raw);
}

Cameras synthetic_cameras(bool held_out) {
  mgs_cameras* raw = nullptr;
  check(mgs_cameras_synthetic(held_out ? kSyntheticEvalViews : kSyntheticTrainViews, kSyntheticImageSize,
                              kSyntheticImageSize, held_out ? 1 : 0, &raw));
  return Cameras(raw);
}

std::uint64_t ply_bytes(const mgs_cloud* cloud, const std::string& path) {
  if (!path.empty()) return std::filesystem::file_size(path);
  // Synthetic input: size of the PLY it would be stored as.
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("mesongs-" + std::to_string(std::hash<const void*>{}(cloud)) + ".ply");
  check(mgs_cloud_save_ply(cloud, tmp.c_str()));
  const auto size = std::filesystem::file_size(tmp);
  std::filesystem::remove(tmp);
  return size;
}

std::string format_double(double v, int precision = 4) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

// Writes to `path`, or to stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os || !(os << text)) {
    std::cerr << "mesongs: cannot write " << path << "\n";
    throw Exit{kExitProcessing};
  }
}

struct EncodeArgs {
  SceneSource source;
  std::string output;
  std::string cameras;
  std::string raht_scales = "auto";
  bool raw = false;
  mgs_encoder_config config{};
};

int run_encode(EncodeArgs& a) {
  a.source.require("--input");
  if (a.output.empty()) usage_error("--output is required");
  a.source.seed = a.config.seed;
  static const std::map<std::string, mgs_raht_scales> modes = {
      {"auto", MGS_RAHT_SCALES_AUTO}, {"on", MGS_RAHT_SCALES_ON}, {"off", MGS_RAHT_SCALES_OFF}};
  a.config.raht_scales = modes.at(a.raht_scales);
  a.config.raw_coefficients = a.raw ? 1 : 0;
  check(mgs_encoder_config_validate(&a.config));
  if (a.config.tau > 0.0 && a.cameras.empty() && a.source.synthetic == 0) {
    usage_error("--tau > 0 needs --cameras (view-dependent importance is computed from the camera set)");
  }

  const Cloud cloud = a.source.load();
  Cameras cams;
  if (a.config.tau > 0.0) cams = a.cameras.empty() ? synthetic_cameras(false) : load_cameras(a.cameras);
  mgs_blob* raw_blob = nullptr;
  mgs_encode_stats stats{};
  check(mgs_encode(cloud.get(), cams.get(), &a.config, &raw_blob, &stats));
  const Blob blob(raw_blob);
  check(mgs_blob_write_file(blob.get(), a.output.c_str()));

  const auto input_bytes = ply_bytes(cloud.get(), a.source.ply);
  const auto out_bytes = mgs_blob_size(blob.get());
  std::cout << "gaussians      " << stats.input_count << "\n"
            << "after pruning  " << stats.pruned_count << "\n"
            << "voxels         " << stats.voxel_count << "\n"
            << "codebook       " << stats.codebook_size << "\n"
            << "input bytes    " << input_bytes << "\n"
            << "output bytes   " << out_bytes << "\n"
            << "ratio          " << format_double(static_cast<double>(input_bytes) / static_cast<double>(out_bytes), 2)
            << "\n"
            << "time (s)       prune " << format_double(stats.prune_seconds, 3) << ", geometry "
            << format_double(stats.geometry_seconds, 3) << ", transform " << format_double(stats.transform_seconds, 3)
            << ", vq " << format_double(stats.vq_seconds, 3) << ", pack " << format_double(stats.pack_seconds, 3)
            << "\n";
  return kExitOk;
}

Blob read_blob(const std::string& path) {
  mgs_blob* raw = nullptr;
  check(mgs_blob_read_file(path.c_str(), &raw));
  return Blob(raw);
}

Cloud decode_file(const std::string& path) {
  const Blob blob = read_blob(path);
  mgs_cloud* raw = nullptr;
  check(mgs_decode(mgs_blob_data(blob.get()), mgs_blob_size(blob.get()), &raw));
  return Cloud(raw);
}

int run_decode(const std::string& input, const std::string& output) {
  const Cloud cloud = decode_file(input);
  check(mgs_cloud_save_ply(cloud.get(), output.c_str()));
  std::cout << "decoded " << mgs_cloud_size(cloud.get()) << " gaussians to " << output << "\n";
  return kExitOk;
}

int run_inspect(const std::string& input, bool csv) {
  const Blob blob = read_blob(input);
  mgs_composition c{};
  check(mgs_inspect(mgs_blob_data(blob.get()), mgs_blob_size(blob.get()), &c));
  std::ostringstream os;
  if (csv) {
    os << "part,stored_bytes,raw_bytes,percent\n";
    os << "header," << c.header_bytes << "," << c.header_bytes << "," << format_double(c.header_percent) << "\n";
    for (std::size_t s = 0; s < c.section_count; ++s) {
      const auto& e = c.sections[s];
      os << e.name << "," << e.stored_bytes << "," << e.raw_bytes << "," << format_double(e.percent) << "\n";
    }
    std::cout << os.str();
    return kExitOk;
  }
  os << "version " << c.version << ", bits " << static_cast<int>(c.bit_width) << ", block "
     << c.block_length << ", sh degree " << static_cast<int>(c.sh_degree) << ", voxels " << c.voxel_count
     << ", codebook " << c.codebook_size << "\n";
  os << "flags: raht-on-scales=" << ((c.flags & 1u) ? "on" : "off")
     << (c.flags & 2u ? ", raw-coefficients" : "") << "\n\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-22s %12s %12s %8s\n", "section", "stored", "raw", "share");
  os << line;
  std::snprintf(line, sizeof line, "%-22s %12llu %12llu %7.3f%%\n", "header",
                static_cast<unsigned long long>(c.header_bytes), static_cast<unsigned long long>(c.header_bytes),
                c.header_percent);
  os << line;
  for (std::size_t s = 0; s < c.section_count; ++s) {
    const auto& e = c.sections[s];
    std::snprintf(line, sizeof line, "%-22s %12llu %12llu %7.3f%%\n", e.name,
                  static_cast<unsigned long long>(e.stored_bytes), static_cast<unsigned long long>(e.raw_bytes),
                  e.percent);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-22s %12llu\n\n", "total", static_cast<unsigned long long>(c.file_bytes));
  os << line;
  os << "octree " << format_double(c.octree_percent, 2) << "%, metadata " << format_double(c.metadata_percent, 2)
     << "%, important " << format_double(c.important_percent, 2) << "%, unimportant "
     << format_double(c.unimportant_percent, 2) << "%\n";
  std::cout << os.str();
  return kExitOk;
}

struct EvalArgs {
  SceneSource source;
  std::string compressed;
  std::string cameras;
  std::size_t views = 0;
  std::string dump_dir;
  std::string csv;
};

int run_eval(EvalArgs& a) {
  a.source.require("--original");
  if (a.compressed.empty()) usage_error("--compressed is required");
  if (a.cameras.empty() && a.source.synthetic == 0) usage_error("--cameras is required");

  const Cloud original = a.source.load();
  const Cameras cams = a.cameras.empty() ? synthetic_cameras(true) : load_cameras(a.cameras);
  const Cloud decoded = decode_file(a.compressed);
  mgs_quality* raw = nullptr;
  check(mgs_evaluate(original.get(), decoded.get(), cams.get(), a.views,
                     a.dump_dir.empty() ? nullptr : a.dump_dir.c_str(), &raw));
  const Quality q(raw);
  const auto input_bytes = ply_bytes(original.get(), a.source.ply);
  const auto compressed_bytes = std::filesystem::file_size(a.compressed);
  const double ratio = static_cast<double>(input_bytes) / static_cast<double>(compressed_bytes);

  std::ostringstream table;
  char line[128];
  std::snprintf(line, sizeof line, "%-6s %10s %8s\n", "view", "psnr_db", "ssim");
  table << line;
  std::ostringstream csv;
  csv << "view,psnr_db,ssim\n";
  for (std::size_t v = 0; v < mgs_quality_view_count(q.get()); ++v) {
    const double p = mgs_quality_view_psnr(q.get(), v);
    const double s = mgs_quality_view_ssim(q.get(), v);
    std::snprintf(line, sizeof line, "%-6zu %10s %8s\n", v, format_double(p, 3).c_str(), format_double(s).c_str());
    table << line;
    csv << v << "," << format_double(p, 6) << "," << format_double(s, 6) << "\n";
  }
  const double mp = mgs_quality_mean_psnr(q.get());
  const double ms = mgs_quality_mean_ssim(q.get());
  std::snprintf(line, sizeof line, "%-6s %10s %8s\n", "mean", format_double(mp, 3).c_str(), format_double(ms).c_str());
  table << line;
  table << "input " << input_bytes << " bytes, compressed " << compressed_bytes << " bytes, ratio "
        << format_double(ratio, 2) << "\n";
  csv << "mean," << format_double(mp, 6) << "," << format_double(ms, 6) << "\n";
  csv << "# input_bytes=" << input_bytes << ",compressed_bytes=" << compressed_bytes
      << ",ratio=" << format_double(ratio, 4) << "\n";

  std::cout << table.str();
  if (a.csv.empty()) {
    std::cout << "\n" << csv.str();
  } else {
    emit(a.csv, csv.str());
  }
  return kExitOk;
}

struct CurveArgs {
  SceneSource source;
  std::string cameras;
  double beta = 0.1;
  std::size_t samples = 101;
  std::string output;
};

int run_prune_curve(CurveArgs& a) {
  a.source.require("--input");
  if (a.cameras.empty() && a.source.synthetic == 0) usage_error("--cameras is required");
  if (!(a.beta > 0.0)) usage_error("--beta must be positive");

  const Cloud cloud = a.source.load();
  const Cameras cams = a.cameras.empty() ? synthetic_cameras(false) : load_cameras(a.cameras);
  mgs_curve* raw = nullptr;
  check(mgs_prune_curve(cloud.get(), cams.get(), a.beta, a.samples, &raw));
  const Curve curve(raw);
  std::ostringstream os;
  os << "x_percent,y_percent\n";
  for (std::size_t i = 0; i < mgs_curve_size(curve.get()); ++i) {
    double x = 0.0;
    double y = 0.0;
    mgs_curve_point(curve.get(), i, &x, &y);
    os << format_double(x, 6) << "," << format_double(y, 6) << "\n";
  }
  emit(a.output, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mesongs: compact storage for 3D Gaussian splatting scenes"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)")->capture_default_str();

  EncodeArgs enc;
  mgs_encoder_config_default(&enc.config);
  auto* encode = app.add_subcommand("encode", "Compress a Gaussian cloud");
  enc.source.add_to(encode, "--input", "Input 3D-GS PLY");
  encode->add_option("--output", enc.output, "Output container")->type_name("MSGS");
  encode->add_option("--cameras", enc.cameras, "Camera JSON used for importance scoring")->type_name("JSON");
  encode->add_option("--tau", enc.config.tau, "Fraction of Gaussians to prune")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  encode->add_option("--beta", enc.config.beta, "Exponent of the volume-based importance")->capture_default_str();
  encode->add_option("--depth", enc.config.depth, "Octree depth")->capture_default_str();
  encode->add_option("--bits", enc.config.bit_width, "Block quantization bit width")->capture_default_str();
  encode->add_option("--block", enc.config.block_length, "Block length")->capture_default_str();
  encode->add_option("--codebook", enc.config.codebook_size, "SH codebook size")->capture_default_str();
  encode->add_option("--vq-iters", enc.config.vq_iters, "Clustering passes")->capture_default_str();
  encode->add_option("--vq-batch", enc.config.vq_batch, "Mini-batch size for large clouds")->capture_default_str();
  encode->add_option("--raht-scales", enc.raht_scales, "RAHT on log-scales: auto (on above 8 bits), on, off")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "on", "off"}));
  encode->add_option("--seed", enc.config.seed, "Clustering seed (also seeds --synthetic)")->capture_default_str();
  encode->add_flag("--raw-coefficients", enc.raw, "Debug: store float32 coefficients, skip quantization and VQ");

  std::string dec_in;
  std::string dec_out;
  auto* decode = app.add_subcommand("decode", "Decompress a container to PLY");
  decode->add_option("--input", dec_in, "Input container")->required()->type_name("MSGS");
  decode->add_option("--output", dec_out, "Output PLY")->required()->type_name("PLY");

  std::string insp_in;
  bool insp_csv = false;
  auto* inspect = app.add_subcommand("inspect", "Report the storage composition of a container");
  inspect->add_option("--input", insp_in, "Input container")->required()->type_name("MSGS");
  inspect->add_flag("--csv", insp_csv, "Emit CSV instead of a table");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Render quality of a container against its original");
  ev.source.add_to(eval, "--original", "Original PLY");
  eval->add_option("--seed", ev.source.seed, "Seed for --synthetic")->capture_default_str();
  eval->add_option("--compressed", ev.compressed, "Container to evaluate")->type_name("MSGS");
  eval->add_option("--cameras", ev.cameras, "Camera JSON of the evaluation views")->type_name("JSON");
  eval->add_option("--views", ev.views, "Use only the first k views (0 = all)")->capture_default_str();
  eval->add_option("--dump-images", ev.dump_dir, "Write reference/test PNGs here")->type_name("DIR");
  eval->add_option("--csv", ev.csv, "Write the CSV report here instead of stdout")->type_name("PATH");

  CurveArgs cu;
  auto* curve = app.add_subcommand("prune-curve", "Importance quantile curve as CSV");
  cu.source.add_to(curve, "--input", "Input PLY");
  curve->add_option("--seed", cu.source.seed, "Seed for --synthetic")->capture_default_str();
  curve->add_option("--cameras", cu.cameras, "Camera JSON used for importance scoring")->type_name("JSON");
  curve->add_option("--beta", cu.beta, "Exponent of the volume-based importance")->capture_default_str();
  curve->add_option("--samples", cu.samples, "Evenly spaced points (0 = one per Gaussian)")->capture_default_str();
  curve->add_option("--output", cu.output, "CSV path (default stdout)")->type_name("CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    mgs_set_threads(threads);
    if (*encode) return run_encode(enc);
    if (*decode) return run_decode(dec_in, dec_out);
    if (*inspect) return run_inspect(insp_in, insp_csv);
    if (*eval) return run_eval(ev);
    if (*curve) return run_prune_curve(cu);
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "mesongs: " << e.what() << "\n";
    return kExitProcessing;
  }
  return kExitUsage;
}
