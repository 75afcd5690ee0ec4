/* C interface to the mesongs Gaussian splat codec.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function (NULL is accepted). Every fallible call returns an
 * mgs_status; on failure mgs_last_error() describes the problem for the
 * calling thread until its next failing call. */
#ifndef MESONGS_H
#define MESONGS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MGS_API __declspec(dllexport)
#else
#define MGS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mgs_status {
  MGS_OK = 0,
  MGS_ERR_ARGUMENT = 1,
  MGS_ERR_FORMAT = 2,
  MGS_ERR_DATA = 3,
  MGS_ERR_CORRUPT = 4,
  MGS_ERR_IO = 5,
  MGS_ERR_PIPELINE = 6,
  MGS_ERR_DEGENERATE = 7,
  MGS_ERR_INTERNAL = 8
} mgs_status;

typedef struct mgs_cloud mgs_cloud;
typedef struct mgs_cameras mgs_cameras;
typedef struct mgs_blob mgs_blob;
typedef struct mgs_quality mgs_quality;
typedef struct mgs_curve mgs_curve;

MGS_API const char* mgs_version(void);
MGS_API const char* mgs_last_error(void);
MGS_API const char* mgs_status_string(mgs_status status);

/* 0 restores the default (hardware concurrency). */
MGS_API void mgs_set_threads(unsigned threads);

/* Gaussian clouds */
MGS_API mgs_status mgs_cloud_load_ply(const char* path, mgs_cloud** out);
MGS_API mgs_status mgs_cloud_save_ply(const mgs_cloud* cloud, const char* path);
MGS_API mgs_status mgs_cloud_synthetic(size_t count, uint64_t seed, int sh_degree, mgs_cloud** out);
MGS_API size_t mgs_cloud_size(const mgs_cloud* cloud);
MGS_API int mgs_cloud_sh_degree(const mgs_cloud* cloud);
/* Row-major copies; `out` must hold size * width values
 * (positions 3, rotations 4 [w,x,y,z], log_scales 3, opacity 1, sh_dc 3,
 * sh_rest 3((f+1)^2-1)). */
MGS_API mgs_status mgs_cloud_get(const mgs_cloud* cloud, const char* field, double* out, size_t capacity);
MGS_API void mgs_cloud_free(mgs_cloud* cloud);

/* Camera sets */
MGS_API mgs_status mgs_cameras_load_json(const char* path, mgs_cameras** out);
MGS_API mgs_status mgs_cameras_save_json(const mgs_cameras* cameras, const char* path);
/* Orbit around the synthetic scene; held_out != 0 offsets the ring by half a step. */
MGS_API mgs_status mgs_cameras_synthetic(size_t count, int width, int height, int held_out, mgs_cameras** out);
MGS_API size_t mgs_cameras_size(const mgs_cameras* cameras);
MGS_API void mgs_cameras_free(mgs_cameras* cameras);

/* Byte buffers */
MGS_API mgs_status mgs_blob_read_file(const char* path, mgs_blob** out);
MGS_API mgs_status mgs_blob_write_file(const mgs_blob* blob, const char* path);
MGS_API mgs_status mgs_blob_from_bytes(const uint8_t* data, size_t size, mgs_blob** out);
MGS_API const uint8_t* mgs_blob_data(const mgs_blob* blob);
MGS_API size_t mgs_blob_size(const mgs_blob* blob);
MGS_API void mgs_blob_free(mgs_blob* blob);

/* Encoding */
typedef enum mgs_raht_scales { MGS_RAHT_SCALES_AUTO = 0, MGS_RAHT_SCALES_ON = 1, MGS_RAHT_SCALES_OFF = 2 } mgs_raht_scales;

typedef struct mgs_encoder_config {
  double tau;
  double beta;
  int depth;
  int bit_width;
  uint32_t block_length;
  uint32_t codebook_size;
  int vq_iters;
  uint32_t vq_batch;
  mgs_raht_scales raht_scales;
  uint64_t seed;
  int raw_coefficients; /* debug: keep float32 coefficients, skip VQ */
} mgs_encoder_config;

MGS_API void mgs_encoder_config_default(mgs_encoder_config* config);
MGS_API mgs_status mgs_encoder_config_validate(const mgs_encoder_config* config);

typedef struct mgs_encode_stats {
  uint64_t input_count;
  uint64_t pruned_count;
  uint64_t voxel_count;
  uint64_t codebook_size;
  double prune_seconds;
  double geometry_seconds;
  double transform_seconds;
  double vq_seconds;
  double pack_seconds;
} mgs_encode_stats;

/* cameras may be NULL when tau == 0; stats may be NULL. */
MGS_API mgs_status mgs_encode(const mgs_cloud* cloud, const mgs_cameras* cameras, const mgs_encoder_config* config,
                              mgs_blob** out, mgs_encode_stats* stats);
MGS_API mgs_status mgs_decode(const uint8_t* data, size_t size, mgs_cloud** out);

/* Storage composition */
typedef struct mgs_section_info {
  char name[32];
  uint64_t stored_bytes;
  uint64_t raw_bytes;
  double percent;
} mgs_section_info;

typedef struct mgs_composition {
  uint16_t version;
  uint16_t flags;
  uint8_t bit_width;
  uint8_t sh_degree;
  uint32_t block_length;
  uint64_t voxel_count;
  uint32_t codebook_size;
  uint64_t file_bytes;
  uint64_t header_bytes;
  double header_percent;
  size_t section_count;
  mgs_section_info sections[8];
  double octree_percent;
  double metadata_percent; /* metadata section plus header */
  double important_percent;
  double unimportant_percent;
} mgs_composition;

MGS_API mgs_status mgs_inspect(const uint8_t* data, size_t size, mgs_composition* out);

/* Quality: renders both clouds from the first max_views cameras (0 = all) on
 * black. When dump_dir is not NULL, reference_NNN.png and test_NNN.png are
 * written there. */
MGS_API mgs_status mgs_evaluate(const mgs_cloud* reference, const mgs_cloud* test, const mgs_cameras* cameras,
                                size_t max_views, const char* dump_dir, mgs_quality** out);
MGS_API size_t mgs_quality_view_count(const mgs_quality* quality);
MGS_API double mgs_quality_view_psnr(const mgs_quality* quality, size_t view);
MGS_API double mgs_quality_view_ssim(const mgs_quality* quality, size_t view);
MGS_API double mgs_quality_mean_psnr(const mgs_quality* quality);
MGS_API double mgs_quality_mean_ssim(const mgs_quality* quality);
MGS_API void mgs_quality_free(mgs_quality* quality);

/* Importance quantile curve: (x%, y%) pairs; samples == 0 gives one point per
 * prefix length. */
MGS_API mgs_status mgs_prune_curve(const mgs_cloud* cloud, const mgs_cameras* cameras, double beta, size_t samples,
                                   mgs_curve** out);
MGS_API size_t mgs_curve_size(const mgs_curve* curve);
MGS_API void mgs_curve_point(const mgs_curve* curve, size_t index, double* x_percent, double* y_percent);
MGS_API void mgs_curve_free(mgs_curve* curve);

#ifdef __cplusplus
}
#endif

#endif
