#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "features.hpp"
#include "fuse.hpp"
#include "manifest.hpp"

namespace fgai {

enum class NormalizationMode { PerImage, Global };
/// Where descriptors are evaluated: on the resampled mesh, or on the original
/// mesh and read through the nearest-vertex correspondence.
enum class FieldSource { Resampled, Original };

struct PipelineConfig {
  std::filesystem::path output_dir = "out";
  ResampleConfig resample;
  NeighborhoodSpec neighborhood;
  ImageSize size;
  std::vector<Combo> combos;  ///< empty means all ten
  bool keep_channel_order = false;
  NormalizationMode normalization = NormalizationMode::PerImage;
  FieldSource field_source = FieldSource::Resampled;
  std::optional<AugmentSpec> augment;  ///< writes one extra `.aug` copy per image
  bool augment_gais = false;
  unsigned workers = 1;
  bool force = false;
  bool debug_dump = false;

  void validate() const;
};

/// Everything derived from one scan before 8-bit quantization.
struct ScanRasters {
  std::string scan_id;
  ResampledMesh resampled;
  TextureMap tmap;
  std::vector<DescriptorField> fields;  ///< K, H, LD, SI on the resampled vertices
  std::array<FieldRaster, 5> rasters;  ///< indexed by kind; GL unused
  GaiImage gl;
};

struct ScanImages {
  std::string scan_id;
  std::array<GaiImage, 5> gais;  ///< indexed by kind
  std::vector<FgaiImage> fgais;
};

ScanRasters compute_scan_rasters(const TexturedMesh& mesh, const std::string& scan_id, const PipelineConfig& config);
/// `global` holds one fixed quantization per kind (global mode) or is empty.
ScanImages quantize_scan(const ScanRasters& rasters, const PipelineConfig& config,
                         const std::optional<std::array<Quantization, 5>>& global = {});
/// Load, resample, rasterize and fuse one scan in memory.
ScanImages process_scan(const TexturedMesh& mesh, const std::string& scan_id, const PipelineConfig& config);

struct PipelineResult {
  std::size_t processed = 0;
  std::size_t skipped = 0;
  std::size_t images_written = 0;
  std::vector<std::pair<std::string, std::string>> failures;  ///< (scan id, message)

  bool ok() const { return failures.empty(); }
};

using LogSink = std::function<void(const std::string&)>;

/// Runs every manifest row, writing `<scan>.<kind>.png`, `<scan>.<combo>.png`
/// and `<scan>.provenance.jsonl` into the output directory, plus
/// `process.log`. Completed scans are skipped unless `force`.
PipelineResult run_pipeline(const PipelineConfig& config, const Manifest& manifest, const LogSink& log = {});

/// Re-fuses GAI PNGs found in `dir` for each scan of the manifest.
PipelineResult fuse_directory(const std::filesystem::path& dir, const Manifest& manifest,
                              const std::vector<Combo>& combos, bool keep_order,
                              const std::optional<AugmentSpec>& augment, const std::filesystem::path& output_dir);

/// Block-averaged pixels of `<scan>.<image_name>.png` (all channels, channel
/// major) as one feature row per manifest row; `cell` x `cell` pixel blocks.
FeatureMatrix pixel_features(const std::filesystem::path& dir, const Manifest& manifest, const std::string& image_name,
                             int cell);

std::string image_file_name(const std::string& scan_id, const std::string& name);

}  // namespace fgai
