#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fgai {

struct ManifestRow {
  std::string scan_id;
  std::filesystem::path mesh;
  std::filesystem::path texture;
  std::string subject_id;
  std::string label;
  std::string sequence_id;  ///< empty for static scans
  std::optional<long long> frame_index;
};

struct Manifest {
  std::vector<ManifestRow> rows;

  /// Unique scan ids; sequence rows carry a frame index and the indices of
  /// each sequence are exactly 0..n-1.
  void validate() const;
};

/// Header `scan_id,mesh,texture,subject_id,label,sequence_id,frame_index`;
/// the last two columns may be omitted or left empty. Relative paths are
/// resolved against the manifest's directory.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace fgai
