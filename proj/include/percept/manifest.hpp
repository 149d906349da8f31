#pragma once

#include <optional>
#include <string>
#include <vector>

namespace percept {

enum class Split { Train, Test, All };

Split split_from_string(const std::string& name);
std::string to_string(Split split);

struct ManifestRecord {
  std::string image_path;
  std::optional<double> mos;
  Split split = Split::All;
};

// One external benchmark: csv with header "image_path,mos,split" and
// optional leading "# key = value" lines (name, shorter_side, mos_min,
// mos_max). The mos field may be empty for unlabeled sets.
struct DatasetManifest {
  std::string name;
  std::vector<ManifestRecord> records;
  double mos_min = 0.0;
  double mos_max = 0.0;
  // Preprocessing flag: resize so the shorter side has this length.
  std::optional<int> shorter_side;

  std::vector<const ManifestRecord*> select(Split split) const;
  std::size_t size() const { return records.size(); }
};

// Parses and validates: header present, rows well formed, no duplicate
// paths, mos numeric where given. With check_files, missing image files are
// itemized up front.
DatasetManifest ingest_manifest(const std::string& path,
                                bool check_files = true);

void save_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace percept
