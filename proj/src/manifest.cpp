#include "percept/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "percept/errors.hpp"

namespace percept {

namespace fs = std::filesystem;

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  if (name == "all" || name.empty()) return Split::All;
  throw IngestError("unknown split tag '" + name + "' (train/test/all)");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::All: return "all";
  }
  throw IngestError("invalid split");
}

std::vector<const ManifestRecord*> DatasetManifest::select(Split split) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records) {
    if (split == Split::All || r.split == split || r.split == Split::All) {
      out.push_back(&r);
    }
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

DatasetManifest ingest_manifest(const std::string& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open manifest: " + path);

  DatasetManifest manifest;
  manifest.name = fs::path(path).stem().string();
  std::optional<double> declared_min, declared_max;

  std::vector<std::string> problems;
  std::set<std::string> seen_paths;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  bool have_mos = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped[0] == '#') {
      const auto eq = stripped.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(stripped.substr(1, eq - 1));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key == "name") manifest.name = value;
        else if (key == "shorter_side") manifest.shorter_side = std::stoi(value);
        else if (key == "mos_min") declared_min = std::stod(value);
        else if (key == "mos_max") declared_max = std::stod(value);
      }
      continue;
    }
    if (!header_seen) {
      if (stripped != "image_path,mos,split") {
        throw IngestError(path + ": first data line must be the header "
                          "'image_path,mos,split', got '" + stripped + "'");
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> fields = split_csv_row(stripped);
    if (fields.size() != 3) {
      problems.push_back("line " + std::to_string(lineno) +
                         ": expected 3 fields, got " +
                         std::to_string(fields.size()));
      continue;
    }
    ManifestRecord rec;
    rec.image_path = fields[0];
    if (rec.image_path.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": empty path");
      continue;
    }
    if (!seen_paths.insert(rec.image_path).second) {
      problems.push_back("line " + std::to_string(lineno) + ": duplicate path " +
                         rec.image_path);
      continue;
    }
    if (!fields[1].empty()) {
      try {
        std::size_t used = 0;
        rec.mos = std::stod(fields[1], &used);
        if (used != fields[1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        problems.push_back("line " + std::to_string(lineno) +
                           ": non-numeric mos '" + fields[1] + "'");
        continue;
      }
      have_mos = true;
    }
    try {
      rec.split = split_from_string(fields[2]);
    } catch (const IngestError& e) {
      problems.push_back("line " + std::to_string(lineno) + ": " + e.what());
      continue;
    }
    if (check_files && !fs::exists(rec.image_path)) {
      problems.push_back("line " + std::to_string(lineno) + ": missing file " +
                         rec.image_path);
      continue;
    }
    manifest.records.push_back(std::move(rec));
  }
  if (!header_seen) {
    throw IngestError(path + ": no 'image_path,mos,split' header found");
  }
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << path << ": " << problems.size() << " bad row(s):";
    for (const auto& p : problems) msg << "\n  " << p;
    throw IngestError(msg.str());
  }
  if (manifest.records.empty()) {
    throw IngestError(path + ": manifest has no records");
  }

  if (have_mos) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : manifest.records) {
      if (r.mos) {
        lo = std::min(lo, *r.mos);
        hi = std::max(hi, *r.mos);
      }
    }
    manifest.mos_min = declared_min.value_or(lo);
    manifest.mos_max = declared_max.value_or(hi);
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw AssetError("cannot write manifest: " + path);
  out << "# name = " << manifest.name << "\n";
  if (manifest.shorter_side) {
    out << "# shorter_side = " << *manifest.shorter_side << "\n";
  }
  out << "image_path,mos,split\n";
  out.precision(17);
  for (const auto& r : manifest.records) {
    out << r.image_path << ",";
    if (r.mos) out << *r.mos;
    out << "," << to_string(r.split) << "\n";
  }
}

}  // namespace percept
