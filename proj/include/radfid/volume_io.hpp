#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radfid/grid.hpp"

namespace radfid {

// On-disk container: a JSON sidecar header next to a raw little-endian data
// file. Header fields:
//   {"dims":[nx,ny,nz], "spacing_mm":[sx,sy,sz], "origin_mm":[ox,oy,oz],
//    "dtype":"f32le"|"u8", "data":"<relative raw filename>"}
// Volumes are 32-bit float ("f32le"), masks 8-bit unsigned ("u8"); any
// nonzero mask byte loads as label 1.

Volume read_volume(const std::filesystem::path& header_path);
void write_volume(const Volume& v, const std::filesystem::path& header_path);

Mask read_mask(const std::filesystem::path& header_path);
void write_mask(const Mask& m, const std::filesystem::path& header_path);

enum class RiskLabel { low, high };

std::string to_string(RiskLabel label);
std::optional<RiskLabel> parse_label(const std::string& text);

struct CaseRecord {
  std::string case_id;
  std::filesystem::path volume_path;  // resolved against the manifest directory
  std::filesystem::path mask_path;
  std::optional<RiskLabel> label;
};

// Manifest CSV, columns exactly: case_id,volume,mask,label with label in
// {low, high, ""}. Paths are stored relative to the manifest file.
std::vector<CaseRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<CaseRecord>& cases);

}  // namespace radfid
