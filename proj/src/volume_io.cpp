#include "radfid/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "radfid/csv.hpp"
#include "radfid/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw voxel files are little-endian; big-endian hosts are unsupported");

namespace radfid {
namespace {

struct Header {
  Eigen::Array3i dims;
  Eigen::Array3d spacing_mm;
  Eigen::Array3d origin_mm;
  std::string dtype;
  std::filesystem::path raw_path;
};

Header read_header(const std::filesystem::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw IoError("missing header file: " + header_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed header " + header_path.string() + ": " + e.what());
  }
  Header h;
  try {
    for (int a = 0; a < 3; ++a) {
      h.dims[a] = j.at("dims").at(a).get<int>();
      h.spacing_mm[a] = j.at("spacing_mm").at(a).get<double>();
      h.origin_mm[a] = j.at("origin_mm").at(a).get<double>();
    }
    h.dtype = j.at("dtype").get<std::string>();
    h.raw_path = header_path.parent_path() / j.at("data").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed header " + header_path.string() + ": " + e.what());
  }
  if ((h.dims <= 0).any()) throw ValidationError("header dims must be positive");
  if ((h.spacing_mm <= 0.0).any()) throw ValidationError("header spacing must be positive");
  return h;
}

std::vector<char> read_raw(const std::filesystem::path& raw_path, std::int64_t expected_bytes) {
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw IoError("missing raw data file: " + raw_path.string());
  in.seekg(0, std::ios::end);
  const std::int64_t actual = in.tellg();
  if (actual != expected_bytes)
    throw IoError("size mismatch in " + raw_path.string() + ": expected " +
                  std::to_string(expected_bytes) + " bytes, found " + std::to_string(actual));
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(static_cast<std::size_t>(expected_bytes));
  in.read(bytes.data(), expected_bytes);
  if (!in) throw IoError("short read on " + raw_path.string());
  return bytes;
}

void write_header(const std::filesystem::path& header_path, const Eigen::Array3i& dims,
                  const Eigen::Array3d& spacing, const Eigen::Array3d& origin,
                  const std::string& dtype, const std::string& raw_name) {
  nlohmann::ordered_json j;
  j["dims"] = {dims[0], dims[1], dims[2]};
  j["spacing_mm"] = {spacing[0], spacing[1], spacing[2]};
  j["origin_mm"] = {origin[0], origin[1], origin[2]};
  j["dtype"] = dtype;
  j["data"] = raw_name;
  std::ofstream out(header_path, std::ios::binary);
  if (!out) throw IoError("cannot write header file: " + header_path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write on " + header_path.string());
}

std::string raw_name_for(const std::filesystem::path& header_path) {
  return header_path.stem().string() + ".raw";
}

void write_raw(const std::filesystem::path& raw_path, const char* data, std::int64_t bytes) {
  std::ofstream out(raw_path, std::ios::binary);
  if (!out) throw IoError("cannot write raw data file: " + raw_path.string());
  out.write(data, bytes);
  if (!out) throw IoError("short write on " + raw_path.string());
}

}  // namespace

Volume read_volume(const std::filesystem::path& header_path) {
  const Header h = read_header(header_path);
  if (h.dtype != "f32le")
    throw ValidationError("expected dtype f32le for volume, got \"" + h.dtype + "\" in " +
                          header_path.string());
  Volume v;
  v.dims = h.dims;
  v.spacing_mm = h.spacing_mm;
  v.origin_mm = h.origin_mm;
  const std::int64_t n = v.size();
  const auto bytes = read_raw(h.raw_path, n * 4);
  v.voxels.resize(n);
  std::memcpy(v.voxels.data(), bytes.data(), static_cast<std::size_t>(n) * 4);
  for (std::int64_t f = 0; f < n; ++f) {
    if (!std::isfinite(v.voxels[f]))
      throw ValidationError("non-finite voxel at flat index " + std::to_string(f) + " in " +
                            header_path.string());
  }
  return v;
}

void write_volume(const Volume& v, const std::filesystem::path& header_path) {
  validate_grid(v);
  const std::string raw_name = raw_name_for(header_path);
  write_header(header_path, v.dims, v.spacing_mm, v.origin_mm, "f32le", raw_name);
  write_raw(header_path.parent_path() / raw_name,
            reinterpret_cast<const char*>(v.voxels.data()), v.size() * 4);
}

Mask read_mask(const std::filesystem::path& header_path) {
  const Header h = read_header(header_path);
  if (h.dtype != "u8")
    throw ValidationError("expected dtype u8 for mask, got \"" + h.dtype + "\" in " +
                          header_path.string());
  Mask m;
  m.dims = h.dims;
  m.spacing_mm = h.spacing_mm;
  m.origin_mm = h.origin_mm;
  m.intensity_unit = "label";
  const std::int64_t n = m.size();
  const auto bytes = read_raw(h.raw_path, n);
  m.voxels.resize(n);
  for (std::int64_t f = 0; f < n; ++f) m.voxels[f] = bytes[static_cast<std::size_t>(f)] ? 1 : 0;
  return m;
}

void write_mask(const Mask& m, const std::filesystem::path& header_path) {
  validate_grid(m);
  const std::string raw_name = raw_name_for(header_path);
  write_header(header_path, m.dims, m.spacing_mm, m.origin_mm, "u8", raw_name);
  write_raw(header_path.parent_path() / raw_name,
            reinterpret_cast<const char*>(m.voxels.data()), m.size());
}

std::string to_string(RiskLabel label) { return label == RiskLabel::low ? "low" : "high"; }

std::optional<RiskLabel> parse_label(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "low") return RiskLabel::low;
  if (text == "high") return RiskLabel::high;
  throw ValidationError("unknown label \"" + text + "\" (expected low, high, or empty)");
}

std::vector<CaseRecord> read_manifest(const std::filesystem::path& path) {
  const CsvRows rows = read_csv(path);
  if (rows.empty() || rows[0] != std::vector<std::string>{"case_id", "volume", "mask", "label"})
    throw ValidationError("manifest must start with header case_id,volume,mask,label: " +
                          path.string());
  const auto base = path.parent_path();
  std::vector<CaseRecord> cases;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 4)
      throw ValidationError("manifest row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " columns, expected 4");
    CaseRecord rec;
    rec.case_id = rows[r][0];
    if (rec.case_id.empty()) throw ValidationError("empty case_id in manifest row " + std::to_string(r));
    if (!seen.insert(rec.case_id).second)
      throw ValidationError("duplicate case_id in manifest: " + rec.case_id);
    rec.volume_path = base / rows[r][1];
    rec.mask_path = base / rows[r][2];
    rec.label = parse_label(rows[r][3]);
    cases.push_back(std::move(rec));
  }
  return cases;
}

void write_manifest(const std::filesystem::path& path, const std::vector<CaseRecord>& cases) {
  const auto base = path.parent_path();
  CsvRows rows;
  rows.push_back({"case_id", "volume", "mask", "label"});
  for (const auto& rec : cases) {
    const auto rel = [&](const std::filesystem::path& p) {
      const auto r = p.lexically_proximate(base);
      return r.generic_string();
    };
    rows.push_back({rec.case_id, rel(rec.volume_path), rel(rec.mask_path),
                    rec.label ? to_string(*rec.label) : ""});
  }
  write_csv(path, rows);
}

}  // namespace radfid
