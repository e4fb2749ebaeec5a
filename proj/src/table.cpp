#include "radfid/table.hpp"

#include <cmath>
#include <set>

#include "radfid/csv.hpp"
#include "radfid/error.hpp"
#include "radfid/numeric.hpp"

namespace radfid {

namespace {

void validate_table(const FeatureTable& t, const std::string& where) {
  if (t.values.rows() != static_cast<Eigen::Index>(t.case_ids.size()) ||
      t.values.cols() != static_cast<Eigen::Index>(t.feature_ids.size()))
    throw ValidationError(where + ": value matrix shape does not match id lists");
  if (t.case_ids.empty() || t.feature_ids.empty())
    throw ValidationError(where + ": empty feature table");
  std::set<std::string> cases(t.case_ids.begin(), t.case_ids.end());
  if (cases.size() != t.case_ids.size())
    throw ValidationError(where + ": duplicate case_id");
  std::set<std::string> feats(t.feature_ids.begin(), t.feature_ids.end());
  if (feats.size() != t.feature_ids.size())
    throw ValidationError(where + ": duplicate feature id");
  if (!t.values.allFinite())
    throw ValidationError(where + ": non-finite feature value");
}

}  // namespace

void write_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  validate_table(table, "write_feature_table");
  CsvRows rows;
  rows.reserve(table.case_ids.size() + 1);
  std::vector<std::string> header{"case_id"};
  header.insert(header.end(), table.feature_ids.begin(), table.feature_ids.end());
  rows.push_back(std::move(header));
  for (std::size_t r = 0; r < table.case_ids.size(); ++r) {
    std::vector<std::string> row{table.case_ids[r]};
    for (Eigen::Index c = 0; c < table.cols(); ++c)
      row.push_back(format_g9(table.values(static_cast<Eigen::Index>(r), c)));
    rows.push_back(std::move(row));
  }
  write_csv(path, rows);
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  const CsvRows rows = read_csv(path);
  if (rows.size() < 2 || rows[0].size() < 2 || rows[0][0] != "case_id")
    throw ValidationError("feature table " + path.string() +
                          ": expected a case_id header and at least one data row");
  FeatureTable t;
  t.feature_ids.assign(rows[0].begin() + 1, rows[0].end());
  const std::size_t width = rows[0].size();
  t.values.resize(static_cast<Eigen::Index>(rows.size() - 1),
                  static_cast<Eigen::Index>(width - 1));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw ValidationError("feature table " + path.string() + ": ragged row " +
                            std::to_string(r + 1));
    t.case_ids.push_back(rows[r][0]);
    for (std::size_t c = 1; c < width; ++c) {
      double v;
      try {
        v = parse_number(rows[r][c]);
      } catch (const std::exception&) {
        throw ValidationError("feature table " + path.string() + ": bad number '" +
                              rows[r][c] + "' at row " + std::to_string(r + 1));
      }
      t.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = v;
    }
  }
  validate_table(t, "read_feature_table " + path.string());
  return t;
}

}  // namespace radfid
