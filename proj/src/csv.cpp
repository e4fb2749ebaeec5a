#include "radfid/csv.hpp"

#include <fstream>
#include <sstream>

#include "radfid/error.hpp"

namespace radfid {

CsvRows read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path.string());
  CsvRows rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(const std::filesystem::path& path, const CsvRows& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write CSV file: " + path.string());
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c].find_first_of(",\n\r") != std::string::npos)
        throw ValidationError("CSV cell contains separator characters: " + row[c]);
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  }
  if (!out) throw IoError("short write on CSV file: " + path.string());
}

}  // namespace radfid
