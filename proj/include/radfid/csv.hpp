#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace radfid {

using CsvRows = std::vector<std::vector<std::string>>;

// Strict comma-separated text, no quoting. Cells must not contain commas or
// newlines; the writer rejects them. Trailing '\r' is stripped on read.
CsvRows read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvRows& rows);

}  // namespace radfid
