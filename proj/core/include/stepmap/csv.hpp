#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace stepmap {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Column index by name; throws std::runtime_error if absent.
  int column(const std::string& name) const;
};

// Shortest round-trip representation (%.17g); used for every numeric artifact
// so reruns are byte-identical.
std::string format_g17(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace stepmap
