#include "stepmap/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stepmap {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw std::runtime_error("csv: missing column '" + name + "'");
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary: fixed \n endings everywhere
  if (!out) throw std::runtime_error("csv: cannot open for writing: " + path.string());
  for (size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::runtime_error("csv: row width mismatch writing " + path.string());
    for (size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_g17(row[i]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("csv: write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open: " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("csv: bad numeric cell '" + cell + "' in " + path.string());
      }
    }
    if (row.size() != table.header.size())
      throw std::runtime_error("csv: inconsistent row width in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace stepmap
