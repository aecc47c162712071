#include "molpool/chem.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace molpool::chem {

namespace {

// RFC-4180-ish field splitting: quoted fields may hold commas and doubled
// quotes. Multiline fields are not supported.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool is_blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

CsvLoadResult load_csv(const std::string& path,
                       const std::string& smiles_column,
                       const std::vector<std::string>& target_columns) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("load_csv: " + path + " is empty");
  const auto header = split_csv_line(strip_cr(line));

  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    throw std::runtime_error("load_csv: column '" + name + "' not found in " +
                             path);
  };

  const long smiles_idx = find_col(smiles_column);
  std::vector<long> target_idx;
  for (const auto& name : target_columns) target_idx.push_back(find_col(name));

  CsvLoadResult result;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<long>(fields.size()) <= smiles_idx) {
      result.warnings.push_back("row " + std::to_string(row) +
                                ": too few fields, skipped");
      ++result.skipped;
      continue;
    }
    DatasetRecord rec;
    rec.smiles = fields[smiles_idx];
    try {
      parse_smiles(rec.smiles);
    } catch (const SmilesError& e) {
      result.warnings.push_back("row " + std::to_string(row) + ": " +
                                e.what() + ", skipped");
      ++result.skipped;
      continue;
    }
    for (long idx : target_idx) {
      if (idx >= static_cast<long>(fields.size()) || is_blank(fields[idx])) {
        rec.targets.push_back(std::nullopt);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(fields[idx].c_str(), &end);
      if (end == fields[idx].c_str()) {
        result.warnings.push_back("row " + std::to_string(row) +
                                  ": non-numeric target '" + fields[idx] +
                                  "', treated as missing");
        rec.targets.push_back(std::nullopt);
      } else {
        rec.targets.push_back(v);
      }
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace molpool::chem
