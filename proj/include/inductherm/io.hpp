#pragma once

// Plain-text output: CSV ledgers, key-value reports and headered grid
// snapshots. Every file starts with a `# config_hash <hex>` line.

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "inductherm/geometry.hpp"

namespace inductherm {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Formats with %.17g so values round-trip exactly.
std::string fmt(double v);

class CsvWriter {
 public:
  CsvWriter() = default;
  CsvWriter(const std::string& path, const std::string& hash, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  bool is_open() const { return out_.is_open(); }

 private:
  std::ofstream out_;
  std::size_t width_ = 0;
};

struct CsvTable {
  std::string hash;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& name) const;  // throws IoError when absent
};

CsvTable read_csv(const std::string& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void write_kv(const std::string& path, const std::string& hash, const KeyValues& kv);
/// Reads `key value` lines; comment lines are skipped except the hash, which
/// is returned under the key "config_hash".
std::map<std::string, std::string> read_kv(const std::string& path);

/// Snapshot file: hash line, then `nx ny hx hy field t`, then ny rows of nx
/// values, top row first.
void write_field(const std::string& path, const std::string& hash, const RegionGrid& g,
                 const ScalarField& f, const std::string& name, double t);

struct FieldFile {
  std::string hash;
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  std::string name;
  double t = 0.0;
  ScalarField values;  // j * nx + i, bottom row first like the grid
};

FieldFile read_field(const std::string& path);

/// Creates the directory (and parents); throws IoError on failure.
void ensure_dir(const std::string& path);

}  // namespace inductherm
