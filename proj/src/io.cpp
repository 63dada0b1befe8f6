#include "inductherm/io.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

namespace inductherm {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& hash,
                     const std::vector<std::string>& columns)
    : out_(path), width_(columns.size()) {
  if (!out_) throw IoError("cannot write " + path);
  out_ << "# config_hash " << hash << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw IoError("csv row has the wrong number of columns");
  for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << fmt(values[k]);
  out_ << '\n';
  out_.flush();
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  throw IoError("csv has no column '" + name + "'");
}

namespace {

bool read_hash_line(const std::string& line, std::string& hash) {
  const std::string tag = "# config_hash ";
  if (line.rfind(tag, 0) != 0) return false;
  hash = line.substr(tag.size());
  return true;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  CsvTable t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      read_hash_line(line, t.hash);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!header) {
      while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
      header = true;
      continue;
    }
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    if (r.size() != t.columns.size()) throw IoError(path + ": ragged row");
    t.rows.push_back(std::move(r));
  }
  return t;
}

void write_kv(const std::string& path, const std::string& hash, const KeyValues& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# config_hash " << hash << '\n';
  for (const auto& [k, v] : kv) out << k << ' ' << v << '\n';
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::map<std::string, std::string> m;
  std::string line, hash;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (read_hash_line(line, hash)) m["config_hash"] = hash;
      continue;
    }
    const auto sp = line.find(' ');
    if (sp == std::string::npos) m[line] = "";
    else m[line.substr(0, sp)] = line.substr(sp + 1);
  }
  return m;
}

void write_field(const std::string& path, const std::string& hash, const RegionGrid& g,
                 const ScalarField& f, const std::string& name, double t) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# config_hash " << hash << '\n';
  out << g.nx() << ' ' << g.ny() << ' ' << fmt(g.hx()) << ' ' << fmt(g.hy()) << ' ' << name << ' '
      << fmt(t) << '\n';
  for (int j = g.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < g.nx(); ++i)
      out << (i ? " " : "") << fmt(f[static_cast<std::size_t>(g.index(i, j))]);
    out << '\n';
  }
}

FieldFile read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  FieldFile ff;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) read_hash_line(line, ff.hash);
  if (!(in >> ff.nx >> ff.ny >> ff.hx >> ff.hy >> ff.name >> ff.t) || ff.nx <= 0 || ff.ny <= 0)
    throw IoError(path + ": bad snapshot header");
  ff.values.assign(static_cast<std::size_t>(ff.nx) * static_cast<std::size_t>(ff.ny), 0.0);
  for (int j = ff.ny - 1; j >= 0; --j)
    for (int i = 0; i < ff.nx; ++i)
      if (!(in >> ff.values[static_cast<std::size_t>(j * ff.nx + i)]))
        throw IoError(path + ": truncated snapshot");
  return ff;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

}  // namespace inductherm
