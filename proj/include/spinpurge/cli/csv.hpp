#pragma once

// CSV artifacts: '#'-prefixed metadata lines, then a mandatory header row.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spinpurge/errors.hpp"

#ifndef SPINPURGE_VERSION
#define SPINPURGE_VERSION "0.0.0"
#endif

namespace spinpurge::cli {

inline std::string tool_version() { return std::string("spinpurge ") + SPINPURGE_VERSION; }

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// Shortest representation that round-trips.
inline std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }

template <class T>
  requires std::is_integral_v<T>
inline std::string fmt(T v) {
  return std::to_string(v);
}

inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }

// Joins values with sep, e.g. "0|2|3".
template <class Range>
inline std::string join(const Range& values, std::string_view sep = "|") {
  std::string out;
  bool first = true;
  for (const auto& v : values) {
    if (!first) out += sep;
    out += fmt(v);
    first = false;
  }
  return out;
}

struct CsvMeta {
  std::uint64_t seed = 0;
  std::string scenario_hash;
  std::vector<std::pair<std::string, std::string>> extra;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... Ts>
  void add(const Ts&... values) {
    std::vector<std::string> row{fmt(values)...};
    add_row(std::move(row));
  }

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw InvalidArgument("csv row width does not match header");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string render(const CsvMeta& meta) const {
    std::ostringstream os;
    os << "# tool=" << tool_version() << '\n';
    os << "# seed=" << meta.seed << '\n';
    os << "# scenario_hash=" << meta.scenario_hash << '\n';
    for (const auto& [k, v] : meta.extra) os << "# " << k << '=' << v << '\n';
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

  void write(const std::filesystem::path& path, const CsvMeta& meta) const { write_text(path, render(meta)); }

  static void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError("cannot write " + path.string());
    out << text;
    if (!out) throw ScenarioError("write failed for " + path.string());
  }

 private:
  static std::string quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string q = "\"";
    for (char c : cell) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << quote(cells[i]);
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Parsed view of an emitted CSV, used by tests and bundle checks.
struct CsvDocument {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InvalidArgument("missing column " + std::string(name));
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline CsvDocument read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read " + path.string());
  CsvDocument doc;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!have_header && line.starts_with("#")) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) doc.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!have_header) {
      doc.header = split_csv_line(line);
      have_header = true;
    } else if (!line.empty()) {
      doc.rows.push_back(split_csv_line(line));
    }
  }
  if (!have_header) throw ScenarioError(path.string() + ": missing header row");
  return doc;
}

}  // namespace spinpurge::cli
