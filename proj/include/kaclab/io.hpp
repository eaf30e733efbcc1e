#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "kaclab/error.hpp"

namespace kaclab {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

/// CSV text with a header row and shortest round-trip numbers.
inline std::string csv_columns(const std::vector<std::string>& header, const std::vector<std::vector<double>>& cols) {
  std::string out;
  for (size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  const size_t rows = cols.empty() ? 0 : cols.front().size();
  for (const auto& col : cols)
    if (col.size() != rows) fail(ErrorCode::DomainError, "CSV columns differ in length");
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ',';
      out += format_double(cols[c][r]);
    }
    out += '\n';
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;  // 1-based source line of each row
};

/// Numeric CSV with a header; errors carry the 1-based line number.
inline CsvTable parse_csv(const std::string& text, const std::string& source = "input") {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : l) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      for (auto& c : cells) t.header.push_back(trim(c));
      continue;
    }
    if (cells.size() != t.header.size())
      fail(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": expected " +
                                      std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
    std::vector<double> row;
    for (auto& c : cells) {
      double v;
      if (!parse_double(c, v))
        fail(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": '" + trim(c) + "' is not a number");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  if (t.header.empty()) fail(ErrorCode::ParseError, source + ": empty file");
  return t;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::IoError, "SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// JSON number, or null for values JSON cannot represent.
inline nlohmann::ordered_json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

/**
 * Collects output files under one directory and writes a manifest listing
 * each with its SHA-256. Files are recorded in the order they are written.
 */
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create '" + root_.string() + "': " + ec.message());
  }

  const std::filesystem::path& root() const { return root_; }

  void write(const std::string& rel, const std::string& content) {
    auto p = root_ / rel;
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + p.string() + "'");
    out << content;
    if (!out) fail(ErrorCode::IoError, "write failed for '" + p.string() + "'");
    files_.push_back({rel, sha256_hex(content), content.size()});
  }

  void write_json(const std::string& rel, const nlohmann::ordered_json& j) { write(rel, j.dump(2) + "\n"); }

  /// manifest.json: config hash plus every file written so far.
  void write_manifest(const std::string& command, const std::string& config_text) {
    nlohmann::ordered_json m;
    m["tool"] = "kaclab";
    m["command"] = command;
    m["config_sha256"] = sha256_hex(config_text);
    auto& arr = m["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files_) arr.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    auto p = root_ / "manifest.json";
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + p.string() + "'");
    out << m.dump(2) << "\n";
  }

 private:
  struct Entry {
    std::string path, sha256;
    size_t bytes;
  };
  std::filesystem::path root_;
  std::vector<Entry> files_;
};

}  // namespace kaclab
