#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kcnlp/error.hpp"

namespace kcnlp::io {

// Reals in every CSV/text artifact use 12 significant digits so that output
// bytes (and therefore manifest hashes) are stable.
inline std::string fmt_real(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline double parse_real(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": not a number: '" + s + "'");
  }
}

inline long long parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": not an integer: '" + s + "'");
  }
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Reads a CSV produced by this library: checks the header and returns the
// data rows split on commas. Fields never contain commas or quotes.
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p,
                                                      std::string_view expected_header) {
  std::istringstream in(read_file(p));
  std::string line;
  if (!std::getline(in, line) || line != expected_header)
    throw DataError("'" + p.string() + "': expected header '" + std::string(expected_header) + "'");
  const auto width = split(expected_header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != width)
      throw DataError("'" + p.string() + "' line " + std::to_string(lineno) + ": expected " +
                      std::to_string(width) + " fields");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace kcnlp::io
