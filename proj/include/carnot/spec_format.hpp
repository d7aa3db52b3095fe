#ifndef CARNOT_SPEC_FORMAT_HPP
#define CARNOT_SPEC_FORMAT_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/structure_constants.hpp"

namespace carnot {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Accepts plain decimals and rationals "p/q".
inline double parse_value(const std::string& tok, int line_no) {
  const auto slash = tok.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    }
    const std::string ps = tok.substr(0, slash);
    const std::string qs = tok.substr(slash + 1);
    const double p = std::stod(ps, &used);
    if (used != ps.size()) throw std::invalid_argument(tok);
    const double q = std::stod(qs, &used);
    if (used != qs.size()) throw std::invalid_argument(tok);
    if (q == 0.0) throw std::invalid_argument(tok);
    return p / q;
  } catch (const std::exception&) {
    throw StructuralError("group spec line " + std::to_string(line_no) + ": bad value '" + tok +
                          "'");
  }
}

}  // namespace detail

/// Text format, one spec per file:
///   line 1: `m <int>`; line 2: `d2 <int>`;
///   then `c <i> <j> <l> <value>` with 1-based indices, i < j, missing entries
///   zero; `#` starts a comment; values are decimals or rationals `p/q`.
inline StructureConstants parse_group_spec(std::istream& in) {
  int m = -1, d2 = -1;
  std::vector<BracketEntry> entries;
  std::string line;
  int line_no = 0;
  int header_seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (header_seen == 0) {
      long v = 0;
      if (key != "m" || !(ls >> v))
        throw StructuralError("group spec line " + std::to_string(line_no) + ": expected 'm <int>'");
      m = static_cast<int>(v);
      header_seen = 1;
    } else if (header_seen == 1) {
      long v = 0;
      if (key != "d2" || !(ls >> v))
        throw StructuralError("group spec line " + std::to_string(line_no) +
                              ": expected 'd2 <int>'");
      d2 = static_cast<int>(v);
      header_seen = 2;
    } else if (key == "c") {
      int i = 0, j = 0, l = 0;
      std::string tok;
      if (!(ls >> i >> j >> l >> tok))
        throw StructuralError("group spec line " + std::to_string(line_no) +
                              ": expected 'c <i> <j> <l> <value>'");
      std::string rest;
      if (ls >> rest)
        throw StructuralError("group spec line " + std::to_string(line_no) + ": trailing tokens");
      if (i < 1 || j < 1 || l < 1 || i > m || j > m || l > d2)
        throw StructuralError("group spec line " + std::to_string(line_no) +
                              ": index out of range (1-based)");
      if (i >= j)
        throw StructuralError("group spec line " + std::to_string(line_no) + ": i < j required");
      entries.push_back(BracketEntry{i - 1, j - 1, l - 1, detail::parse_value(tok, line_no)});
    } else {
      throw StructuralError("group spec line " + std::to_string(line_no) + ": unknown directive '" +
                            key + "'");
    }
  }
  if (header_seen < 2) throw StructuralError("group spec: missing 'm' / 'd2' header lines");
  return StructureConstants(m, d2, entries);
}

inline StructureConstants parse_group_spec_string(const std::string& text) {
  std::istringstream in(text);
  return parse_group_spec(in);
}

inline StructureConstants load_group_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open group spec file: " + path);
  return parse_group_spec(in);
}

/// Canonical text form: header plus entries sorted by (l, i, j), 1-based,
/// values at full precision. Stable input for hashing and reports.
inline std::string canonical_spec_text(const StructureConstants& sc) {
  std::vector<BracketEntry> entries = sc.entries();
  std::sort(entries.begin(), entries.end(), [](const BracketEntry& a, const BracketEntry& b) {
    if (a.l != b.l) return a.l < b.l;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::string out = "m " + std::to_string(sc.m()) + "\nd2 " + std::to_string(sc.d2()) + "\n";
  char buf[64];
  for (const auto& e : entries) {
    if (e.value == 0.0) continue;
    std::snprintf(buf, sizeof(buf), "c %d %d %d %.17g\n", e.i + 1, e.j + 1, e.l + 1, e.value);
    out += buf;
  }
  return out;
}

/// FNV-1a 64-bit over the canonical spec text.
inline std::uint64_t spec_hash(const StructureConstants& sc) {
  const std::string text = canonical_spec_text(sc);
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace carnot

#endif
