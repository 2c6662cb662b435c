#pragma once

// Internal helpers shared by the YAML-backed file formats.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cavoid/errors.hpp"
#include "cavoid/orbital.hpp"

namespace cavoid::yamlio {

// 17 significant digits: enough for an exact double round trip.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit_double(YAML::Emitter& out, double v) {
  if (std::isnan(v)) {
    out << ".nan";
  } else if (std::isinf(v)) {
    out << (v > 0 ? ".inf" : "-.inf");
  } else {
    out << fmt_double(v);
  }
}

inline void emit_vec3(YAML::Emitter& out, const Vec3& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (int k = 0; k < 3; ++k) emit_double(out, v[k]);
  out << YAML::EndSeq;
}

inline std::size_t line_of(const YAML::Node& node) {
  return static_cast<std::size_t>(node.Mark().line + 1);
}

// Wraps node access so that every failure becomes a ParseError with the
// source name and a 1-based line.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const auto mark = at.Mark();
    throw ParseError(source_, msg, mark.line >= 0 ? static_cast<std::size_t>(mark.line + 1) : 0,
                     mark.pos >= 0 ? static_cast<std::size_t>(mark.pos) : 0);
  }

  YAML::Node child(const YAML::Node& parent, const std::string& key) const {
    if (!parent.IsMap()) fail(parent, "expected a mapping containing '" + key + "'");
    YAML::Node n = parent[key];
    if (!n) fail(parent, "missing key '" + key + "'");
    return n;
  }

  bool has(const YAML::Node& parent, const std::string& key) const {
    return parent.IsMap() && parent[key];
  }

  template <typename T>
  T get(const YAML::Node& parent, const std::string& key) const {
    return as<T>(child(parent, key), key);
  }

  template <typename T>
  T get_or(const YAML::Node& parent, const std::string& key, T fallback) const {
    return has(parent, key) ? get<T>(parent, key) : fallback;
  }

  template <typename T>
  T as(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "invalid value for '" + what + "'");
    }
  }

  Vec3 vec3(const YAML::Node& parent, const std::string& key) const {
    YAML::Node n = child(parent, key);
    if (!n.IsSequence() || n.size() != 3) fail(n, "'" + key + "' must be a 3-element sequence");
    Vec3 v;
    for (std::size_t k = 0; k < 3; ++k) v[static_cast<int>(k)] = as<double>(n[k], key);
    return v;
  }

  // Rejects keys not in `allowed`.
  void only_keys(const YAML::Node& map, const std::vector<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (const auto& a : allowed) ok = ok || a == key;
      if (!ok) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

inline YAML::Node parse(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(source, e.msg, static_cast<std::size_t>(e.mark.line + 1),
                     static_cast<std::size_t>(e.mark.pos));
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file", 0, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace cavoid::yamlio
