#pragma once

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "ampcc/types.hpp"

// Internal helpers for strict JSON document parsing: unknown keys rejected,
// typed access with path-qualified diagnostics, syntax errors anchored to
// line:column.
namespace ampcc::jsonu {

using Json = nlohmann::ordered_json;

[[noreturn]] inline void fail(const std::string& origin, const std::string& msg) {
  throw ConfigError(origin + ": " + msg);
}

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline Json parse_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ":" + line_col(text, e.byte) + ": " + e.what());
  }
}

inline void check_keys(const Json& j, const std::string& origin, const std::string& path,
                       std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(origin, "unknown key '" + path + it.key() + "'");
  }
}

inline const Json* get_section(const Json& j, const std::string& origin, const char* key) {
  if (!j.contains(key)) return nullptr;
  if (!j[key].is_object()) fail(origin, std::string("'") + key + "' must be an object");
  return &j[key];
}

inline double get_num(const Json& j, const std::string& origin, const std::string& path,
                      const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) fail(origin, "'" + path + key + "' must be a number");
  return j[key].get<double>();
}

inline int get_int(const Json& j, const std::string& origin, const std::string& path,
                   const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_integer()) fail(origin, "'" + path + key + "' must be an integer");
  return j[key].get<int>();
}

inline bool get_bool(const Json& j, const std::string& origin, const std::string& path,
                     const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_boolean()) fail(origin, "'" + path + key + "' must be a boolean");
  return j[key].get<bool>();
}

inline std::string get_string(const Json& j, const std::string& origin, const std::string& path,
                              const char* key, const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_string()) fail(origin, "'" + path + key + "' must be a string");
  return j[key].get<std::string>();
}

inline void get_fixed_array(const Json& j, const std::string& origin, const std::string& path,
                            const char* key, double* out, int count) {
  if (!j.contains(key)) return;
  const Json& a = j[key];
  if (!a.is_array() || static_cast<int>(a.size()) != count)
    fail(origin,
         "'" + path + key + "' must be an array of " + std::to_string(count) + " numbers");
  for (int i = 0; i < count; ++i) {
    if (!a[static_cast<std::size_t>(i)].is_number())
      fail(origin, "'" + path + key + "' must be an array of numbers");
    out[i] = a[static_cast<std::size_t>(i)].get<double>();
  }
}

}  // namespace ampcc::jsonu
