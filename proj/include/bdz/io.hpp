#pragma once

/// @file io.hpp
/// Chain definition files (JSON), a field-ordered JSON writer with 17
/// significant digits, and RFC-4180 CSV output.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bdz/errors.hpp"
#include "bdz/seqcore.hpp"

namespace bdz::io {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Output JSON

class Json {
 public:
  using Array = std::vector<Json>;
  using Object = std::vector<std::pair<std::string, Json>>;

  Json() = default;
  Json(std::nullptr_t) {}
  Json(bool v) : v_(v) {}
  Json(double v) : v_(v) {}
  Json(int v) : v_(static_cast<long>(v)) {}
  Json(long v) : v_(v) {}
  Json(std::size_t v) : v_(static_cast<long>(v)) {}
  Json(std::string v) : v_(std::move(v)) {}
  Json(const char* v) : v_(std::string(v)) {}
  Json(Array v) : v_(std::move(v)) {}
  Json(Object v) : v_(std::move(v)) {}

  static Json object() { return Json(Object{}); }
  static Json array() { return Json(Array{}); }

  Json& set(std::string key, Json value) {
    std::get<Object>(v_).emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Json& push(Json value) {
    std::get<Array>(v_).push_back(std::move(value));
    return *this;
  }

  std::string dump(int indent = 2) const {
    std::string out;
    write(out, indent, 0);
    out += '\n';
    return out;
  }

 private:
  static void quote(std::string& out, const std::string& s) {
    out += '"';
    for (char ch : s) {
      switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(ch) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", ch);
            out += buf;
          } else {
            out += ch;
          }
      }
    }
    out += '"';
  }

  void write(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::monostate>) {
            out += "null";
          } else if constexpr (std::is_same_v<T, bool>) {
            out += v ? "true" : "false";
          } else if constexpr (std::is_same_v<T, double>) {
            // JSON has no NaN / Infinity literals.
            out += std::isfinite(v) ? fmt(v) : "null";
          } else if constexpr (std::is_same_v<T, long>) {
            out += std::to_string(v);
          } else if constexpr (std::is_same_v<T, std::string>) {
            quote(out, v);
          } else if constexpr (std::is_same_v<T, Array>) {
            if (v.empty()) {
              out += "[]";
              return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < v.size(); ++k) {
              out += pad;
              v[k].write(out, indent, depth + 1);
              out += k + 1 < v.size() ? ",\n" : "\n";
            }
            out += close + "]";
          } else {
            if (v.empty()) {
              out += "{}";
              return;
            }
            out += "{\n";
            for (std::size_t k = 0; k < v.size(); ++k) {
              out += pad;
              quote(out, v[k].first);
              out += ": ";
              v[k].second.write(out, indent, depth + 1);
              out += k + 1 < v.size() ? ",\n" : "\n";
            }
            out += close + "}";
          }
        },
        v_);
  }

  std::variant<std::monostate, bool, double, long, std::string, Array, Object> v_;
};

// ---------------------------------------------------------------------------
// CSV

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row_strings(header); }

  Csv& row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(fmt(v));
    return row_strings(cells);
  }

  Csv& row_strings(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ += ',';
      out_ += escape(cells[k]);
    }
    out_ += "\r\n";
    return *this;
  }

  const std::string& str() const { return out_; }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

  std::size_t width_;
  std::string out_;
};

// ---------------------------------------------------------------------------
// Chain files
//
// {
//   "a": {"left_tail": 0.1, "window": {"-1": 0.0875}, "right_tail": 0.1},
//   "b": 0.7,                       (a bare number is a constant sequence)
//   "c": {...},
//   "d_plus": 0.05, "d_minus": 0.0125   (optional; both or neither)
// }

struct ChainSpec {
  BDChain base;
  std::optional<double> d_plus, d_minus;

  bool almost() const { return d_plus.has_value(); }
  AlmostBDChain as_almost() const { return {base, d_plus.value_or(0.0), d_minus.value_or(0.0)}; }
};

namespace detail {

inline double number(const nlohmann::json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

inline CoeffSeq parse_seq(const nlohmann::json& j, const std::string& name) {
  if (j.is_number()) return CoeffSeq::constant(j.get<double>());
  if (!j.is_object()) throw ConfigError("sequence '" + name + "' must be a number or an object");
  for (const auto& [key, _] : j.items())
    if (key != "left_tail" && key != "right_tail" && key != "window")
      throw ConfigError("unknown key '" + key + "' in sequence '" + name + "'");
  if (!j.contains("left_tail") || !j.contains("right_tail"))
    throw ConfigError("sequence '" + name + "' needs left_tail and right_tail");
  const double left = number(j["left_tail"], name + ".left_tail");
  const double right = number(j["right_tail"], name + ".right_tail");
  std::map<long, double> entries;
  if (j.contains("window")) {
    if (!j["window"].is_object()) throw ConfigError(name + ".window must be an object");
    for (const auto& [key, val] : j["window"].items()) {
      std::size_t used = 0;
      long idx = 0;
      try {
        idx = std::stol(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || key.empty()) throw ConfigError("window index '" + key + "' is not an integer");
      entries[idx] = number(val, name + ".window[" + key + "]");
    }
  }
  if (entries.empty()) return CoeffSeq(left, 0, {}, right);
  const long lo = entries.begin()->first;
  const long hi = entries.rbegin()->first;
  if (hi - lo + 1 != static_cast<long>(entries.size())) throw ConfigError(name + ".window is not contiguous");
  std::vector<double> w;
  for (const auto& [_, v] : entries) w.push_back(v);
  return CoeffSeq(left, lo, std::move(w), right);
}

}  // namespace detail

inline ChainSpec parse_chain(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("chain file must hold a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "a" && key != "b" && key != "c" && key != "d_plus" && key != "d_minus")
      throw ConfigError("unknown key '" + key + "' in chain file");
  for (const char* k : {"a", "b", "c"})
    if (!j.contains(k)) throw ConfigError(std::string("chain file lacks '") + k + "'");
  ChainSpec spec;
  spec.base.a = detail::parse_seq(j["a"], "a");
  spec.base.b = detail::parse_seq(j["b"], "b");
  spec.base.c = detail::parse_seq(j["c"], "c");
  if (j.contains("d_plus") != j.contains("d_minus")) throw ConfigError("give both d_plus and d_minus or neither");
  if (j.contains("d_plus")) {
    spec.d_plus = detail::number(j["d_plus"], "d_plus");
    spec.d_minus = detail::number(j["d_minus"], "d_minus");
  }
  return spec;
}

inline ChainSpec load_chain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open chain file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_chain(ss.str());
}

/// Chain file text for a chain (ordered keys, 17 significant digits).
inline Json chain_json(const BDChain& t, std::optional<std::pair<double, double>> d = std::nullopt) {
  auto seq = [](const CoeffSeq& s) {
    Json w = Json::object();
    for (long n = s.lo(); !s.empty() && n <= s.hi(); ++n) w.set(std::to_string(n), s(n));
    return Json::object().set("left_tail", s.left_tail()).set("window", std::move(w)).set("right_tail", s.right_tail());
  };
  Json out = Json::object().set("a", seq(t.a)).set("b", seq(t.b)).set("c", seq(t.c));
  if (d) out.set("d_plus", d->first).set("d_minus", d->second);
  return out;
}

}  // namespace bdz::io
