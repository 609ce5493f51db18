#include "tpo/bt/blackboard.hpp"

#include <cstdio>

#include "tpo/bt/node.hpp"

namespace tpo::bt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const BbValue* Blackboard::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool Blackboard::truthy(const std::string& key) const {
  const BbValue* v = find(key);
  if (!v) return false;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  if (const auto* d = std::get_if<double>(v)) return *d != 0.0;
  if (const auto* s = std::get_if<std::string>(v)) return !s->empty();
  return true;
}

std::optional<Vec3> Blackboard::vec3(const std::string& key) const {
  const BbValue* v = find(key);
  if (const auto* p = v ? std::get_if<Vec3>(v) : nullptr) return *p;
  return std::nullopt;
}

std::optional<double> Blackboard::number(const std::string& key) const {
  const BbValue* v = find(key);
  if (const auto* p = v ? std::get_if<double>(v) : nullptr) return *p;
  return std::nullopt;
}

std::optional<std::string> Blackboard::text(const std::string& key) const {
  const BbValue* v = find(key);
  if (const auto* p = v ? std::get_if<std::string>(v) : nullptr) return *p;
  return std::nullopt;
}

void Blackboard::apply(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ParseError("blackboard assignment needs '=': " + assignment);
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw ParseError("blackboard assignment has an empty key: " + assignment);
  set(key, parse_bb_value(trim(assignment.substr(eq + 1))));
}

bool Blackboard::test(const std::string& predicate) const {
  const std::string p = trim(predicate);
  if (!p.empty() && p[0] == '!') return !truthy(trim(p.substr(1)));
  return truthy(p);
}

BbValue parse_bb_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    const auto v = parse_vector(text);
    if (v.size() == 1) return v[0];
    if (v.size() == 3) return Vec3(v[0], v[1], v[2]);
  } catch (const ParseError&) {
  }
  return text;
}

std::string format_bb_value(const BbValue& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  if (const auto* d = std::get_if<double>(&value)) return format_double(*d);
  if (const auto* v = std::get_if<Vec3>(&value))
    return format_double(v->x()) + ";" + format_double(v->y()) + ";" + format_double(v->z());
  return std::get<std::string>(value);
}

}  // namespace tpo::bt
