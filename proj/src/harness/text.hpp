#pragma once

// Tokenised line reader shared by the scenario and live config formats.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tod/core/error.hpp"
#include "tod/core/types.hpp"

namespace tod::harness::detail {

struct LineParser {
  std::vector<std::string> tok;
  int lineno = 0;
  std::string origin;

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::Parse, origin + " line " + std::to_string(lineno) + ": " + why);
  }
  const std::string& at(std::size_t i) const {
    if (i >= tok.size()) fail("'" + tok[0] + "' is missing a value");
    return tok[i];
  }
  double number(std::size_t i) const {
    const std::string& s = at(i);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail("'" + s + "' is not a number");
    }
  }
  std::uint64_t unsigned_int(std::size_t i) const {
    const std::string& s = at(i);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used != s.size() || s[0] == '-') throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail("'" + s + "' is not a non-negative integer");
    }
  }
  bool flag(std::size_t i) const {
    const std::string& s = at(i);
    if (s == "0" || s == "false") return false;
    if (s == "1" || s == "true") return true;
    fail("'" + s + "' is not 0 or 1");
  }
  void arity(std::size_t n) const {
    if (tok.size() != n) fail("'" + tok[0] + "' takes " + std::to_string(n - 1) + " values");
  }
  // key value pairs from index `from`
  void options(std::size_t from, const std::map<std::string, std::function<void(std::size_t)>>& handlers) const {
    if ((tok.size() - from) % 2 != 0) fail("options of '" + tok[0] + "' must come in key/value pairs");
    for (std::size_t i = from; i < tok.size(); i += 2) {
      auto h = handlers.find(tok[i]);
      if (h == handlers.end()) fail("unknown option '" + tok[i] + "' for '" + tok[0] + "'");
      h->second(i + 1);
    }
  }
};

inline double* vehicle_field(VehicleParams& p, const std::string& name) {
  static const std::map<std::string, double VehicleParams::*> fields = {
      {"wheelbase", &VehicleParams::wheelbase},         {"track_width", &VehicleParams::track_width},
      {"steering_ratio", &VehicleParams::steering_ratio}, {"max_swa", &VehicleParams::max_swa},
      {"max_speed", &VehicleParams::max_speed},         {"max_decel", &VehicleParams::max_decel},
      {"steer_delay", &VehicleParams::steer_delay},     {"velocity_tau", &VehicleParams::velocity_tau},
      {"command_timeout", &VehicleParams::command_timeout}};
  auto it = fields.find(name);
  return it == fields.end() ? nullptr : &(p.*(it->second));
}

/// Splits one line into tokens after stripping a `#` comment.
inline std::vector<std::string> tokenize(std::string line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  std::vector<std::string> tok;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) tok.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tok.push_back(std::move(cur));
  return tok;
}

}  // namespace tod::harness::detail
