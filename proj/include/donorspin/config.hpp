#pragma once

// Flat `key = value` device configuration files (SI units, `#` comments).

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "donorspin/params.hpp"

namespace donorspin {

inline const std::vector<std::string>& device_parameter_names() {
  static const std::vector<std::string> names{"B", "B_ac", "A0", "A_min", "d", "a_star", "eps_r"};
  return names;
}

/// Sets a numeric device parameter by name.
inline void set_device_parameter(DeviceParameters& p, std::string_view name, double value) {
  if (name == "B") p.B = value;
  else if (name == "B_ac") p.B_ac = value;
  else if (name == "A0") p.A0 = value;
  else if (name == "A_min") p.A_min = value;
  else if (name == "d") p.d = value;
  else if (name == "a_star") p.a_star = value;
  else if (name == "eps_r") p.eps_r = value;
  else throw InvalidArgument("unknown device parameter '" + std::string(name) + "'");
}

inline double get_device_parameter(const DeviceParameters& p, std::string_view name) {
  if (name == "B") return p.B;
  if (name == "B_ac") return p.B_ac;
  if (name == "A0") return p.A0;
  if (name == "A_min") return p.A_min;
  if (name == "d") return p.d;
  if (name == "a_star") return p.a_star;
  if (name == "eps_r") return p.eps_r;
  throw InvalidArgument("unknown device parameter '" + std::string(name) + "'");
}

namespace detail {
inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidArgument(where + ": '" + text + "' is not a number");
  return v;
}
}  // namespace detail

/// Parses a configuration; unspecified keys keep their defaults. When A0 is given
/// without A_min, A_min follows as A0 / 2.
inline DeviceParameters parse_config(std::istream& in, const std::string& source = "config") {
  DeviceParameters p;
  bool saw_a_min = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::string body = detail::trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key == "alignment") {
      p.alignment = axis_from_string(value);
      continue;
    }
    try {
      set_device_parameter(p, key, detail::parse_double(value, where));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + ": " + e.what());
    }
    if (key == "A_min") saw_a_min = true;
  }
  if (!saw_a_min) p.A_min = 0.5 * p.A0;
  p.validate();
  return p;
}

inline DeviceParameters load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

/// Resolved parameters as `key = value` lines (round-trips through parse_config).
inline std::vector<std::string> config_lines(const DeviceParameters& p) {
  std::vector<std::string> out;
  for (const auto& name : device_parameter_names()) {
    // shortest representation that reads back to the same double
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, get_device_parameter(p, name)).ptr;
    out.push_back(name + " = " + std::string(buf, end));
  }
  out.push_back("alignment = " + std::string(to_string(p.alignment)));
  return out;
}

}  // namespace donorspin
