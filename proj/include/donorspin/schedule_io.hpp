#pragma once

// JSON schedule files. Durations in ns, hyperfine controls in units of A0,
// exchange energies in ueV. Keys are written in a fixed order.

#include <string>

#include <json.hpp>

#include "donorspin/config.hpp"
#include "donorspin/propagator.hpp"

namespace donorspin {

using Json = nlohmann::ordered_json;

namespace detail {
inline double microvolt_energy(const DeviceParameters& p) { return 1e-6 * p.constants.e_charge(); }
}  // namespace detail

inline Json device_to_json(const DeviceParameters& p) {
  Json j;
  for (const auto& name : device_parameter_names()) j[name] = get_device_parameter(p, name);
  j["alignment"] = std::string(to_string(p.alignment));
  return j;
}

inline DeviceParameters device_from_json(const Json& j) {
  DeviceParameters p;
  bool saw_a_min = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "alignment") {
      p.alignment = axis_from_string(value.get<std::string>());
      continue;
    }
    set_device_parameter(p, key, value.get<double>());
    saw_a_min = saw_a_min || key == "A_min";
  }
  if (!saw_a_min) p.A_min = 0.5 * p.A0;
  p.validate();
  return p;
}

inline Json schedule_to_json(const PulseSchedule& s) {
  Json j;
  j["device"] = device_to_json(s.device);
  j["system"] = {{"num_donors", s.system.num_donors},
                 {"include_nuclei", s.system.include_nuclei},
                 {"dipole", s.system.dipole},
                 {"alignment", std::string(to_string(s.system.alignment))}};
  j["duration_ns"] = s.duration() * 1e9;
  Json segs = Json::array();
  for (const auto& seg : s.segments) {
    Json js;
    js["label"] = seg.label;
    js["frame"] = std::string(to_string(seg.frame));
    js["duration_ns"] = seg.duration * 1e9;
    Json a = Json::array();
    for (double A : seg.hyperfine) a.push_back(A / s.device.A0);
    js["A"] = a;
    Json x = Json::array();
    for (const auto& e : seg.exchange)
      x.push_back({{"pair", {e.first, e.second}}, {"J_ueV", e.J / detail::microvolt_energy(s.device)}});
    js["exchange"] = x;
    segs.push_back(js);
  }
  j["segments"] = segs;
  if (s.declared_target) {
    Json re = Json::array(), im = Json::array();
    for (Index r = 0; r < s.declared_target->rows(); ++r) {
      Json rr = Json::array(), ri = Json::array();
      for (Index c = 0; c < s.declared_target->cols(); ++c) {
        rr.push_back((*s.declared_target)(r, c).real());
        ri.push_back((*s.declared_target)(r, c).imag());
      }
      re.push_back(rr);
      im.push_back(ri);
    }
    j["target"] = {{"re", re}, {"im", im}};
  } else {
    j["target"] = nullptr;
  }
  return j;
}

inline PulseSchedule schedule_from_json(const Json& j) {
  try {
    PulseSchedule s;
    s.device = device_from_json(j.at("device"));
    const Json& sys = j.at("system");
    s.system.num_donors = sys.at("num_donors").get<int>();
    s.system.include_nuclei = sys.value("include_nuclei", false);
    s.system.dipole = sys.value("dipole", false);
    s.system.alignment = axis_from_string(sys.value("alignment", std::string("z")));
    s.system.validate();
    for (const Json& js : j.at("segments")) {
      PulseSegment seg;
      seg.label = js.value("label", std::string());
      seg.frame = frame_from_string(js.value("frame", std::string("rotating")));
      seg.duration = js.at("duration_ns").get<double>() * 1e-9;
      for (const Json& a : js.at("A")) seg.hyperfine.push_back(a.get<double>() * s.device.A0);
      if (js.contains("exchange")) {
        for (const Json& x : js.at("exchange")) {
          const Json& pair = x.at("pair");
          seg.exchange.push_back({pair.at(0).get<int>(), pair.at(1).get<int>(),
                                  x.at("J_ueV").get<double>() * detail::microvolt_energy(s.device)});
        }
      }
      s.segments.push_back(std::move(seg));
    }
    if (j.contains("target") && !j.at("target").is_null()) {
      const Json& re = j.at("target").at("re");
      const Json& im = j.at("target").at("im");
      const Index n = static_cast<Index>(re.size());
      Matrix t(n, n);
      for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) t(r, c) = Complex(re.at(r).at(c).get<double>(), im.at(r).at(c).get<double>());
      s.declared_target = t;
    }
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed schedule file: ") + e.what());
  }
}

}  // namespace donorspin
