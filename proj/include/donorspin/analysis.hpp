#pragma once

// Fidelity metrics, closed-form oracles, parameter sweeps and the summary tables.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "donorspin/config.hpp"
#include "donorspin/gates.hpp"
#include "donorspin/metrics.hpp"
#include "donorspin/params.hpp"
#include "donorspin/propagator.hpp"

namespace donorspin {

/// Resonant-drive flip probability (mu_B B_ac / W)^2 sin^2(W t / hbar), W^2 = (mu_B B_ac)^2 + (hbar dw)^2.
inline double rabi_probability(double t, double delta_omega, double B_ac, const PhysicalConstants& c = {}) {
  if (!(t >= 0.0)) throw InvalidArgument("time must be non-negative");
  const double mu = c.mu_B() * B_ac;
  const double w = std::hypot(mu, c.hbar() * delta_omega);
  if (w == 0.0) return 0.0;
  const double s = std::sin(w * t / c.hbar());
  return (mu / w) * (mu / w) * s * s;
}

inline constexpr double kDefaultT2 = 60e-3;
inline constexpr double kLocalControlDrive = 1e-5;      // T
inline constexpr double kTableInteractionTime = 1e-11;  // s, exchange step used for table regeneration

struct TimescaleRow {
  std::string scheme;
  double T_X = 0.0;
  double T2_over_TX = 0.0;
  std::optional<double> T_CNOT;  ///< not derived for local control
  std::optional<double> T2_over_TCNOT;
};

inline std::vector<TimescaleRow> timescale_table(const DeviceParameters& p, double T2 = kDefaultT2) {
  std::vector<TimescaleRow> rows;
  const auto local = local_control_tradeoff(kLocalControlDrive, canonical_detuning(p), p.constants);
  rows.push_back({.scheme = "e-spin (local control)", .T_X = local.pi_time, .T2_over_TX = T2 / local.pi_time});

  const SpinSystem one = system_for(1, p);
  const SpinSystem two = system_for(2, p);
  const double tx = synth_x(pi, 0, one, p).duration();
  const double tc = synth_cnot(0, 1, two, p, CnotMode::exchange,
                               exchange_for_interaction_time(kTableInteractionTime, p), CorrectionMode::extended)
                        .duration();
  rows.push_back({.scheme = "e-spin (global control)", .T_X = tx, .T2_over_TX = T2 / tx, .T_CNOT = tc,
                  .T2_over_TCNOT = T2 / tc});
  return rows;
}

// ---------------------------------------------------------------------------
// Electron-nucleus helpers.

/// Copy of a schedule acting on the same donors with their nuclei included.
inline PulseSchedule with_nuclei(PulseSchedule s) {
  s.system.include_nuclei = true;
  s.system.validate();
  s.declared_target.reset();
  return s;
}

/// Block of U acting on the electrons with every nucleus up.
inline Matrix electron_block(const Matrix& u, const SpinSystem& sys) {
  if (!sys.include_nuclei) return u;
  const int n = sys.num_donors;
  const SpinSystem electrons{.num_donors = n};
  if (u.rows() != sys.dim()) throw DimensionMismatch("operator does not match the system");
  std::vector<Index> idx;
  for (Index e = 0; e < electrons.dim(); ++e) {
    Index full = 0;
    for (int q = 0; q < n; ++q) {
      const Index bit = (e >> (n - 1 - q)) & 1;
      full = (full << 2) | (bit << 1);  // nucleus bit 0 = up
    }
    idx.push_back(full);
  }
  Matrix out(electrons.dim(), electrons.dim());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = u(idx[i], idx[j]);
  return out;
}

/// Worst-case probability that any nucleus ends down, over electron basis starts with nuclei up.
inline double nuclear_flip_probability(const PulseSchedule& s, const ExecuteOptions& opt = {}) {
  if (!s.system.include_nuclei) throw InvalidArgument("schedule has no nuclei");
  const Matrix u = execute_schedule(s, opt).unitary;
  const SpinSystem& sys = s.system;
  auto any_nucleus_down = [&](Index state) {
    for (int q = 0; q < sys.num_donors; ++q)
      if ((state >> (sys.num_slots() - 1 - sys.nucleus_slot(q))) & 1) return true;
    return false;
  };
  double worst = 0.0;
  for (Index start = 0; start < sys.dim(); ++start) {
    if (any_nucleus_down(start)) continue;
    double flip = 0.0;
    for (Index end = 0; end < sys.dim(); ++end)
      if (any_nucleus_down(end)) flip += std::norm(u(end, start));
    worst = std::max(worst, flip);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepAxis {
  std::string name;  ///< a device parameter or "J"
  std::vector<double> values;
};

struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct SweepPoint {
  DeviceParameters device;
  std::optional<double> J;
};

inline const std::map<std::string, std::function<double(const SweepPoint&)>>& sweep_metrics() {
  static const std::map<std::string, std::function<double(const SweepPoint&)>> metrics = [] {
    std::map<std::string, std::function<double(const SweepPoint&)>> m;
    auto one = [](const SweepPoint& s) { return system_for(1, s.device); };
    auto two = [](const SweepPoint& s) { return system_for(2, s.device); };
    m["spectator_period"] = [](const SweepPoint& s) { return spectator_period(s.device); };
    m["max_detuning"] = [](const SweepPoint& s) { return max_detuning(s.device); };
    m["exchange_strength"] = [](const SweepPoint& s) { return s.J.value_or(exchange_strength(s.device.d, s.device)); };
    m["dipole_strength"] = [](const SweepPoint& s) { return dipole_strength(s.device.d, s.device.constants); };
    m["x_duration"] = [one](const SweepPoint& s) { return synth_x(pi, 0, one(s), s.device).duration(); };
    m["y_duration"] = [one](const SweepPoint& s) { return synth_y(pi, 0, one(s), s.device).duration(); };
    m["z_duration"] = [one](const SweepPoint& s) { return synth_z(pi, 0, one(s), s.device).duration(); };
    m["hadamard_duration"] = [one](const SweepPoint& s) { return synth_hadamard(0, one(s), s.device).duration(); };
    m["cnot_duration_exchange"] = [two](const SweepPoint& s) {
      return synth_cnot(0, 1, two(s), s.device, CnotMode::exchange, s.J).duration();
    };
    m["cnot_duration_dipole"] = [two](const SweepPoint& s) {
      return synth_cnot(0, 1, two(s), s.device, CnotMode::dipole, s.J).duration();
    };
    m["cnot_duration_combined"] = [two](const SweepPoint& s) {
      return synth_cnot(0, 1, two(s), s.device, CnotMode::combined, s.J).duration();
    };
    m["x_fidelity"] = [one](const SweepPoint& s) {
      return make_report(GateSpec::x(pi, 0), one(s), s.device).fidelity;
    };
    return m;
  }();
  return metrics;
}

/// Evaluates `metric` on the Cartesian product of the axes (last axis varies fastest).
/// Columns are the axis names followed by the metric.
inline SweepTable sweep(const std::vector<SweepAxis>& grid, const std::string& metric,
                        const DeviceParameters& base = {}, std::optional<double> J = std::nullopt) {
  const auto& metrics = sweep_metrics();
  const auto it = metrics.find(metric);
  if (it == metrics.end()) throw InvalidArgument("unknown metric '" + metric + "'");
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  SweepTable table;
  std::size_t count = 1;
  for (const auto& axis : grid) {
    if (axis.values.empty()) throw InvalidArgument("sweep axis '" + axis.name + "' has no values");
    if (axis.name != "J") get_device_parameter(base, axis.name);
    table.columns.push_back(axis.name);
    count *= axis.values.size();
  }
  table.columns.push_back(metric);
  for (std::size_t flat = 0; flat < count; ++flat) {
    SweepPoint point{base, J};
    std::vector<double> row(grid.size());
    std::size_t rest = flat;
    for (std::size_t a = grid.size(); a-- > 0;) {
      row[a] = grid[a].values[rest % grid[a].values.size()];
      rest /= grid[a].values.size();
    }
    for (std::size_t a = 0; a < grid.size(); ++a) {
      if (grid[a].name == "J")
        point.J = row[a];
      else
        set_device_parameter(point.device, grid[a].name, row[a]);
    }
    point.device.validate();
    row.push_back(it->second(point));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Reference tables: computed values next to reference values.

struct TableRow {
  std::string label;
  double computed = 0.0;
  std::optional<double> published;
  std::string unit;

  std::optional<double> relative_deviation() const {
    if (!published || *published == 0.0) return std::nullopt;
    return (computed - *published) / *published;
  }
};

struct ReferenceTable {
  std::string id;
  std::string title;
  std::vector<TableRow> rows;
};

namespace detail {
inline void add_steps(ReferenceTable& t, const PulseSchedule& s, const std::vector<double>& published) {
  const auto steps = grouped_steps(s);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    t.rows.push_back({.label = "step " + std::to_string(i + 1) + ": " + steps[i].first,
                      .computed = steps[i].second * 1e9,
                      .published = i < published.size() ? std::optional<double>(published[i]) : std::nullopt,
                      .unit = "ns"});
  }
}
}  // namespace detail

/// Builds table "I" .. "VI" with the reference value of each row.
inline ReferenceTable reference_table(const std::string& id, const DeviceParameters& p, double T2 = kDefaultT2) {
  const SpinSystem one = system_for(1, p);
  ReferenceTable t{.id = id};
  auto overall = [&](const PulseSchedule& s, double published) {
    t.rows.push_back({.label = "overall", .computed = s.duration() * 1e9, .published = published, .unit = "ns"});
  };
  if (id == "I") {
    t.title = "Gate times and coherence ratios, local vs global drive";
    const auto rows = timescale_table(p, T2);
    const auto& local = rows[0];
    const auto& global = rows[1];
    t.rows.push_back({"local T_X", local.T_X * 1e6, 2.0, "us"});
    t.rows.push_back({"local T2/T_X", local.T2_over_TX, 3e4, ""});
    t.rows.push_back({"global T_X", global.T_X * 1e9, 30.0, "ns"});
    t.rows.push_back({"global T2/T_X", global.T2_over_TX, 2e6, ""});
    t.rows.push_back({"global T_CNOT", *global.T_CNOT * 1e9, 148.0, "ns"});
    t.rows.push_back({"global T2/T_CNOT", *global.T2_over_TCNOT, 6e5, ""});
  } else if (id == "II") {
    t.title = "X(pi) schedule";
    const auto s = synth_x(pi, 0, one, p);
    detail::add_steps(t, s, {14.8, 14.8});
    overall(s, 29.7);
  } else if (id == "III") {
    t.title = "Y(pi) schedule";
    const auto s = synth_y(pi, 0, one, p);
    detail::add_steps(t, s, {50.7, 38.3});
    overall(s, 89.0);
  } else if (id == "IV") {
    t.title = "Hadamard schedule";
    const auto s = synth_hadamard(0, one, p);
    detail::add_steps(t, s, {10.5, 19.2});
    overall(s, 29.7);
  } else if (id == "V") {
    t.title = "Z(pi) schedule";
    const auto s = synth_z(pi, 0, one, p);
    detail::add_steps(t, s, {10.5, 14.8, 10.5, 23.5});
    overall(s, 59.4);
  } else if (id == "VI") {
    t.title = "Exchange CNOT schedule, extended correction";
    const auto s = synth_cnot(0, 1, system_for(2, p), p, CnotMode::exchange,
                              exchange_for_interaction_time(kTableInteractionTime, p), CorrectionMode::extended);
    detail::add_steps(t, s, {29.7, 0.01, 14.8, 0.01, 14.8, 7.4, 29.7, 51.9});
    overall(s, 148.4);
  } else {
    throw InvalidArgument("unknown table '" + id + "' (expected I..VI)");
  }
  return t;
}

}  // namespace donorspin
