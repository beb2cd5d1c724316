// donorspin: compile, simulate and verify globally controlled donor-spin gates.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "donorspin/donorspin.hpp"

namespace ds = donorspin;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kError = 2 };

struct Globals {
  std::string config;
  std::vector<std::string> overrides;
  std::string format = "text";
  std::uint64_t seed = 20050101;
  std::string out;
};

struct GateArgs {
  std::string gate = "x";
  double theta = ds::pi;
  std::vector<int> qubits;
  int control = 0;
  int target = -1;
  int donors = 0;
  std::string mode = "exchange";
  double J = 0.0;
  double J_ueV = 0.0;
  std::string correction = "minimal";
  double idle_ns = 0.0;
  bool no_conjugation = false;
};

ds::DeviceParameters resolve_device(const Globals& g) {
  ds::DeviceParameters p = g.config.empty() ? ds::DeviceParameters{} : ds::load_config(g.config);
  if (!g.overrides.empty()) {
    std::stringstream merged;
    for (const auto& line : ds::config_lines(p))
      if (line.rfind("A_min", 0) != 0 || !g.config.empty()) merged << line << '\n';
    for (const auto& kv : g.overrides) merged << kv << '\n';
    p = ds::parse_config(merged, "--set");
  }
  p.validate();
  return p;
}

std::vector<std::string> audit_lines(const ds::DeviceParameters& p, const Globals& g) {
  auto lines = ds::config_lines(p);
  lines.push_back("seed = " + std::to_string(g.seed));
  return lines;
}

ds::Json audit_json(const ds::DeviceParameters& p, const Globals& g) {
  ds::Json j = ds::device_to_json(p);
  j["seed"] = g.seed;
  return j;
}

ds::Json matrix_json(const ds::Matrix& m) {
  ds::Json re = ds::Json::array(), im = ds::Json::array();
  for (ds::Index r = 0; r < m.rows(); ++r) {
    ds::Json rr = ds::Json::array(), ri = ds::Json::array();
    for (ds::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

/// Writes to --out when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw ds::InvalidArgument("cannot write '" + g.out + "'");
  f << text;
}

std::string fmt(double v, int digits = 12) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

ds::GateSpec gate_spec(const GateArgs& a, const ds::DeviceParameters& p) {
  ds::GateSpec spec;
  spec.kind = ds::gate_kind_from_string(a.gate);
  spec.theta = a.theta;
  spec.mode = ds::cnot_mode_from_string(a.mode);
  spec.correction = ds::correction_mode_from_string(a.correction);
  spec.x_conjugation = !a.no_conjugation;
  spec.idle_duration = a.idle_ns * 1e-9;
  if (a.J > 0.0) spec.J = a.J;
  if (a.J_ueV > 0.0) spec.J = a.J_ueV * 1e-6 * p.constants.e_charge();
  const int target = a.target < 0 ? (spec.arity() == 2 ? 1 : 0) : a.target;
  if (!a.qubits.empty())
    spec.qubits = a.qubits;
  else if (spec.arity() == 2)
    spec.qubits = {a.control, target};
  else if (spec.arity() == 1)
    spec.qubits = {target};
  return spec;
}

int donor_count(const GateArgs& a, const ds::GateSpec& spec) {
  int n = std::max(1, a.donors);
  for (int q : spec.qubits) n = std::max(n, q + 1);
  return n;
}

// ---------------------------------------------------------------------------

struct GateRun {
  ds::GateReport report;
  ds::Matrix achieved_electron;
  double fidelity = 0.0;
  std::optional<double> nuclear_flip;
  ds::ExecuteOptions exec;
};

GateRun run_gate(const GateArgs& a, const ds::DeviceParameters& p, const std::string& frame, bool nuclei) {
  const ds::GateSpec spec = gate_spec(a, p);
  const ds::SpinSystem sys = ds::system_for(donor_count(a, spec), p);
  GateRun run{.report = ds::make_report(spec, sys, p)};
  if (spec.kind == ds::GateKind::swap) run.exec.drive_on = false;
  auto& r = run.report;
  if (frame == "lab") r.schedule = ds::with_frame(r.schedule, ds::Frame::lab);
  else if (frame != "rotating") throw ds::InvalidArgument("unknown frame '" + frame + "'");
  if (nuclei) {
    r.schedule = ds::with_nuclei(r.schedule);
    run.nuclear_flip = ds::nuclear_flip_probability(r.schedule, run.exec);
  }
  if (frame == "lab" || nuclei) {
    ds::Matrix u = ds::execute_schedule(r.schedule, run.exec).unitary;
    if (frame == "lab") u = ds::to_rotating_frame(u, r.schedule.duration(), r.schedule.system, p);
    r.achieved = u;
    run.achieved_electron = ds::electron_block(u, r.schedule.system);
    run.fidelity = ds::overlap_fidelity(r.ideal, run.achieved_electron);
  } else {
    run.achieved_electron = r.achieved;
    run.fidelity = r.fidelity;
  }
  return run;
}

int cmd_gate(const Globals& g, const GateArgs& a, const std::string& frame, bool nuclei, double threshold,
             const std::string& trace_path, const std::string& initial, int samples) {
  const auto p = resolve_device(g);
  const GateRun run = run_gate(a, p, frame, nuclei);
  const auto& r = run.report;

  if (!trace_path.empty()) {
    const auto& sys = r.schedule.system;
    std::string label = initial;
    if (label.empty())
      for (int s = 0; s < sys.num_slots(); ++s) label += (sys.include_nuclei && s % 2 == 1) ? 'u' : '0';
    const auto trace = ds::trace_evolution(r.schedule, ds::basis_state(sys, label), samples, run.exec);
    std::ofstream f(trace_path);
    if (!f) throw ds::InvalidArgument("cannot write '" + trace_path + "'");
    auto audit = audit_lines(p, g);
    audit.push_back("gate = " + std::string(ds::to_string(r.spec.kind)));
    audit.push_back("frame = " + frame);
    ds::write_trace_csv(f, trace, audit);
  }

  const bool ok = run.fidelity >= threshold;
  if (g.format == "json") {
    ds::Json j;
    j["config"] = audit_json(p, g);
    j["gate"] = {{"kind", std::string(ds::to_string(r.spec.kind))},
                 {"theta", r.spec.theta},
                 {"qubits", r.spec.qubits},
                 {"mode", std::string(ds::to_string(r.spec.mode))},
                 {"correction", std::string(ds::to_string(r.spec.correction))},
                 {"J", r.spec.J ? ds::Json(*r.spec.J) : ds::Json(nullptr)}};
    j["frame"] = frame;
    j["duration_ns"] = r.schedule.duration() * 1e9;
    j["spectator_periods"] = r.schedule.duration() / ds::spectator_period(p);
    ds::Json steps = ds::Json::array();
    for (const auto& [name, t] : r.step_durations) steps.push_back({{"step", name}, {"duration_ns", t * 1e9}});
    j["steps"] = steps;
    j["fidelity"] = run.fidelity;
    j["threshold"] = threshold;
    j["pass"] = ok;
    j["residual_rotation"] = r.residual_rotation;
    if (run.nuclear_flip) j["nuclear_flip_probability"] = *run.nuclear_flip;
    j["ideal"] = matrix_json(r.ideal);
    j["achieved"] = matrix_json(run.achieved_electron);
    j["schedule"] = ds::schedule_to_json(r.schedule);
    emit(g, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    for (const auto& line : audit_lines(p, g)) os << "# " << line << '\n';
    os << "gate " << ds::to_string(r.spec.kind) << " on";
    for (int q : r.spec.qubits) os << " q" << q;
    os << " (" << frame << " frame)\n";
    for (const auto& [name, t] : r.step_durations) os << "  " << std::left << std::setw(28) << name << fmt(t * 1e9, 6) << " ns\n";
    os << "  " << std::left << std::setw(28) << "overall" << fmt(r.schedule.duration() * 1e9, 6) << " ns ("
       << fmt(r.schedule.duration() / ds::spectator_period(p), 6) << " spectator periods)\n";
    os << "fidelity " << fmt(run.fidelity) << " (threshold " << fmt(threshold) << ") " << (ok ? "PASS" : "FAIL") << '\n';
    if (r.residual_rotation != 0.0) os << "residual global x rotation " << fmt(r.residual_rotation) << " rad\n";
    if (run.nuclear_flip) os << "nuclear flip probability " << fmt(*run.nuclear_flip) << '\n';
    emit(g, os.str());
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_table(const Globals& g, const std::string& id, double T2) {
  const auto p = resolve_device(g);
  const auto t = ds::reference_table(id, p, T2);
  std::ostringstream os;
  if (g.format == "json") {
    ds::Json j;
    j["config"] = audit_json(p, g);
    j["table"] = t.id;
    j["title"] = t.title;
    ds::Json rows = ds::Json::array();
    for (const auto& r : t.rows) {
      auto dev = r.relative_deviation();
      rows.push_back({{"label", r.label},
                      {"computed", r.computed},
                      {"published", r.published ? ds::Json(*r.published) : ds::Json(nullptr)},
                      {"relative_deviation", dev ? ds::Json(*dev) : ds::Json(nullptr)},
                      {"unit", r.unit}});
    }
    j["rows"] = rows;
    os << j.dump(2) << '\n';
  } else if (g.format == "csv") {
    for (const auto& line : audit_lines(p, g)) os << "# " << line << '\n';
    os << "label,computed,published,relative_deviation,unit\n";
    for (const auto& r : t.rows) {
      auto dev = r.relative_deviation();
      os << '"' << r.label << "\"," << fmt(r.computed) << ',' << (r.published ? fmt(*r.published) : "") << ','
         << (dev ? fmt(*dev) : "") << ',' << r.unit << '\n';
    }
  } else {
    for (const auto& line : audit_lines(p, g)) os << "# " << line << '\n';
    os << "Table " << t.id << ": " << t.title << '\n';
    os << std::left << std::setw(34) << "row" << std::right << std::setw(14) << "computed" << std::setw(12)
       << "published" << std::setw(12) << "deviation" << "  unit\n";
    for (const auto& r : t.rows) {
      auto dev = r.relative_deviation();
      std::ostringstream d;
      if (dev) d << std::showpos << std::fixed << std::setprecision(2) << *dev * 100.0 << '%';
      os << std::left << std::setw(34) << r.label << std::right << std::setw(14) << fmt(r.computed, 6)
         << std::setw(12) << (r.published ? fmt(*r.published, 6) : "-") << std::setw(12) << d.str() << "  "
         << r.unit << '\n';
    }
  }
  emit(g, os.str());
  return kOk;
}

/// name=start:stop:count (linear) or name=v1,v2,...
ds::SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ds::InvalidArgument("sweep axis must look like name=values: '" + text + "'");
  ds::SweepAxis axis{.name = text.substr(0, eq)};
  const std::string spec = text.substr(eq + 1);
  auto number = [&](const std::string& s) { return ds::detail::parse_double(ds::detail::trim(s), "--param " + axis.name); };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ds::InvalidArgument("range must be start:stop:count");
    const double a = number(parts[0]), b = number(parts[1]);
    const int n = static_cast<int>(number(parts[2]));
    if (n < 1) throw ds::InvalidArgument("range count must be positive");
    for (int i = 0; i < n; ++i) axis.values.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  } else {
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ',');) axis.values.push_back(number(part));
  }
  return axis;
}

int cmd_sweep(const Globals& g, const std::vector<std::string>& axes, const std::string& metric, double J) {
  const auto p = resolve_device(g);
  std::vector<ds::SweepAxis> grid;
  for (const auto& a : axes) grid.push_back(parse_axis(a));
  const auto table = ds::sweep(grid, metric, p, J > 0.0 ? std::optional<double>(J) : std::nullopt);
  std::ostringstream os;
  if (g.format == "json") {
    ds::Json j;
    j["config"] = audit_json(p, g);
    j["columns"] = table.columns;
    j["rows"] = table.rows;
    os << j.dump(2) << '\n';
  } else {
    for (const auto& line : audit_lines(p, g)) os << "# " << line << '\n';
    const char sep = g.format == "csv" ? ',' : '\t';
    for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? std::string(1, sep) : "") << table.columns[i];
    os << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? std::string(1, sep) : "") << fmt(row[i]);
      os << '\n';
    }
  }
  emit(g, os.str());
  return kOk;
}

int cmd_schedule_dump(const Globals& g, const GateArgs& a) {
  const auto p = resolve_device(g);
  const ds::GateSpec spec = gate_spec(a, p);
  const auto s = ds::synthesize(spec, ds::system_for(donor_count(a, spec), p), p);
  emit(g, ds::schedule_to_json(s).dump(2) + "\n");
  return kOk;
}

int cmd_schedule_load(const Globals& g, const std::string& path, double threshold, bool drive_off) {
  std::ifstream f(path);
  if (!f) throw ds::InvalidArgument("cannot open schedule file '" + path + "'");
  ds::Json j;
  try {
    j = ds::Json::parse(f);
  } catch (const ds::Json::exception& e) {
    throw ds::InvalidArgument(std::string("malformed schedule file: ") + e.what());
  }
  const auto s = ds::schedule_from_json(j);
  ds::ExecuteOptions opt;
  opt.drive_on = !drive_off;
  ds::Matrix u = ds::execute_schedule(s, opt).unitary;
  if (s.frame() == ds::Frame::lab) u = ds::to_rotating_frame(u, s.duration(), s.system, s.device);
  std::optional<double> fidelity;
  if (s.declared_target) fidelity = ds::gate_fidelity(*s.declared_target, u);
  const bool ok = !fidelity || *fidelity >= threshold;
  std::ostringstream os;
  if (g.format == "json") {
    ds::Json out;
    out["config"] = audit_json(s.device, g);
    out["segments"] = s.segments.size();
    out["duration_ns"] = s.duration() * 1e9;
    out["fidelity"] = fidelity ? ds::Json(*fidelity) : ds::Json(nullptr);
    out["pass"] = ok;
    out["achieved"] = matrix_json(u);
    os << out.dump(2) << '\n';
  } else {
    for (const auto& line : audit_lines(s.device, g)) os << "# " << line << '\n';
    os << "segments " << s.segments.size() << ", duration " << fmt(s.duration() * 1e9, 6) << " ns\n";
    if (fidelity) os << "fidelity " << fmt(*fidelity) << ' ' << (ok ? "PASS" : "FAIL") << '\n';
    else os << "no declared target\n";
  }
  emit(g, os.str());
  return ok ? kOk : kCheckFailed;
}

int cmd_validate(const Globals& g, int samples) {
  const auto p = resolve_device(g);
  const auto results = ds::run_validation(p, {.seed = g.seed, .samples = samples});
  int failures = 0;
  std::ostringstream os;
  if (g.format == "json") {
    ds::Json j;
    j["config"] = audit_json(p, g);
    ds::Json checks = ds::Json::array();
    for (const auto& r : results) {
      failures += r.status == ds::CheckStatus::fail;
      checks.push_back({{"module", r.module}, {"check", r.name}, {"status", std::string(ds::to_string(r.status))},
                        {"detail", r.detail}});
    }
    j["checks"] = checks;
    j["failures"] = failures;
    os << j.dump(2) << '\n';
  } else {
    for (const auto& line : audit_lines(p, g)) os << "# " << line << '\n';
    for (const auto& r : results) {
      failures += r.status == ds::CheckStatus::fail;
      os << ds::to_string(r.status) << "  " << std::left << std::setw(11) << r.module << std::setw(52) << r.name
         << r.detail << '\n';
    }
    os << results.size() << " checks, " << failures << " failed\n";
  }
  emit(g, os.str());
  return failures == 0 ? kOk : kCheckFailed;
}

void add_gate_options(CLI::App* cmd, GateArgs& a) {
  cmd->add_option("--gate", a.gate, "x, y, z, hadamard, cnot, swap or idle")->capture_default_str();
  cmd->add_option("--theta", a.theta, "rotation angle in rad")->capture_default_str();
  cmd->add_option("--qubits", a.qubits, "explicit qubit list (cnot: control target)");
  cmd->add_option("--control", a.control, "CNOT control qubit")->capture_default_str();
  cmd->add_option("--target", a.target, "target qubit");
  cmd->add_option("--donors", a.donors, "register size (default: smallest that fits)");
  cmd->add_option("--mode", a.mode, "CNOT coupling: exchange, dipole or combined")->capture_default_str();
  cmd->add_option("--J", a.J, "exchange energy in J (default: Herring-Flicker J(d))");
  cmd->add_option("--J-ueV", a.J_ueV, "exchange energy in ueV");
  cmd->add_option("--correction", a.correction, "closing correction: minimal or extended")->capture_default_str();
  cmd->add_option("--idle-ns", a.idle_ns, "idle duration in ns");
  cmd->add_flag("--no-conjugation", a.no_conjugation, "CNOT: replace the X steps by idles");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse compiler and simulator for globally controlled donor electron spins"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "device configuration file (key = value)");
  app.add_option("--set", g.overrides, "override a device parameter, e.g. --set B_ac=5e-3");
  app.add_option("--format", g.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}))->capture_default_str();
  app.add_option("--seed", g.seed, "seed for sampled checks")->capture_default_str();
  app.add_option("--out", g.out, "output file (default stdout)");

  GateArgs gate_args;
  std::string frame = "rotating";
  bool nuclei = false;
  double threshold = 1.0 - 1e-4;
  std::string trace_path, initial;
  int samples = 1000;
  auto* gate = app.add_subcommand("gate", "synthesize, simulate and report one gate");
  add_gate_options(gate, gate_args);
  gate->add_option("--frame", frame, "rotating or lab")->capture_default_str();
  gate->add_flag("--nuclei", nuclei, "simulate with the donor nuclei included");
  gate->add_option("--threshold", threshold, "minimum fidelity for exit code 0")->capture_default_str();
  gate->add_option("--trace", trace_path, "write a population trace (CSV)");
  gate->add_option("--initial", initial, "initial basis state label for the trace");
  gate->add_option("--samples", samples, "trace samples")->capture_default_str();

  std::string table_id;
  double T2 = ds::kDefaultT2;
  auto* table = app.add_subcommand("table", "regenerate a summary table (I..VI)");
  table->add_option("id", table_id, "table id")->required();
  table->add_option("--T2", T2, "coherence time in s")->capture_default_str();

  std::vector<std::string> axes;
  std::string metric;
  double sweep_J = 0.0;
  auto* sweep = app.add_subcommand("sweep", "evaluate a metric over a parameter grid");
  sweep->add_option("--param", axes, "axis: name=start:stop:count or name=v1,v2,...")->required();
  sweep->add_option("--metric", metric, "metric name")->required();
  sweep->add_option("--J", sweep_J, "fixed exchange energy in J");

  auto* schedule = app.add_subcommand("schedule", "export or run schedule files");
  schedule->require_subcommand(1);
  GateArgs dump_args;
  auto* dump = schedule->add_subcommand("dump", "write a synthesized schedule as JSON");
  add_gate_options(dump, dump_args);
  std::string load_path;
  bool drive_off = false;
  auto* load = schedule->add_subcommand("load", "execute a schedule file");
  load->add_option("file", load_path, "schedule JSON")->required();
  load->add_option("--threshold", threshold, "minimum fidelity for exit code 0")->capture_default_str();
  load->add_flag("--drive-off", drive_off, "execute with the RF drive switched off");

  int validate_samples = 20;
  auto* validate = app.add_subcommand("validate", "run the property suite");
  validate->add_option("--samples", validate_samples, "random samples per sampled check")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gate) return cmd_gate(g, gate_args, frame, nuclei, threshold, trace_path, initial, samples);
    if (*table) return cmd_table(g, table_id, T2);
    if (*sweep) return cmd_sweep(g, axes, metric, sweep_J);
    if (*dump) return cmd_schedule_dump(g, dump_args);
    if (*load) return cmd_schedule_load(g, load_path, threshold, drive_off);
    if (*validate) return cmd_validate(g, validate_samples);
  } catch (const ds::InfeasibleControl& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
