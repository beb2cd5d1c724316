// Synthesizes the single-qubit gate set and an exchange CNOT on a two-donor register,
// prints each schedule's step timings and checks it against the ideal gate.

#include <iomanip>
#include <iostream>

#include "donorspin/donorspin.hpp"

int main() {
  using namespace donorspin;
  const DeviceParameters p;
  const SpinSystem sys = system_for(2, p);

  std::cout << "spectator period " << spectator_period(p) * 1e9 << " ns\n\n";
  const std::vector<GateSpec> gates{
      GateSpec::x(pi, 0), GateSpec::y(pi, 0), GateSpec::hadamard(0), GateSpec::z(pi, 1),
      GateSpec::cnot(0, 1, CnotMode::exchange, exchange_for_interaction_time(1e-11, p))};
  for (const auto& g : gates) {
    const GateReport r = make_report(g, sys, p);
    std::cout << to_string(g.kind) << "  (1 - F = " << std::scientific << std::setprecision(2)
              << 1.0 - r.fidelity << std::defaultfloat << ")\n";
    for (const auto& [name, t] : r.step_durations)
      std::cout << "  " << std::left << std::setw(26) << name << std::setprecision(4) << t * 1e9 << " ns\n";
    std::cout << "  " << std::left << std::setw(26) << "overall" << r.schedule.duration() * 1e9 << " ns\n\n";
  }
}
