#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "donorspin/gates.hpp"
#include "donorspin/metrics.hpp"
#include "donorspin/propagator.hpp"
#include "oracles.hpp"

namespace ds = donorspin;
using ds::Matrix;

namespace {

const ds::DeviceParameters kDevice{};

ds::PulseSchedule single(double duration, double A, ds::Frame frame = ds::Frame::rotating) {
  return {.segments = {{.duration = duration, .hyperfine = {A}, .frame = frame}}, .device = kDevice,
          .system = ds::SpinSystem{}};
}

double unitarity_defect(const Matrix& u) { return ds::max_abs(u.adjoint() * u - ds::identity(u.rows())); }

}  // namespace

TEST(PropagateConstant, ZeroHamiltonianIsIdentity) {
  EXPECT_EQ(ds::max_abs(ds::propagate_constant(Matrix::Zero(4, 4), 1e-6) - ds::identity(4)), 0.0);
}

TEST(PropagateConstant, ResonantPiPulseIsX) {
  const double mu = ds::drive_energy(kDevice);
  const Matrix u = ds::propagate_constant(mu * ds::electron_spin(ds::Pauli::x), oracle::pi * oracle::hbar / (2 * mu));
  EXPECT_GE(oracle::overlap(oracle::sx(), u), 1.0 - 1e-12);
  EXPECT_LT(ds::max_abs(u - oracle::pauli_rotation(1, 0, 0, oracle::pi)), 1e-12);
}

TEST(PropagateConstant, AgreesWithTaylorExponential) {
  std::mt19937_64 rng(5);
  for (int dim : {2, 4, 8, 16}) {
    const Matrix h = oracle::random_hermitian(dim, 1e-26, rng);
    const double t = 30e-9;
    const Matrix u = ds::propagate_constant(h, t);
    EXPECT_LT(ds::max_abs(u - oracle::evolve(h, t)), 1e-11) << "dim " << dim;
    EXPECT_LE(unitarity_defect(u), 1e-12);
  }
}

TEST(PropagateConstant, ClosedFormPauliExponentials) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0), angle(0.0, 4 * oracle::pi);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector3d n(u(rng), u(rng), u(rng));
    n.normalize();
    const double th = angle(rng);
    const Matrix h = 0.5 * oracle::hbar * (n[0] * oracle::sx() + n[1] * oracle::sy() + n[2] * oracle::sz());
    EXPECT_LT(ds::max_abs(ds::propagate_constant(h, th) - oracle::pauli_rotation(n[0], n[1], n[2], th)), 1e-12);
  }
}

TEST(PropagateConstant, RejectsBadInput) {
  Matrix h = oracle::sx();
  h(0, 1) = 2.0;
  EXPECT_THROW(ds::propagate_constant(h, 1.0), ds::InvalidArgument);
  EXPECT_THROW(ds::propagate_constant(oracle::sx(), -1.0), ds::InvalidArgument);
  EXPECT_THROW(ds::propagate_constant(Matrix::Zero(2, 3), 1.0), ds::DimensionMismatch);
}

TEST(PropagateConstant, RabiSolution) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> t_dist(0.0, 200e-9), f_dist(-1.0, 0.0), b_dist(1e-4, 1.2e-3);
  for (int trial = 0; trial < 100; ++trial) {
    ds::DeviceParameters p;
    p.B_ac = b_dist(rng);
    const double dw = f_dist(rng) * ds::max_detuning(p);
    const double t = t_dist(rng);
    const Matrix u = ds::propagate_constant(ds::single_electron_rotating(dw, p), t);
    EXPECT_NEAR(std::norm(u(1, 0)), oracle::rabi(t, dw, p.B_ac), 1e-10);
  }
}

TEST(ExecuteSchedule, EmptyScheduleIsIdentity) {
  const ds::PulseSchedule s{.system = ds::SpinSystem{.num_donors = 3}};
  const auto e = ds::execute_schedule(s);
  EXPECT_EQ(e.duration, 0.0);
  EXPECT_EQ(ds::max_abs(e.unitary - ds::identity(8)), 0.0);
}

TEST(ExecuteSchedule, XGateTableImplementsTheRotation) {
  const ds::SpinSystem two{.num_donors = 2};
  const auto s = ds::synth_x(ds::pi, 0, two, kDevice);
  const Matrix u = ds::execute_schedule(s).unitary;
  const Matrix ideal = ds::kron(oracle::pauli_rotation(1, 0, 0, oracle::pi), ds::identity(2));
  EXPECT_GE(oracle::overlap(ideal, u), 1.0 - 1e-6);
  EXPECT_LE(unitarity_defect(u), 1e-12);
}

TEST(ExecuteSchedule, LabFrameAgreesWithRotatingFrame) {
  for (const auto& spec : {ds::GateSpec::x(ds::pi, 0), ds::GateSpec::hadamard(0), ds::GateSpec::y(ds::pi / 2, 0)}) {
    const auto s = ds::synthesize(spec, ds::SpinSystem{}, kDevice);
    const Matrix rot = ds::execute_schedule(s).unitary;
    const Matrix lab = ds::execute_schedule(ds::with_frame(s, ds::Frame::lab)).unitary;
    const Matrix mapped = ds::to_rotating_frame(lab, s.duration(), s.system, kDevice);
    EXPECT_GE(ds::gate_fidelity(rot, mapped), 1.0 - 1e-6) << ds::to_string(spec.kind);
    // the frame map keeps the phase too
    EXPECT_LT(ds::max_abs(rot - mapped), 1e-6) << ds::to_string(spec.kind);
  }
}

TEST(ExecuteSchedule, LabFrameAtRandomPoints) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> t_dist(0.5e-9, 40e-9), a_dist(kDevice.A_min, kDevice.A0);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = t_dist(rng), A = a_dist(rng);
    const auto lab = ds::execute_schedule(single(t, A, ds::Frame::lab)).unitary;
    const Matrix exact = oracle::evolve(ds::single_electron_rotating(ds::detuning(A, kDevice), kDevice), t);
    EXPECT_GE(ds::gate_fidelity(ds::to_rotating_frame(lab, t, ds::SpinSystem{}, kDevice), exact), 1.0 - 1e-8);
  }
}

TEST(ExecuteSchedule, RandomMultiSegmentSchedulesAreFrameEquivalent) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> t_dist(1e-9, 15e-9), a_dist(kDevice.A_min, kDevice.A0);
  std::uniform_int_distribution<int> count(1, 3);
  for (int trial = 0; trial < 5; ++trial) {
    ds::PulseSchedule s{.device = kDevice, .system = ds::SpinSystem{.num_donors = 2}};
    const int n = count(rng);
    for (int k = 0; k < n; ++k)
      s.segments.push_back({.duration = t_dist(rng), .hyperfine = {a_dist(rng), a_dist(rng)},
                            .exchange = {{0, 1, 2e-27}}});
    const Matrix rot = ds::execute_schedule(s).unitary;
    const Matrix lab = ds::execute_schedule(ds::with_frame(s, ds::Frame::lab)).unitary;
    EXPECT_GE(ds::gate_fidelity(rot, ds::to_rotating_frame(lab, s.duration(), s.system, kDevice)), 1.0 - 1e-6);
  }
}

TEST(ExecuteSchedule, GlobalClockRunsAcrossSegments) {
  // One lab segment split in two must give the same propagator as the whole.
  const double A = 0.8 * kDevice.A0;
  const auto whole = ds::execute_schedule(single(20e-9, A, ds::Frame::lab)).unitary;
  auto split = single(7e-9, A, ds::Frame::lab);
  split.segments.push_back(split.segments[0]);
  split.segments[1].duration = 13e-9;
  EXPECT_LT(ds::max_abs(ds::execute_schedule(split).unitary - whole), 1e-8);
}

TEST(ExecuteSchedule, CompositionMatchesProduct) {
  const ds::SpinSystem two{.num_donors = 2};
  const auto a = ds::synth_hadamard(0, two, kDevice);
  const auto b = ds::synth_x(ds::pi / 3, 1, two, kDevice);
  const Matrix joint = ds::execute_schedule(a.then(b)).unitary;
  EXPECT_LT(ds::max_abs(joint - ds::execute_schedule(b).unitary * ds::execute_schedule(a).unitary), 1e-15);
  EXPECT_LT(ds::max_abs(*a.then(b).declared_target - *b.declared_target * *a.declared_target), 1e-15);
  EXPECT_THROW(a.then(ds::synth_hadamard(0, ds::SpinSystem{}, kDevice)), ds::DimensionMismatch);
}

TEST(ExecuteSchedule, TotalDurationIsTheSegmentSum) {
  const auto s = ds::synth_cnot(0, 1, ds::SpinSystem{.num_donors = 2}, kDevice);
  double sum = 0.0;
  for (const auto& seg : s.segments) sum += seg.duration;
  EXPECT_EQ(s.duration(), sum);
  EXPECT_EQ(ds::execute_schedule(s).duration, sum);
}

TEST(ExecuteSchedule, RejectsInvalidSchedules) {
  auto mixed = single(1e-9, kDevice.A0);
  mixed.segments.push_back({.duration = 1e-9, .hyperfine = {kDevice.A0}, .frame = ds::Frame::lab});
  EXPECT_THROW(ds::execute_schedule(mixed), ds::InvalidArgument);
  EXPECT_THROW(ds::execute_schedule(single(1e-9, 0.3 * kDevice.A0)), ds::InvalidArgument);
  EXPECT_THROW(ds::execute_schedule(single(-1e-9, kDevice.A0)), ds::InvalidArgument);
  auto wrong = single(1e-9, kDevice.A0);
  wrong.segments[0].hyperfine.push_back(kDevice.A0);
  EXPECT_THROW(ds::execute_schedule(wrong), ds::DimensionMismatch);
  ds::PulseSchedule pair{.segments = {{.duration = 1e-9, .hyperfine = {kDevice.A0, kDevice.A0}, .exchange = {{0, 0, 1e-27}}}},
                         .system = ds::SpinSystem{.num_donors = 2}};
  EXPECT_THROW(ds::execute_schedule(pair), ds::InvalidArgument);
  pair.segments[0].exchange = {{0, 1, -1e-27}};
  EXPECT_THROW(ds::execute_schedule(pair), ds::InvalidArgument);
}

TEST(ExecuteSchedule, EveryPropagatorIsUnitary) {
  const ds::SpinSystem three{.num_donors = 3};
  for (const auto& spec : {ds::GateSpec::x(ds::pi, 1), ds::GateSpec::y(ds::pi, 2), ds::GateSpec::z(1.0, 0),
                           ds::GateSpec::cnot(0, 2)}) {
    const auto s = ds::synthesize(spec, three, kDevice);
    EXPECT_LE(unitarity_defect(ds::execute_schedule(s).unitary), 1e-12);
  }
  const auto lab = ds::execute_schedule(single(29e-9, 0.6 * kDevice.A0, ds::Frame::lab)).unitary;
  EXPECT_LE(unitarity_defect(lab), 1e-12);
}

TEST(LabIntegrator, SecondOrderOnTheRabiProblem) {
  const auto s = single(20e-9, 0.75 * kDevice.A0, ds::Frame::lab);
  const Matrix exact = ds::from_rotating_frame(
      oracle::evolve(ds::single_electron_rotating(ds::detuning(0.75 * kDevice.A0, kDevice), kDevice), 20e-9),
      20e-9, s.system, kDevice);
  const ds::detail::LabSegment lab(s, s.segments[0], {});
  const double coarse = ds::max_abs(lab.propagate(0.0, 20e-9, 100) - exact);
  const double fine = ds::max_abs(lab.propagate(0.0, 20e-9, 1000) - exact);
  EXPECT_GE(std::log10(coarse / fine), 2.0);
}

TEST(LabIntegrator, AsPrintedDriveIsCounterRotating) {
  // The as-printed phase convention rotates the other way; it does not resonate with the carrier.
  const auto s = single(ds::spectator_period(kDevice) / 2, kDevice.A0, ds::Frame::lab);
  ds::ExecuteOptions printed;
  printed.drive.convention = ds::DriveConvention::as_printed;
  const Matrix co = ds::execute_schedule(s).unitary;
  const Matrix ctr = ds::execute_schedule(s, printed).unitary;
  EXPECT_GT(std::norm(co(1, 0)), 1.0 - 1e-6);
  EXPECT_LT(std::norm(ctr(1, 0)), 1e-4);
}

TEST(Trace, XGateFlipsTheTarget) {
  const auto s = ds::synth_x(ds::pi, 0, ds::SpinSystem{}, kDevice);
  const auto trace = ds::trace_evolution(s, ds::basis_state(s.system, "0"));
  ASSERT_EQ(trace.times.size(), 1000u);
  EXPECT_EQ(trace.initial_state, "0");
  EXPECT_GE(trace.populations.back()[1], 1.0 - 1e-6);
  EXPECT_DOUBLE_EQ(trace.times.back(), s.duration());
  for (std::size_t k = 1; k < trace.times.size(); ++k) EXPECT_GT(trace.times[k], trace.times[k - 1]);
  for (const auto& row : trace.populations) {
    double sum = 0.0;
    for (double v : row) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Trace, LastRowMatchesExecution) {
  const auto s = ds::synth_cnot(0, 1, ds::SpinSystem{.num_donors = 2}, kDevice);
  const ds::Vector psi = ds::basis_state(s.system, "10");
  const auto trace = ds::trace_evolution(s, psi, 64);
  const ds::Vector out = ds::execute_schedule(s).unitary * psi;
  for (ds::Index i = 0; i < out.size(); ++i) EXPECT_EQ(trace.populations.back()[i], std::norm(out[i]));
  EXPECT_GE(trace.populations.back()[3], 1.0 - 1e-4);
}

TEST(Trace, LabFrameTraceAgreesWithRotating) {
  const auto s = ds::synth_hadamard(0, ds::SpinSystem{}, kDevice);
  const auto rot = ds::trace_evolution(s, ds::basis_state(s.system, "0"), 50);
  const auto lab = ds::trace_evolution(ds::with_frame(s, ds::Frame::lab), ds::basis_state(s.system, "0"), 50);
  for (std::size_t k = 0; k < rot.times.size(); ++k)
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(rot.populations[k][i], lab.populations[k][i], 1e-6);
}

TEST(Trace, ZeroDurationGivesOnePoint) {
  const auto s = ds::synth_x(0.0, 0, ds::SpinSystem{}, kDevice);
  const auto trace = ds::trace_evolution(s, ds::basis_state(s.system, "0"));
  ASSERT_EQ(trace.times.size(), 1u);
  EXPECT_EQ(trace.populations[0][0], 1.0);
}

TEST(Trace, RejectsBadInput) {
  const auto s = ds::synth_x(ds::pi, 0, ds::SpinSystem{}, kDevice);
  EXPECT_THROW(ds::trace_evolution(s, ds::basis_state(s.system, "0"), 1), ds::InvalidArgument);
  EXPECT_THROW(ds::trace_evolution(s, 2.0 * ds::basis_state(s.system, "0")), ds::InvalidArgument);
  EXPECT_THROW(ds::trace_evolution(s, ds::basis_state(ds::SpinSystem{.num_donors = 2}, "00")), ds::DimensionMismatch);
  EXPECT_THROW(ds::basis_state(s.system, "2"), ds::InvalidArgument);
}

TEST(Trace, CsvLayout) {
  const auto s = ds::synth_x(ds::pi, 0, ds::SpinSystem{.num_donors = 2}, kDevice);
  const auto trace = ds::trace_evolution(s, ds::basis_state(s.system, "00"), 3);
  std::ostringstream os;
  ds::write_trace_csv(os, trace, {"B = 2"});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# B = 2");
  std::getline(in, line);
  EXPECT_EQ(line, "time_ns,pop_00,pop_01,pop_10,pop_11");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 6), "0,1,0,");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, line.find(',')), "14.885358765");
  int rows = 2;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Frame, Names) {
  EXPECT_EQ(ds::frame_from_string("lab"), ds::Frame::lab);
  EXPECT_EQ(ds::frame_from_string(ds::to_string(ds::Frame::rotating)), ds::Frame::rotating);
  EXPECT_THROW(ds::frame_from_string("inertial"), ds::InvalidArgument);
}
