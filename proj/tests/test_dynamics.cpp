#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "axy/dynamics.hpp"
#include "axy/gates.hpp"
#include "oracles.hpp"

using namespace axy;

namespace {

PulseSchedule free_evolution(double t) {
  PulseSchedule s;
  s.total_duration = t;
  return s;
}

PulseSchedule reference_schedule(int n, double f, bool instantaneous = false) {
  const SpinRegister reg = reference_register();
  AxySequenceSpec spec = make_sequence(f, 1, Parity::even, resonant_period(reg, 0), n, kTwoPi * 20e6);
  spec.instantaneous = instantaneous;
  return build_schedule(spec);
}

SpinRegister bare_electron() {
  SpinRegister reg;
  reg.field = 0.06;
  return reg;
}

double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * ((a - b) + (a - b).adjoint()));
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Matrix ket_projector(Eigen::Index dim, Eigen::Index i) {
  Matrix p = Matrix::Zero(dim, dim);
  p(i, i) = 1.0;
  return p;
}

}  // namespace

TEST(Unitary, EmptyScheduleIsIdentity) {
  const SpinRegister reg = reference_register();
  const Matrix u = propagate_unitary(reg, PulseSchedule{}, ControlErrorModel{}).matrix();
  EXPECT_LT(max_abs(u - identity(8)), 1e-15);
}

// Without pulses each electron level rotates the nucleus about a fixed axis.
TEST(Unitary, FreeEvolutionMatchesBlockRotations) {
  SpinRegister reg = reference_register();
  reg.nuclei.resize(1);
  const NuclearFrame frame = derive_frame(reg, 0);
  const double t = 3.7e-6;
  const double detuning = kTwoPi * 250.0;
  const Vec3 bare = -reg.constants.gamma_c13 * reg.field * Vec3::UnitZ();
  const Vec3 ms_block = frame.to_frame() * (bare + static_cast<double>(reg.ms) * reg.nuclei[0].hyperfine);
  const Vec3 zero_block = frame.to_frame() * bare;

  Matrix expected = Matrix::Zero(4, 4);
  expected.topLeftCorner(2, 2) =
      std::exp(-kI * 0.5 * detuning * t) * oracle::rotation(ms_block.normalized(), ms_block.norm() * t);
  expected.bottomRightCorner(2, 2) =
      std::exp(kI * 0.5 * detuning * t) * oracle::rotation(zero_block.normalized(), zero_block.norm() * t);

  ControlErrorModel errors;
  errors.detuning = detuning;
  const Matrix u = propagate_unitary(reg, free_evolution(t), errors).matrix();
  EXPECT_LT(max_abs(u - expected), 1e-10);
}

TEST(Unitary, FinitePulseMatchesKickWithRabiError) {
  const SpinRegister reg = bare_electron();
  for (double r : {0.0, 0.01, -0.03}) {
    for (double phase : {0.0, kPi / 2, kPi / 6}) {
      PulseSchedule s;
      const double rabi = kTwoPi * 20e6;
      s.pulses.push_back(Pulse{0.0, kPi / rabi, phase, rabi, 0.5 * kPi / rabi});
      s.total_duration = kPi / rabi;
      ControlErrorModel errors;
      errors.rabi_error = r;
      const Matrix u = propagate_unitary(reg, s, errors).matrix();
      EXPECT_LT(max_abs(u - kick_unitary(phase, r, 0)), 1e-12);
    }
  }
  // an ideal kick is -i sigma_phi
  EXPECT_LT(max_abs(kick_unitary(0.0, 0.0, 0) + kI * pauli_x()), 1e-15);
}

TEST(Unitary, LongSequenceStaysUnitary) {
  const SpinRegister reg = reference_register();
  ControlErrorModel errors;
  errors.detuning = kTwoPi * 350.0;
  errors.rabi_error = 0.0025;
  const Matrix u = propagate_unitary(reg, reference_schedule(20, 0.6), errors).matrix();
  EXPECT_TRUE(is_unitary(u, 1e-9));
}

TEST(Unitary, ConcatenationComposes) {
  const SpinRegister reg = reference_register();
  ControlErrorModel errors;
  errors.detuning = kTwoPi * 100.0;
  const PulseSchedule a = reference_schedule(2, 0.4);
  const PulseSchedule b = reference_schedule(3, -0.7);
  const Matrix ua = propagate_unitary(reg, a, errors).matrix();
  const Matrix ub = propagate_unitary(reg, b, errors).matrix();
  const Matrix uab = propagate_unitary(reg, concatenate(a, b), errors).matrix();
  EXPECT_LT(max_abs(uab - ub * ua), 1e-9);
}

TEST(Unitary, RepetitionCacheAgreesWithFlatProduct) {
  const SpinRegister reg = reference_register();
  PulseSchedule s = reference_schedule(4, 0.8);
  const Matrix cached = propagate_unitary(reg, s, ControlErrorModel{}).matrix();
  s.repetition_period = 0.0;
  const Matrix flat = propagate_unitary(reg, s, ControlErrorModel{}).matrix();
  EXPECT_LT(max_abs(cached - flat), 1e-10);
}

TEST(Unitary, DeviationGrowsWithDetuning) {
  const SpinRegister reg = reference_register();
  const PulseSchedule s = reference_schedule(10, 0.5);
  const Matrix ideal = propagate_unitary(reg, s, ControlErrorModel{}).matrix();
  double previous = -1.0;
  for (double hz : {0.0, 100.0, 200.0, 400.0, 800.0}) {
    ControlErrorModel errors;
    errors.detuning = kTwoPi * hz;
    const double dev = (propagate_unitary(reg, s, errors).matrix() - ideal).norm();
    EXPECT_GT(dev, previous);
    previous = dev;
  }
}

TEST(Unitary, RejectsOversizedRegister) {
  SpinRegister reg = reference_register();
  PropagationOptions options;
  options.max_nuclei = 1;
  try {
    propagate_unitary(reg, free_evolution(1e-6), ControlErrorModel{}, options);
    FAIL() << "expected dimension error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension);
  }
}

TEST(Noise, OccupationMatchesExtendedPrecisionOracle) {
  const SpinRegister reg = reference_register();
  const double omega = reg.transition_frequency();
  for (double t : {4.0, 77.0, 300.0}) {
    EXPECT_NEAR(mean_occupation(omega, t) / oracle::bose_einstein(omega, t), 1.0, 1e-9);
  }
  EXPECT_EQ(mean_occupation(omega, 0.0), 0.0);
}

TEST(Noise, CalibrationFixesRelaxationTime) {
  const double omega = reference_register().transition_frequency();
  for (double t1 : {1e-3, 1.0, 6.0}) {
    const NoiseModel m = calibrate_noise(t1, 4.0, omega);
    EXPECT_NEAR(m.lambda * m.occupation * t1, 1.0, 1e-12);
    const NoiseModel slow = calibrate_noise(2.0 * t1, 4.0, omega);
    EXPECT_NEAR(slow.lambda / m.lambda, 0.5, 1e-12);
    EXPECT_NEAR(m.decay_rate() - m.excitation_rate(), m.lambda, 1e-12 * m.decay_rate());
  }
}

TEST(Noise, InfiniteT1IsCoherent) {
  const NoiseModel m = calibrate_noise(std::numeric_limits<double>::infinity(), 77.0, kTwoPi * 1e9);
  EXPECT_EQ(m.lambda, 0.0);
  EXPECT_FALSE(m.dissipative());
}

TEST(Noise, ZeroTemperatureIsUncalibratable) {
  try {
    calibrate_noise(1.0, 0.0, kTwoPi * 1e9);
    FAIL() << "expected uncalibratable";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::uncalibratable);
  }
  EXPECT_THROW(calibrate_noise(-1.0, 4.0, kTwoPi * 1e9), Error);
  EXPECT_THROW(calibrate_noise(1.0, -4.0, kTwoPi * 1e9), Error);
}

TEST(Lindblad, NoRelaxationMatchesUnitaryConjugation) {
  const SpinRegister reg = reference_register();
  ControlErrorModel errors;
  errors.rabi_error = 0.01;
  const PulseSchedule s = reference_schedule(1, 0.5);
  const Matrix u = propagate_unitary(reg, s, errors).matrix();
  const Matrix sup = lindblad_propagator(reg, s, errors, NoiseModel{}).matrix();
  EXPECT_LT(max_abs(sup - conjugation_superoperator(u)), 1e-9);
}

TEST(Lindblad, RelaxesToGibbsRatio) {
  const SpinRegister reg = bare_electron();
  for (double temperature : {4.0, 77.0}) {
    const NoiseModel noise = calibrate_noise(1e-3, temperature, reg.transition_frequency());
    const LindbladResult r =
        propagate_lindblad(reg, free_evolution(40e-3), ControlErrorModel{}, noise, ket_projector(2, 0));
    // index 0 is |ms>, index 1 is |0>
    const double ratio = r.rho.matrix()(0, 0).real() / r.rho.matrix()(1, 1).real();
    EXPECT_NEAR(ratio / oracle::gibbs_ratio(noise.occupation), 1.0, 1e-6);
  }
}

TEST(Lindblad, PreservesTraceAndHermiticity) {
  const SpinRegister reg = reference_register();
  oracle::Gen gen(31);
  const NoiseModel noise = calibrate_noise(1e-3, 77.0, reg.transition_frequency());
  const PulseSchedule s = reference_schedule(2, 0.3);
  const Matrix sup = lindblad_propagator(reg, s, ControlErrorModel{}, noise).matrix();
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rho = apply_superoperator(sup, gen.density(8));
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
    EXPECT_NEAR(rho.trace().imag(), 0.0, 1e-10);
    EXPECT_TRUE(is_hermitian(rho, 1e-10));
    EXPECT_GT(min_eigenvalue_hermitian(0.5 * (rho + rho.adjoint())), -1e-10);
  }
}

TEST(Lindblad, IsContractive) {
  const SpinRegister reg = reference_register();
  oracle::Gen gen(32);
  const NoiseModel noise = calibrate_noise(1e-4, 300.0, reg.transition_frequency());
  const Matrix sup = lindblad_propagator(reg, reference_schedule(2, 0.45), ControlErrorModel{}, noise).matrix();
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = gen.density(8);
    const Matrix b = gen.density(8);
    const double before = trace_distance(a, b);
    const double after = trace_distance(apply_superoperator(sup, a), apply_superoperator(sup, b));
    EXPECT_LE(after, before + 1e-10);
  }
}

TEST(Lindblad, RejectsBadInitialState) {
  const SpinRegister reg = reference_register();
  const PulseSchedule s = free_evolution(1e-6);
  try {
    propagate_lindblad(reg, s, ControlErrorModel{}, NoiseModel{}, identity(4) / 4.0);
    FAIL() << "expected dimension error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension);
  }
  EXPECT_THROW(propagate_lindblad(reg, s, ControlErrorModel{}, NoiseModel{}, identity(8)), Error);
}

TEST(GateFrame, FrameAndControlAreUnitary) {
  const SpinRegister reg = reference_register();
  const PulseSchedule s = reference_schedule(2, 0.5, true);
  const Matrix v = gate_frame(reg, s);
  EXPECT_TRUE(is_unitary(v, 1e-12));
  const Matrix uc = control_propagator(s);
  EXPECT_TRUE(is_unitary(uc, 1e-12));
  EXPECT_LT(max_abs(to_gate_frame(v, v) - identity(8)), 1e-12);
}

TEST(Trajectory, CsvHeaderAndRowCount) {
  const SpinRegister reg = bare_electron();
  PulseSchedule s;
  const double rabi = kTwoPi * 20e6;
  s.pulses.push_back(Pulse{1e-7, kPi / rabi, 0.0, rabi, 1e-7 + 0.5 * kPi / rabi});
  s.total_duration = 3e-7;
  std::ostringstream os;
  write_trajectory_csv(os, reg, s, ControlErrorModel{}, ket_projector(2, 0),
                       {{"sz", pauli_z()}, {"sx", pauli_x()}});
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t_s,sz,sx");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  // a pi pulse about x takes |ms> to |0>
  const std::string last = text.substr(text.rfind('\n', text.size() - 2) + 1);
  EXPECT_NEAR(std::stod(last.substr(last.find(',') + 1)), -1.0, 1e-9);
}
