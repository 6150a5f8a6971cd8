#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "axy/hamiltonian.hpp"
#include "axy/register.hpp"
#include "oracles.hpp"

using namespace axy;

namespace {

constexpr double kKhz = kTwoPi * 1e3;

SpinRegister random_register(oracle::Gen& gen, std::size_t n) {
  SpinRegister reg;
  reg.field = gen.uniform(0.02, 0.2);
  reg.ms = gen.integer(0, 1) ? 1 : -1;
  for (std::size_t j = 0; j < n; ++j) {
    NuclearSpin s;
    s.label = "C" + std::to_string(j);
    s.gyromagnetic_ratio = reg.constants.gamma_c13;
    s.hyperfine = Vec3(gen.uniform(-80, 80), gen.uniform(-80, 80), gen.uniform(-150, 150)) * kKhz;
    reg.nuclei.push_back(s);
  }
  return reg;
}

Eigen::Matrix3d rotation_about_z(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace

TEST(Constants, DefaultsHaveExpectedSigns) {
  PhysicalConstants c;
  EXPECT_LT(c.gamma_e, 0.0);
  EXPECT_GT(c.gamma_c13, 0.0);
  EXPECT_GT(c.zero_field_splitting, 0.0);
  EXPECT_DOUBLE_EQ(c.dD_dT, -kTwoPi * 74.2e3);
  EXPECT_NO_THROW(c.validate());
}

TEST(Constants, RejectsWrongSigns) {
  PhysicalConstants c;
  c.gamma_e = -c.gamma_e;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Register, DimensionCountsElectronAndNuclei) {
  const SpinRegister reg = reference_register();
  EXPECT_EQ(reg.n_qubits(), 3u);
  EXPECT_EQ(reg.dimension(), 8);
}

TEST(Register, ValidationRejectsBadFieldAndManifold) {
  SpinRegister reg = reference_register();
  reg.field = 0.0;
  EXPECT_THROW(reg.validate(), Error);
  reg = reference_register();
  reg.ms = 0;
  EXPECT_THROW(reg.validate(), Error);
  reg = reference_register();
  reg.couplings.push_back({0, 0, 1.0});
  EXPECT_THROW(reg.validate(), Error);
}

TEST(DeriveFrames, ReferenceNucleusMatchesVectorArithmetic) {
  const SpinRegister reg = reference_register();
  const auto frames = derive_frames(reg);
  ASSERT_EQ(frames.size(), 2u);
  // omega = gamma B z + A / 2 for ms = -1
  const double gb = reg.constants.gamma_c13 * reg.field;
  const Vec3 expected(0.5 * 45.8 * kKhz, 0.0, gb + 0.5 * 93.5 * kKhz);
  EXPECT_NEAR(frames[0].omega, expected.norm(), 1e-9 * expected.norm());
  EXPECT_NEAR(frames[0].omega / kKhz, 689.6, 0.1);
  EXPECT_NEAR(expected.x() / kKhz, 22.9, 1e-12);
}

TEST(DeriveFrames, CouplingComponentsDecomposeHyperfine) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const SpinRegister reg = random_register(gen, 3);
    const auto frames = derive_frames(reg);
    for (std::size_t j = 0; j < frames.size(); ++j) {
      const Vec3& a = reg.nuclei[j].hyperfine;
      const Vec3 rebuilt = frames[j].g * frames[j].x_axis + frames[j].c * frames[j].z_axis;
      EXPECT_LT((rebuilt - a).norm(), 1e-9 * a.norm());
      EXPECT_GE(frames[j].g, 0.0);
      const Vec3 perp = a - a.dot(frames[j].z_axis) * frames[j].z_axis;
      EXPECT_NEAR(frames[j].g, perp.norm(), 1e-9 * a.norm());
    }
  }
}

TEST(DeriveFrames, AxesAreOrthonormalAndRightHanded) {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 300; ++trial) {
    const SpinRegister reg = random_register(gen, 2);
    for (const auto& f : derive_frames(reg)) {
      EXPECT_NEAR(f.x_axis.dot(f.y_axis), 0.0, 1e-12);
      EXPECT_NEAR(f.x_axis.dot(f.z_axis), 0.0, 1e-12);
      EXPECT_NEAR(f.y_axis.dot(f.z_axis), 0.0, 1e-12);
      EXPECT_NEAR(f.x_axis.norm(), 1.0, 1e-12);
      EXPECT_NEAR(f.y_axis.norm(), 1.0, 1e-12);
      EXPECT_LT((f.x_axis.cross(f.y_axis) - f.z_axis).norm(), 1e-12);
    }
  }
}

TEST(DeriveFrames, ZeroHyperfineIsUnaddressable) {
  SpinRegister reg;
  reg.field = kTwoPi * 642e3 / reg.constants.gamma_c13;
  reg.nuclei.push_back(NuclearSpin::from_components(0.0, 0.0, reg.constants.gamma_c13, "bare"));
  try {
    derive_frames(reg);
    FAIL() << "expected unaddressable spin";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unaddressable_spin);
  }
  // the precession itself is still well defined
  const Vec3 omega = reg.constants.gamma_c13 * reg.field * Vec3::UnitZ();
  EXPECT_NEAR(omega.norm(), kTwoPi * 642e3, 1e-6);
}

TEST(DeriveFrames, ParallelHyperfineIsUnaddressable) {
  SpinRegister reg = reference_register();
  reg.nuclei[0].hyperfine = Vec3(0.0, 0.0, 80.0 * kKhz);
  try {
    derive_frames(reg);
    FAIL() << "expected unaddressable spin";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unaddressable_spin);
  }
}

TEST(DeriveFrames, InvariantUnderRotationAboutNvAxis) {
  oracle::Gen gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    SpinRegister reg = random_register(gen, 2);
    const auto base = derive_frames(reg);
    const Eigen::Matrix3d r = rotation_about_z(gen.uniform(0.0, kTwoPi));
    for (auto& n : reg.nuclei) n.hyperfine = r * n.hyperfine;
    const auto rotated = derive_frames(reg);
    for (std::size_t j = 0; j < base.size(); ++j) {
      EXPECT_NEAR(rotated[j].omega, base[j].omega, 1e-9 * base[j].omega);
      EXPECT_NEAR(rotated[j].g, base[j].g, 1e-9 * base[j].omega);
      EXPECT_NEAR(rotated[j].c, base[j].c, 1e-9 * base[j].omega);
      EXPECT_LT((rotated[j].x_axis - r * base[j].x_axis).norm(), 1e-9);
    }
  }
}

TEST(DeriveFrames, WeakCouplingApproachesBareLarmor) {
  SpinRegister reg = reference_register();
  const double larmor = reg.constants.gamma_c13 * reg.field;
  double previous = std::numeric_limits<double>::infinity();
  for (double scale : {1e-1, 1e-2, 1e-3, 1e-4}) {
    reg.nuclei[0].hyperfine = scale * Vec3(45.8, 0.0, 93.5) * kKhz;
    const double err = std::abs(derive_frame(reg, 0).omega - larmor) / larmor;
    const double ratio = reg.nuclei[0].hyperfine.norm() / larmor;
    EXPECT_LT(err, ratio);
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(Hamiltonian, EmptyRegisterIsDiagonal) {
  SpinRegister reg;
  reg.field = 0.06;
  const Matrix h = build_hamiltonian(reg, HamiltonianFrame::lab_secular);
  ASSERT_EQ(h.rows(), 2);
  EXPECT_EQ(h(0, 1), cplx(0.0));
  EXPECT_EQ(h(1, 0), cplx(0.0));
  EXPECT_NEAR(h(0, 0).real(), reg.transition_frequency(), 1e-6);
  EXPECT_NEAR(h(1, 1).real(), 0.0, 1e-12);
}

TEST(Hamiltonian, AlwaysHermitian) {
  oracle::Gen gen(14);
  for (int trial = 0; trial < 50; ++trial) {
    SpinRegister reg = random_register(gen, static_cast<std::size_t>(gen.integer(1, 3)));
    if (reg.n_nuclei() >= 2) reg.couplings.push_back({0, 1, gen.uniform(-1e3, 1e3)});
    for (auto frame : {HamiltonianFrame::lab_secular, HamiltonianFrame::drive_rotating}) {
      const Matrix h = build_hamiltonian(reg, frame, gen.uniform(-1e4, 1e4));
      EXPECT_LT(max_abs(h - h.adjoint()), 1e-12 * std::max(1.0, max_abs(h)));
    }
  }
}

TEST(Hamiltonian, SpectrumMatchesLabBasisDiagonalization) {
  const SpinRegister reg = reference_register();
  const std::size_t n = 3;
  // independent construction in the lab basis
  Matrix h = Matrix::Zero(8, 8);
  const Matrix proj = 0.5 * (oracle::pauli_on('Z', 0, n) + Matrix::Identity(8, 8));
  h += reg.transition_frequency() * proj;
  for (std::size_t j = 0; j < 2; ++j) {
    const Vec3& a = reg.nuclei[j].hyperfine;
    const Matrix ix = 0.5 * oracle::pauli_on('X', j + 1, n);
    const Matrix iy = 0.5 * oracle::pauli_on('Y', j + 1, n);
    const Matrix iz = 0.5 * oracle::pauli_on('Z', j + 1, n);
    h -= reg.constants.gamma_c13 * reg.field * iz;
    h += reg.ms * proj * (a.x() * ix + a.y() * iy + a.z() * iz);
  }
  Eigen::ComplexEigenSolver<Matrix> ces(h);
  std::vector<double> expected;
  for (Eigen::Index i = 0; i < 8; ++i) expected.push_back(ces.eigenvalues()(i).real());
  std::sort(expected.begin(), expected.end());

  Eigen::SelfAdjointEigenSolver<Matrix> ses(build_hamiltonian(reg, HamiltonianFrame::lab_secular));
  for (Eigen::Index i = 0; i < 8; ++i) {
    const double e = expected[static_cast<std::size_t>(i)];
    EXPECT_NEAR(ses.eigenvalues()(i), e, 1e-9 * std::max(std::abs(e), 1.0) + 1e-3);
  }
}

TEST(Hamiltonian, RejectsOversizedRegister) {
  oracle::Gen gen(15);
  const SpinRegister reg = random_register(gen, 4);
  try {
    build_hamiltonian(reg, HamiltonianFrame::drive_rotating, 0.0, 3);
    FAIL() << "expected dimension error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension);
  }
}

TEST(Hamiltonian, TemperatureDriftHelper) {
  const PhysicalConstants c;
  EXPECT_NEAR(detuning_from_temperature_drift(c, 5e-3), -kTwoPi * 371.0, 1e-9);
}
