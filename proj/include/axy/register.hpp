#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "axy/error.hpp"
#include "axy/linalg.hpp"

namespace axy {

// ---------------------------------------------------------------------------
// Physical constants. Frequencies are angular (rad/s), fields in Tesla.
// ---------------------------------------------------------------------------

struct PhysicalConstants {
  double gamma_e = -kTwoPi * 28.024e9;          // rad/s/T
  double gamma_c13 = kTwoPi * 10.7084e6;        // rad/s/T
  double zero_field_splitting = kTwoPi * 2.87e9;  // rad/s
  double hbar = 1.054571817e-34;                // J s
  double k_B = 1.380649e-23;                    // J/K
  double mu_0 = 1.25663706212e-6;               // T m/A
  double dD_dT = -kTwoPi * 74.2e3;              // rad/s/K

  void validate() const {
    if (!(gamma_e < 0.0)) throw Error(ErrorKind::invalid_argument, "gamma_e must be negative");
    if (!(gamma_c13 > 0.0)) throw Error(ErrorKind::invalid_argument, "gamma_c13 must be positive");
    if (!(zero_field_splitting > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "zero-field splitting must be positive");
    }
  }
};

inline constexpr double kGaussToTesla = 1e-4;

/// Converts a temperature drift of the sample into the microwave detuning it
/// produces through the temperature slope of the zero-field splitting.
inline double detuning_from_temperature_drift(const PhysicalConstants& c, double kelvin) {
  return c.dD_dT * kelvin;
}

struct NuclearSpin {
  Vec3 hyperfine = Vec3::Zero();  // rad/s
  double gyromagnetic_ratio = 0.0;  // rad/s/T
  std::string label;

  /// Hyperfine vector (A_perp, 0, A_par); the azimuth is unobservable for a single NV axis.
  static NuclearSpin from_components(double a_perp, double a_par, double gamma, std::string label) {
    return NuclearSpin{Vec3(a_perp, 0.0, a_par), gamma, std::move(label)};
  }
};

/// Secular like-spin coupling b (3 Iz Iz - I.I) between two nuclei.
struct InternuclearCoupling {
  std::size_t first = 0;
  std::size_t second = 0;
  double strength = 0.0;  // rad/s
};

struct SpinRegister {
  PhysicalConstants constants;
  double field = 0.0;  // Tesla, along the NV axis
  int ms = -1;
  std::vector<NuclearSpin> nuclei;
  std::vector<InternuclearCoupling> couplings;

  std::size_t n_nuclei() const noexcept { return nuclei.size(); }
  std::size_t n_qubits() const noexcept { return 1 + nuclei.size(); }
  Eigen::Index dimension() const noexcept { return Eigen::Index{1} << n_qubits(); }

  /// Electron transition frequency |0> <-> |ms>.
  double transition_frequency() const {
    return std::abs(constants.zero_field_splitting - constants.gamma_e * field * ms);
  }

  void validate() const {
    constants.validate();
    if (!(field > 0.0) || !std::isfinite(field)) {
      throw Error(ErrorKind::invalid_argument, "magnetic field must be positive");
    }
    if (ms != 1 && ms != -1) throw Error(ErrorKind::invalid_argument, "ms must be +1 or -1");
    for (const auto& n : nuclei) {
      if (!n.hyperfine.allFinite() || !std::isfinite(n.gyromagnetic_ratio)) {
        throw Error(ErrorKind::invalid_argument, "non-finite nuclear parameters for " + n.label);
      }
    }
    for (const auto& c : couplings) {
      if (c.first >= nuclei.size() || c.second >= nuclei.size() || c.first == c.second) {
        throw Error(ErrorKind::invalid_argument, "internuclear coupling references invalid pair");
      }
    }
  }
};

/// Two 13C spins at 600 G with the hyperfine couplings used throughout the
/// examples and the acceptance suite.
inline SpinRegister reference_register(double field_tesla = 600.0 * kGaussToTesla) {
  SpinRegister reg;
  reg.field = field_tesla;
  reg.ms = -1;
  const double khz = kTwoPi * 1e3;
  reg.nuclei.push_back(
      NuclearSpin::from_components(45.8 * khz, 93.5 * khz, reg.constants.gamma_c13, "C1"));
  reg.nuclei.push_back(
      NuclearSpin::from_components(35.3 * khz, 49.5 * khz, reg.constants.gamma_c13, "C2"));
  return reg;
}

// ---------------------------------------------------------------------------
// Per-nucleus frames
// ---------------------------------------------------------------------------

struct NuclearFrame {
  Vec3 omega_vec = Vec3::Zero();
  double omega = 0.0;
  Vec3 x_axis = Vec3::UnitX();
  Vec3 y_axis = Vec3::UnitY();
  Vec3 z_axis = Vec3::UnitZ();
  double g = 0.0;  // hyperfine component orthogonal to z_axis
  double c = 0.0;  // hyperfine component along z_axis

  /// Rows are the frame axes; maps lab components to frame components.
  Eigen::Matrix3d to_frame() const {
    Eigen::Matrix3d r;
    r.row(0) = x_axis.transpose();
    r.row(1) = y_axis.transpose();
    r.row(2) = z_axis.transpose();
    return r;
  }
};

inline constexpr double kUnaddressableTolerance = 1e-10;

inline NuclearFrame derive_frame(const SpinRegister& reg, std::size_t j) {
  const NuclearSpin& spin = reg.nuclei.at(j);
  NuclearFrame f;
  f.omega_vec = spin.gyromagnetic_ratio * reg.field * Vec3::UnitZ() -
                0.5 * static_cast<double>(reg.ms) * spin.hyperfine;
  f.omega = f.omega_vec.norm();
  if (!(f.omega > 0.0)) {
    throw Error(ErrorKind::unaddressable_spin, spin.label + " has vanishing precession vector");
  }
  f.z_axis = f.omega_vec / f.omega;
  f.c = spin.hyperfine.dot(f.z_axis);
  const Vec3 x_vec = spin.hyperfine - f.c * f.z_axis;
  f.g = x_vec.norm();
  if (f.g <= kUnaddressableTolerance * std::max(f.omega, spin.hyperfine.norm())) {
    throw Error(ErrorKind::unaddressable_spin,
                spin.label + " has no hyperfine component orthogonal to its precession axis");
  }
  f.x_axis = x_vec / f.g;
  f.y_axis = f.z_axis.cross(spin.hyperfine) / f.g;
  return f;
}

inline std::vector<NuclearFrame> derive_frames(const SpinRegister& reg) {
  reg.validate();
  std::vector<NuclearFrame> frames;
  frames.reserve(reg.nuclei.size());
  for (std::size_t j = 0; j < reg.nuclei.size(); ++j) frames.push_back(derive_frame(reg, j));
  return frames;
}

}  // namespace axy
