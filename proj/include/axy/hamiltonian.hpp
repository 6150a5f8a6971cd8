#pragma once

#include <cstddef>
#include <vector>

#include "axy/linalg.hpp"
#include "axy/register.hpp"

namespace axy {

// Working basis: qubit 0 is the electron with |0> = |ms>, |1> = |ms = 0>, so
// sigma_z = |ms><ms| - |0><0|. Nucleus j is qubit j + 1, expressed in its own
// frame {x_j, y_j, z_j}; |0> is the +1/2 eigenstate of z_j . I_j.

inline constexpr std::size_t kDefaultMaxNuclei = 6;

enum class HamiltonianFrame {
  lab_secular,     // includes the electron transition energy
  drive_rotating,  // electron in the frame of a resonant drive, plus detuning
};

/// Spin operator of nucleus j along a lab-frame direction, in the working basis.
inline Matrix nuclear_operator(const std::vector<NuclearFrame>& frames, std::size_t j,
                               const Vec3& lab_vector) {
  const std::size_t n = frames.size() + 1;
  const Vec3 comp = frames.at(j).to_frame() * lab_vector;
  const Matrix local = 0.5 * (comp(0) * pauli_x() + comp(1) * pauli_y() + comp(2) * pauli_z());
  return embed(local, j + 1, n);
}

/// Spin operator of nucleus j along one of its own frame axes (0 = x, 1 = y, 2 = z).
inline Matrix frame_operator(std::size_t n_nuclei, std::size_t j, int axis) {
  const Matrix local = axis == 0 ? pauli_x() : axis == 1 ? pauli_y() : pauli_z();
  return embed(0.5 * local, j + 1, n_nuclei + 1);
}

inline Matrix electron_operator(const Matrix& op, std::size_t n_nuclei) {
  return embed(op, 0, n_nuclei + 1);
}

/// -sum_j omega_vec_j . I_j: the electron-averaged nuclear precession.
inline Matrix nuclear_free_hamiltonian(const std::vector<NuclearFrame>& frames) {
  const std::size_t n = frames.size();
  Matrix h = Matrix::Zero(Eigen::Index{1} << (n + 1), Eigen::Index{1} << (n + 1));
  for (std::size_t j = 0; j < n; ++j) h -= frames[j].omega * frame_operator(n, j, 2);
  return h;
}

inline Matrix internuclear_hamiltonian(const SpinRegister& reg,
                                       const std::vector<NuclearFrame>& frames) {
  const Eigen::Index dim = reg.dimension();
  Matrix h = Matrix::Zero(dim, dim);
  for (const auto& c : reg.couplings) {
    Matrix dot = Matrix::Zero(dim, dim);
    for (int a = 0; a < 3; ++a) {
      const Vec3 e = Vec3::Unit(a);
      dot += nuclear_operator(frames, c.first, e) * nuclear_operator(frames, c.second, e);
    }
    const Matrix zz = nuclear_operator(frames, c.first, Vec3::UnitZ()) *
                      nuclear_operator(frames, c.second, Vec3::UnitZ());
    h += c.strength * (3.0 * zz - dot);
  }
  return h;
}

/// Secular system Hamiltonian with the electron reduced to the {0, ms} doublet.
/// `detuning` only enters the drive-rotating frame.
inline Matrix build_hamiltonian(const SpinRegister& reg, HamiltonianFrame frame,
                                double detuning = 0.0,
                                std::size_t max_nuclei = kDefaultMaxNuclei) {
  if (reg.n_nuclei() > max_nuclei) {
    throw Error(ErrorKind::dimension, "register has " + std::to_string(reg.n_nuclei()) +
                                          " nuclei, limit is " + std::to_string(max_nuclei));
  }
  const auto frames = derive_frames(reg);
  const std::size_t n = reg.n_nuclei();
  const Eigen::Index dim = reg.dimension();
  const Matrix sz = electron_operator(pauli_z(), n);
  const Matrix ms_projector = 0.5 * (sz + identity(dim));

  Matrix h = Matrix::Zero(dim, dim);
  if (frame == HamiltonianFrame::lab_secular) {
    h += reg.transition_frequency() * ms_projector;
  } else {
    h += 0.5 * detuning * sz;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const NuclearSpin& spin = reg.nuclei[j];
    h -= spin.gyromagnetic_ratio * reg.field * nuclear_operator(frames, j, Vec3::UnitZ());
    h += static_cast<double>(reg.ms) * ms_projector * nuclear_operator(frames, j, spin.hyperfine);
  }
  h += internuclear_hamiltonian(reg, frames);
  return h;
}

/// Coefficients of the hyperfine coupling in the interaction picture of the
/// electron control and the free nuclear precession.
struct InteractionHamiltonian {
  std::vector<NuclearFrame> frames;
  int ms = -1;

  /// (ms/2) F sigma_z sum_j [g_j m_j(t) . I_j + c_j I_j^z] with m_j(t) = cos x_j + sin y_j.
  Matrix at(double t, double modulation) const {
    const std::size_t n = frames.size();
    const Eigen::Index dim = Eigen::Index{1} << (n + 1);
    Matrix coupling = Matrix::Zero(dim, dim);
    for (std::size_t j = 0; j < n; ++j) {
      const NuclearFrame& f = frames[j];
      const double phase = f.omega * t;
      coupling += f.g * (std::cos(phase) * frame_operator(n, j, 0) +
                         std::sin(phase) * frame_operator(n, j, 1)) +
                  f.c * frame_operator(n, j, 2);
    }
    return 0.5 * static_cast<double>(ms) * modulation * electron_operator(pauli_z(), n) * coupling;
  }
};

inline InteractionHamiltonian interaction_hamiltonian(const SpinRegister& reg) {
  return InteractionHamiltonian{derive_frames(reg), reg.ms};
}

}  // namespace axy
