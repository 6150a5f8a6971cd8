#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "axy/error.hpp"
#include "axy/hamiltonian.hpp"
#include "axy/linalg.hpp"
#include "axy/pulses.hpp"
#include "axy/register.hpp"

namespace axy {

// ---------------------------------------------------------------------------
// Control errors and electron relaxation
// ---------------------------------------------------------------------------

struct ControlErrorModel {
  double detuning = 0.0;    // Delta_MW, rad/s
  double rabi_error = 0.0;  // R_rfe, drive amplitude scales by (1 + R_rfe)

  void validate() const {
    if (!std::isfinite(detuning) || !std::isfinite(rabi_error)) {
      throw Error(ErrorKind::invalid_argument, "control errors must be finite");
    }
  }
};

/// Bose-Einstein occupation of a mode at angular frequency omega and temperature T.
inline double mean_occupation(double omega, double temperature, const PhysicalConstants& c = {}) {
  if (!(temperature > 0.0)) return 0.0;
  return 1.0 / std::expm1(c.hbar * omega / (c.k_B * temperature));
}

struct NoiseModel {
  double t1 = std::numeric_limits<double>::infinity();  // s
  double temperature = 0.0;                               // K
  double omega_nv = 0.0;                                  // rad/s
  double occupation = 0.0;                                // <n>
  double lambda = 0.0;                                    // rad/s

  double decay_rate() const { return lambda * (1.0 + occupation); }
  double excitation_rate() const { return lambda * occupation; }
  bool dissipative() const { return lambda > 0.0; }
};

/// Chooses lambda so that lambda <n(omega_NV, T)> = 1 / T1. An infinite T1 gives lambda = 0.
inline NoiseModel calibrate_noise(double t1, double temperature, double omega_nv,
                                  const PhysicalConstants& constants = {}) {
  if (!(t1 > 0.0)) throw Error(ErrorKind::invalid_argument, "T1 must be positive");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::invalid_argument, "temperature must be non-negative");
  }
  if (!(omega_nv > 0.0)) throw Error(ErrorKind::invalid_argument, "transition frequency must be positive");
  NoiseModel m;
  m.t1 = t1;
  m.temperature = temperature;
  m.omega_nv = omega_nv;
  m.occupation = mean_occupation(omega_nv, temperature, constants);
  if (std::isinf(t1)) return m;
  if (!(m.occupation > 0.0)) {
    throw Error(ErrorKind::uncalibratable, "thermal occupation vanishes at T = " +
                                               std::to_string(temperature) + " K");
  }
  m.lambda = (1.0 / t1) / m.occupation;
  return m;
}

// Electron ladder operators in the working basis: sigma_minus takes |ms> to |0>.
inline Matrix electron_lowering() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

inline Matrix electron_raising() { return electron_lowering().adjoint(); }

/// Liouvillian of -i[H, .] (column-stacking vectorization).
inline Matrix hamiltonian_liouvillian(const Matrix& h) {
  const Matrix id = identity(h.rows());
  return -kI * (kron(id, h) - kron(h.transpose(), id));
}

/// GKSL dissipator of a single jump operator with unit rate.
inline Matrix dissipator(const Matrix& jump) {
  const Matrix id = identity(jump.rows());
  const Matrix ldl = jump.adjoint() * jump;
  return kron(jump.conjugate(), jump) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
}

/// Electron T1 dissipator on the full register.
inline Matrix relaxation_dissipator(const NoiseModel& noise, std::size_t n_nuclei) {
  const Matrix lower = electron_operator(electron_lowering(), n_nuclei);
  const Matrix raise = electron_operator(electron_raising(), n_nuclei);
  return noise.decay_rate() * dissipator(lower) + noise.excitation_rate() * dissipator(raise);
}

// ---------------------------------------------------------------------------
// Piecewise-constant segments
// ---------------------------------------------------------------------------

namespace detail {

struct SegmentKey {
  long long duration = 0;
  long long phase = 0;
  long long amplitude = 0;
  bool kick = false;

  auto operator<=>(const SegmentKey&) const = default;
};

struct Segment {
  double start = 0.0;
  double duration = 0.0;
  double phase = 0.0;
  double amplitude = 0.0;  // 0 for free evolution
  bool kick = false;       // instantaneous pi pulse

  SegmentKey key() const {
    return SegmentKey{std::llround(duration * 1e16), std::llround(phase * 1e12),
                      std::llround(amplitude * 1e-3), kick};
  }
};

inline std::vector<Segment> schedule_segments(const PulseSchedule& schedule) {
  std::vector<Segment> out;
  double now = 0.0;
  for (const Pulse& p : schedule.pulses) {
    if (p.start > now) out.push_back(Segment{now, p.start - now, 0.0, 0.0, false});
    if (schedule.instantaneous || p.duration == 0.0) {
      out.push_back(Segment{p.start, 0.0, p.phase, 0.0, true});
      now = std::max(now, p.start);
    } else {
      out.push_back(Segment{p.start, p.duration, p.phase, p.amplitude, false});
      now = std::max(now, p.start + p.duration);
    }
  }
  if (schedule.total_duration > now) {
    out.push_back(Segment{now, schedule.total_duration - now, 0.0, 0.0, false});
  }
  return out;
}

/// Time-ordered product of segment maps. Segments are grouped into windows of
/// one repetition period so repeated blocks are multiplied only once.
inline Matrix ordered_product(const PulseSchedule& schedule, Eigen::Index dim,
                              const std::function<Matrix(const Segment&)>& segment_map) {
  const auto segments = schedule_segments(schedule);
  std::map<SegmentKey, Matrix> seg_cache;
  auto map_cached = [&](const Segment& s) -> const Matrix& {
    const SegmentKey k = s.key();
    auto it = seg_cache.find(k);
    if (it == seg_cache.end()) it = seg_cache.emplace(k, segment_map(s)).first;
    return it->second;
  };

  const double period = schedule.repetition_period;
  const double total = schedule.total_duration;
  if (!(period > 0.0) || !(total > 0.0)) {
    Matrix out = identity(dim);
    for (const auto& s : segments) out = map_cached(s) * out;
    return out;
  }

  const long long n_windows = std::max(1LL, std::llround(total / period));
  std::vector<std::vector<Segment>> windows(static_cast<std::size_t>(n_windows));
  auto window_of = [&](double t) {
    const long long w = static_cast<long long>(std::floor(t / period + 1e-9));
    return static_cast<std::size_t>(std::clamp(w, 0LL, n_windows - 1));
  };
  for (const auto& s : segments) {
    if (s.kick) {
      windows[window_of(s.start)].push_back(s);
      continue;
    }
    double a = s.start;
    const double b = s.start + s.duration;
    while (a < b) {
      const std::size_t w = window_of(a);
      const double edge = w + 1 == windows.size() ? b : std::min(b, (w + 1) * period);
      if (edge - a > 1e-15 * total) {
        Segment part = s;
        part.start = a;
        part.duration = edge - a;
        windows[w].push_back(part);
      }
      if (edge <= a) break;
      a = edge;
    }
  }

  std::map<std::vector<SegmentKey>, Matrix> window_cache;
  Matrix out = identity(dim);
  for (const auto& win : windows) {
    std::vector<SegmentKey> keys;
    keys.reserve(win.size());
    for (const auto& s : win) keys.push_back(s.key());
    auto it = window_cache.find(keys);
    if (it == window_cache.end()) {
      Matrix prod = identity(dim);
      for (const auto& s : win) prod = map_cached(s) * prod;
      it = window_cache.emplace(std::move(keys), std::move(prod)).first;
    }
    out = it->second * out;
  }
  return out;
}

}  // namespace detail

/// Electron drive term (Omega/2)(cos phi sigma_x + sin phi sigma_y) on the register.
inline Matrix drive_operator(double phase, std::size_t n_nuclei) {
  return electron_operator(0.5 * (std::cos(phase) * pauli_x() + std::sin(phase) * pauli_y()), n_nuclei);
}

/// Instantaneous pulse exp(-i (pi/2)(1 + R) sigma_phi) on the electron.
inline Matrix kick_unitary(double phase, double rabi_error, std::size_t n_nuclei) {
  const Matrix s = std::cos(phase) * pauli_x() + std::sin(phase) * pauli_y();
  const double a = 0.5 * kPi * (1.0 + rabi_error);
  const Matrix u = std::cos(a) * identity(2) - kI * std::sin(a) * s;
  return electron_operator(u, n_nuclei);
}

struct PropagationOptions {
  std::size_t max_nuclei = kDefaultMaxNuclei;
};

/// Time-ordered propagator of a schedule in the drive-rotating frame.
inline OperatorMatrix propagate_unitary(const SpinRegister& reg, const PulseSchedule& schedule,
                                        const ControlErrorModel& errors,
                                        const PropagationOptions& options = {}) {
  errors.validate();
  const Matrix h_sys =
      build_hamiltonian(reg, HamiltonianFrame::drive_rotating, errors.detuning, options.max_nuclei);
  const std::size_t n = reg.n_nuclei();
  const double scale = 1.0 + errors.rabi_error;
  auto segment = [&](const detail::Segment& s) -> Matrix {
    if (s.kick) return kick_unitary(s.phase, errors.rabi_error, n);
    Matrix h = h_sys;
    if (s.amplitude != 0.0) h += s.amplitude * scale * drive_operator(s.phase, n);
    if (!is_hermitian(h, 1e-9 * std::max(1.0, max_abs(h)))) {
      throw Error(ErrorKind::numerical, "segment Hamiltonian is not Hermitian");
    }
    return expm_hermitian(h, s.duration);
  };
  return OperatorMatrix(detail::ordered_product(schedule, reg.dimension(), segment),
                        OperatorKind::unitary);
}

/// Propagator of the error-free electron control alone (no register, no errors).
inline Matrix control_propagator(const PulseSchedule& schedule) {
  auto segment = [&](const detail::Segment& s) -> Matrix {
    if (s.kick) return kick_unitary(s.phase, 0.0, 0);
    if (s.amplitude == 0.0) return identity(2);
    return expm_hermitian(s.amplitude * drive_operator(s.phase, 0), s.duration);
  };
  return detail::ordered_product(schedule, 2, segment);
}

/// Frame change V = exp(-i H0 T) (U_c0 kron 1) that maps simulated propagators
/// onto the interaction picture of the ideal control and the nuclear precession.
inline Matrix gate_frame(const SpinRegister& reg, const PulseSchedule& schedule) {
  const auto frames = derive_frames(reg);
  const Matrix u_nuc = expm_hermitian(nuclear_free_hamiltonian(frames), schedule.total_duration);
  const Matrix u_c = electron_operator(control_propagator(schedule), reg.n_nuclei());
  return u_nuc * u_c;
}

/// Unitary in the gate frame: V^dagger U.
inline Matrix to_gate_frame(const Matrix& frame, const Matrix& u) { return frame.adjoint() * u; }

/// Superoperator in the gate frame: (V^T kron V^dagger) S.
inline Matrix superoperator_to_gate_frame(const Matrix& frame, const Matrix& s) {
  return conjugation_superoperator(frame.adjoint()) * s;
}

/// Liouville-space propagator of the schedule with electron T1 relaxation.
inline OperatorMatrix lindblad_propagator(const SpinRegister& reg, const PulseSchedule& schedule,
                                          const ControlErrorModel& errors, const NoiseModel& noise,
                                          const PropagationOptions& options = {}) {
  errors.validate();
  const Matrix h_sys =
      build_hamiltonian(reg, HamiltonianFrame::drive_rotating, errors.detuning, options.max_nuclei);
  const std::size_t n = reg.n_nuclei();
  const double scale = 1.0 + errors.rabi_error;
  const Matrix diss = relaxation_dissipator(noise, n);
  const Matrix l_sys = hamiltonian_liouvillian(h_sys) + diss;
  auto segment = [&](const detail::Segment& s) -> Matrix {
    if (s.kick) return conjugation_superoperator(kick_unitary(s.phase, errors.rabi_error, n));
    Matrix l = l_sys;
    if (s.amplitude != 0.0) {
      l += hamiltonian_liouvillian(s.amplitude * scale * drive_operator(s.phase, n));
    }
    return expm(l * s.duration);
  };
  const Eigen::Index dim = reg.dimension();
  return OperatorMatrix(detail::ordered_product(schedule, dim * dim, segment),
                        OperatorKind::superoperator);
}

struct LindbladResult {
  OperatorMatrix rho;
  double min_eigenvalue = 0.0;
  bool positivity_violation = false;
};

inline constexpr double kDensityTolerance = 1e-9;

inline void require_density(const Matrix& rho, Eigen::Index dim) {
  if (rho.rows() != dim || rho.cols() != dim) {
    throw Error(ErrorKind::dimension, "density matrix has dimension " + std::to_string(rho.rows()) +
                                          ", register needs " + std::to_string(dim));
  }
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > kDensityTolerance) {
    throw Error(ErrorKind::invalid_argument, "initial density matrix must have unit trace");
  }
  if (!is_hermitian(rho, kDensityTolerance)) {
    throw Error(ErrorKind::invalid_argument, "initial density matrix must be Hermitian");
  }
}

inline LindbladResult finish_density(Matrix rho) {
  rho = 0.5 * (rho + rho.adjoint());
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > kDensityTolerance) {
    throw Error(ErrorKind::numerical, "trace drifted to " + std::to_string(rho.trace().real()));
  }
  LindbladResult out;
  out.min_eigenvalue = min_eigenvalue_hermitian(rho);
  out.positivity_violation = out.min_eigenvalue < -kDensityTolerance;
  out.rho = OperatorMatrix(std::move(rho), OperatorKind::density);
  return out;
}

inline LindbladResult propagate_lindblad(const SpinRegister& reg, const PulseSchedule& schedule,
                                         const ControlErrorModel& errors, const NoiseModel& noise,
                                         const Matrix& rho0, const PropagationOptions& options = {}) {
  require_density(rho0, reg.dimension());
  const Matrix s = lindblad_propagator(reg, schedule, errors, noise, options).matrix();
  return finish_density(apply_superoperator(s, rho0));
}

// ---------------------------------------------------------------------------
// Trajectory output
// ---------------------------------------------------------------------------

struct Observable {
  std::string name;
  Matrix op;
};

/// Expectation values at every segment boundary of a unitary propagation.
inline void write_trajectory_csv(std::ostream& os, const SpinRegister& reg,
                                 const PulseSchedule& schedule, const ControlErrorModel& errors,
                                 const Matrix& rho0, const std::vector<Observable>& observables) {
  require_density(rho0, reg.dimension());
  const Matrix h_sys = build_hamiltonian(reg, HamiltonianFrame::drive_rotating, errors.detuning);
  const std::size_t n = reg.n_nuclei();
  const auto old_precision = os.precision(12);
  os << "t_s";
  for (const auto& o : observables) os << ',' << o.name;
  os << '\n';
  Matrix rho = rho0;
  auto emit = [&](double t) {
    os << t;
    for (const auto& o : observables) os << ',' << (o.op * rho).trace().real();
    os << '\n';
  };
  emit(0.0);
  for (const auto& s : detail::schedule_segments(schedule)) {
    Matrix u;
    if (s.kick) {
      u = kick_unitary(s.phase, errors.rabi_error, n);
    } else {
      Matrix h = h_sys;
      if (s.amplitude != 0.0) h += s.amplitude * (1.0 + errors.rabi_error) * drive_operator(s.phase, n);
      u = expm_hermitian(h, s.duration);
    }
    rho = u * rho * u.adjoint();
    emit(s.start + s.duration);
  }
  os.precision(old_precision);
}

}  // namespace axy
