#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "axy/dynamics.hpp"
#include "axy/error.hpp"
#include "axy/hamiltonian.hpp"
#include "axy/linalg.hpp"
#include "axy/pulses.hpp"
#include "axy/register.hpp"

namespace axy {

enum class GateAxis { x, y };

inline const char* to_string(GateAxis a) { return a == GateAxis::x ? "x" : "y"; }

/// Conditional rotation exp(-i angle sigma_z I_n^axis) on target nucleus n.
struct GateSpec {
  std::size_t target = 0;
  GateAxis axis = GateAxis::x;
  double angle = kPi / 2.0;
};

inline Parity parity_for(GateAxis axis) { return axis == GateAxis::x ? Parity::even : Parity::odd; }

inline OperatorMatrix ideal_gate(std::size_t n_nuclei, const GateSpec& spec) {
  if (spec.target >= n_nuclei) {
    throw Error(ErrorKind::invalid_argument, "gate target " + std::to_string(spec.target) +
                                                 " out of range for " + std::to_string(n_nuclei) +
                                                 " nuclei");
  }
  const Matrix gen = electron_operator(pauli_z(), n_nuclei) *
                     frame_operator(n_nuclei, spec.target, spec.axis == GateAxis::x ? 0 : 1);
  return OperatorMatrix(expm_hermitian(gen, spec.angle), OperatorKind::unitary);
}

inline OperatorMatrix ideal_gate(const SpinRegister& reg, const GateSpec& spec) {
  derive_frames(reg);
  return ideal_gate(reg.n_nuclei(), spec);
}

/// |Tr(U_id^dagger U)| / sqrt(Tr(U_id^dagger U_id) Tr(U^dagger U)).
inline double gate_fidelity(const Matrix& u, const Matrix& u_id) {
  if (u.rows() != u_id.rows() || u.cols() != u_id.cols() || u.rows() != u.cols()) {
    throw Error(ErrorKind::dimension, "gate fidelity needs square operators of equal size");
  }
  const double num = std::abs((u_id.adjoint() * u).trace());
  const double den = std::sqrt((u_id.adjoint() * u_id).trace().real() * (u.adjoint() * u).trace().real());
  if (!(den > 0.0)) throw Error(ErrorKind::numerical, "gate fidelity of a zero operator");
  return std::min(1.0, num / den);
}

// ---------------------------------------------------------------------------
// Analytic decoupling efficiency
// ---------------------------------------------------------------------------

/// D(theta) = |cos t cos mu + (t/mu) sin t sin mu| with mu = sqrt(t^2 + (g_ratio phi / 2)^2).
inline double decoupling_efficiency(double vartheta, double g_ratio, double phi) {
  const double half = 0.5 * g_ratio * phi;
  const double mu = std::sqrt(vartheta * vartheta + half * half);
  // sin(mu)/mu -> 1 as mu -> 0
  const double sinc = mu < 1e-8 ? 1.0 - mu * mu / 6.0 : std::sin(mu) / mu;
  return std::abs(std::cos(vartheta) * std::cos(mu) + vartheta * std::sin(vartheta) * sinc);
}

inline double sequence_duration(double tau, int repetitions, SequenceVariant variant) {
  return 0.5 * tau * composites_per_repetition(variant) * repetitions;
}

/// tau = 2 pi k_DD / omega_n.
inline double resonant_period(const SpinRegister& reg, std::size_t target, int k_dd = 1) {
  const auto frames = derive_frames(reg);
  if (target >= frames.size()) throw Error(ErrorKind::invalid_argument, "gate target out of range");
  if (k_dd < 1) throw Error(ErrorKind::invalid_argument, "k_DD must be positive");
  return kTwoPi * k_dd / frames[target].omega;
}

/// Fourier coefficient that accumulates the gate angle over the sequence:
/// angle = ms f g_n T / 4.
inline double required_coefficient(const SpinRegister& reg, const GateSpec& spec, double duration) {
  const auto frames = derive_frames(reg);
  if (spec.target >= frames.size()) throw Error(ErrorKind::invalid_argument, "gate target out of range");
  if (!(duration > 0.0)) throw Error(ErrorKind::invalid_argument, "duration must be positive");
  return 4.0 * spec.angle / (static_cast<double>(reg.ms) * frames[spec.target].g * duration);
}

inline void require_resonance(const SpinRegister& reg, std::size_t target, int k_dd, double tau) {
  const double needed = resonant_period(reg, target, k_dd);
  if (!(std::abs(tau - needed) <= 1e-9 * needed)) {
    throw Error(ErrorKind::resonance_mismatch,
                "tau = " + std::to_string(tau) + " s is off resonance, need tau = " +
                    std::to_string(needed) + " s");
  }
}

/// Product of decoupling efficiencies of all non-target nuclei.
inline double predicted_fidelity(const SpinRegister& reg, const GateSpec& spec, int repetitions,
                                 double tau, int k_dd = 1,
                                 SequenceVariant variant = SequenceVariant::axy8) {
  require_resonance(reg, spec.target, k_dd, tau);
  const auto frames = derive_frames(reg);
  const double t = sequence_duration(tau, repetitions, variant);
  const NuclearFrame& target = frames[spec.target];
  double f = 1.0;
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (j == spec.target) continue;
    const double delta = frames[j].omega - target.omega;
    f *= decoupling_efficiency(0.5 * delta * t, frames[j].g / target.g, spec.angle);
  }
  return f;
}

/// Duration of the rotation at the largest attainable coefficient, ignoring selectivity.
inline double minimum_gate_time(const SpinRegister& reg, const GateSpec& spec, int k_dd = 1) {
  const auto frames = derive_frames(reg);
  if (spec.target >= frames.size()) throw Error(ErrorKind::invalid_argument, "gate target out of range");
  const double f_max = attainable_interval(k_dd).second;
  return 4.0 * std::abs(spec.angle) / (frames[spec.target].g * f_max);
}

struct GateTimePlan {
  int repetitions = 0;
  double tau = 0.0;
  double coefficient = 0.0;
  double predicted_fidelity = 0.0;
  double duration = 0.0;
  double minimum_time = 0.0;

  double time_ratio() const { return duration / minimum_time; }
};

struct GateTimeOptions {
  int k_dd = 1;
  SequenceVariant variant = SequenceVariant::axy8;
  int n_min = 1;
};

/// Smallest repetition number whose coefficient is attainable and whose
/// predicted fidelity reaches the target.
inline GateTimePlan optimize_gate_time(const SpinRegister& reg, const GateSpec& spec,
                                       double fidelity_target, int n_max,
                                       const GateTimeOptions& options = {}) {
  if (!(fidelity_target >= 0.0 && fidelity_target < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "fidelity target must lie in [0, 1)");
  }
  if (n_max < options.n_min) throw Error(ErrorKind::invalid_argument, "empty repetition range");
  const double tau = resonant_period(reg, spec.target, options.k_dd);
  const double bound = attainable_interval(options.k_dd).second;
  const double t_min = minimum_gate_time(reg, spec, options.k_dd);
  double best = -1.0;
  int best_n = 0;
  for (int n = options.n_min; n <= n_max; ++n) {
    const double t = sequence_duration(tau, n, options.variant);
    const double f = required_coefficient(reg, spec, t);
    if (!(std::abs(f) < bound)) continue;
    const double p = predicted_fidelity(reg, spec, n, tau, options.k_dd, options.variant);
    if (p > best) {
      best = p;
      best_n = n;
    }
    if (p >= fidelity_target) return GateTimePlan{n, tau, f, p, t, t_min};
  }
  throw Error(ErrorKind::infeasible_target,
              "no repetition number up to " + std::to_string(n_max) + " reaches fidelity " +
                  std::to_string(fidelity_target) +
                  (best_n > 0 ? "; best " + std::to_string(best) + " at N = " + std::to_string(best_n)
                              : "; no attainable coefficient"));
}

// ---------------------------------------------------------------------------
// Simulated gates
// ---------------------------------------------------------------------------

struct GateSequenceOptions {
  int k_dd = 1;
  SequenceVariant variant = SequenceVariant::axy8;
  double rabi = kTwoPi * 20e6;
  bool instantaneous = false;
  double max_width_ratio = 0.05;
};

/// Resonant AXY sequence that realises `spec` with N repetitions.
inline AxySequenceSpec gate_sequence(const SpinRegister& reg, const GateSpec& spec, int repetitions,
                                     const GateSequenceOptions& options = {}) {
  if (repetitions < 1) throw Error(ErrorKind::invalid_argument, "repetitions must be positive");
  const double tau = resonant_period(reg, spec.target, options.k_dd);
  const double t = sequence_duration(tau, repetitions, options.variant);
  AxySequenceSpec seq;
  seq.variant = options.variant;
  seq.repetitions = repetitions;
  seq.tau = tau;
  seq.k_dd = options.k_dd;
  seq.target_f = required_coefficient(reg, spec, t);
  seq.layout = solve_axy_positions(seq.target_f, options.k_dd, parity_for(spec.axis)).layout;
  seq.rabi = options.rabi;
  seq.instantaneous = options.instantaneous;
  seq.max_width_ratio = options.max_width_ratio;
  return seq;
}

struct SimulatedGate {
  AxySequenceSpec sequence;
  PulseSchedule schedule;
  Matrix frame;    // V mapping the simulation frame onto the gate frame
  Matrix unitary;  // propagator in the gate frame
  double fidelity = 0.0;
};

inline SimulatedGate simulate_gate(const SpinRegister& reg, const GateSpec& spec, int repetitions,
                                   const ControlErrorModel& errors,
                                   const GateSequenceOptions& options = {}) {
  SimulatedGate out;
  out.sequence = gate_sequence(reg, spec, repetitions, options);
  out.schedule = build_schedule(out.sequence);
  out.frame = gate_frame(reg, out.schedule);
  out.unitary = to_gate_frame(out.frame, propagate_unitary(reg, out.schedule, errors).matrix());
  out.fidelity = gate_fidelity(out.unitary, ideal_gate(reg.n_nuclei(), spec).matrix());
  return out;
}

struct GateScanRow {
  int repetitions = 0;
  double tau = 0.0;
  double coefficient = 0.0;
  double predicted = 0.0;
  double simulated = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // empty when the point was simulated
};

inline GateScanRow scan_point(const SpinRegister& reg, const GateSpec& spec, int repetitions,
                              const ControlErrorModel& errors, const GateSequenceOptions& options,
                              bool simulate = true) {
  GateScanRow row;
  row.repetitions = repetitions;
  row.tau = resonant_period(reg, spec.target, options.k_dd);
  row.coefficient =
      required_coefficient(reg, spec, sequence_duration(row.tau, repetitions, options.variant));
  row.predicted = predicted_fidelity(reg, spec, repetitions, row.tau, options.k_dd, options.variant);
  if (!simulate) return row;
  try {
    row.simulated = simulate_gate(reg, spec, repetitions, errors, options).fidelity;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::unreachable_coefficient && e.kind() != ErrorKind::overlap &&
        e.kind() != ErrorKind::solver_failed) {
      throw;
    }
    row.status = to_string(e.kind());
  }
  return row;
}

/// |gamma_j B| / |k_DD g_j| minimised over nuclei: the margin of the high-field condition.
inline double high_field_margin(const SpinRegister& reg, int k_dd = 1) {
  const auto frames = derive_frames(reg);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < frames.size(); ++j) {
    const double larmor = std::abs(reg.nuclei[j].gyromagnetic_ratio * reg.field);
    margin = std::min(margin, larmor / std::abs(k_dd * frames[j].g));
  }
  return margin;
}

/// |omega_j - omega_n| / |f g_j| minimised over non-target nuclei: the margin of
/// the weak-coupling condition for a given coefficient.
inline double weak_coupling_margin(const SpinRegister& reg, std::size_t target, double coefficient) {
  const auto frames = derive_frames(reg);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (j == target) continue;
    margin = std::min(margin, std::abs(frames[j].omega - frames[target].omega) /
                                  std::abs(coefficient * frames[j].g));
  }
  return margin;
}

}  // namespace axy
