#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "axy/dynamics.hpp"
#include "axy/error.hpp"
#include "axy/gates.hpp"
#include "axy/linalg.hpp"
#include "axy/register.hpp"

namespace axy {

// ---------------------------------------------------------------------------
// Error channel
// ---------------------------------------------------------------------------

/// Independent Pauli errors of one type on every qubit with probability p.
struct ErrorChannel {
  double p = 0.0;
  char pauli = 'Z';

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_argument, "error probability must lie in [0, 1]");
    if (pauli != 'X' && pauli != 'Y' && pauli != 'Z') {
      throw Error(ErrorKind::invalid_argument, "error channel needs a Pauli letter X, Y or Z");
    }
  }
};

/// p = (1 - exp(-gamma t)) / 2 for dephasing at rate gamma over time t.
inline double error_probability_from_rate(double gamma, double t) {
  return 0.5 * (1.0 - std::exp(-gamma * t));
}

inline double single_error_probability(double p) { return 3.0 * p * (1.0 - p) * (1.0 - p); }

/// Applies Lambda_j(rho) = (1 - p) rho + p P_j rho P_j for every qubit j in turn.
inline Matrix apply_error_channel(const Matrix& rho, double p, char pauli = 'Z') {
  ErrorChannel{p, pauli}.validate();
  const Eigen::Index dim = rho.rows();
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || rho.cols() != dim) {
    throw Error(ErrorKind::dimension, "error channel needs a square qubit-register operator");
  }
  Matrix out = rho;
  for (std::size_t q = 0; q < n; ++q) {
    const Matrix op = embed(axy::pauli(pauli), q, n);
    out = (1.0 - p) * out + p * op * out * op;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Electron rotations and gate sets
// ---------------------------------------------------------------------------

/// Electron rotations with the sign convention X_theta = exp(+i theta sigma_x / 2).
inline Matrix electron_rotation(char axis, double angle) {
  const Matrix s = pauli(axis);
  return std::cos(0.5 * angle) * identity(2) + kI * std::sin(0.5 * angle) * s;
}

/// Channels of the conditional rotations used by the code, in the gate frame.
class GateSet {
 public:
  struct Record {
    GateSpec spec;
    int repetitions = 0;
    double tau = 0.0;
    double coefficient = 0.0;
    double duration = 0.0;
    double fidelity = 1.0;  // coherent fidelity against the ideal gate
  };

  std::size_t n_nuclei() const { return n_nuclei_; }

  /// Superoperator of the gate A^axis_target(angle).
  const Matrix& channel(const GateSpec& spec) const {
    auto it = channels_.find(key(spec));
    if (it == channels_.end()) {
      throw Error(ErrorKind::invalid_argument, "gate set has no " + std::string(to_string(spec.axis)) +
                                                   " gate on nucleus " + std::to_string(spec.target));
    }
    return it->second;
  }

  const Record& record(const GateSpec& spec) const { return records_.at(key(spec)); }

  std::vector<Record> records() const {
    std::vector<Record> out;
    for (const auto& [k, r] : records_) out.push_back(r);
    return out;
  }

  /// Every gate the protocol uses: A^x and A^y at +-pi/2 on each nucleus.
  static std::vector<GateSpec> protocol_gates(std::size_t n_nuclei) {
    std::vector<GateSpec> out;
    for (std::size_t j = 0; j < n_nuclei; ++j) {
      for (GateAxis axis : {GateAxis::x, GateAxis::y}) {
        for (double sign : {1.0, -1.0}) out.push_back(GateSpec{j, axis, sign * kPi / 2.0});
      }
    }
    return out;
  }

  static GateSet ideal(std::size_t n_nuclei) {
    GateSet gs;
    gs.n_nuclei_ = n_nuclei;
    for (const auto& spec : protocol_gates(n_nuclei)) {
      gs.channels_[key(spec)] = conjugation_superoperator(ideal_gate(n_nuclei, spec).matrix());
      gs.records_[key(spec)] = Record{spec};
    }
    return gs;
  }

  struct SimulationSettings {
    double fidelity_target = 0.999;
    int n_max = 400;
    std::optional<int> repetitions;  // fixes N for every gate instead of optimising it
    GateSequenceOptions sequence;
    ControlErrorModel errors;
  };

  /// Speed-optimised AXY gates: optimise N analytically, then raise N until the
  /// schedule is buildable. Dissipative when `noise` carries a non-zero rate.
  static GateSet simulated(const SpinRegister& reg, const SimulationSettings& settings,
                           const std::optional<NoiseModel>& noise) {
    GateSet gs;
    gs.n_nuclei_ = reg.n_nuclei();
    for (const auto& spec : protocol_gates(reg.n_nuclei())) {
      int n = 0;
      int n_last = settings.n_max;
      if (settings.repetitions) {
        n = *settings.repetitions;
        n_last = n;
      } else {
        GateTimeOptions opt;
        opt.k_dd = settings.sequence.k_dd;
        opt.variant = settings.sequence.variant;
        n = optimize_gate_time(reg, spec, settings.fidelity_target, settings.n_max, opt).repetitions;
      }
      std::optional<PulseSchedule> schedule;
      AxySequenceSpec seq;
      for (; n <= n_last && !schedule; ++n) {
        try {
          seq = gate_sequence(reg, spec, n, settings.sequence);
          schedule = build_schedule(seq);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::overlap && e.kind() != ErrorKind::unreachable_coefficient) throw;
        }
      }
      if (!schedule) {
        throw Error(ErrorKind::infeasible_target, "no buildable sequence for the " +
                                                      std::string(to_string(spec.axis)) +
                                                      " gate on nucleus " + std::to_string(spec.target));
      }
      const Matrix frame = gate_frame(reg, *schedule);
      const Matrix u = to_gate_frame(frame, propagate_unitary(reg, *schedule, settings.errors).matrix());
      Record rec{spec, seq.repetitions, seq.tau, seq.target_f, schedule->total_duration,
                 gate_fidelity(u, ideal_gate(reg.n_nuclei(), spec).matrix())};
      if (noise && noise->dissipative()) {
        gs.channels_[key(spec)] = superoperator_to_gate_frame(
            frame, lindblad_propagator(reg, *schedule, settings.errors, *noise).matrix());
      } else {
        gs.channels_[key(spec)] = conjugation_superoperator(u);
      }
      gs.records_[key(spec)] = rec;
    }
    return gs;
  }

 private:
  using Key = std::tuple<std::size_t, int, long long>;
  static Key key(const GateSpec& s) {
    return {s.target, s.axis == GateAxis::x ? 0 : 1, std::llround(s.angle * 1e12)};
  }

  std::size_t n_nuclei_ = 0;
  std::map<Key, Matrix> channels_;
  std::map<Key, Record> records_;
};

namespace detail {

inline Matrix electron_channel(const Matrix& u2, std::size_t n_nuclei) {
  return conjugation_superoperator(electron_operator(u2, n_nuclei));
}

}  // namespace detail

/// Superoperator of iSWAP_j = Y A^x_j(pi/2) Y^dag X^dag A^y_j(pi/2) X (with pi/2
/// electron rotations), or of its inverse.
inline Matrix compose_iswap(const GateSet& gates, std::size_t j, bool inverse = false) {
  const std::size_t n = gates.n_nuclei();
  if (j >= n) throw Error(ErrorKind::invalid_argument, "iSWAP target out of range");
  const double s = inverse ? -1.0 : 1.0;
  const Matrix x = detail::electron_channel(electron_rotation('X', kPi / 2.0), n);
  const Matrix xd = detail::electron_channel(electron_rotation('X', -kPi / 2.0), n);
  const Matrix y = detail::electron_channel(electron_rotation('Y', kPi / 2.0), n);
  const Matrix yd = detail::electron_channel(electron_rotation('Y', -kPi / 2.0), n);
  const Matrix& ax = gates.channel(GateSpec{j, GateAxis::x, s * kPi / 2.0});
  const Matrix& ay = gates.channel(GateSpec{j, GateAxis::y, s * kPi / 2.0});
  if (!inverse) return y * ax * yd * xd * ay * x;
  return xd * ay * x * y * ax * yd;
}

/// Unitary iSWAP composed from ideal gates.
inline OperatorMatrix compose_iswap(std::size_t n_nuclei, std::size_t j) {
  if (j >= n_nuclei) throw Error(ErrorKind::invalid_argument, "iSWAP target out of range");
  const Matrix x = electron_operator(electron_rotation('X', kPi / 2.0), n_nuclei);
  const Matrix y = electron_operator(electron_rotation('Y', kPi / 2.0), n_nuclei);
  const Matrix ax = ideal_gate(n_nuclei, GateSpec{j, GateAxis::x, kPi / 2.0}).matrix();
  const Matrix ay = ideal_gate(n_nuclei, GateSpec{j, GateAxis::y, kPi / 2.0}).matrix();
  return OperatorMatrix(y * ax * y.adjoint() * x.adjoint() * ay * x, OperatorKind::unitary);
}

/// exp(i pi/4 (sigma_x sigma_x + sigma_y sigma_y)) between the electron and nucleus j.
inline Matrix direct_iswap(std::size_t n_nuclei, std::size_t j) {
  const std::size_t n = n_nuclei + 1;
  const Matrix h = embed(pauli_x(), 0, n) * embed(pauli_x(), j + 1, n) +
                   embed(pauli_y(), 0, n) * embed(pauli_y(), j + 1, n);
  return expm_hermitian(h, -kPi / 4.0);
}

// ---------------------------------------------------------------------------
// Protocol
// ---------------------------------------------------------------------------

using Syndrome = std::pair<int, int>;

struct SyndromeEntry {
  std::string error;    // e.g. "Z1"
  std::string decoded;  // Pauli string of the decoded error, qubit 0 first
  Syndrome syndrome{0, 0};
  char recovery = 'I';
};

struct SyndromeTable {
  std::string frame_label;  // electron rotation placed around the error channel
  Matrix frame;             // 2x2
  std::vector<SyndromeEntry> entries;

  const SyndromeEntry* find(const Syndrome& s) const {
    for (const auto& e : entries) {
      if (e.syndrome == s) return &e;
    }
    return nullptr;
  }

  char recovery(const Syndrome& s) const {
    const SyndromeEntry* e = find(s);
    return e ? e->recovery : 'I';
  }
};

/// Syndromes of a published reference table. The last row is checked against
/// the brute-force derivation rather than trusted.
inline const std::vector<std::pair<std::string, Syndrome>>& reference_syndromes() {
  static const std::vector<std::pair<std::string, Syndrome>> table{
      {"1", {0, 0}}, {"Z0", {1, 1}}, {"Z1", {1, 0}}, {"Z2", {1, 1}}};
  return table;
}

namespace detail {

inline std::array<Syndrome, 4> all_syndromes() { return {Syndrome{0, 0}, {0, 1}, {1, 0}, {1, 1}}; }

inline std::size_t syndrome_index(const Syndrome& s) {
  return static_cast<std::size_t>(2 * s.first + s.second);
}

/// Branch-resolved electron maps: element s maps an input electron operator to
/// the (unnormalised) electron output of the syndrome branch s, before recovery.
struct BranchMaps {
  std::array<Matrix, 4> maps;  // 4x4 superoperators on the electron
};

/// Runs encode, error stage, decode and the iSWAP readout on a linear input.
inline std::array<Matrix, 4> protocol_branches_for(const GateSet& gates, const Matrix& frame,
                                                   const std::function<Matrix(const Matrix&)>& error_stage,
                                                   const Matrix& input_e) {
  const std::size_t n = gates.n_nuclei();
  Matrix nuclei = Matrix::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  nuclei(0, 0) = 1.0;
  Matrix rho = kron(input_e, nuclei);
  auto apply = [&](const Matrix& s) { rho = apply_superoperator(s, rho); };

  apply(gates.channel(GateSpec{0, GateAxis::x, kPi / 2.0}));
  apply(gates.channel(GateSpec{1, GateAxis::x, kPi / 2.0}));
  const Matrix r = electron_operator(frame, n);
  rho = r * rho * r.adjoint();
  rho = error_stage(rho);
  rho = r.adjoint() * rho * r;
  apply(gates.channel(GateSpec{1, GateAxis::x, -kPi / 2.0}));
  apply(gates.channel(GateSpec{0, GateAxis::x, -kPi / 2.0}));

  Matrix proj0 = Matrix::Zero(2, 2);
  proj0(0, 0) = 1.0;
  Matrix proj1 = Matrix::Zero(2, 2);
  proj1(1, 1) = 1.0;
  const std::array<Matrix, 2> proj{electron_operator(proj0, n), electron_operator(proj1, n)};

  std::array<Matrix, 4> out;
  std::vector<std::pair<std::vector<int>, Matrix>> branches{{{}, rho}};
  for (std::size_t j = 0; j < 2; ++j) {
    const Matrix sw = compose_iswap(gates, j);
    const Matrix sw_inv = compose_iswap(gates, j, true);
    std::vector<std::pair<std::vector<int>, Matrix>> next;
    for (const auto& [bits, b] : branches) {
      const Matrix swapped = apply_superoperator(sw, b);
      for (int s = 0; s < 2; ++s) {
        auto nb = bits;
        nb.push_back(s);
        next.emplace_back(std::move(nb),
                          apply_superoperator(sw_inv, proj[s] * swapped * proj[s]));
      }
    }
    branches = std::move(next);
  }
  for (const auto& [bits, b] : branches) {
    out[syndrome_index({bits[0], bits[1]})] = reduce_to_first_qubit(b);
  }
  return out;
}

inline BranchMaps protocol_branches(const GateSet& gates, const Matrix& frame,
                                    const std::function<Matrix(const Matrix&)>& error_stage) {
  BranchMaps bm;
  for (auto& m : bm.maps) m = Matrix::Zero(4, 4);
  for (Eigen::Index a = 0; a < 2; ++a) {
    for (Eigen::Index b = 0; b < 2; ++b) {
      Matrix e = Matrix::Zero(2, 2);
      e(a, b) = 1.0;
      const auto outs = protocol_branches_for(gates, frame, error_stage, e);
      for (std::size_t s = 0; s < 4; ++s) bm.maps[s].col(b * 2 + a) = vectorize(outs[s]);
    }
  }
  return bm;
}

inline std::string pauli_label(const std::string& letters) {
  std::string out;
  for (std::size_t q = 0; q < letters.size(); ++q) {
    if (letters[q] != 'I') out += std::string(1, letters[q]) + std::to_string(q);
  }
  return out.empty() ? "1" : out;
}

/// Pauli string equal to `op` up to a phase, or an empty string.
inline std::string match_pauli_string(const Matrix& op, std::size_t n_qubits) {
  const double dim = static_cast<double>(op.rows());
  std::string letters(n_qubits, 'I');
  const std::string alphabet = "IXYZ";
  const std::size_t total = std::size_t{1} << (2 * n_qubits);
  for (std::size_t code = 0; code < total; ++code) {
    for (std::size_t q = 0; q < n_qubits; ++q) letters[q] = alphabet[(code >> (2 * q)) & 3];
    if (std::abs(std::abs((pauli_string(letters).adjoint() * op).trace()) / dim - 1.0) < 1e-9) {
      return letters;
    }
  }
  return {};
}

/// Single-qubit Pauli P with P M(rho) P = rho for every rho, or 0.
inline char find_recovery(const Matrix& branch_map) {
  for (char c : std::string("IXYZ")) {
    const Matrix corrected = conjugation_superoperator(pauli(c)) * branch_map;
    if (max_abs(corrected - identity(4)) < 1e-9) return c;
  }
  return 0;
}

}  // namespace detail

/// Derives the syndrome table with ideal gates. The electron rotation placed
/// around the error channel is the first candidate for which every single
/// error yields a deterministic syndrome, an exact Pauli recovery, and distinct
/// recoveries never share a syndrome.
inline SyndromeTable derive_syndrome_table(char error_pauli = 'Z') {
  const GateSet gates = GateSet::ideal(2);
  const std::vector<std::pair<std::string, Matrix>> candidates{
      {"identity", identity(2)},
      {"Y(pi/2)", electron_rotation('Y', kPi / 2.0)},
      {"X(pi/2)", electron_rotation('X', kPi / 2.0)},
      {"Y(-pi/2)", electron_rotation('Y', -kPi / 2.0)},
      {"X(-pi/2)", electron_rotation('X', -kPi / 2.0)}};
  const Matrix enc = ideal_gate(2, GateSpec{1, GateAxis::x, kPi / 2.0}).matrix() *
                     ideal_gate(2, GateSpec{0, GateAxis::x, kPi / 2.0}).matrix();

  std::vector<std::string> errors{"III"};
  for (std::size_t q = 0; q < 3; ++q) {
    std::string e = "III";
    e[q] = error_pauli;
    errors.push_back(e);
  }

  for (const auto& [label, frame] : candidates) {
    SyndromeTable table{label, frame, {}};
    bool ok = true;
    for (const auto& err : errors) {
      const Matrix e = pauli_string(err);
      const auto bm = detail::protocol_branches(gates, frame, [&](const Matrix& rho) { return e * rho * e; });
      int hit = -1;
      for (std::size_t s = 0; s < 4; ++s) {
        const Matrix out = unvectorize(bm.maps[s] * vectorize(0.5 * identity(2)), 2);
        const double prob = out.trace().real();
        if (std::abs(prob - 1.0) < 1e-9) hit = static_cast<int>(s);
      }
      if (hit < 0) {
        ok = false;
        break;
      }
      const char rec = detail::find_recovery(bm.maps[static_cast<std::size_t>(hit)]);
      if (rec == 0) {
        ok = false;
        break;
      }
      const Matrix r = electron_operator(frame, 2);
      const Matrix decoded = enc.adjoint() * r.adjoint() * e * r * enc;
      table.entries.push_back(SyndromeEntry{detail::pauli_label(err),
                                            detail::pauli_label(detail::match_pauli_string(decoded, 3)),
                                            {hit / 2, hit % 2},
                                            rec});
    }
    if (!ok) continue;
    for (std::size_t a = 0; a < table.entries.size() && ok; ++a) {
      for (std::size_t b = a + 1; b < table.entries.size(); ++b) {
        if (table.entries[a].syndrome == table.entries[b].syndrome &&
            table.entries[a].recovery != table.entries[b].recovery) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return table;
  }
  throw Error(ErrorKind::degenerate_code, "no electron frame separates all single errors");
}

/// Rows where the derived syndrome differs from the reference table.
inline std::vector<std::string> syndrome_table_divergences(const SyndromeTable& table) {
  std::vector<std::string> out;
  for (const auto& [label, syn] : reference_syndromes()) {
    for (const auto& e : table.entries) {
      if (e.error == label && e.syndrome != syn) {
        out.push_back(label + ": derived (" + std::to_string(e.syndrome.first) + "," +
                      std::to_string(e.syndrome.second) + "), reference (" + std::to_string(syn.first) +
                      "," + std::to_string(syn.second) + ")");
      }
    }
  }
  return out;
}

enum class GateMode { ideal, simulated };
enum class AveragingMode { two_design_exact, haar_monte_carlo };

struct ProtocolConfig {
  GateMode gate_mode = GateMode::ideal;
  double p = 0.0;
  bool flip_errors = false;  // correct sigma_x instead of sigma_z errors
  std::optional<NoiseModel> noise;
  AveragingMode averaging = AveragingMode::two_design_exact;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  GateSet::SimulationSettings simulation;

  void validate() const {
    ErrorChannel{p, 'Z'}.validate();
    if (averaging == AveragingMode::haar_monte_carlo && samples < 2) {
      throw Error(ErrorKind::invalid_argument, "Monte-Carlo averaging needs at least 2 samples");
    }
  }
};

struct ProtocolResult {
  Matrix rho_out;  // recovered electron state
  std::array<double, 4> syndrome_probabilities{};  // indexed by 2 s1 + s2
  double fidelity = 0.0;
};

struct AverageFidelity {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Runs the repetition code for a fixed register and configuration. Gates,
/// the syndrome table and the branch maps are prepared once.
class RepetitionCode {
 public:
  RepetitionCode(const SpinRegister& reg, const ProtocolConfig& config) : config_(config) {
    config.validate();
    if (reg.n_nuclei() != 2) {
      throw Error(ErrorKind::invalid_argument, "the repetition code needs exactly two nuclei, got " +
                                                   std::to_string(reg.n_nuclei()));
    }
    derive_frames(reg);
    table_ = derive_syndrome_table('Z');
    gates_ = config.gate_mode == GateMode::ideal
                 ? GateSet::ideal(2)
                 : GateSet::simulated(reg, config.simulation, config.noise);
    channel_branches_ = detail::protocol_branches(gates_, table_.frame, [&](const Matrix& rho) {
      return error_stage(rho, config_.p);
    });
  }

  const SyndromeTable& table() const { return table_; }
  const GateSet& gates() const { return gates_; }
  const ProtocolConfig& config() const { return config_; }

  /// Sum of the conditional-gate durations of one protocol run.
  double duration() const {
    double t = 0.0;
    for (const auto& [target, angle] : std::vector<std::pair<std::size_t, double>>{
             {0, kPi / 2}, {1, kPi / 2}, {1, -kPi / 2}, {0, -kPi / 2}}) {
      t += gates_.record(GateSpec{target, GateAxis::x, angle}).duration;
    }
    for (std::size_t j = 0; j < 2; ++j) {
      for (double s : {1.0, -1.0}) {
        t += gates_.record(GateSpec{j, GateAxis::x, s * kPi / 2}).duration;
        t += gates_.record(GateSpec{j, GateAxis::y, s * kPi / 2}).duration;
      }
    }
    return t;
  }

  /// Electron channel including syndrome-conditioned recovery (4x4 superoperator).
  Matrix recovered_channel() const { return recover(channel_branches_); }

  ProtocolResult run(const Vector& psi) const { return run_with(channel_branches_, psi); }

  /// Runs with a deterministic Pauli error (string over electron and nuclei) instead of the channel.
  ProtocolResult run_with_error(const std::string& pauli_letters, const Vector& psi) const {
    if (pauli_letters.size() != 3) throw Error(ErrorKind::invalid_argument, "error string needs 3 letters");
    const Matrix e = frame_errors(pauli_string(pauli_letters));
    const auto bm = detail::protocol_branches(gates_, table_.frame, [&](const Matrix& rho) { return e * rho * e.adjoint(); });
    return run_with(bm, psi);
  }

  AverageFidelity average_fidelity() const {
    const Matrix channel = recovered_channel();
    auto fidelity_of = [&](const Vector& psi) {
      const Matrix rho = psi * psi.adjoint();
      const Matrix out = unvectorize(channel * vectorize(rho), 2);
      return (psi.adjoint() * out * psi)(0, 0).real();
    };
    AverageFidelity avg;
    if (config_.averaging == AveragingMode::two_design_exact) {
      const auto states = two_design_states();
      for (const auto& s : states) avg.mean += fidelity_of(s);
      avg.mean /= static_cast<double>(states.size());
      avg.samples = states.size();
      return avg;
    }
    std::mt19937_64 rng(config_.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < config_.samples; ++i) {
      Vector psi(2);
      for (Eigen::Index k = 0; k < 2; ++k) psi(k) = cplx(normal(rng), normal(rng));
      psi.normalize();
      const double f = fidelity_of(psi);
      sum += f;
      sum_sq += f * f;
    }
    const double n = static_cast<double>(config_.samples);
    avg.mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * avg.mean * avg.mean) / (n - 1.0));
    avg.standard_error = std::sqrt(var / n);
    avg.samples = config_.samples;
    return avg;
  }

  /// Eigenstates of sigma_x, sigma_y and sigma_z.
  static std::vector<Vector> two_design_states() {
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<Vector> out;
    auto make = [&](cplx a, cplx b) {
      Vector v(2);
      v << a, b;
      out.push_back(v);
    };
    make(1.0, 0.0);
    make(0.0, 1.0);
    make(r, r);
    make(r, -r);
    make(r, cplx(0.0, r));
    make(r, cplx(0.0, -r));
    return out;
  }

 private:
  // Flip errors are handled by a Hadamard frame change on all qubits around the
  // channel, which maps sigma_x errors onto the sigma_z errors the code corrects.
  Matrix frame_errors(const Matrix& e) const {
    if (!config_.flip_errors) return e;
    const Matrix had = hadamard_all();
    return had * e * had;
  }

  static Matrix hadamard_all() {
    Matrix h1(2, 2);
    h1 << 1, 1, 1, -1;
    h1 /= std::sqrt(2.0);
    return kron(kron(h1, h1), h1);
  }

  Matrix error_stage(const Matrix& rho, double p) const {
    if (!config_.flip_errors) return apply_error_channel(rho, p, 'Z');
    const Matrix had = hadamard_all();
    return had * apply_error_channel(had * rho * had, p, 'X') * had;
  }

  Matrix recover(const detail::BranchMaps& bm) const {
    Matrix total = Matrix::Zero(4, 4);
    for (const auto& s : detail::all_syndromes()) {
      const char rec = table_.recovery(s);
      total += conjugation_superoperator(pauli(rec)) * bm.maps[detail::syndrome_index(s)];
    }
    return total;
  }

  ProtocolResult run_with(const detail::BranchMaps& bm, const Vector& psi) const {
    if (psi.size() != 2 || std::abs(psi.norm() - 1.0) > 1e-9) {
      throw Error(ErrorKind::invalid_argument, "input must be a normalised single-qubit state");
    }
    const Matrix rho = psi * psi.adjoint();
    ProtocolResult res;
    res.rho_out = Matrix::Zero(2, 2);
    for (const auto& s : detail::all_syndromes()) {
      const std::size_t i = detail::syndrome_index(s);
      const Matrix out = unvectorize(bm.maps[i] * vectorize(rho), 2);
      res.syndrome_probabilities[i] = out.trace().real();
      const Matrix p = pauli(table_.recovery(s));
      res.rho_out += p * out * p;
    }
    res.fidelity = (psi.adjoint() * res.rho_out * psi)(0, 0).real();
    return res;
  }

  ProtocolConfig config_;
  SyndromeTable table_;
  GateSet gates_;
  detail::BranchMaps channel_branches_;
};

inline ProtocolResult run_protocol(const SpinRegister& reg, const ProtocolConfig& config, const Vector& psi) {
  return RepetitionCode(reg, config).run(psi);
}

inline AverageFidelity average_correction_fidelity(const SpinRegister& reg, const ProtocolConfig& config) {
  return RepetitionCode(reg, config).average_fidelity();
}

/// Encoding unitary A^x_2(pi/2) A^x_1(pi/2), ideal or propagated through the AXY schedules.
inline OperatorMatrix build_encoding(const SpinRegister& reg, GateMode mode,
                                     const GateSet::SimulationSettings& settings = {}) {
  if (reg.n_nuclei() != 2) throw Error(ErrorKind::invalid_argument, "encoding needs exactly two nuclei");
  const GateSpec g1{0, GateAxis::x, kPi / 2.0};
  const GateSpec g2{1, GateAxis::x, kPi / 2.0};
  if (mode == GateMode::ideal) {
    return OperatorMatrix(ideal_gate(2, g2).matrix() * ideal_gate(2, g1).matrix(), OperatorKind::unitary);
  }
  auto unitary_of = [&](const GateSpec& spec) {
    GateTimeOptions opt;
    opt.k_dd = settings.sequence.k_dd;
    opt.variant = settings.sequence.variant;
    int n = settings.repetitions ? *settings.repetitions
                                 : optimize_gate_time(reg, spec, settings.fidelity_target, settings.n_max, opt).repetitions;
    for (; n <= settings.n_max; ++n) {
      try {
        return simulate_gate(reg, spec, n, settings.errors, settings.sequence).unitary;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::overlap) throw;
      }
    }
    throw Error(ErrorKind::infeasible_target, "no buildable encoding sequence");
  };
  return OperatorMatrix(unitary_of(g2) * unitary_of(g1), OperatorKind::unitary);
}

}  // namespace axy
