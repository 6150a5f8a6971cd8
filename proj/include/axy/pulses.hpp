#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "axy/error.hpp"
#include "axy/linalg.hpp"

namespace axy {

// ---------------------------------------------------------------------------
// Fourier coefficients of a +-1 modulation function
// ---------------------------------------------------------------------------

/// a[k], b[k] for k = 0..k_max. a[0] holds the mean of F, b[0] is zero.
struct FourierSeries {
  std::vector<double> a;
  std::vector<double> b;

  double mean() const { return a.front(); }
};

/// Coefficients of F(t) = sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t) on the
/// unit period, with F(0) = +1 and a sign flip at each position.
inline FourierSeries fourier_coefficients(std::span<const double> positions, int k_max) {
  if (k_max < 0) throw Error(ErrorKind::invalid_argument, "k_max must be non-negative");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!(positions[i] >= 0.0 && positions[i] <= 1.0)) {
      throw Error(ErrorKind::invalid_argument, "pulse positions must lie in [0, 1]");
    }
    if (i > 0 && positions[i] < positions[i - 1]) {
      throw Error(ErrorKind::invalid_argument, "pulse positions must be sorted");
    }
  }
  if (positions.size() % 2 != 0) {
    throw Error(ErrorKind::invalid_argument, "a periodic modulation needs an even number of flips");
  }

  FourierSeries out;
  out.a.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  out.b.assign(static_cast<std::size_t>(k_max) + 1, 0.0);

  double mean = 0.0;
  double sign = 1.0;
  double last = 0.0;
  for (double x : positions) {
    mean += sign * (x - last);
    last = x;
    sign = -sign;
  }
  mean += sign * (1.0 - last);
  out.a[0] = mean;

  for (int k = 1; k <= k_max; ++k) {
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const double s = (i % 2 == 0) ? 1.0 : -1.0;  // (-1)^(i+1) for 1-based i
      const double arg = kTwoPi * k * positions[i];
      sa += s * std::sin(arg);
      sb -= s * (std::cos(arg) - 1.0);
    }
    out.a[k] = 2.0 / (kPi * k) * sa;
    out.b[k] = 2.0 / (kPi * k) * sb;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Composite-pulse layout
// ---------------------------------------------------------------------------

enum class Parity { even, odd };

/// Knill sub-pulse phase offsets, added to the X (0) or Y (pi/2) base phase.
inline constexpr std::array<double, 5> kKnillPhases = {kPi / 6.0, 0.0, kPi / 2.0, 0.0, kPi / 6.0};

/// Largest |f_1| reachable with f_3 = 0: (8 cos(pi/9) - 4) / pi.
inline double max_fourier_coefficient() { return (8.0 * std::cos(kPi / 9.0) - 4.0) / kPi; }

/// Five sub-pulse positions inside a composite of length tau/2, as fractions
/// of tau. Positions are symmetric about the composite centre 1/4.
struct CompositePulseLayout {
  std::array<double, 5> positions{0.05, 0.15, 0.25, 0.35, 0.45};
  Parity parity = Parity::even;

  static CompositePulseLayout symmetric(double x1, double x2, Parity parity) {
    return CompositePulseLayout{{x1, x2, 0.25, 0.5 - x2, 0.5 - x1}, parity};
  }

  /// Offset of the composite blocks inside the period (odd layouts start a quarter later).
  double offset() const { return parity == Parity::even ? 0.0 : 0.25; }

  /// Ten flip positions in (0, 1] for one period, sorted.
  std::vector<double> period_positions() const {
    std::vector<double> out;
    out.reserve(10);
    for (double half : {0.0, 0.5}) {
      for (double x : positions) {
        double p = x + half + offset();
        if (p > 1.0) p -= 1.0;
        out.push_back(p);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  void validate() const {
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (!(positions[i] > 0.0 && positions[i] < 0.5)) {
        throw Error(ErrorKind::invalid_argument, "composite positions must lie in (0, 1/2)");
      }
      if (i > 0 && !(positions[i] > positions[i - 1])) {
        throw Error(ErrorKind::invalid_argument, "composite positions must be strictly increasing");
      }
    }
  }
};

namespace detail {

// Closed form of a_k (odd k) for the symmetric even layout.
inline double symmetric_coefficient(int k, double x1, double x2) {
  const double centre = ((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
  return 4.0 / (kPi * k) *
         (2.0 * std::sin(kTwoPi * k * x1) - 2.0 * std::sin(kTwoPi * k * x2) + centre);
}

inline double symmetric_coefficient_derivative(int k, double x) {
  return 16.0 * std::cos(kTwoPi * k * x);
}

inline bool inside_layout_domain(double x1, double x2) {
  return x1 > 0.0 && x2 > x1 && x2 < 0.25;
}

inline int suppressed_partner(int k_dd) {
  if (k_dd == 1) return 3;
  if (k_dd == 3) return 1;
  throw Error(ErrorKind::invalid_argument,
              "resonant harmonic must be 1 or 3 for the five-pulse composite layout, got " +
                  std::to_string(k_dd));
}

}  // namespace detail

/// Open interval of reachable coefficients at the resonant harmonic.
inline std::pair<double, double> attainable_interval(int k_dd) {
  detail::suppressed_partner(k_dd);
  const double bound = k_dd == 1 ? max_fourier_coefficient() : 4.0 / kPi;
  return {-bound, bound};
}

struct SolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-14;
};

struct LayoutSolution {
  CompositePulseLayout layout;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves for the composite layout whose period has coefficient `target` at
/// harmonic k_dd and vanishing coefficients at the other harmonics 1..4. Even
/// parity yields a cosine series, odd parity a sine series.
inline LayoutSolution solve_axy_positions(double target, int k_dd, Parity parity,
                                          SolverOptions options = {}) {
  const int partner = detail::suppressed_partner(k_dd);
  const auto [lo, hi] = attainable_interval(k_dd);
  if (!(target > lo && target < hi)) {
    throw Error(ErrorKind::unreachable_coefficient,
                "target " + std::to_string(target) + " outside (" + std::to_string(lo) + ", " +
                    std::to_string(hi) + ") for harmonic " + std::to_string(k_dd));
  }

  auto residual = [&](double x1, double x2) {
    return Eigen::Vector2d(detail::symmetric_coefficient(k_dd, x1, x2) - target,
                           detail::symmetric_coefficient(partner, x1, x2));
  };

  // Equidistant sub-pulses first, then a deterministic grid over the domain.
  std::vector<std::pair<double, double>> guesses{{0.05, 0.15}};
  constexpr int kGrid = 12;
  std::vector<std::pair<double, std::pair<double, double>>> grid;
  for (int i = 1; i < kGrid; ++i) {
    for (int j = i + 1; j < kGrid; ++j) {
      const double x1 = 0.25 * i / kGrid;
      const double x2 = 0.25 * j / kGrid;
      grid.push_back({residual(x1, x2).norm(), {x1, x2}});
    }
  }
  std::stable_sort(grid.begin(), grid.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  for (const auto& g : grid) guesses.push_back(g.second);

  double best = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (const auto& [g1, g2] : guesses) {
    double x1 = g1;
    double x2 = g2;
    Eigen::Vector2d r = residual(x1, x2);
    for (int it = 0; it < options.max_iterations; ++it) {
      ++total_iterations;
      if (r.cwiseAbs().maxCoeff() < options.tolerance) break;
      Eigen::Matrix2d jac;
      jac << detail::symmetric_coefficient_derivative(k_dd, x1),
          -detail::symmetric_coefficient_derivative(k_dd, x2),
          detail::symmetric_coefficient_derivative(partner, x1),
          -detail::symmetric_coefficient_derivative(partner, x2);
      if (std::abs(jac.determinant()) < 1e-14) break;
      const Eigen::Vector2d step = -jac.partialPivLu().solve(r);
      double damping = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls, damping *= 0.5) {
        const double n1 = x1 + damping * step(0);
        const double n2 = x2 + damping * step(1);
        if (!detail::inside_layout_domain(n1, n2)) continue;
        const Eigen::Vector2d nr = residual(n1, n2);
        if (nr.norm() < r.norm() || nr.cwiseAbs().maxCoeff() < options.tolerance) {
          x1 = n1;
          x2 = n2;
          r = nr;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    const double res = r.cwiseAbs().maxCoeff();
    best = std::min(best, res);
    if (res < 1e-12) {
      return LayoutSolution{CompositePulseLayout::symmetric(x1, x2, parity), res,
                            total_iterations};
    }
  }
  throw Error(ErrorKind::solver_failed, "no layout found for target " + std::to_string(target) +
                                            ", best residual " + std::to_string(best));
}

/// Deviation of a layout's coefficients from the requested ones over 0..k_max.
struct LayoutResiduals {
  double target_error = 0.0;
  double suppressed_max = 0.0;   // largest |coefficient| that should vanish (same parity, k <= 4)
  double other_parity_max = 0.0;  // largest |coefficient| of the other series, k <= k_max
};

inline LayoutResiduals layout_residuals(const CompositePulseLayout& layout, double target,
                                        int k_dd, int k_max = 8) {
  const auto positions = layout.period_positions();
  const FourierSeries fs = fourier_coefficients(positions, std::max(k_max, 4));
  const auto& same = layout.parity == Parity::even ? fs.a : fs.b;
  const auto& other = layout.parity == Parity::even ? fs.b : fs.a;
  LayoutResiduals out;
  out.target_error = std::abs(same[k_dd] - target);
  out.suppressed_max = std::abs(fs.mean());
  for (int k = 1; k <= 4; ++k) {
    if (k != k_dd) out.suppressed_max = std::max(out.suppressed_max, std::abs(same[k]));
  }
  for (int k = 1; k <= k_max; ++k) out.other_parity_max = std::max(out.other_parity_max, std::abs(other[k]));
  return out;
}

// ---------------------------------------------------------------------------
// Sequences and schedules
// ---------------------------------------------------------------------------

enum class SequenceVariant { axy4, axy8 };

inline int composites_per_repetition(SequenceVariant v) { return v == SequenceVariant::axy8 ? 8 : 4; }

/// Base phases of the composite pulses: X-Y-X-Y-Y-X-Y-X (AXY-8) or X-Y-X-Y (AXY-4).
inline std::vector<double> composite_base_phases(SequenceVariant v) {
  const double x = 0.0;
  const double y = kPi / 2.0;
  if (v == SequenceVariant::axy8) return {x, y, x, y, y, x, y, x};
  return {x, y, x, y};
}

struct AxySequenceSpec {
  SequenceVariant variant = SequenceVariant::axy8;
  int repetitions = 1;
  double tau = 0.0;  // s
  int k_dd = 1;
  double target_f = 0.0;
  CompositePulseLayout layout;
  double rabi = kTwoPi * 20e6;  // rad/s
  bool instantaneous = false;
  double max_width_ratio = 0.05;
  std::array<double, 5> knill_phases = kKnillPhases;

  Parity parity() const { return layout.parity; }
  double pulse_width() const { return kPi / rabi; }
  double repetition_period() const { return 0.5 * tau * composites_per_repetition(variant); }
  double duration() const { return repetition_period() * repetitions; }

  void validate() const {
    if (repetitions < 1) throw Error(ErrorKind::invalid_argument, "repetitions must be positive");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorKind::invalid_argument, "tau must be positive");
    if (k_dd < 1) throw Error(ErrorKind::invalid_argument, "k_DD must be positive");
    if (!(std::abs(target_f) < max_fourier_coefficient() || k_dd != 1)) {
      throw Error(ErrorKind::unreachable_coefficient, "target coefficient out of bounds");
    }
    layout.validate();
    if (!instantaneous) {
      if (!(rabi > 0.0)) throw Error(ErrorKind::invalid_argument, "Rabi frequency must be positive");
      if (pulse_width() / tau >= max_width_ratio) {
        throw Error(ErrorKind::overlap, "pulse width " + std::to_string(pulse_width()) +
                                            " s is not small against tau " + std::to_string(tau) + " s");
      }
    }
  }
};

/// Solves the layout and assembles a sequence spec in one step.
inline AxySequenceSpec make_sequence(double target_f, int k_dd, Parity parity, double tau,
                                     int repetitions, double rabi,
                                     SequenceVariant variant = SequenceVariant::axy8) {
  AxySequenceSpec spec;
  spec.variant = variant;
  spec.repetitions = repetitions;
  spec.tau = tau;
  spec.k_dd = k_dd;
  spec.target_f = target_f;
  spec.layout = solve_axy_positions(target_f, k_dd, parity).layout;
  spec.rabi = rabi;
  return spec;
}

struct Pulse {
  double start = 0.0;     // s
  double duration = 0.0;  // s; zero for instantaneous pulses
  double phase = 0.0;     // rad
  double amplitude = 0.0;  // rad/s, area amplitude * duration = pi
  double flip_time = 0.0;  // nominal sign-flip time of the modulation function
};

struct PulseSchedule {
  std::vector<Pulse> pulses;
  double total_duration = 0.0;
  bool instantaneous = false;
  double repetition_period = 0.0;  // 0 when the schedule has no repeating block

  std::vector<double> flip_times() const {
    std::vector<double> out;
    out.reserve(pulses.size());
    for (const auto& p : pulses) out.push_back(p.flip_time);
    return out;
  }
};

inline constexpr double kMinimumGapInWidths = 1.1;

/// Compiles an AXY sequence into a timed pulse list. Finite pulses are centred
/// on their flip times and clamped into [0, total]. Odd layouts wrap the tail of
/// the final composite to the start of the sequence.
inline PulseSchedule build_schedule(const AxySequenceSpec& spec) {
  spec.validate();
  const double total = spec.duration();
  const double rep = spec.repetition_period();
  const auto bases = composite_base_phases(spec.variant);
  const double width = spec.instantaneous ? 0.0 : spec.pulse_width();
  const double eps = 1e-12 * total;

  PulseSchedule sched;
  sched.total_duration = total;
  sched.instantaneous = spec.instantaneous;
  sched.repetition_period = rep;
  for (int r = 0; r < spec.repetitions; ++r) {
    for (std::size_t c = 0; c < bases.size(); ++c) {
      for (std::size_t i = 0; i < 5; ++i) {
        double t = r * rep + (0.5 * static_cast<double>(c) + spec.layout.offset() +
                              spec.layout.positions[i]) * spec.tau;
        if (t > total + eps) t -= total;
        Pulse p;
        p.flip_time = t;
        p.phase = bases[c] + spec.knill_phases[i];
        p.duration = width;
        p.amplitude = spec.instantaneous ? 0.0 : spec.rabi;
        p.start = std::clamp(t - 0.5 * width, 0.0, total - width);
        sched.pulses.push_back(p);
      }
    }
  }
  std::stable_sort(sched.pulses.begin(), sched.pulses.end(),
                   [](const Pulse& l, const Pulse& r) { return l.flip_time < r.flip_time; });

  const double min_gap = kMinimumGapInWidths * width;
  for (std::size_t i = 1; i < sched.pulses.size(); ++i) {
    const Pulse& a = sched.pulses[i - 1];
    const Pulse& b = sched.pulses[i];
    const double gap = b.start - (a.start + a.duration);
    if (gap < min_gap || b.flip_time <= a.flip_time) {
      throw Error(ErrorKind::overlap,
                  "pulses " + std::to_string(i - 1) + " (t=" + std::to_string(a.flip_time) +
                      " s) and " + std::to_string(i) + " (t=" + std::to_string(b.flip_time) +
                      " s) are separated by " + std::to_string(gap) + " s, need " +
                      std::to_string(min_gap) + " s");
    }
  }
  return sched;
}

/// Schedule `first` followed by `second`. The repeating block is kept only when both share it.
inline PulseSchedule concatenate(const PulseSchedule& first, const PulseSchedule& second) {
  if (first.instantaneous != second.instantaneous && !first.pulses.empty() && !second.pulses.empty()) {
    throw Error(ErrorKind::invalid_argument, "cannot mix instantaneous and finite-width schedules");
  }
  PulseSchedule out = first;
  out.instantaneous = first.pulses.empty() ? second.instantaneous : first.instantaneous;
  for (Pulse p : second.pulses) {
    p.start += first.total_duration;
    p.flip_time += first.total_duration;
    out.pulses.push_back(p);
  }
  out.total_duration = first.total_duration + second.total_duration;
  out.repetition_period = 0.0;
  if (first.repetition_period > 0.0 && first.repetition_period == second.repetition_period) {
    out.repetition_period = first.repetition_period;
  }
  return out;
}

/// F(t): +1 at t = 0, changing sign at every flip time strictly before t.
inline double modulation_function(const PulseSchedule& schedule, double t) {
  if (!(t >= 0.0 && t <= schedule.total_duration)) {
    throw Error(ErrorKind::domain, "time " + std::to_string(t) + " s outside the schedule");
  }
  std::size_t flips = 0;
  for (const auto& p : schedule.pulses) {
    if (p.flip_time < t) ++flips;
  }
  return flips % 2 == 0 ? 1.0 : -1.0;
}

inline void write_schedule_csv(std::ostream& os, const PulseSchedule& schedule) {
  const auto old_precision = os.precision(12);
  os << "start_s,duration_s,phase_rad,amplitude_rad_per_s\n";
  for (const auto& p : schedule.pulses) {
    os << p.start << ',' << p.duration << ',' << p.phase << ',' << p.amplitude << '\n';
  }
  os.precision(old_precision);
}

}  // namespace axy
