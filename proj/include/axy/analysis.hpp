#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "axy/error.hpp"
#include "axy/linalg.hpp"
#include "axy/pulses.hpp"
#include "axy/register.hpp"

namespace axy {

// ---------------------------------------------------------------------------
// Filter functions
// ---------------------------------------------------------------------------

struct FilterResult {
  double phi_x = 0.0;  // s
  double phi_y = 0.0;  // s
  double phi_tot = 0.0;

  std::complex<double> chi() const { return {phi_x, phi_y}; }
};

namespace detail {

// Integral of exp(i w s) over [a, b], written as exp(i w m) h sinc(w h / 2) to
// avoid cancellation on short intervals.
inline std::complex<double> phase_integral(double w, double a, double b) {
  const double h = b - a;
  const double m = 0.5 * (a + b);
  const double x = 0.5 * w * h;
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return std::exp(kI * (w * m)) * (h * sinc);
}

}  // namespace detail

/// chi(t) = int_0^t F(s) exp(i w s) ds for F = +1 at s = 0 flipping sign at each flip time.
inline FilterResult filter_function(std::span<const double> flip_times, double omega, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::domain, "filter time must be non-negative");
  std::complex<double> chi = 0.0;
  double sign = 1.0;
  double last = 0.0;
  for (double ft : flip_times) {
    if (ft < last) throw Error(ErrorKind::invalid_argument, "flip times must be sorted");
    if (ft >= t) break;
    chi += sign * detail::phase_integral(omega, last, ft);
    last = ft;
    sign = -sign;
  }
  chi += sign * detail::phase_integral(omega, last, t);
  return FilterResult{chi.real(), chi.imag(), std::abs(chi)};
}

inline FilterResult filter_function(const PulseSchedule& schedule, double omega, double t) {
  if (!(t >= 0.0 && t <= schedule.total_duration)) {
    throw Error(ErrorKind::domain, "filter time " + std::to_string(t) + " s outside the schedule");
  }
  const auto flips = schedule.flip_times();
  return filter_function(flips, omega, t);
}

/// Height and full width at half maximum of a sampled peak around its maximum.
struct PeakShape {
  double position = 0.0;
  double height = 0.0;
  double fwhm = 0.0;
};

inline PeakShape peak_shape(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw Error(ErrorKind::invalid_argument, "peak analysis needs matching grids of at least 3 points");
  }
  const std::size_t i_max = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = 0.5 * y[i_max];
  auto crossing = [&](std::size_t i, std::size_t j) {
    return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
  };
  std::size_t l = i_max;
  while (l > 0 && y[l - 1] > half) --l;
  std::size_t r = i_max;
  while (r + 1 < y.size() && y[r + 1] > half) ++r;
  if (l == 0 || r + 1 == y.size()) {
    throw Error(ErrorKind::domain, "peak is not resolved inside the frequency grid");
  }
  return PeakShape{x[i_max], y[i_max], crossing(r, r + 1) - crossing(l - 1, l)};
}

// ---------------------------------------------------------------------------
// Gaussian soft control
// ---------------------------------------------------------------------------

/// Gaussian profile f(t) = f0 exp(-(t - T/2)^2 / (2 sigma^2)) of the resonant
/// coefficient, optionally held piecewise constant on bins of width `bin_width`.
struct SoftControlProfile {
  double theta = 0.0;
  double duration = 0.0;  // T, s
  double sigma = 0.0;     // s
  double rate = 0.0;      // rotation rate per unit coefficient, rad/s
  double f0 = 0.0;
  double bin_width = 0.0;       // 0 for the continuous profile
  std::vector<double> bins;     // coefficient held on each bin
  double bin_scale = 1.0;       // renormalisation applied to the interval averages

  bool continuous() const { return bins.empty(); }

  double gaussian(double t) const {
    const double u = (t - 0.5 * duration) / sigma;
    return f0 * std::exp(-0.5 * u * u);
  }

  double value(double t) const {
    if (continuous()) return gaussian(t);
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(t / bin_width), 0.0,
                                                       static_cast<double>(bins.size() - 1)));
    return bins[i];
  }

  /// Rotation angle accumulated over the whole profile.
  double rotation_angle() const {
    if (continuous()) {
      return rate * f0 * std::sqrt(2.0 * kPi) * sigma * std::erf(duration / (std::sqrt(8.0) * sigma));
    }
    double sum = 0.0;
    for (double b : bins) sum += b;
    return rate * sum * bin_width;
  }
};

/// f0 = theta / (sqrt(2 pi) sigma c_n erf(T / (sqrt(8) sigma))). With a positive
/// bin width the bins hold interval averages, rescaled to the exact angle.
inline SoftControlProfile soft_control_profile(double theta, double duration, double sigma, double rate,
                                               double bin_width = 0.0) {
  if (!(duration > 0.0)) throw Error(ErrorKind::invalid_argument, "profile duration must be positive");
  if (!(sigma > 0.0)) throw Error(ErrorKind::invalid_argument, "profile width must be positive");
  if (rate == 0.0 || !std::isfinite(rate)) throw Error(ErrorKind::invalid_argument, "coupling rate must be non-zero");
  if (bin_width < 0.0) throw Error(ErrorKind::invalid_argument, "bin width must be non-negative");
  SoftControlProfile p;
  p.theta = theta;
  p.duration = duration;
  p.sigma = sigma;
  p.rate = rate;
  p.bin_width = bin_width;
  p.f0 = theta / (std::sqrt(2.0 * kPi) * sigma * rate * std::erf(duration / (std::sqrt(8.0) * sigma)));
  if (!(std::abs(p.f0) < max_fourier_coefficient())) {
    throw Error(ErrorKind::unreachable_coefficient,
                "amplitude bound exceeded: f0 = " + std::to_string(p.f0));
  }
  if (bin_width == 0.0) return p;

  const double count = duration / bin_width;
  const auto n = static_cast<std::size_t>(std::llround(count));
  if (n == 0 || std::abs(count - static_cast<double>(n)) > 1e-9 * count) {
    throw Error(ErrorKind::invalid_argument, "bin width must divide the profile duration");
  }
  const double s2 = std::sqrt(2.0) * sigma;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) * bin_width - 0.5 * duration;
    const double b = a + bin_width;
    const double integral = p.f0 * sigma * std::sqrt(0.5 * kPi) * (std::erf(b / s2) - std::erf(a / s2));
    p.bins.push_back(integral / bin_width);
  }
  const double angle = p.rotation_angle();
  p.bin_scale = theta / angle;
  for (double& b : p.bins) b *= p.bin_scale;
  return p;
}

/// L1 distance between a binned profile and its continuous Gaussian.
inline double profile_l1_error(const SoftControlProfile& binned, std::size_t samples_per_bin = 64) {
  if (binned.continuous()) return 0.0;
  double err = 0.0;
  const double h = binned.bin_width / static_cast<double>(samples_per_bin);
  for (std::size_t i = 0; i < binned.bins.size(); ++i) {
    for (std::size_t k = 0; k < samples_per_bin; ++k) {
      const double t = (static_cast<double>(i * samples_per_bin + k) + 0.5) * h;
      err += std::abs(binned.bins[i] - binned.gaussian(t)) * h;
    }
  }
  return err;
}

/// Decoupling efficiency |Tr U|/2 of a spin detuned by `delta` whose coupling
/// follows g_ratio times the profile: H(t) = g_ratio c f(t) (cos(delta t) I_x + sin(delta t) I_y).
inline double soft_decoupling_efficiency(const SoftControlProfile& profile, double delta, double g_ratio,
                                         std::size_t steps = 4000) {
  const Matrix ix = 0.5 * pauli_x();
  const Matrix iz = 0.5 * pauli_z();
  // In the frame rotating with delta about z the Hamiltonian is g(t) I_x - delta I_z.
  auto h_at = [&](double t) -> Matrix { return g_ratio * profile.rate * profile.value(t) * ix - delta * iz; };
  Matrix v = identity(2);
  if (!profile.continuous()) {
    for (std::size_t i = 0; i < profile.bins.size(); ++i) {
      const double mid = (static_cast<double>(i) + 0.5) * profile.bin_width;
      v = expm_hermitian(h_at(mid), profile.bin_width) * v;
    }
  } else {
    // Fourth-order Magnus step with two Gauss-Legendre nodes.
    const double h = profile.duration / static_cast<double>(steps);
    const double c = std::sqrt(3.0) / 6.0;
    for (std::size_t i = 0; i < steps; ++i) {
      const double t0 = static_cast<double>(i) * h;
      const Matrix h1 = h_at(t0 + (0.5 - c) * h);
      const Matrix h2 = h_at(t0 + (0.5 + c) * h);
      const Matrix comm = h1 * h2 - h2 * h1;
      // Omega = -i h/2 (H1 + H2) + (sqrt(3)/12) h^2 [H1, H2]; written as exp(-i K)
      const Matrix k = 0.5 * h * (h1 + h2) + kI * (std::sqrt(3.0) / 12.0) * h * h * comm;
      v = expm_hermitian(0.5 * (k + k.adjoint()), 1.0) * v;
    }
  }
  // back in the lab frame: U = exp(-i delta T I_z) V
  const Matrix lab = expm_hermitian(delta * iz, profile.duration) * v;
  return 0.5 * std::abs(lab.trace());
}

// ---------------------------------------------------------------------------
// Coupling abundance
// ---------------------------------------------------------------------------

inline constexpr double kDiamondLatticeConstant = 3.567e-10;  // m

/// Expected number of 13C spins with hyperfine coupling at least `threshold`:
/// (4/3) pi rho p alpha / A with rho = 8 / a^3 and alpha = (mu0/4pi) hbar |gamma_e| gamma_C.
inline double coupling_abundance(double threshold, double p13c, const PhysicalConstants& c = {},
                                 double lattice_constant = kDiamondLatticeConstant) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::invalid_argument, "threshold must be positive");
  if (!(p13c >= 0.0 && p13c <= 1.0)) throw Error(ErrorKind::invalid_argument, "abundance must lie in [0, 1]");
  const double rho = 8.0 / (lattice_constant * lattice_constant * lattice_constant);
  const double alpha = c.mu_0 / (4.0 * kPi) * c.hbar * std::abs(c.gamma_e) * c.gamma_c13;
  return 4.0 / 3.0 * kPi * rho * p13c * alpha / threshold;
}

/// Probability that both Poisson counts are at least one.
inline double joint_abundance_probability(double expected_first, double expected_second) {
  return (1.0 - std::exp(-expected_first)) * (1.0 - std::exp(-expected_second));
}

}  // namespace axy
