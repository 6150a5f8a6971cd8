// Acceptance checks. Prints one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance <n> ...    run the listed criteria only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "axy/analysis.hpp"
#include "axy/dynamics.hpp"
#include "axy/gates.hpp"
#include "axy/pulses.hpp"
#include "axy/qec.hpp"
#include "oracles.hpp"

using namespace axy;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ControlErrorModel scan_errors() {
  ControlErrorModel e;
  e.detuning = kTwoPi * 350.0;
  e.rabi_error = 0.0025;
  return e;
}

std::vector<GateScanRow> n_scan(const SpinRegister& reg, int n_min, int n_max) {
  std::vector<GateScanRow> rows;
  for (int n = n_min; n <= n_max; ++n) {
    rows.push_back(scan_point(reg, GateSpec{}, n, scan_errors(), GateSequenceOptions{}));
  }
  return rows;
}

// ---------------------------------------------------------------------------

Outcome pulse_solver_round_trip() {
  Stopwatch sw;
  oracle::Gen gen(2024);
  double worst_target = 0.0;
  double worst_suppressed = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double f = gen.uniform(-1.1, 1.1);
    const auto positions = solve_axy_positions(f, 1, Parity::even).layout.period_positions();
    worst_target = std::max(worst_target, std::abs(oracle::quadrature_fourier(positions, 1).a - f));
    worst_suppressed = std::max(worst_suppressed, std::abs(oracle::quadrature_fourier(positions, 0).a));
    for (int k : {2, 3, 4}) {
      worst_suppressed = std::max(worst_suppressed, std::abs(oracle::quadrature_fourier(positions, k).a));
    }
  }
  const double t = sw.seconds();
  return {worst_target < 1e-9 && worst_suppressed < 1e-9 && t < 10.0,
          "max target error " + fmt("%.2e", worst_target) + ", max suppressed " + fmt("%.2e", worst_suppressed) +
              ", " + fmt("%.2f", t) + " s"};
}

Outcome gate_infidelity_threshold() {
  Stopwatch sw;
  const auto rows = n_scan(reference_register(), 4, 40);
  double best = 0.0;
  int best_n = 0;
  for (const auto& r : rows) {
    if (!std::isnan(r.simulated) && r.simulated > best) {
      best = r.simulated;
      best_n = r.repetitions;
    }
  }
  const double t = sw.seconds();
  return {1.0 - best < 1e-3 && t < 300.0,
          "min infidelity " + fmt("%.3e", 1.0 - best) + " at N = " + std::to_string(best_n) + ", " +
              fmt("%.1f", t) + " s"};
}

struct AgreementScan {
  double high_field = 0.0;
  double max_diff = 0.0;
  std::size_t compared = 0;
  std::vector<std::pair<int, double>> maxima;  // N, weak-coupling margin
};

AgreementScan agreement_scan(double field) {
  SpinRegister reg = reference_register();
  reg.field = field;
  AgreementScan out;
  out.high_field = high_field_margin(reg);
  const auto rows = n_scan(reg, 4, 40);
  std::vector<double> sim;
  for (const auto& r : rows) {
    sim.push_back(r.simulated);
    if (std::isnan(r.simulated)) continue;
    out.max_diff = std::max(out.max_diff, std::abs(r.predicted - r.simulated));
    ++out.compared;
  }
  for (std::size_t i = 1; i + 1 < sim.size(); ++i) {
    if (std::isnan(sim[i - 1]) || std::isnan(sim[i]) || std::isnan(sim[i + 1])) continue;
    if (sim[i] > sim[i - 1] && sim[i] >= sim[i + 1]) {
      out.maxima.emplace_back(rows[i].repetitions, weak_coupling_margin(reg, 0, rows[i].coefficient));
    }
  }
  return out;
}

// The high-field margin of the reference register at 600 G is about 15, so the
// factor-20 agreement check runs at 1000 G; 600 G is reported alongside.
Outcome analytic_numeric_agreement() {
  const AgreementScan strong = agreement_scan(0.1);
  const AgreementScan ref = agreement_scan(0.06);
  constexpr double kWeakCouplingFactor = 10.0;
  std::size_t excluded = 0;
  std::string maxima;
  for (const auto& [n, wc] : strong.maxima) {
    if (wc < kWeakCouplingFactor) ++excluded;
    maxima += (maxima.empty() ? "" : " ") + std::to_string(n) + ":" + fmt("%.2f", wc);
  }
  const bool pass = strong.high_field >= 20.0 && strong.compared > 0 && strong.max_diff <= 5e-3 && excluded > 0;
  return {pass, "1000 G: high-field margin " + fmt("%.2f", strong.high_field) + ", max |pred-sim| " +
                    fmt("%.2e", strong.max_diff) + " over " + std::to_string(strong.compared) +
                    " points, local maxima N:margin [" + maxima + "], " + std::to_string(excluded) +
                    " excluded; 600 G: high-field margin " + fmt("%.2f", ref.high_field) + ", max |pred-sim| " +
                    fmt("%.2e", ref.max_diff)};
}

Outcome gate_time_ratios() {
  const SpinRegister reg = reference_register();
  const GateTimePlan p2 = optimize_gate_time(reg, GateSpec{}, 0.99, 400);
  const GateTimePlan p3 = optimize_gate_time(reg, GateSpec{}, 0.999, 400);
  const double r2 = p2.time_ratio();
  const double r3 = p3.time_ratio();
  return {r2 >= 1.76 && r2 <= 2.64 && r3 >= 3.52 && r3 <= 5.28,
          "T/T_min = " + fmt("%.4f", r2) + " (N = " + std::to_string(p2.repetitions) + ") at 1e-2, " +
              fmt("%.4f", r3) + " (N = " + std::to_string(p3.repetitions) + ") at 1e-3"};
}

Outcome decoupling_oracle() {
  Stopwatch sw;
  oracle::Gen gen(5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = gen.uniform(-10.0, 10.0);
    const double gr = gen.uniform(0.0, 3.0);
    const double phi = gen.uniform(0.0, kPi);
    worst = std::max(worst, std::abs(decoupling_efficiency(v, gr, phi) - oracle::decoupling_trace_rk4(v, gr, phi, 6000)));
  }
  const double t = sw.seconds();
  return {worst < 1e-9 && t < 10.0, "max deviation " + fmt("%.2e", worst) + " over 1000 points, " + fmt("%.2f", t) + " s"};
}

Outcome qec_correctness() {
  const RepetitionCode code(reference_register(), ProtocolConfig{});
  double worst = 0.0;
  for (const std::string err : {"III", "ZII", "IZI", "IIZ"}) {
    for (const auto& psi : RepetitionCode::two_design_states()) {
      worst = std::max(worst, 1.0 - code.run_with_error(err, psi).fidelity);
    }
  }
  const SyndromeTable& table = code.table();
  bool consistent = true;
  for (std::size_t a = 0; a < table.entries.size(); ++a) {
    for (std::size_t b = a + 1; b < table.entries.size(); ++b) {
      if (table.entries[a].recovery != table.entries[b].recovery &&
          table.entries[a].syndrome == table.entries[b].syndrome) {
        consistent = false;
      }
    }
  }
  std::string div;
  for (const auto& d : syndrome_table_divergences(table)) div += (div.empty() ? "" : "; ") + d;
  return {worst <= 1e-9 && consistent,
          "worst infidelity " + fmt("%.1e", worst) + ", table " + (consistent ? "consistent" : "inconsistent") +
              ", divergences from reference: " + (div.empty() ? "none" : div)};
}

Outcome qec_threshold() {
  Stopwatch sw;
  const SpinRegister reg = reference_register();
  ProtocolConfig config;
  config.p = 0.05;
  config.gate_mode = GateMode::simulated;
  const double coherent = RepetitionCode(reg, config).average_fidelity().mean;
  config.noise = calibrate_noise(1.0, 77.0, reg.transition_frequency(), reg.constants);
  const double noisy = RepetitionCode(reg, config).average_fidelity().mean;
  const double t = sw.seconds();
  const double drop = coherent - noisy;
  return {coherent >= 0.985 && drop < 0.005 && t < 900.0,
          "F(T1 = inf) = " + fmt("%.6f", coherent) + ", F(T1 = 1 s, 77 K) = " + fmt("%.6f", noisy) + ", drop " +
              fmt("%.2e", drop) + ", " + fmt("%.1f", t) + " s"};
}

Outcome iswap_identity() {
  double worst = 0.0;
  for (std::size_t j : {0u, 1u}) {
    worst = std::max(worst, 1.0 - gate_fidelity(compose_iswap(2, j).matrix(), direct_iswap(2, j)));
  }
  return {worst <= 1e-9, "worst 1 - F = " + fmt("%.1e", worst)};
}

Outcome lindblad_properties() {
  const SpinRegister reg = reference_register();
  const NoiseModel noise = calibrate_noise(1.0, 77.0, reg.transition_frequency(), reg.constants);
  oracle::Gen gen(9);
  double worst_trace = 0.0;
  for (int n : {6, 12, 20}) {
    const PulseSchedule s = build_schedule(gate_sequence(reg, GateSpec{}, n));
    const Matrix sup = lindblad_propagator(reg, s, scan_errors(), noise).matrix();
    for (int k = 0; k < 5; ++k) {
      const Matrix rho = apply_superoperator(sup, gen.density(8));
      worst_trace = std::max(worst_trace, std::abs(rho.trace() - cplx(1.0)));
    }
  }
  // H = 0: bare electron, no detuning, long free evolution
  SpinRegister bare;
  bare.field = reg.field;
  double worst_ratio = 0.0;
  for (double temperature : {4.0, 77.0, 300.0}) {
    const NoiseModel m = calibrate_noise(1e-3, temperature, bare.transition_frequency(), bare.constants);
    PulseSchedule idle;
    idle.total_duration = 50e-3;
    Matrix rho0 = Matrix::Zero(2, 2);
    rho0(0, 0) = 1.0;
    const Matrix rho = propagate_lindblad(bare, idle, ControlErrorModel{}, m, rho0).rho.matrix();
    worst_trace = std::max(worst_trace, std::abs(rho.trace() - cplx(1.0)));
    const double ratio = rho(0, 0).real() / rho(1, 1).real();
    worst_ratio = std::max(worst_ratio, std::abs(ratio - oracle::gibbs_ratio(m.occupation)));
  }
  return {worst_trace <= 1e-9 && worst_ratio <= 1e-6,
          "max trace error " + fmt("%.1e", worst_trace) + ", max Gibbs ratio error " + fmt("%.1e", worst_ratio)};
}

Outcome abundance_values() {
  const SpinRegister reg = reference_register();
  const double a1 = reg.nuclei[0].hyperfine.norm();
  const double a2 = reg.nuclei[1].hyperfine.norm();
  const double n1 = coupling_abundance(a1, 0.011);
  const double n2 = coupling_abundance(a2, 0.011);
  const bool values = std::abs(n1 / 0.48 - 1.0) <= 0.05 && std::abs(n2 / 0.81 - 1.0) <= 0.05;
  oracle::Gen gen(10);
  const double invariant = n1 * a1;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = kTwoPi * gen.uniform(1e3, 1e6);
    worst = std::max(worst, std::abs(coupling_abundance(a, 0.011) * a / invariant - 1.0));
  }
  return {values && worst <= 1e-12,
          "N(A >= A1) = " + fmt("%.4f", n1) + " (expected 0.48), N(A >= A2) = " + fmt("%.4f", n2) +
              " (expected 0.81), power-law deviation " + fmt("%.1e", worst) + ", joint probability " +
              fmt("%.4f", joint_abundance_probability(n1, n2))};
}

Outcome soft_control_oscillation() {
  const SpinRegister reg = reference_register();
  const auto frames = derive_frames(reg);
  const double tau = resonant_period(reg, 0);
  const double delta = frames[1].omega - frames[0].omega;
  const double g_ratio = frames[1].g / frames[0].g;
  const double rate = reg.ms * frames[0].g / 4.0;
  const double theta = kPi / 2.0;
  double lo_c = 2.0;
  double hi_c = -1.0;
  double lo_s = 2.0;
  double hi_s = -1.0;
  for (int n = 20; n <= 40; ++n) {
    const double t = sequence_duration(tau, n, SequenceVariant::axy8);
    const double dc = decoupling_efficiency(0.5 * delta * t, g_ratio, theta);
    const double ds = soft_decoupling_efficiency(soft_control_profile(theta, t, 0.15 * t, rate), delta, g_ratio);
    lo_c = std::min(lo_c, dc);
    hi_c = std::max(hi_c, dc);
    lo_s = std::min(lo_s, ds);
    hi_s = std::max(hi_s, ds);
  }
  const double amp_c = hi_c - lo_c;
  const double amp_s = hi_s - lo_s;
  return {amp_s < amp_c, "oscillation amplitude over N in [20, 40]: constant " + fmt("%.3e", amp_c) +
                             ", Gaussian sigma/T = 0.15 " + fmt("%.3e", amp_s)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pulse-solver round trip", pulse_solver_round_trip},
      {"gate infidelity below 1e-3", gate_infidelity_threshold},
      {"analytic vs numeric fidelity", analytic_numeric_agreement},
      {"gate-time ratios", gate_time_ratios},
      {"decoupling-efficiency oracle", decoupling_oracle},
      {"QEC correctness", qec_correctness},
      {"QEC threshold", qec_threshold},
      {"iSWAP identity", iswap_identity},
      {"Lindblad properties", lindblad_properties},
      {"abundance values", abundance_values},
      {"soft-control oscillation", soft_control_oscillation}};

  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k - 1));
  }
  if (selected.empty()) {
    for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
  }

  int failures = 0;
  for (std::size_t i : selected) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
