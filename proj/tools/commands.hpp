#pragma once

// Subcommand implementations. Each command parses the whole config first and
// only then computes; outputs are written in a fixed order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "axy/analysis.hpp"
#include "axy/dynamics.hpp"
#include "axy/error.hpp"
#include "axy/gates.hpp"
#include "axy/pulses.hpp"
#include "axy/qec.hpp"
#include "axy/register.hpp"
#include "config.hpp"
#include "output.hpp"

#ifndef AXY_VERSION
#define AXY_VERSION "0.0.0"
#endif

namespace axy::cli {

namespace fs = std::filesystem;

struct RunContext {
  std::string command;
  ConfigFile file;
  ExperimentConfig config;
  fs::path out;
  std::optional<std::uint64_t> seed;  // --seed
  unsigned threads = 1;
  std::vector<std::string> written;

  fs::path path(const std::string& name) {
    written.push_back(name);
    return out / name;
  }
};

/// 2 config, 3 solver or feasibility, 4 numerical.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
    case ErrorKind::domain:
    case ErrorKind::dimension:
    case ErrorKind::uncalibratable:
      return 2;
    case ErrorKind::unreachable_coefficient:
    case ErrorKind::solver_failed:
    case ErrorKind::overlap:
    case ErrorKind::resonance_mismatch:
    case ErrorKind::infeasible_target:
    case ErrorKind::unaddressable_spin:
    case ErrorKind::degenerate_code:
      return 3;
    case ErrorKind::numerical:
      return 4;
  }
  return 4;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline const char* variant_name(SequenceVariant v) { return v == SequenceVariant::axy8 ? "AXY8" : "AXY4"; }
inline const char* parity_name(Parity p) { return p == Parity::even ? "even" : "odd"; }

inline json sequence_json(const AxySequenceSpec& s) {
  json j;
  j["variant"] = variant_name(s.variant);
  j["repetitions"] = s.repetitions;
  j["tau_s"] = s.tau;
  j["k_dd"] = s.k_dd;
  j["target_f"] = s.target_f;
  j["parity"] = parity_name(s.parity());
  j["positions"] = s.layout.positions;
  j["rabi_rad_per_s"] = s.rabi;
  j["instantaneous"] = s.instantaneous;
  j["pulse_width_s"] = s.instantaneous ? 0.0 : s.pulse_width();
  j["duration_s"] = s.duration();
  j["knill_phases_rad"] = s.knill_phases;
  return j;
}

inline json noise_json(const std::optional<NoiseModel>& noise) {
  if (!noise) return nullptr;
  return json{{"T1_s", json_number(noise->t1)},
              {"temperature_K", noise->temperature},
              {"omega_nv_rad_per_s", noise->omega_nv},
              {"occupation", json_number(noise->occupation)},
              {"lambda_per_s", noise->lambda},
              {"decay_rate_per_s", noise->decay_rate()},
              {"excitation_rate_per_s", noise->excitation_rate()}};
}

inline void write_manifest(RunContext& ctx) {
  json m;
  m["tool"] = "axy";
  m["version"] = AXY_VERSION;
  m["command"] = ctx.command;
  m["config_fnv1a64"] = hex64(fnv1a(ctx.file.text));
  m["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
  m["outputs"] = ctx.written;
  write_json(ctx.out / "manifest.json", m);
}

// ---------------------------------------------------------------------------
// solve-pulses
// ---------------------------------------------------------------------------

/// The sequence described by the sequence block: an explicit coefficient and
/// tau when given, otherwise the resonant gate sequence.
inline AxySequenceSpec configured_sequence(const SpinRegister& reg, const SequenceBlock& s) {
  AxySequenceSpec seq;
  seq.variant = s.variant;
  seq.k_dd = s.k_dd;
  seq.tau = s.tau ? *s.tau : resonant_period(reg, s.gate.target, s.k_dd);
  seq.rabi = s.rabi;
  seq.instantaneous = s.instantaneous;
  seq.max_width_ratio = s.max_width_ratio;
  if (s.target_f) {
    seq.repetitions = s.repetitions.value_or(1);
    seq.target_f = *s.target_f;
  } else {
    if (s.repetitions) {
      seq.repetitions = *s.repetitions;
    } else {
      GateTimeOptions opt;
      opt.k_dd = s.k_dd;
      opt.variant = s.variant;
      seq.repetitions = optimize_gate_time(reg, s.gate, 0.999, 400, opt).repetitions;
    }
    seq.target_f = required_coefficient(reg, s.gate, seq.duration());
  }
  const Parity parity = s.parity.value_or(parity_for(s.gate.axis));
  seq.layout = solve_axy_positions(seq.target_f, s.k_dd, parity).layout;
  return seq;
}

inline void schedule_csv(const PulseSchedule& sched, const fs::path& path) {
  CsvTable t({"start_s", "duration_s", "phase_rad", "amplitude_rad_per_s"});
  for (const auto& p : sched.pulses) t.add({p.start, p.duration, p.phase, p.amplitude});
  t.write(path);
}

inline int cmd_solve_pulses(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const SpinRegister& reg = cfg.require_register();
  const SequenceBlock& s = cfg.require_sequence();

  const Parity parity = s.parity.value_or(parity_for(s.gate.axis));
  const AxySequenceSpec seq = configured_sequence(reg, s);
  const LayoutSolution sol = solve_axy_positions(seq.target_f, seq.k_dd, parity);
  const PulseSchedule sched = build_schedule(seq);
  const LayoutResiduals res = layout_residuals(seq.layout, seq.target_f, seq.k_dd);
  const auto positions = seq.layout.period_positions();
  const FourierSeries fs_ = fourier_coefficients(positions, 8);

  if (cfg.output.csv) schedule_csv(sched, ctx.path("schedule.csv"));
  if (cfg.output.json) {
    json j;
    j["sequence"] = sequence_json(seq);
    j["solver"] = {{"residual", sol.residual}, {"iterations", sol.iterations}};
    j["residuals"] = {{"target_error", res.target_error},
                      {"suppressed_max", res.suppressed_max},
                      {"other_parity_max", res.other_parity_max}};
    j["fourier"] = {{"a", fs_.a}, {"b", fs_.b}};
    j["pulses"] = sched.pulses.size();
    j["total_duration_s"] = sched.total_duration;
    write_json(ctx.path("schedule.json"), j);
  }
  std::printf("f_%d = %.12g (%s), residual %.3e, %zu pulses over %.6g s\n", seq.k_dd, seq.target_f,
              parity_name(parity), std::max(res.target_error, res.suppressed_max), sched.pulses.size(),
              sched.total_duration);
  return 0;
}

// ---------------------------------------------------------------------------
// gate-scan
// ---------------------------------------------------------------------------

/// Interior local maxima of a sampled curve (NaNs are skipped).
inline std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (std::isnan(y[i - 1]) || std::isnan(y[i]) || std::isnan(y[i + 1])) continue;
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(i);
  }
  return out;
}

inline int cmd_gate_scan_frequency(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const SpinRegister& reg = cfg.require_register();
  const SequenceBlock& s = cfg.require_sequence();
  const ScanBlock& scan = *cfg.scan;
  const GateSequenceOptions opt = s.options();

  int n = 0;
  if (s.repetitions) {
    n = *s.repetitions;
  } else {
    GateTimeOptions to;
    to.k_dd = s.k_dd;
    to.variant = s.variant;
    n = optimize_gate_time(reg, s.gate, 0.999, scan.n_max, to).repetitions;
  }
  const AxySequenceSpec resonant = gate_sequence(reg, s.gate, n, opt);
  const Matrix ideal = ideal_gate(reg.n_nuclei(), s.gate).matrix();
  const double omega_n = kTwoPi * s.k_dd / resonant.tau;

  struct Row {
    double omega = 0.0;
    double tau = 0.0;
    double fidelity = std::numeric_limits<double>::quiet_NaN();
    std::string status;
  };
  const auto points = static_cast<std::size_t>(scan.frequency_points);
  auto rows = parallel_map<Row>(points, ctx.threads, [&](std::size_t i) {
    Row r;
    const double x = points == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    r.omega = omega_n * (1.0 + scan.frequency_span * x);
    r.tau = kTwoPi * s.k_dd / r.omega;
    if (!scan.simulate) return r;
    AxySequenceSpec seq = resonant;
    seq.tau = r.tau;
    try {
      const PulseSchedule sched = build_schedule(seq);
      const Matrix u = to_gate_frame(gate_frame(reg, sched), propagate_unitary(reg, sched, cfg.errors).matrix());
      r.fidelity = gate_fidelity(u, ideal);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::overlap) throw;
      r.status = to_string(e.kind());
    }
    return r;
  });

  CsvTable t({"omega_dd_rad_per_s", "N", "tau_s", "f_kdd", "predicted_fidelity", "simulated_fidelity",
              "infidelity", "status"});
  double best = -1.0;
  double best_omega = 0.0;
  for (const auto& r : rows) {
    const bool on_resonance = std::abs(r.tau - resonant.tau) <= 1e-9 * resonant.tau;
    const double pred = on_resonance ? predicted_fidelity(reg, s.gate, n, r.tau, s.k_dd, s.variant)
                                     : std::numeric_limits<double>::quiet_NaN();
    t.add({r.omega, static_cast<long long>(n), r.tau, resonant.target_f, pred, r.fidelity, 1.0 - r.fidelity,
           r.status.empty() ? std::string("ok") : r.status});
    if (!std::isnan(r.fidelity) && r.fidelity > best) {
      best = r.fidelity;
      best_omega = r.omega;
    }
  }
  if (cfg.output.csv) t.write(ctx.path("gate_scan.csv"));
  if (cfg.output.json) {
    json j;
    j["mode"] = "frequency";
    j["repetitions"] = n;
    j["omega_resonant_rad_per_s"] = omega_n;
    j["best_fidelity"] = json_number(best);
    j["best_omega_rad_per_s"] = best_omega;
    j["sequence"] = sequence_json(resonant);
    write_json(ctx.path("gate_scan.json"), j);
  }
  std::printf("frequency scan at N = %d: best fidelity %.9f\n", n, best);
  return 0;
}

inline int cmd_gate_scan(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const SpinRegister& reg = cfg.require_register();
  const SequenceBlock& s = cfg.require_sequence();
  if (!cfg.scan) config_error("config.scan", "missing required block");
  const ScanBlock& scan = *cfg.scan;
  derive_frames(reg);
  if (scan.mode == "frequency") return cmd_gate_scan_frequency(ctx);

  const GateSequenceOptions opt = s.options();
  const auto count = static_cast<std::size_t>(scan.n_max - scan.n_min + 1);
  const auto rows = parallel_map<GateScanRow>(count, ctx.threads, [&](std::size_t i) {
    return scan_point(reg, s.gate, scan.n_min + static_cast<int>(i), cfg.errors, opt, scan.simulate);
  });

  const double hf_margin = high_field_margin(reg, s.k_dd);
  const bool hf_valid = hf_margin >= scan.high_field_margin;
  CsvTable t({"N", "tau_s", "f_kdd", "predicted_fidelity", "simulated_fidelity", "infidelity",
              "weak_coupling_margin", "status"});
  std::vector<double> sim;
  double best = -1.0;
  int best_n = 0;
  double max_diff = 0.0;
  std::size_t compared = 0;
  for (const auto& r : rows) {
    const bool reachable = std::abs(r.coefficient) < attainable_interval(s.k_dd).second;
    const double wc = reachable ? weak_coupling_margin(reg, s.gate.target, r.coefficient)
                                : std::numeric_limits<double>::quiet_NaN();
    const std::string status = !r.status.empty() ? r.status : (scan.simulate ? "ok" : "predicted");
    t.add({static_cast<long long>(r.repetitions), r.tau, r.coefficient, r.predicted, r.simulated,
           1.0 - r.simulated, wc, status});
    sim.push_back(r.simulated);
    if (!std::isnan(r.simulated)) {
      if (r.simulated > best) {
        best = r.simulated;
        best_n = r.repetitions;
      }
      max_diff = std::max(max_diff, std::abs(r.predicted - r.simulated));
      ++compared;
    }
  }
  if (cfg.output.csv) t.write(ctx.path("gate_scan.csv"));
  if (cfg.output.json) {
    json maxima = json::array();
    for (std::size_t i : local_maxima(sim)) {
      const auto& r = rows[i];
      const double wc = weak_coupling_margin(reg, s.gate.target, r.coefficient);
      maxima.push_back({{"N", r.repetitions},
                        {"simulated_fidelity", r.simulated},
                        {"weak_coupling_margin", wc},
                        {"excluded_by_weak_coupling", wc < scan.weak_coupling_margin}});
    }
    json j;
    j["mode"] = "repetitions";
    j["n_min"] = scan.n_min;
    j["n_max"] = scan.n_max;
    j["best_N"] = best_n;
    j["best_fidelity"] = json_number(best);
    j["min_infidelity"] = json_number(best >= 0.0 ? 1.0 - best : std::nan(""));
    j["high_field_margin"] = hf_margin;
    j["high_field_required"] = scan.high_field_margin;
    j["high_field_valid"] = hf_valid;
    j["max_abs_predicted_minus_simulated"] = compared ? json(max_diff) : json(nullptr);
    j["local_maxima"] = maxima;
    j["errors"] = {{"detuning_rad_per_s", cfg.errors.detuning}, {"rabi_error", cfg.errors.rabi_error}};
    write_json(ctx.path("gate_scan.json"), j);
  }
  if (best_n > 0) {
    std::printf("N in [%d, %d]: best fidelity %.9f at N = %d (infidelity %.3e)\n", scan.n_min, scan.n_max, best,
                best_n, 1.0 - best);
  } else {
    std::printf("N in [%d, %d]: no simulated point\n", scan.n_min, scan.n_max);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// optimize-time
// ---------------------------------------------------------------------------

inline int cmd_optimize_time(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const SpinRegister& reg = cfg.require_register();
  const SequenceBlock& s = cfg.require_sequence();
  const OptimizeBlock ob = cfg.optimize.value_or(OptimizeBlock{});
  GateTimeOptions opt;
  opt.k_dd = s.k_dd;
  opt.variant = s.variant;

  std::vector<GateTimePlan> plans;
  for (double target : ob.fidelity_targets) plans.push_back(optimize_gate_time(reg, s.gate, target, ob.n_max, opt));

  CsvTable t({"fidelity_target", "N", "tau_s", "f_kdd", "predicted_fidelity", "duration_s", "minimum_time_s",
              "time_ratio"});
  json arr = json::array();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& p = plans[i];
    t.add({ob.fidelity_targets[i], static_cast<long long>(p.repetitions), p.tau, p.coefficient,
           p.predicted_fidelity, p.duration, p.minimum_time, p.time_ratio()});
    arr.push_back({{"fidelity_target", ob.fidelity_targets[i]},
                   {"N", p.repetitions},
                   {"tau_s", p.tau},
                   {"f_kdd", p.coefficient},
                   {"predicted_fidelity", p.predicted_fidelity},
                   {"duration_s", p.duration},
                   {"minimum_time_s", p.minimum_time},
                   {"time_ratio", p.time_ratio()}});
    std::printf("target %.6g: N = %d, T = %.6g s, T/T_min = %.4f\n", ob.fidelity_targets[i], p.repetitions,
                p.duration, p.time_ratio());
  }
  if (cfg.output.csv) t.write(ctx.path("optimize_time.csv"));
  if (cfg.output.json) write_json(ctx.path("optimize_time.json"), json{{"plans", arr}});
  return 0;
}

// ---------------------------------------------------------------------------
// qec
// ---------------------------------------------------------------------------

inline ProtocolConfig protocol_config(const ExperimentConfig& cfg, const QecBlock& q, std::uint64_t seed) {
  ProtocolConfig pc;
  pc.gate_mode = q.gate_mode;
  pc.p = q.p;
  pc.flip_errors = q.flip_errors;
  pc.noise = cfg.noise;
  pc.averaging = q.averaging;
  pc.samples = q.samples;
  pc.seed = seed;
  pc.simulation.fidelity_target = q.fidelity_target;
  pc.simulation.n_max = q.n_max;
  pc.simulation.repetitions = q.repetitions;
  pc.simulation.errors = cfg.errors;
  if (cfg.sequence) pc.simulation.sequence = cfg.sequence->options();
  return pc;
}

inline json syndrome_json(const Syndrome& s) { return json::array({s.first, s.second}); }

inline int cmd_qec(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const SpinRegister& reg = cfg.require_register();
  if (!cfg.qec) config_error("config.qec", "missing required block");
  const QecBlock& q = *cfg.qec;
  if (reg.n_nuclei() != 2) config_error("config.register.nuclei", "the repetition code needs exactly two nuclei");
  const std::uint64_t seed = ctx.seed.value_or(q.seed.value_or(0));
  ctx.seed = seed;
  ProtocolConfig pc = protocol_config(cfg, q, seed);
  pc.validate();

  const RepetitionCode code(reg, pc);
  const AverageFidelity avg = code.average_fidelity();

  json report;
  report["config"] = ctx.file.doc;
  report["seed"] = seed;
  report["gate_mode"] = q.gate_mode == GateMode::ideal ? "ideal" : "simulated";
  report["averaging"] = q.averaging == AveragingMode::two_design_exact ? "two_design_exact" : "haar_monte_carlo";
  report["p"] = q.p;
  report["flip_errors"] = q.flip_errors;
  report["noise"] = noise_json(cfg.noise);
  report["average_fidelity"] = avg.mean;
  report["standard_error"] = avg.standard_error;
  report["samples"] = avg.samples;
  report["protocol_duration_s"] = code.duration();

  json table = json::array();
  for (const auto& e : code.table().entries) {
    table.push_back({{"error", e.error}, {"syndrome", syndrome_json(e.syndrome)}, {"recovery", std::string(1, e.recovery)}});
  }
  report["syndrome_table"] = {{"frame", code.table().frame_label}, {"entries", table},
                              {"divergences_from_reference", syndrome_table_divergences(code.table())}};

  json states = json::array();
  const auto design = RepetitionCode::two_design_states();
  const char* names[] = {"|0>", "|1>", "|+>", "|->", "|+i>", "|-i>"};
  for (std::size_t i = 0; i < design.size(); ++i) {
    const ProtocolResult r = code.run(design[i]);
    json probs = json::object();
    for (const auto& syn : detail::all_syndromes()) {
      probs[std::to_string(syn.first) + std::to_string(syn.second)] = r.syndrome_probabilities[detail::syndrome_index(syn)];
    }
    states.push_back({{"state", i < 6 ? names[i] : std::to_string(i)}, {"fidelity", r.fidelity},
                      {"syndrome_probabilities", probs}});
  }
  report["input_states"] = states;

  json gates = json::array();
  for (const auto& rec : code.gates().records()) {
    gates.push_back({{"target", rec.spec.target},
                     {"axis", to_string(rec.spec.axis)},
                     {"angle_rad", rec.spec.angle},
                     {"N", rec.repetitions},
                     {"tau_s", rec.tau},
                     {"f_kdd", rec.coefficient},
                     {"duration_s", rec.duration},
                     {"coherent_fidelity", rec.fidelity}});
  }
  report["gates"] = gates;

  // p x N sweep
  std::vector<double> ps = q.p_sweep.empty() ? std::vector<double>{q.p} : q.p_sweep;
  std::vector<std::optional<int>> ns;
  if (q.repetition_sweep.empty()) ns.push_back(q.repetitions);
  for (int n : q.repetition_sweep) ns.emplace_back(n);
  if (q.gate_mode == GateMode::ideal && ns.size() > 1) {
    config_error("config.qec.repetition_sweep", "needs gate_mode simulated");
  }
  struct Point {
    double p;
    std::optional<int> n;
  };
  std::vector<Point> grid;
  for (const auto& n : ns) {
    for (double p : ps) grid.push_back({p, n});
  }
  struct SweepRow {
    double duration = 0.0;
    AverageFidelity avg;
  };
  const auto sweep = parallel_map<SweepRow>(grid.size(), ctx.threads, [&](std::size_t i) {
    ProtocolConfig c = pc;
    c.p = grid[i].p;
    c.simulation.repetitions = grid[i].n;
    const RepetitionCode rc(reg, c);
    return SweepRow{rc.duration(), rc.average_fidelity()};
  });
  CsvTable t({"p", "N", "protocol_duration_s", "average_fidelity", "standard_error"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.add({grid[i].p, grid[i].n ? Cell(static_cast<long long>(*grid[i].n)) : Cell(std::string(q.gate_mode == GateMode::ideal ? "ideal" : "auto")),
           sweep[i].duration, sweep[i].avg.mean, sweep[i].avg.standard_error});
  }

  if (cfg.output.json) write_json(ctx.path("qec_report.json"), report);
  if (cfg.output.csv) t.write(ctx.path("qec_sweep.csv"));
  std::printf("average correction fidelity %.9f at p = %.4g (%s gates)\n", avg.mean, q.p,
              q.gate_mode == GateMode::ideal ? "ideal" : "simulated");
  return 0;
}

// ---------------------------------------------------------------------------
// filter
// ---------------------------------------------------------------------------

inline int cmd_filter(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const SpinRegister& reg = cfg.require_register();
  const SequenceBlock& s = cfg.require_sequence();
  if (!cfg.filter) config_error("config.filter", "missing required block");
  const FilterBlock& fb = *cfg.filter;

  const AxySequenceSpec seq = configured_sequence(reg, s);
  const PulseSchedule sched = build_schedule(seq);
  const double t = fb.time.value_or(sched.total_duration);
  if (!(t >= 0.0 && t <= sched.total_duration)) config_error("config.filter.time", "outside the schedule");

  const auto n = static_cast<std::size_t>(fb.points);
  std::vector<double> omega(n);
  for (std::size_t i = 0; i < n; ++i) {
    omega[i] = fb.omega_min + (fb.omega_max - fb.omega_min) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  const auto values = parallel_map<FilterResult>(n, ctx.threads, [&](std::size_t i) {
    return filter_function(sched, omega[i], t);
  });
  CsvTable table({"omega_rad_per_s", "phi_x_s", "phi_y_s", "phi_tot_s"});
  std::vector<double> tot;
  for (std::size_t i = 0; i < n; ++i) {
    table.add({omega[i], values[i].phi_x, values[i].phi_y, values[i].phi_tot});
    tot.push_back(values[i].phi_tot);
  }
  if (cfg.output.csv) table.write(ctx.path("filter.csv"));
  if (cfg.output.json) {
    json j;
    j["sequence"] = sequence_json(seq);
    j["time_s"] = t;
    try {
      const PeakShape peak = peak_shape(omega, tot);
      j["peak"] = {{"omega_rad_per_s", peak.position}, {"height_s", peak.height}, {"fwhm_rad_per_s", peak.fwhm}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::domain) throw;
      j["peak"] = nullptr;
    }
    write_json(ctx.path("filter.json"), j);
  }
  std::printf("filter function at t = %.6g s over %zu frequencies\n", t, n);
  return 0;
}

// ---------------------------------------------------------------------------
// soft-control
// ---------------------------------------------------------------------------

inline double sampling_width(const std::string& name, double tau) {
  if (name == "continuous") return 0.0;
  if (name == "4tau") return 4.0 * tau;
  if (name == "2tau") return 2.0 * tau;
  if (name == "tau") return tau;
  return 0.5 * tau;
}

inline int cmd_soft_control(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const SpinRegister& reg = cfg.require_register();
  const SequenceBlock& s = cfg.require_sequence();
  const SoftControlBlock sb = cfg.soft_control.value_or(SoftControlBlock{});
  const auto frames = derive_frames(reg);
  const std::size_t target = s.gate.target;
  if (sb.spectator >= frames.size() || sb.spectator == target) {
    config_error("config.soft_control.spectator", "must name a nucleus other than the target");
  }
  const double tau = resonant_period(reg, target, s.k_dd);
  const double delta = frames[sb.spectator].omega - frames[target].omega;
  const double g_ratio = frames[sb.spectator].g / frames[target].g;
  const double rate = reg.ms * frames[target].g / 4.0;
  const double theta = s.gate.angle;

  const auto count = static_cast<std::size_t>(sb.n_max - sb.n_min + 1);
  const std::size_t columns = sb.sampling.size();
  struct Row {
    double duration = 0.0;
    double constant = 0.0;
    std::vector<double> soft;
  };
  const auto rows = parallel_map<Row>(count, ctx.threads, [&](std::size_t i) {
    const int n = sb.n_min + static_cast<int>(i);
    Row r;
    r.duration = sequence_duration(tau, n, s.variant);
    r.constant = decoupling_efficiency(0.5 * delta * r.duration, g_ratio, theta);
    for (const auto& name : sb.sampling) {
      try {
        const auto profile =
            soft_control_profile(theta, r.duration, sb.sigma_ratio * r.duration, rate, sampling_width(name, tau));
        r.soft.push_back(soft_decoupling_efficiency(profile, delta, g_ratio));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::unreachable_coefficient) throw;
        r.soft.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    return r;
  });

  std::vector<std::string> header{"N", "duration_s", "D_constant"};
  for (const auto& name : sb.sampling) header.push_back("D_soft_" + name);
  CsvTable t(header);
  auto amplitude = [&](auto value_of) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < count; ++i) {
      const int n = sb.n_min + static_cast<int>(i);
      if (n < sb.window_min || n > sb.window_max) continue;
      const double v = value_of(rows[i]);
      if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi >= lo ? hi - lo : std::numeric_limits<double>::quiet_NaN();
  };
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Cell> row{static_cast<long long>(sb.n_min + static_cast<int>(i)), rows[i].duration, rows[i].constant};
    for (double v : rows[i].soft) row.emplace_back(v);
    t.add(std::move(row));
  }
  const double amp_constant = amplitude([](const Row& r) { return r.constant; });
  json amps = json::object();
  for (std::size_t c = 0; c < columns; ++c) {
    amps[sb.sampling[c]] = json_number(amplitude([c](const Row& r) { return r.soft[c]; }));
  }
  if (cfg.output.csv) t.write(ctx.path("soft_control.csv"));
  if (cfg.output.json) {
    json j;
    j["sigma_ratio"] = sb.sigma_ratio;
    j["target"] = target;
    j["spectator"] = sb.spectator;
    j["window"] = {sb.window_min, sb.window_max};
    j["oscillation_amplitude"] = {{"constant", json_number(amp_constant)}, {"soft", amps}};
    write_json(ctx.path("soft_control.json"), j);
  }
  std::printf("oscillation amplitude over N in [%d, %d]: constant %.3e", sb.window_min, sb.window_max, amp_constant);
  for (std::size_t c = 0; c < columns; ++c) {
    std::printf(", %s %.3e", sb.sampling[c].c_str(), amps[sb.sampling[c]].is_null() ? std::nan("") : amps[sb.sampling[c]].get<double>());
  }
  std::printf("\n");
  return 0;
}

// ---------------------------------------------------------------------------
// abundance
// ---------------------------------------------------------------------------

inline int cmd_abundance(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const AbundanceBlock ab = cfg.abundance.value_or(AbundanceBlock{});
  const PhysicalConstants constants = cfg.reg ? cfg.reg->constants : PhysicalConstants{};
  std::vector<double> thresholds = ab.thresholds;
  std::vector<std::string> labels;
  if (thresholds.empty()) {
    if (!cfg.reg) config_error("config.abundance.thresholds", "needed when there is no register block");
    for (const auto& n : cfg.reg->nuclei) {
      thresholds.push_back(n.hyperfine.norm());
      labels.push_back(n.label);
    }
  }
  CsvTable t({"A_threshold_Hz", "expected_count"});
  json rows = json::array();
  std::vector<double> counts;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double c = coupling_abundance(thresholds[i], ab.p13c, constants);
    counts.push_back(c);
    t.add({thresholds[i] / kTwoPi, c});
    json r{{"A_threshold_Hz", thresholds[i] / kTwoPi}, {"expected_count", c}};
    if (i < labels.size()) r["label"] = labels[i];
    rows.push_back(r);
  }
  if (cfg.output.csv) t.write(ctx.path("abundance.csv"));
  if (cfg.output.json) {
    json j;
    j["p13c"] = ab.p13c;
    j["lattice_constant_m"] = kDiamondLatticeConstant;
    j["rows"] = rows;
    j["joint_probability"] = counts.size() >= 2 ? json(joint_abundance_probability(counts[0], counts[1])) : json(nullptr);
    write_json(ctx.path("abundance.json"), j);
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::printf("A >= %.6g Hz: %.6g expected spins\n", thresholds[i] / kTwoPi, counts[i]);
  }
  return 0;
}

}  // namespace axy::cli
