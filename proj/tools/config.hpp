#pragma once

// JSON experiment configuration: unit-tagged quantities and strict key checking.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "axy/analysis.hpp"
#include "axy/dynamics.hpp"
#include "axy/error.hpp"
#include "axy/gates.hpp"
#include "axy/pulses.hpp"
#include "axy/qec.hpp"
#include "axy/register.hpp"

namespace axy::cli {

using json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::config, path + ": " + what);
}

enum class Dimension { angular_frequency, field, time, angle, temperature };

inline double unit_factor(Dimension dim, const std::string& unit, const std::string& path) {
  static const std::map<std::string, double> freq{{"Hz", kTwoPi},         {"kHz", kTwoPi * 1e3},
                                                  {"MHz", kTwoPi * 1e6},  {"GHz", kTwoPi * 1e9},
                                                  {"rad/s", 1.0}};
  static const std::map<std::string, double> field{{"G", 1e-4}, {"mT", 1e-3}, {"T", 1.0}};
  static const std::map<std::string, double> time{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
  static const std::map<std::string, double> angle{{"rad", 1.0}, {"pi", kPi}, {"deg", kPi / 180.0}};
  static const std::map<std::string, double> temp{{"K", 1.0}, {"mK", 1e-3}};
  const std::map<std::string, double>* table = nullptr;
  switch (dim) {
    case Dimension::angular_frequency: table = &freq; break;
    case Dimension::field: table = &field; break;
    case Dimension::time: table = &time; break;
    case Dimension::angle: table = &angle; break;
    case Dimension::temperature: table = &temp; break;
  }
  auto it = table->find(unit);
  if (it == table->end()) config_error(path, "unsupported unit '" + unit + "'");
  return it->second;
}

/// Read-only view of a JSON object that records which keys were consumed.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) config_error(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_->contains(key); }

  Node child(const std::string& key) const {
    used_.insert(key);
    if (!has(key)) config_error(sub(key), "missing required block");
    return Node(j_->at(key), sub(key));
  }

  std::optional<Node> optional_child(const std::string& key) const {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return Node(j_->at(key), sub(key));
  }

  const json& raw(const std::string& key) const {
    used_.insert(key);
    if (!has(key)) config_error(sub(key), "missing required key");
    return j_->at(key);
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) config_error(sub(key), "expected a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : (used_.insert(key), fallback);
  }

  long long integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) config_error(sub(key), "expected an integer");
    return v.get<long long>();
  }

  long long integer(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : (used_.insert(key), fallback);
  }

  bool boolean(const std::string& key, bool fallback) const {
    used_.insert(key);
    if (!has(key)) return fallback;
    const json& v = j_->at(key);
    if (!v.is_boolean()) config_error(sub(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) config_error(sub(key), "expected a string");
    return v.get<std::string>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : (used_.insert(key), fallback);
  }

  /// {"value": x, "unit": "kHz"} converted to SI (angular units for frequencies).
  double quantity(const std::string& key, Dimension dim) const {
    const json& v = raw(key);
    return parse_quantity(v, dim, sub(key));
  }

  double quantity(const std::string& key, Dimension dim, double fallback) const {
    return has(key) ? quantity(key, dim) : (used_.insert(key), fallback);
  }

  static double parse_quantity(const json& v, Dimension dim, const std::string& path) {
    if (!v.is_object()) config_error(path, "expected {\"value\": ..., \"unit\": ...}");
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (it.key() != "value" && it.key() != "unit") config_error(path + "." + it.key(), "unknown key");
    }
    if (!v.contains("value") || !v.at("value").is_number()) config_error(path + ".value", "expected a number");
    if (!v.contains("unit") || !v.at("unit").is_string()) config_error(path + ".unit", "expected a unit string");
    return v.at("value").get<double>() * unit_factor(dim, v.at("unit").get<std::string>(), path + ".unit");
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!used_.count(it.key())) config_error(sub(it.key()), "unknown key");
    }
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }

 private:
  const json* j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

struct ConfigFile {
  std::string text;
  json doc;
};

inline ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ConfigFile cf{ss.str(), {}};
  try {
    cf.doc = json::parse(cf.text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, "malformed JSON in " + path + ": " + e.what());
  }
  if (!cf.doc.is_object()) throw Error(ErrorKind::config, "config root must be an object");
  return cf;
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

inline SpinRegister parse_register(const Node& node) {
  SpinRegister reg;
  reg.field = node.quantity("field", Dimension::field);
  reg.ms = static_cast<int>(node.integer("ms", -1));
  if (auto c = node.optional_child("constants")) {
    reg.constants.gamma_e = c->quantity("gamma_e_per_tesla", Dimension::angular_frequency, reg.constants.gamma_e);
    reg.constants.gamma_c13 = c->quantity("gamma_c13_per_tesla", Dimension::angular_frequency, reg.constants.gamma_c13);
    reg.constants.zero_field_splitting =
        c->quantity("zero_field_splitting", Dimension::angular_frequency, reg.constants.zero_field_splitting);
    c->finish();
  }
  const json& nuclei = node.raw("nuclei");
  if (!nuclei.is_array()) config_error(node.sub("nuclei"), "expected a list");
  for (std::size_t i = 0; i < nuclei.size(); ++i) {
    Node n(nuclei[i], node.sub("nuclei") + "[" + std::to_string(i) + "]");
    NuclearSpin spin;
    spin.label = n.string("label", "C" + std::to_string(i + 1));
    spin.gyromagnetic_ratio = n.quantity("gamma_per_tesla", Dimension::angular_frequency, reg.constants.gamma_c13);
    if (n.has("A")) {
      const json& a = n.raw("A");
      if (!a.is_array() || a.size() != 3) config_error(n.sub("A"), "expected three components");
      for (int k = 0; k < 3; ++k) {
        spin.hyperfine(k) = Node::parse_quantity(a[k], Dimension::angular_frequency,
                                                 n.sub("A") + "[" + std::to_string(k) + "]");
      }
    } else {
      spin.hyperfine = Vec3(n.quantity("A_perp", Dimension::angular_frequency), 0.0,
                            n.quantity("A_par", Dimension::angular_frequency));
    }
    n.finish();
    reg.nuclei.push_back(spin);
  }
  if (node.has("couplings")) {
    const json& cs = node.raw("couplings");
    if (!cs.is_array()) config_error(node.sub("couplings"), "expected a list");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      Node c(cs[i], node.sub("couplings") + "[" + std::to_string(i) + "]");
      const json& pair = c.raw("pair");
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() || !pair[1].is_number_unsigned()) {
        config_error(c.sub("pair"), "expected two nucleus indices");
      }
      reg.couplings.push_back(InternuclearCoupling{pair[0].get<std::size_t>(), pair[1].get<std::size_t>(),
                                                   c.quantity("strength", Dimension::angular_frequency)});
      c.finish();
    }
  }
  node.finish();
  try {
    reg.validate();
  } catch (const Error& e) {
    config_error(node.path(), e.what());
  }
  return reg;
}

inline SequenceVariant parse_variant(const Node& node) {
  const std::string v = node.string("variant", "AXY8");
  if (v == "AXY8") return SequenceVariant::axy8;
  if (v == "AXY4") return SequenceVariant::axy4;
  config_error(node.sub("variant"), "expected AXY8 or AXY4");
}

inline GateAxis parse_axis(const Node& node) {
  const std::string a = node.string("axis", "x");
  if (a == "x") return GateAxis::x;
  if (a == "y") return GateAxis::y;
  config_error(node.sub("axis"), "expected x or y");
}

/// Settings shared by every command that builds sequences.
struct SequenceBlock {
  SequenceVariant variant = SequenceVariant::axy8;
  int k_dd = 1;
  GateSpec gate;
  std::optional<int> repetitions;  // absent = optimise
  double rabi = kTwoPi * 20e6;
  bool instantaneous = false;
  double max_width_ratio = 0.05;
  std::optional<double> target_f;
  std::optional<Parity> parity;
  std::optional<double> tau;

  GateSequenceOptions options() const {
    GateSequenceOptions o;
    o.k_dd = k_dd;
    o.variant = variant;
    o.rabi = rabi;
    o.instantaneous = instantaneous;
    o.max_width_ratio = max_width_ratio;
    return o;
  }
};

inline SequenceBlock parse_sequence(const Node& node) {
  SequenceBlock s;
  s.variant = parse_variant(node);
  s.k_dd = static_cast<int>(node.integer("k_dd", 1));
  s.gate.target = static_cast<std::size_t>(node.integer("target", 0));
  s.gate.axis = parse_axis(node);
  s.gate.angle = node.quantity("angle", Dimension::angle, kPi / 2.0);
  if (node.has("repetitions")) {
    const json& r = node.raw("repetitions");
    if (r.is_string() && r.get<std::string>() == "auto") {
      s.repetitions.reset();
    } else if (r.is_number_integer() && r.get<long long>() > 0) {
      s.repetitions = static_cast<int>(r.get<long long>());
    } else {
      config_error(node.sub("repetitions"), "expected a positive integer or \"auto\"");
    }
  }
  s.rabi = node.quantity("rabi", Dimension::angular_frequency, s.rabi);
  s.instantaneous = node.boolean("instantaneous", false);
  s.max_width_ratio = node.number("max_width_ratio", 0.05);
  if (node.has("target_f")) s.target_f = node.number("target_f");
  if (node.has("parity")) {
    const std::string p = node.string("parity");
    if (p == "even") s.parity = Parity::even;
    else if (p == "odd") s.parity = Parity::odd;
    else config_error(node.sub("parity"), "expected even or odd");
  }
  if (node.has("tau")) s.tau = node.quantity("tau", Dimension::time);
  node.finish();
  if (s.k_dd < 1) config_error(node.sub("k_dd"), "must be positive");
  if (!(s.rabi > 0.0)) config_error(node.sub("rabi"), "must be positive");
  if (!(s.max_width_ratio > 0.0)) config_error(node.sub("max_width_ratio"), "must be positive");
  return s;
}

inline ControlErrorModel parse_errors(const std::optional<Node>& node) {
  ControlErrorModel e;
  if (!node) return e;
  e.detuning = node->quantity("detuning", Dimension::angular_frequency, 0.0);
  e.rabi_error = node->number("rabi_error", 0.0);
  node->finish();
  return e;
}

inline std::optional<NoiseModel> parse_noise(const std::optional<Node>& node, const SpinRegister& reg) {
  if (!node) return std::nullopt;
  // an absent T1 means no relaxation
  const double t1 = node->quantity("T1", Dimension::time, std::numeric_limits<double>::infinity());
  const double temperature = node->quantity("temperature", Dimension::temperature);
  node->finish();
  return calibrate_noise(t1, temperature, reg.transition_frequency(), reg.constants);
}

/// FNV-1a 64-bit hash, used to tie outputs to the exact config bytes.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Command blocks
// ---------------------------------------------------------------------------

struct ScanBlock {
  std::string mode = "repetitions";  // or "frequency"
  int n_min = 4;
  int n_max = 40;
  bool simulate = true;
  double high_field_margin = 20.0;
  double weak_coupling_margin = 10.0;
  int frequency_points = 41;
  double frequency_span = 0.02;  // relative half-width of the omega_DD sweep
};

struct OptimizeBlock {
  std::vector<double> fidelity_targets{0.99, 0.999};
  int n_max = 400;
};

struct QecBlock {
  double p = 0.05;
  GateMode gate_mode = GateMode::ideal;
  AveragingMode averaging = AveragingMode::two_design_exact;
  std::size_t samples = 10000;
  std::optional<std::uint64_t> seed;
  bool flip_errors = false;
  double fidelity_target = 0.999;
  int n_max = 400;
  std::optional<int> repetitions;
  std::vector<double> p_sweep;
  std::vector<int> repetition_sweep;
};

struct FilterBlock {
  double omega_min = 0.0;
  double omega_max = 0.0;
  int points = 201;
  std::optional<double> time;
};

struct SoftControlBlock {
  double sigma_ratio = 0.15;
  std::vector<std::string> sampling{"continuous", "4tau", "2tau", "tau", "tau/2"};
  int n_min = 10;
  int n_max = 40;
  std::size_t spectator = 1;
  int window_min = 20;
  int window_max = 40;
};

struct AbundanceBlock {
  double p13c = 0.011;
  std::vector<double> thresholds;  // rad/s; empty = use |A_j| of the register
};

struct OutputBlock {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct ExperimentConfig {
  std::optional<SpinRegister> reg;
  std::optional<SequenceBlock> sequence;
  ControlErrorModel errors;
  std::optional<NoiseModel> noise;
  std::optional<QecBlock> qec;
  std::optional<ScanBlock> scan;
  std::optional<OptimizeBlock> optimize;
  std::optional<FilterBlock> filter;
  std::optional<SoftControlBlock> soft_control;
  std::optional<AbundanceBlock> abundance;
  OutputBlock output;

  const SpinRegister& require_register() const {
    if (!reg) config_error("config.register", "missing required block");
    return *reg;
  }
  const SequenceBlock& require_sequence() const {
    if (!sequence) config_error("config.sequence", "missing required block");
    return *sequence;
  }
};

template <class T>
std::vector<T> parse_list(const Node& node, const std::string& key, const std::function<T(const json&, const std::string&)>& item) {
  const json& v = node.raw(key);
  if (!v.is_array()) config_error(node.sub(key), "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(item(v[i], node.sub(key) + "[" + std::to_string(i) + "]"));
  return out;
}

inline double json_probability(const json& v, const std::string& path) {
  if (!v.is_number() || !(v.get<double>() >= 0.0 && v.get<double>() <= 1.0)) {
    config_error(path, "expected a number in [0, 1]");
  }
  return v.get<double>();
}

inline int json_positive_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 1) config_error(path, "expected a positive integer");
  return static_cast<int>(v.get<long long>());
}

inline int positive_int(const Node& n, const std::string& key, int fallback) {
  const long long v = n.integer(key, fallback);
  if (v < 1) config_error(n.sub(key), "must be a positive integer");
  return static_cast<int>(v);
}

inline ScanBlock parse_scan(const Node& n) {
  ScanBlock b;
  b.mode = n.string("mode", b.mode);
  if (b.mode != "repetitions" && b.mode != "frequency") config_error(n.sub("mode"), "expected repetitions or frequency");
  b.n_min = positive_int(n, "n_min", b.n_min);
  b.n_max = positive_int(n, "n_max", b.n_max);
  b.simulate = n.boolean("simulate", b.simulate);
  b.high_field_margin = n.number("high_field_margin", b.high_field_margin);
  b.weak_coupling_margin = n.number("weak_coupling_margin", b.weak_coupling_margin);
  b.frequency_points = positive_int(n, "frequency_points", b.frequency_points);
  b.frequency_span = n.number("frequency_span", b.frequency_span);
  n.finish();
  if (b.n_max < b.n_min) config_error(n.sub("n_max"), "empty repetition range");
  if (!(b.frequency_span > 0.0 && b.frequency_span < 1.0)) config_error(n.sub("frequency_span"), "must lie in (0, 1)");
  return b;
}

inline OptimizeBlock parse_optimize(const Node& n) {
  OptimizeBlock b;
  if (n.has("fidelity_targets")) {
    b.fidelity_targets = parse_list<double>(n, "fidelity_targets", [](const json& v, const std::string& path) {
      const double f = json_probability(v, path);
      if (!(f < 1.0)) config_error(path, "fidelity target must be below 1");
      return f;
    });
  }
  b.n_max = positive_int(n, "n_max", b.n_max);
  n.finish();
  if (b.fidelity_targets.empty()) config_error(n.sub("fidelity_targets"), "empty list");
  return b;
}

inline QecBlock parse_qec(const Node& n) {
  QecBlock b;
  b.p = n.number("p", b.p);
  if (!(b.p >= 0.0 && b.p <= 0.5)) config_error(n.sub("p"), "must lie in [0, 1/2]");
  const std::string gm = n.string("gate_mode", "ideal");
  if (gm == "ideal") b.gate_mode = GateMode::ideal;
  else if (gm == "simulated") b.gate_mode = GateMode::simulated;
  else config_error(n.sub("gate_mode"), "expected ideal or simulated");
  const std::string av = n.string("averaging", "two_design_exact");
  if (av == "two_design_exact") b.averaging = AveragingMode::two_design_exact;
  else if (av == "haar_monte_carlo") b.averaging = AveragingMode::haar_monte_carlo;
  else config_error(n.sub("averaging"), "expected two_design_exact or haar_monte_carlo");
  const long long samples = n.integer("samples", 10000);
  if (samples < 2) config_error(n.sub("samples"), "Monte-Carlo averaging needs at least 2 samples");
  b.samples = static_cast<std::size_t>(samples);
  if (n.has("seed")) {
    const json& s = n.raw("seed");
    if (!s.is_number_unsigned()) config_error(n.sub("seed"), "expected a non-negative integer");
    b.seed = s.get<std::uint64_t>();
  }
  b.flip_errors = n.boolean("flip_errors", false);
  b.fidelity_target = n.number("fidelity_target", b.fidelity_target);
  if (!(b.fidelity_target >= 0.0 && b.fidelity_target < 1.0)) config_error(n.sub("fidelity_target"), "must lie in [0, 1)");
  b.n_max = positive_int(n, "n_max", b.n_max);
  if (n.has("repetitions")) b.repetitions = positive_int(n, "repetitions", 1);
  if (n.has("p_sweep")) b.p_sweep = parse_list<double>(n, "p_sweep", [](const json& v, const std::string& path) {
    const double p = json_probability(v, path);
    if (p > 0.5) config_error(path, "must lie in [0, 1/2]");
    return p;
  });
  if (n.has("repetition_sweep")) b.repetition_sweep = parse_list<int>(n, "repetition_sweep", json_positive_int);
  n.finish();
  return b;
}

inline FilterBlock parse_filter(const Node& n) {
  FilterBlock b;
  b.omega_min = n.quantity("omega_min", Dimension::angular_frequency);
  b.omega_max = n.quantity("omega_max", Dimension::angular_frequency);
  b.points = positive_int(n, "points", b.points);
  if (n.has("time")) b.time = n.quantity("time", Dimension::time);
  n.finish();
  if (!(b.omega_max > b.omega_min)) config_error(n.sub("omega_max"), "must exceed omega_min");
  if (b.points < 2) config_error(n.sub("points"), "need at least 2 points");
  return b;
}

inline SoftControlBlock parse_soft_control(const Node& n) {
  SoftControlBlock b;
  b.sigma_ratio = n.number("sigma_ratio", b.sigma_ratio);
  if (!(b.sigma_ratio > 0.0)) config_error(n.sub("sigma_ratio"), "must be positive");
  if (n.has("sampling")) {
    b.sampling = parse_list<std::string>(n, "sampling", [](const json& v, const std::string& path) {
      static const std::set<std::string> allowed{"continuous", "4tau", "2tau", "tau", "tau/2"};
      if (!v.is_string() || !allowed.count(v.get<std::string>())) {
        config_error(path, "expected one of continuous, 4tau, 2tau, tau, tau/2");
      }
      return v.get<std::string>();
    });
  }
  b.n_min = positive_int(n, "n_min", b.n_min);
  b.n_max = positive_int(n, "n_max", b.n_max);
  b.spectator = static_cast<std::size_t>(n.integer("spectator", 1));
  b.window_min = positive_int(n, "window_min", b.window_min);
  b.window_max = positive_int(n, "window_max", b.window_max);
  n.finish();
  if (b.n_max < b.n_min) config_error(n.sub("n_max"), "empty repetition range");
  if (b.window_max <= b.window_min) config_error(n.sub("window_max"), "empty window");
  return b;
}

inline AbundanceBlock parse_abundance(const Node& n) {
  AbundanceBlock b;
  b.p13c = n.number("p13c", b.p13c);
  if (!(b.p13c > 0.0 && b.p13c <= 1.0)) config_error(n.sub("p13c"), "must lie in (0, 1]");
  if (n.has("thresholds")) {
    b.thresholds = parse_list<double>(n, "thresholds", [](const json& v, const std::string& path) {
      const double a = Node::parse_quantity(v, Dimension::angular_frequency, path);
      if (!(a > 0.0)) config_error(path, "threshold must be positive");
      return a;
    });
  }
  n.finish();
  return b;
}

inline OutputBlock parse_output(const Node& n) {
  OutputBlock b;
  b.directory = n.string("directory", b.directory);
  if (n.has("formats")) {
    const auto formats = parse_list<std::string>(n, "formats", [](const json& v, const std::string& path) {
      if (!v.is_string() || (v.get<std::string>() != "csv" && v.get<std::string>() != "json")) {
        config_error(path, "expected csv or json");
      }
      return v.get<std::string>();
    });
    b.csv = b.json = false;
    for (const auto& f : formats) (f == "csv" ? b.csv : b.json) = true;
  }
  n.finish();
  return b;
}

/// Parses and validates every block present in the document.
inline ExperimentConfig parse_experiment(const json& doc) {
  const Node root(doc, "config");
  ExperimentConfig cfg;
  if (auto n = root.optional_child("register")) cfg.reg = parse_register(*n);
  if (auto n = root.optional_child("sequence")) cfg.sequence = parse_sequence(*n);
  cfg.errors = parse_errors(root.optional_child("errors"));
  try {
    cfg.errors.validate();
  } catch (const Error& e) {
    config_error("config.errors", e.what());
  }
  if (auto n = root.optional_child("noise")) {
    if (!cfg.reg) config_error("config.register", "missing required block (needed by config.noise)");
    cfg.noise = parse_noise(n, *cfg.reg);
  }
  if (auto n = root.optional_child("qec")) cfg.qec = parse_qec(*n);
  if (auto n = root.optional_child("scan")) cfg.scan = parse_scan(*n);
  if (auto n = root.optional_child("optimize")) cfg.optimize = parse_optimize(*n);
  if (auto n = root.optional_child("filter")) cfg.filter = parse_filter(*n);
  if (auto n = root.optional_child("soft_control")) cfg.soft_control = parse_soft_control(*n);
  if (auto n = root.optional_child("abundance")) cfg.abundance = parse_abundance(*n);
  if (auto n = root.optional_child("output")) cfg.output = parse_output(*n);
  root.finish();
  if (cfg.reg && cfg.sequence) {
    const auto& s = *cfg.sequence;
    if (s.gate.target >= cfg.reg->n_nuclei()) config_error("config.sequence.target", "no such nucleus");
  }
  return cfg;
}

}  // namespace axy::cli
