#include <gtest/gtest.h>

#include <filesystem>
#include <functional>

#include "config.hpp"

using namespace axy;
using namespace axy::cli;

namespace {

json reference_doc() {
  return json::parse(R"({
    "register": {
      "field": {"value": 600, "unit": "G"},
      "nuclei": [
        {"A_perp": {"value": 45.8, "unit": "kHz"}, "A_par": {"value": 93.5, "unit": "kHz"}},
        {"A_perp": {"value": 35.3, "unit": "kHz"}, "A_par": {"value": 49.5, "unit": "kHz"}}
      ]
    }
  })");
}

std::string config_failure(const json& doc) {
  try {
    parse_experiment(doc);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

bool mentions(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

}  // namespace

TEST(Units, ConvertToSi) {
  EXPECT_DOUBLE_EQ(unit_factor(Dimension::angular_frequency, "kHz", "x"), kTwoPi * 1e3);
  EXPECT_DOUBLE_EQ(unit_factor(Dimension::angular_frequency, "rad/s", "x"), 1.0);
  EXPECT_DOUBLE_EQ(unit_factor(Dimension::field, "G", "x"), 1e-4);
  EXPECT_DOUBLE_EQ(unit_factor(Dimension::time, "us", "x"), 1e-6);
  EXPECT_DOUBLE_EQ(unit_factor(Dimension::angle, "pi", "x"), kPi);
  EXPECT_DOUBLE_EQ(unit_factor(Dimension::temperature, "mK", "x"), 1e-3);
}

TEST(Units, RejectsWrongDimension) {
  EXPECT_THROW(unit_factor(Dimension::field, "kHz", "x"), Error);
  EXPECT_THROW(unit_factor(Dimension::time, "G", "x"), Error);
}

TEST(Register, ReferenceMatchesLibraryRegister) {
  const ExperimentConfig cfg = parse_experiment(reference_doc());
  ASSERT_TRUE(cfg.reg.has_value());
  const SpinRegister ref = reference_register();
  EXPECT_NEAR(cfg.reg->field, ref.field, 1e-15);
  EXPECT_EQ(cfg.reg->ms, -1);
  ASSERT_EQ(cfg.reg->n_nuclei(), 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_LT((cfg.reg->nuclei[j].hyperfine - ref.nuclei[j].hyperfine).norm(), 1e-9);
  }
}

TEST(Register, VectorHyperfineForm) {
  json doc = reference_doc();
  doc["register"]["nuclei"][1] = json::parse(
      R"({"A": [{"value": 10, "unit": "kHz"}, {"value": -20, "unit": "kHz"}, {"value": 30, "unit": "kHz"}]})");
  const ExperimentConfig cfg = parse_experiment(doc);
  EXPECT_NEAR(cfg.reg->nuclei[1].hyperfine.y(), -kTwoPi * 20e3, 1e-9);
}

TEST(Register, Rejections) {
  json doc = reference_doc();
  doc["register"]["field"]["unit"] = "kHz";
  EXPECT_TRUE(mentions(config_failure(doc), "config.register.field.unit"));

  doc = reference_doc();
  doc["register"]["field"] = 600;
  EXPECT_TRUE(mentions(config_failure(doc), "config.register.field"));

  doc = reference_doc();
  doc["register"]["nuclei"][0]["A_perp"]["scale"] = 2;
  EXPECT_TRUE(mentions(config_failure(doc), "scale"));

  doc = reference_doc();
  doc["register"]["ms"] = 0;
  config_failure(doc);

  doc = reference_doc();
  doc["register"]["colour"] = "red";
  EXPECT_TRUE(mentions(config_failure(doc), "config.register.colour: unknown key"));
}

TEST(Experiment, UnknownTopLevelKey) {
  json doc = reference_doc();
  doc["registr"] = json::object();
  EXPECT_TRUE(mentions(config_failure(doc), "config.registr: unknown key"));
}

TEST(Experiment, MissingRegisterIsReportedWhenRequired) {
  const ExperimentConfig cfg = parse_experiment(json::object());
  try {
    cfg.require_register();
    FAIL() << "expected config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_TRUE(mentions(e.what(), "config.register: missing required block"));
  }
  json doc = json::object();
  doc["noise"] = json::parse(R"({"temperature": {"value": 4, "unit": "K"}})");
  EXPECT_TRUE(mentions(config_failure(doc), "config.register"));
}

TEST(Experiment, SequenceDefaultsAndTargetCheck) {
  json doc = reference_doc();
  doc["sequence"] = json::object();
  const ExperimentConfig cfg = parse_experiment(doc);
  ASSERT_TRUE(cfg.sequence.has_value());
  EXPECT_EQ(cfg.sequence->variant, SequenceVariant::axy8);
  EXPECT_NEAR(cfg.sequence->gate.angle, kPi / 2, 1e-15);
  EXPECT_FALSE(cfg.sequence->repetitions.has_value());

  doc["sequence"]["target"] = 2;
  EXPECT_TRUE(mentions(config_failure(doc), "config.sequence.target"));
  doc["sequence"] = json::parse(R"({"repetitions": 0})");
  EXPECT_TRUE(mentions(config_failure(doc), "config.sequence.repetitions"));
  doc["sequence"] = json::parse(R"({"variant": "XY8"})");
  EXPECT_TRUE(mentions(config_failure(doc), "config.sequence.variant"));
}

TEST(Experiment, NoiseCalibrationKinds) {
  json doc = reference_doc();
  doc["noise"] = json::parse(R"({"temperature": {"value": 77, "unit": "K"}})");
  const ExperimentConfig cfg = parse_experiment(doc);
  ASSERT_TRUE(cfg.noise.has_value());
  EXPECT_EQ(cfg.noise->lambda, 0.0);

  doc["noise"] = json::parse(R"({"T1": {"value": 1, "unit": "s"}, "temperature": {"value": 0, "unit": "K"}})");
  try {
    parse_experiment(doc);
    FAIL() << "expected uncalibratable";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::uncalibratable);
  }
}

TEST(Experiment, ErrorsBlock) {
  json doc = reference_doc();
  doc["errors"] = json::parse(R"({"detuning": {"value": 350, "unit": "Hz"}, "rabi_error": 0.0025})");
  const ExperimentConfig cfg = parse_experiment(doc);
  EXPECT_NEAR(cfg.errors.detuning, kTwoPi * 350.0, 1e-9);
  EXPECT_DOUBLE_EQ(cfg.errors.rabi_error, 0.0025);
}

TEST(Hash, FnvReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Samples, EveryShippedConfigParses) {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(AXY_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    EXPECT_NO_THROW(parse_experiment(load_config_file(entry.path().string()).doc)) << entry.path();
  }
  EXPECT_GE(count, 7u);
}

TEST(Samples, MalformedJsonIsAConfigError) {
  const auto path = std::filesystem::temp_directory_path() / "axy_malformed.json";
  {
    std::ofstream out(path);
    out << "{\"register\": ";
  }
  try {
    load_config_file(path.string());
    FAIL() << "expected config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_config_file("/nonexistent/axy.json"), Error);
}
