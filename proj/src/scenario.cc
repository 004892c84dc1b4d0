#include "dynwm/scenario.h"

#include <fstream>
#include <set>
#include <sstream>

#include "dynwm/error.h"
#include "dynwm/json_io.h"
#include "dynwm/presets.h"

namespace dynwm {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& section) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, section + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown key '" + key + "' in " + section);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("bad value for '") + key + "': " + e.what());
  }
}

PlantModel model_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"A", "B", "C1", "C2", "w_support", "zeta_support",
                       "eta_support"},
                      "model");
  PlantModel m;
  m.A = matrix_from_json(j.at("A"), "A");
  m.B = matrix_from_json(j.at("B"), "B");
  m.C1 = matrix_from_json(j.at("C1"), "C1");
  m.C2 = j.contains("C2") ? matrix_from_json(j.at("C2"), "C2") : m.C1;
  m.w_support = vector_from_json(j.at("w_support"), "w_support", m.A.rows());
  m.zeta_support =
      vector_from_json(j.at("zeta_support"), "zeta_support", m.C1.rows());
  m.eta_support =
      vector_from_json(j.at("eta_support"), "eta_support", m.C1.rows());
  return m;
}

json model_to_json(const PlantModel& m) {
  return json{{"A", matrix_to_json(m.A)},
              {"B", matrix_to_json(m.B)},
              {"C1", matrix_to_json(m.C1)},
              {"C2", matrix_to_json(m.C2)},
              {"w_support", vector_to_json(m.w_support)},
              {"zeta_support", vector_to_json(m.zeta_support)},
              {"eta_support", vector_to_json(m.eta_support)}};
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "none") return AttackKind::kNone;
  if (s == "perturbation") return AttackKind::kPerturbation;
  if (s == "replay") return AttackKind::kReplay;
  throw Error(ErrorCode::kInvalidConfig, "unknown attack kind '" + s + "'");
}

AttackSpec attack_from_json(const json& j, const PlantModel& model) {
  reject_unknown_keys(j,
                      {"kind", "halfwidth", "gamma", "xi0", "omega_halfwidth",
                       "zeta_halfwidth", "start_step", "stop_step"},
                      "attack");
  const Eigen::Index p = model.state_dim();
  const Eigen::Index m = model.output_dim();
  AttackSpec a;
  a.kind = attack_kind_from_string(get_or<std::string>(j, "kind", "none"));
  a.perturbation_halfwidth =
      j.contains("halfwidth") ? vector_from_json(j.at("halfwidth"), "halfwidth", m)
                              : Vector::Constant(m, 0.15);
  a.replay_gamma = get_or<double>(j, "gamma", 1.0);
  a.replay_xi0 = j.contains("xi0") ? vector_from_json(j.at("xi0"), "xi0", p)
                                   : Vector::Zero(p);
  a.replay_omega_halfwidth =
      j.contains("omega_halfwidth")
          ? vector_from_json(j.at("omega_halfwidth"), "omega_halfwidth", p)
          : Vector::Constant(p, 2.5e-4);
  a.replay_zeta_halfwidth =
      j.contains("zeta_halfwidth")
          ? vector_from_json(j.at("zeta_halfwidth"), "zeta_halfwidth", m)
          : Vector::Constant(m, 2.5e-4);
  a.start_step = get_or<std::int64_t>(j, "start_step", 0);
  if (j.contains("stop_step") && !j.at("stop_step").is_null()) {
    a.stop_step = get_or<std::int64_t>(j, "stop_step", 0);
  }
  return a;
}

json attack_to_json(const AttackSpec& a) {
  json j{{"kind", to_string(a.kind)},
         {"halfwidth", vector_to_json(a.perturbation_halfwidth)},
         {"gamma", a.replay_gamma},
         {"xi0", vector_to_json(a.replay_xi0)},
         {"omega_halfwidth", vector_to_json(a.replay_omega_halfwidth)},
         {"zeta_halfwidth", vector_to_json(a.replay_zeta_halfwidth)},
         {"start_step", a.start_step}};
  j["stop_step"] = a.stop_step ? json(*a.stop_step) : json(nullptr);
  return j;
}

std::optional<double> constant_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const json& v = j.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "computed") return std::nullopt;
    throw Error(ErrorCode::kInvalidConfig,
                std::string(key) + " must be a number or \"computed\"");
  }
  if (!v.is_number()) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(key) + " must be a number or \"computed\"");
  }
  return v.get<double>();
}

ThresholdSpec thresholds_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"rho1", "rho2", "c1_over_n", "c2_over_n", "single_s",
                       "monitor", "rule"},
                      "thresholds");
  ThresholdSpec t;
  t.rho1 = get_or<double>(j, "rho1", t.rho1);
  t.rho2 = get_or<double>(j, "rho2", t.rho2);
  t.c1_over_n = constant_from_json(j, "c1_over_n");
  t.c2_over_n = constant_from_json(j, "c2_over_n");
  t.single_s = get_or<bool>(j, "single_s", false);
  const auto monitor = get_or<std::string>(j, "monitor", "both");
  if (monitor == "both") {
    t.monitor = MonitoredStatistics::kBoth;
  } else if (monitor == "phi1") {
    t.monitor = MonitoredStatistics::kPhi1;
  } else if (monitor == "phi2") {
    t.monitor = MonitoredStatistics::kPhi2;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "monitor must be both|phi1|phi2");
  }
  const auto rule = get_or<std::string>(j, "rule", "detection");
  if (rule == "detection") {
    t.rule = DecisionRule::kDetection;
  } else if (rule == "literal") {
    t.rule = DecisionRule::kLiteral;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "rule must be detection|literal");
  }
  return t;
}

json thresholds_to_json(const ThresholdSpec& t) {
  auto constant = [](const std::optional<double>& c) {
    return c ? json(*c) : json("computed");
  };
  const char* monitor = t.monitor == MonitoredStatistics::kBoth   ? "both"
                        : t.monitor == MonitoredStatistics::kPhi1 ? "phi1"
                                                                  : "phi2";
  return json{{"rho1", t.rho1},
              {"rho2", t.rho2},
              {"c1_over_n", constant(t.c1_over_n)},
              {"c2_over_n", constant(t.c2_over_n)},
              {"single_s", t.single_s},
              {"monitor", monitor},
              {"rule", t.rule == DecisionRule::kDetection ? "detection"
                                                          : "literal"}};
}

}  // namespace

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kPerturbation: return "perturbation";
    case AttackKind::kReplay: return "replay";
  }
  return "none";
}

std::vector<std::string> ScenarioConfig::validate() const {
  if (schema_version != kScenarioSchemaVersion) {
    throw Error(ErrorCode::kInvalidConfig,
                "unsupported schema_version " + std::to_string(schema_version));
  }
  model.validate();
  if (watermark_support.size() != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "watermark_support must have one entry per input");
  }
  attack.validate(model);
  if (steps < 2) throw Error(ErrorCode::kInvalidConfig, "steps must be >= 2");
  if (trials < 1) throw Error(ErrorCode::kInvalidConfig, "trials must be >= 1");
  if (warmup < 0) throw Error(ErrorCode::kInvalidConfig, "warmup must be >= 0");
  if (dwell_override && *dwell_override < 1) {
    throw Error(ErrorCode::kInvalidConfig, "dwell_override must be >= 1");
  }
  if (tracked_state < 0 || tracked_state >= model.state_dim()) {
    throw Error(ErrorCode::kInvalidConfig, "tracked_state out of range");
  }
  if (threads < 0) throw Error(ErrorCode::kInvalidConfig, "threads must be >= 0");
  for (const auto& c : {thresholds.c1_over_n, thresholds.c2_over_n}) {
    if (c && !(*c > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "threshold constants must be > 0");
    }
  }

  std::vector<std::string> warnings;
  auto check_rho = [&](double rho, const char* name) {
    if (!(1.0 + rho > 0.0)) {
      throw Error(ErrorCode::kInvalidRho,
                  std::string(name) + " must satisfy 1 + rho > 0");
    }
    if (rho <= 0.0) {
      warnings.push_back(std::string(name) + " = " + std::to_string(rho) +
                         " <= 0: the finite false-switch guarantee does not "
                         "apply (heuristic tuning)");
    }
  };
  check_rho(thresholds.rho1, "rho1");
  check_rho(thresholds.rho2, "rho2");
  for (double rho : rho_grid) check_rho(rho, "rho_grid entry");
  return warnings;
}

ScenarioConfig default_lane_keeping_scenario() {
  ScenarioConfig c;
  c.model_name = "lane_keeping";
  c.model = lane_keeping_preset();
  c.watermark_support = lane_keeping_watermark_support();
  c.gains = lane_keeping_reference_gains();
  c.attack.perturbation_halfwidth = Vector::Constant(3, 0.15);
  c.attack.replay_xi0 = Vector::Zero(5);
  c.attack.replay_omega_halfwidth = Vector::Constant(5, 2.5e-4);
  c.attack.replay_zeta_halfwidth = Vector::Constant(3, 2.5e-4);
  return c;
}

ScenarioConfig scenario_from_json(const json& doc) {
  reject_unknown_keys(doc,
                      {"schema_version", "model", "tracked_state", "gains",
                       "watermark_support", "attack", "thresholds",
                       "simulation", "rho_grid"},
                      "scenario");
  ScenarioConfig c;
  if (!doc.contains("schema_version")) {
    throw Error(ErrorCode::kInvalidConfig, "missing schema_version");
  }
  c.schema_version = get_or<int>(doc, "schema_version", 0);
  if (c.schema_version != kScenarioSchemaVersion) {
    throw Error(ErrorCode::kInvalidConfig,
                "unsupported schema_version " +
                    std::to_string(c.schema_version));
  }

  const json model = doc.value("model", json("lane_keeping"));
  if (model.is_string()) {
    if (model.get<std::string>() != "lane_keeping") {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown model preset '" + model.get<std::string>() + "'");
    }
    c.model_name = "lane_keeping";
    c.model = lane_keeping_preset();
  } else {
    c.model_name = "custom";
    c.model = model_from_json(model);
  }
  const bool preset = c.model_name == "lane_keeping";
  c.tracked_state = get_or<int>(doc, "tracked_state", preset ? 1 : 0);

  if (doc.contains("watermark_support")) {
    c.watermark_support = vector_from_json(doc.at("watermark_support"),
                                           "watermark_support",
                                           c.model.input_dim());
  } else if (preset) {
    c.watermark_support = lane_keeping_watermark_support();
  } else {
    throw Error(ErrorCode::kInvalidConfig,
                "custom models require watermark_support");
  }

  if (doc.contains("gains") && !doc.at("gains").is_null()) {
    const json& g = doc.at("gains");
    reject_unknown_keys(g, {"K", "L1", "L2"}, "gains");
    ControllerConfig ctl;
    ctl.K = matrix_from_json(g.at("K"), "K");
    ctl.L1 = matrix_from_json(g.at("L1"), "L1");
    ctl.L2 = g.contains("L2") ? matrix_from_json(g.at("L2"), "L2") : ctl.L1;
    ctl.e_support = c.watermark_support;
    c.gains = std::move(ctl);
  } else if (preset) {
    ControllerConfig ctl = lane_keeping_reference_gains();
    ctl.e_support = c.watermark_support;
    c.gains = std::move(ctl);
  }

  c.attack = attack_from_json(doc.value("attack", json::object()), c.model);
  c.thresholds = thresholds_from_json(doc.value("thresholds", json::object()));

  const json sim = doc.value("simulation", json::object());
  reject_unknown_keys(sim,
                      {"steps", "trials", "seed", "warmup", "dwell_override",
                       "switching", "step_log_trials", "threads"},
                      "simulation");
  c.steps = get_or<std::int64_t>(sim, "steps", c.steps);
  c.trials = get_or<std::int64_t>(sim, "trials", c.trials);
  c.seed = get_or<std::uint64_t>(sim, "seed", c.seed);
  c.warmup = get_or<int>(sim, "warmup", c.warmup);
  if (sim.contains("dwell_override") && !sim.at("dwell_override").is_null()) {
    c.dwell_override = get_or<int>(sim, "dwell_override", 1);
  }
  c.switching_enabled = get_or<bool>(sim, "switching", true);
  c.step_log_trials = get_or<std::int64_t>(sim, "step_log_trials", 0);
  c.threads = get_or<int>(sim, "threads", 0);

  if (doc.contains("rho_grid")) {
    c.rho_grid = get_or<std::vector<double>>(doc, "rho_grid", {});
  }
  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json doc;
  doc["schema_version"] = c.schema_version;
  doc["model"] = c.model_name == "lane_keeping" ? json("lane_keeping")
                                                : model_to_json(c.model);
  doc["tracked_state"] = c.tracked_state;
  doc["watermark_support"] = vector_to_json(c.watermark_support);
  if (c.gains) {
    doc["gains"] = json{{"K", matrix_to_json(c.gains->K)},
                        {"L1", matrix_to_json(c.gains->L1)},
                        {"L2", matrix_to_json(c.gains->L2)}};
  } else {
    doc["gains"] = nullptr;
  }
  doc["attack"] = attack_to_json(c.attack);
  doc["thresholds"] = thresholds_to_json(c.thresholds);
  json sim{{"steps", c.steps},
           {"trials", c.trials},
           {"seed", c.seed},
           {"warmup", c.warmup},
           {"switching", c.switching_enabled},
           {"step_log_trials", c.step_log_trials},
           {"threads", c.threads}};
  sim["dwell_override"] =
      c.dwell_override ? json(*c.dwell_override) : json(nullptr);
  doc["simulation"] = std::move(sim);
  doc["rho_grid"] = c.rho_grid;
  return doc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIOFailure, "cannot open " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig,
                path.string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

}  // namespace dynwm
