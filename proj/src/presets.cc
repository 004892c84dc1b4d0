#include "dynwm/presets.h"

#include "json.hpp"

#include "dynwm/json_io.h"

namespace dynwm {

namespace {

// Generated from data/lane_keeping_gains.json at configure time.
#include "lane_keeping_gains.inc"

}  // namespace

PlantModel lane_keeping_preset() {
  PlantModel m;
  m.A.resize(5, 5);
  // clang-format off
  m.A << 1.0, 0.0, 0.0, 0.1,   0.0,
         0.5, 1.0, 0.0, 0.025, 0.0,
         0.0, 0.0, 1.0, 0.0,   0.5,
         0.0, 0.0, 0.0, 1.0,   0.0,
         0.0, 0.0, 0.0, 0.0,   1.0;
  m.B.resize(5, 2);
  m.B << 1.0 / 400.0,  0.0,
         1.0 / 2400.0, 0.0,
         0.0,          1.0 / 800.0,
         1.0 / 20.0,   0.0,
         0.0,          1.0 / 20.0;
  // clang-format on
  m.C1 = Matrix::Zero(3, 5);
  m.C1.leftCols(3).setIdentity();
  m.C2 = m.C1;
  m.w_support = Vector::Constant(5, 2.5e-4);
  m.zeta_support = Vector::Constant(3, 1e-2);
  m.eta_support = Vector::Constant(3, 2e-2);
  return m;
}

Vector lane_keeping_watermark_support() { return Vector::Constant(2, 2.0); }

ControllerConfig lane_keeping_reference_gains() {
  const nlohmann::json doc = nlohmann::json::parse(kLaneKeepingGainsJson);
  ControllerConfig ctl;
  ctl.K = matrix_from_json(doc.at("K"), "K");
  ctl.L1 = matrix_from_json(doc.at("L1"), "L1");
  ctl.L2 = matrix_from_json(doc.at("L2"), "L2");
  ctl.e_support = lane_keeping_watermark_support();
  return ctl;
}

}  // namespace dynwm
