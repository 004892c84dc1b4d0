#pragma once

#include "dynwm/model.h"

namespace dynwm {

/// Linearized lane keeping and speed control at 10 m/s with a 0.05 s step.
/// State (heading error, lateral error, distance, vehicle angle, velocity),
/// input (steering, acceleration), C1 = C2 = [I 0].
PlantModel lane_keeping_preset();

/// Watermark half-widths used with the lane-keeping preset.
Vector lane_keeping_watermark_support();

/// The committed reference gains for the preset (LQR with identity weights,
/// synthesized once and stored in data/lane_keeping_gains.json).
ControllerConfig lane_keeping_reference_gains();

}  // namespace dynwm
