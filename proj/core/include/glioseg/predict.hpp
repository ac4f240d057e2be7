#pragma once

#include "glioseg/patching.hpp"
#include "glioseg/segmodel.hpp"
#include "glioseg/tensor.hpp"
#include "glioseg/volume.hpp"

namespace glioseg {

// Full-volume probability maps for one normalized subject: corner-anchored
// patches over the brain box, one forward pass each, overlap-averaged back to
// volume size. Deterministic for a fixed checkpoint.
ProbabilityMaps predict_probability_maps(SegModel& model, const Subject& subject,
                                         const PatchConfig& pcfg);

}  // namespace glioseg
