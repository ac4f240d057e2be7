#include "glioseg/predict.hpp"

namespace glioseg {

ProbabilityMaps predict_probability_maps(SegModel& model, const Subject& subject,
                                         const PatchConfig& pcfg) {
  pcfg.validate();
  if (model.config().patch_size != pcfg.patch_size)
    throw ConfigError("predict: model patch_size does not match patch config");

  const BrainBox box = bounding_box(union_brain_mask(subject));
  const std::vector<PatchSpec> specs = patches_corner_anchored(box, pcfg);

  std::vector<Tensor4> prob_patches;
  prob_patches.reserve(specs.size());
  for (const PatchSpec& spec : specs)
    prob_patches.push_back(model.forward(extract_patch(subject, spec), false));

  return reconstruct(prob_patches, specs, subject.modalities[0].shape);
}

}  // namespace glioseg
