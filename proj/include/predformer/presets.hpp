#pragma once

#include <string>
#include <vector>

#include "predformer/model.hpp"

namespace predformer {

// Named benchmark configurations. The four dataset presets carry the
// published geometry and hyperparameters; "mm-analog" is a desk-scale
// stand-in for quick experiments on the synthetic generator.
const std::vector<std::string>& preset_names();

// GTB budget the preset assigns to the given variant (the Triplet designs
// get the nearest divisible budget on the small datasets).
int64_t preset_gtb_budget(const std::string& preset, VariantKind kind);

ModelConfig preset_config(const std::string& preset, VariantKind kind);

}  // namespace predformer
