#pragma once

#include <cstdint>

#include "predformer/model.hpp"

namespace predformer {

// Exact trainable-parameter count from closed-form sums over the embedding,
// positional encoding, blocks and decoder. Matches the tensor enumeration of
// ModelParams exactly.
int64_t count_params(const ModelConfig& cfg);

// Analytic per-sample cost under the MAC = 1 FLOP convention: linear
// projections, attention score/value products and the feed-forward matrices
// of every scheduled block, plus patch embedding and recovery. Softmax,
// layer norm and elementwise work are not counted.
int64_t estimate_flops(const ModelConfig& cfg);

}  // namespace predformer
