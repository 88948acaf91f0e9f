#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace predformer {

// The nine encoder configurations: full spatiotemporal attention, the two
// factorized encoders, and the six interleaved layer designs.
enum class VariantKind {
    FullAttention,
    FacST,
    FacTS,
    BinaryTS,
    BinaryST,
    TripletTST,
    TripletSTS,
    QuadTSST,
    QuadSTTS,
};

// Token axis a block attends over.
enum class AxisKind { Spatial, Temporal, Full };

struct VariantSpec {
    VariantKind kind = VariantKind::BinaryTS;
    int64_t layers = 1;      // PredFormer layers (for Full/Fac: single blocks)
    bool layer_skip = false; // extra residual around each layer

    bool operator==(const VariantSpec&) const = default;
};

// Blocks per PredFormer layer: 1 for Full/Fac, 2/3/4 for Binary/Triplet/Quad.
int64_t gtbs_per_layer(VariantKind kind);

int64_t total_gtbs(const VariantSpec& spec);

// Per-layer block axes, in execution order. Fac variants are returned as
// single-block layers forming two contiguous stages.
std::vector<std::vector<AxisKind>> block_schedule(const VariantSpec& spec);

// Largest layer count whose block total does not exceed the budget; keeps
// block budgets comparable across variants, rounding the Triplet down when
// the budget is not divisible by 3.
VariantSpec variant_for_budget(VariantKind kind, int64_t gtb_budget, bool layer_skip = false);

const std::vector<std::string>& variant_names();
std::string variant_name(VariantKind kind);
std::optional<VariantKind> parse_variant(const std::string& name);
const std::vector<VariantKind>& all_variants();

}  // namespace predformer
