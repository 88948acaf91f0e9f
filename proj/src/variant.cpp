#include "predformer/variant.hpp"

#include <algorithm>
#include <array>

#include "predformer/errors.hpp"

namespace predformer {

namespace {

struct VariantInfo {
    VariantKind kind;
    const char* name;
};

constexpr std::array<VariantInfo, 9> kVariants = {{
    {VariantKind::FullAttention, "full"},
    {VariantKind::FacST, "fac_st"},
    {VariantKind::FacTS, "fac_ts"},
    {VariantKind::BinaryTS, "binary_ts"},
    {VariantKind::BinaryST, "binary_st"},
    {VariantKind::TripletTST, "triplet_tst"},
    {VariantKind::TripletSTS, "triplet_sts"},
    {VariantKind::QuadTSST, "quad_tsst"},
    {VariantKind::QuadSTTS, "quad_stts"},
}};

}  // namespace

int64_t gtbs_per_layer(VariantKind kind) {
    switch (kind) {
        case VariantKind::FullAttention:
        case VariantKind::FacST:
        case VariantKind::FacTS:
            return 1;
        case VariantKind::BinaryTS:
        case VariantKind::BinaryST:
            return 2;
        case VariantKind::TripletTST:
        case VariantKind::TripletSTS:
            return 3;
        case VariantKind::QuadTSST:
        case VariantKind::QuadSTTS:
            return 4;
    }
    throw ConfigError("unknown variant kind");
}

int64_t total_gtbs(const VariantSpec& spec) { return spec.layers * gtbs_per_layer(spec.kind); }

std::vector<std::vector<AxisKind>> block_schedule(const VariantSpec& spec) {
    if (spec.layers < 1) throw ConfigError("variant layer count must be >= 1");
    const AxisKind S = AxisKind::Spatial;
    const AxisKind T = AxisKind::Temporal;
    std::vector<std::vector<AxisKind>> layers;
    layers.reserve(static_cast<size_t>(spec.layers));
    switch (spec.kind) {
        case VariantKind::FullAttention:
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({AxisKind::Full});
            return layers;
        case VariantKind::FacST:
        case VariantKind::FacTS: {
            // Two contiguous single-axis stages, split half and half.
            const int64_t first = (spec.layers + 1) / 2;
            const AxisKind first_axis = spec.kind == VariantKind::FacST ? S : T;
            const AxisKind second_axis = spec.kind == VariantKind::FacST ? T : S;
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({i < first ? first_axis : second_axis});
            return layers;
        }
        case VariantKind::BinaryTS:
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({T, S});
            return layers;
        case VariantKind::BinaryST:
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({S, T});
            return layers;
        case VariantKind::TripletTST:
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({T, S, T});
            return layers;
        case VariantKind::TripletSTS:
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({S, T, S});
            return layers;
        case VariantKind::QuadTSST:
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({T, S, S, T});
            return layers;
        case VariantKind::QuadSTTS:
            for (int64_t i = 0; i < spec.layers; ++i) layers.push_back({S, T, T, S});
            return layers;
    }
    throw ConfigError("unknown variant kind");
}

VariantSpec variant_for_budget(VariantKind kind, int64_t gtb_budget, bool layer_skip) {
    if (gtb_budget < 1) throw ConfigError("GTB budget must be >= 1");
    const int64_t per = gtbs_per_layer(kind);
    return VariantSpec{kind, std::max<int64_t>(1, gtb_budget / per), layer_skip};
}

const std::vector<std::string>& variant_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& info : kVariants) v.emplace_back(info.name);
        return v;
    }();
    return names;
}

std::string variant_name(VariantKind kind) {
    for (const auto& info : kVariants) {
        if (info.kind == kind) return info.name;
    }
    throw ConfigError("unknown variant kind");
}

std::optional<VariantKind> parse_variant(const std::string& name) {
    for (const auto& info : kVariants) {
        if (name == info.name) return info.kind;
    }
    return std::nullopt;
}

const std::vector<VariantKind>& all_variants() {
    static const std::vector<VariantKind> kinds = [] {
        std::vector<VariantKind> v;
        for (const auto& info : kVariants) v.push_back(info.kind);
        return v;
    }();
    return kinds;
}

}  // namespace predformer
