#include "predformer/cost.hpp"

namespace predformer {

namespace {

int64_t ffn_params(const ModelConfig& cfg) {
    const int64_t d = cfg.dim;
    if (cfg.ffn_kind == FfnKind::SwiGlu) {
        const int64_t h = cfg.hidden;
        return 2 * (d * h + h) + h * d + d;  // gate, value, out projection
    }
    const int64_t h = mlp_hidden_dim(cfg.hidden);
    return d * h + h + h * d + d;
}

int64_t gtb_params(const ModelConfig& cfg) {
    const int64_t d = cfg.dim;
    const int64_t ln = 2 * d;
    const int64_t attn = 4 * (d * d + d);  // q, k, v, out with biases
    return 2 * ln + attn + ffn_params(cfg);
}

// (groups, sequence length) a block of the given axis runs attention over.
std::pair<int64_t, int64_t> axis_geometry(AxisKind axis, const ModelConfig& cfg) {
    const int64_t n = cfg.patches_per_frame();
    switch (axis) {
        case AxisKind::Spatial:
            return {cfg.t_in, n};
        case AxisKind::Temporal:
            return {n, cfg.t_in};
        case AxisKind::Full:
            return {1, cfg.t_in * n};
    }
    throw ConfigError("unknown axis kind");
}

int64_t gtb_flops(AxisKind axis, const ModelConfig& cfg) {
    const auto [groups, len] = axis_geometry(axis, cfg);
    const int64_t d = cfg.dim;
    const int64_t proj = 4 * groups * len * d * d;
    const int64_t attn = 2 * groups * len * len * d;
    int64_t ffn;
    if (cfg.ffn_kind == FfnKind::SwiGlu) {
        ffn = 3 * groups * len * d * cfg.hidden;
    } else {
        ffn = 2 * groups * len * d * mlp_hidden_dim(cfg.hidden);
    }
    return proj + attn + ffn;
}

}  // namespace

int64_t count_params(const ModelConfig& cfg) {
    cfg.validate();
    const int64_t d = cfg.dim;
    const int64_t pd = cfg.patch_dim();
    int64_t total = pd * d + d;  // patch embedding
    total += 2 * d;              // embedding layer norm
    if (cfg.pe_kind == PeKind::Learnable) total += cfg.t_in * cfg.patches_per_frame() * d;
    total += total_gtbs(cfg.variant) * gtb_params(cfg);
    if (cfg.final_norm) total += 2 * d;
    total += d * pd + pd;  // decoder
    return total;
}

int64_t estimate_flops(const ModelConfig& cfg) {
    cfg.validate();
    const int64_t tokens = cfg.t_in * cfg.patches_per_frame();
    int64_t total = 2 * tokens * cfg.patch_dim() * cfg.dim;  // embed + decode
    for (const auto& layer : block_schedule(cfg.variant)) {
        for (AxisKind axis : layer) total += gtb_flops(axis, cfg);
    }
    return total;
}

}  // namespace predformer
