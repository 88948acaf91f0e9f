#include "predformer/presets.hpp"

namespace predformer {

namespace {

bool is_triplet(VariantKind kind) {
    return kind == VariantKind::TripletTST || kind == VariantKind::TripletSTS;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"moving-mnist", "human36m", "taxibj", "weatherbench",
                                                   "mm-analog"};
    return names;
}

int64_t preset_gtb_budget(const std::string& preset, VariantKind kind) {
    if (preset == "moving-mnist") return 24;
    if (preset == "human36m") return 12;
    if (preset == "taxibj" || preset == "weatherbench") return is_triplet(kind) ? 6 : 8;
    if (preset == "mm-analog") return is_triplet(kind) ? 6 : 8;
    throw ConfigError("unknown preset '" + preset + "'");
}

ModelConfig preset_config(const std::string& preset, VariantKind kind) {
    ModelConfig cfg;
    cfg.variant = variant_for_budget(kind, preset_gtb_budget(preset, kind));
    if (preset == "moving-mnist") {
        cfg.t_in = cfg.t_out = 10;
        cfg.channels = 1;
        cfg.height = cfg.width = 64;
        cfg.patch = 8;
        cfg.dim = 256;
        cfg.heads = 8;
        cfg.hidden = 1024;
    } else if (preset == "human36m") {
        cfg.t_in = cfg.t_out = 4;
        cfg.channels = 3;
        cfg.height = cfg.width = 256;
        cfg.patch = 8;
        cfg.dim = 256;
        cfg.heads = 8;
        cfg.hidden = 1024;
        cfg.drop.attn_dropout = 0.1;
        cfg.drop.ffn_dropout = 0.1;
        cfg.drop.drop_path_rate = 0.1;
    } else if (preset == "taxibj") {
        cfg.t_in = cfg.t_out = 4;
        cfg.channels = 2;
        cfg.height = cfg.width = 32;
        cfg.patch = 4;
        cfg.dim = 256;
        cfg.heads = 8;
        cfg.hidden = 1024;
        cfg.drop.attn_dropout = 0.1;
        cfg.drop.ffn_dropout = 0.1;
        cfg.drop.drop_path_rate = 0.1;
    } else if (preset == "weatherbench") {
        cfg.t_in = cfg.t_out = 12;
        cfg.channels = 1;
        cfg.height = 32;
        cfg.width = 64;
        cfg.patch = 4;
        cfg.dim = 256;
        cfg.heads = 8;
        cfg.hidden = 512;
        cfg.drop.attn_dropout = 0.1;
        cfg.drop.ffn_dropout = 0.1;
        cfg.drop.drop_path_rate = 0.25;
    } else if (preset == "mm-analog") {
        cfg.t_in = cfg.t_out = 10;
        cfg.channels = 1;
        cfg.height = cfg.width = 32;
        cfg.patch = 4;
        cfg.dim = 128;
        cfg.heads = 4;
        cfg.hidden = 256;
    } else {
        throw ConfigError("unknown preset '" + preset + "'");
    }
    cfg.validate();
    return cfg;
}

}  // namespace predformer
