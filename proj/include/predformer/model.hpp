#pragma once

#include <string>
#include <vector>

#include "predformer/layers.hpp"
#include "predformer/variant.hpp"

namespace predformer {

enum class PeKind { SinusoidalAbsolute, Learnable };

// Full description of one model instance: geometry, encoder variant,
// regularization and the two ablation switches.
struct ModelConfig {
    int64_t t_in = 10;
    int64_t t_out = 10;
    int64_t channels = 1;
    int64_t height = 32;
    int64_t width = 32;
    int64_t patch = 8;
    int64_t dim = 128;
    int64_t heads = 4;
    int64_t hidden = 256;  // SwiGLU hidden width
    VariantSpec variant{VariantKind::BinaryTS, 2, false};
    DropSpec drop{};
    PeKind pe_kind = PeKind::SinusoidalAbsolute;
    FfnKind ffn_kind = FfnKind::SwiGlu;
    bool final_norm = true;

    bool operator==(const ModelConfig&) const = default;

    int64_t patches_per_frame() const { return (height / patch) * (width / patch); }
    int64_t patch_dim() const { return patch * patch * channels; }

    void validate() const {
        if (t_in < 1 || channels < 1 || height < 1 || width < 1 || patch < 1) {
            throw ConfigError("frame geometry values must be >= 1");
        }
        if (height % patch != 0 || width % patch != 0) {
            throw ConfigError("frame size " + std::to_string(height) + "x" + std::to_string(width) +
                              " is not divisible by patch size " + std::to_string(patch));
        }
        if (t_out != t_in) {
            throw ConfigError("t_out must equal t_in (one output frame per temporal token), got " +
                              std::to_string(t_out) + " vs " + std::to_string(t_in));
        }
        if (dim < 2 || dim % 2 != 0) throw ConfigError("model dim must be even for sinusoidal encoding");
        if (heads < 1 || dim % heads != 0) {
            throw ConfigError("model dim " + std::to_string(dim) + " is not divisible by heads " +
                              std::to_string(heads));
        }
        if (hidden < 1) throw ConfigError("hidden width must be >= 1");
        if (variant.layers < 1) throw ConfigError("variant layer count must be >= 1");
        drop.validate();
    }
};

// Standard sin/cos code for one coordinate: pair k of channels uses
// frequency 10000^(-2k/d).
inline std::vector<double> sincos_code(double pos, int64_t d) {
    std::vector<double> out(static_cast<size_t>(d));
    for (int64_t k = 0; k < d / 2; ++k) {
        const double freq = std::pow(10000.0, -2.0 * static_cast<double>(k) / static_cast<double>(d));
        const double angle = pos * freq;
        out[static_cast<size_t>(2 * k)] = std::sin(angle);
        out[static_cast<size_t>(2 * k + 1)] = std::cos(angle);
    }
    return out;
}

// Absolute spatiotemporal encoding: PE[t, n, :] = S(t) + S(n + 1/2), where S
// is the sinusoidal code above and n is the flattened patch index. Temporal
// coordinates sit on integers and spatial ones on half-integers; a plain
// S(t) + S(n) would make rows (t, n) and (n, t) collide.
template <typename T>
Tensor<T> positional_encoding(int64_t t_len, int64_t n_len, int64_t d) {
    if (d < 2 || d % 2 != 0) throw ConfigError("positional encoding requires an even dim");
    std::vector<std::vector<double>> time_codes(static_cast<size_t>(t_len));
    for (int64_t t = 0; t < t_len; ++t) time_codes[static_cast<size_t>(t)] = sincos_code(static_cast<double>(t), d);
    Tensor<T> pe({t_len, n_len, d});
    auto out = pe.mut_data();
    for (int64_t n = 0; n < n_len; ++n) {
        const std::vector<double> space = sincos_code(static_cast<double>(n) + 0.5, d);
        for (int64_t t = 0; t < t_len; ++t) {
            T* row = out.data() + (t * n_len + n) * d;
            const std::vector<double>& time = time_codes[static_cast<size_t>(t)];
            for (int64_t i = 0; i < d; ++i) {
                row[i] = static_cast<T>(time[static_cast<size_t>(i)] + space[static_cast<size_t>(i)]);
            }
        }
    }
    return pe;
}

// All trainable tensors of one model, in a fixed enumeration order that the
// optimizer, checkpoints and the parameter counter share.
template <typename T>
struct ModelParams {
    Tensor<T> embed_w, embed_b;
    LayerNormParams<T> embed_ln;
    Tensor<T> pos_embed;  // learnable PE only; undefined otherwise
    std::vector<GtbParams<T>> blocks;
    LayerNormParams<T> final_ln;  // only when cfg.final_norm
    Tensor<T> dec_w, dec_b;

    static ModelParams init(const ModelConfig& cfg, Rng& rng) { return build(cfg, &rng); }
    static ModelParams zeros(const ModelConfig& cfg) { return build(cfg, nullptr); }

    static ModelParams build(const ModelConfig& cfg, Rng* rng) {
        cfg.validate();
        ModelParams p;
        const int64_t pd = cfg.patch_dim();
        p.embed_w = detail::init_weight<T>({pd, cfg.dim}, rng);
        p.embed_b = Tensor<T>::zeros({cfg.dim});
        p.embed_ln = LayerNormParams<T>::make(cfg.dim);
        if (cfg.pe_kind == PeKind::Learnable) {
            p.pos_embed = rng ? random_normal<T>({cfg.t_in, cfg.patches_per_frame(), cfg.dim}, *rng, T(kInitStd))
                              : Tensor<T>::zeros({cfg.t_in, cfg.patches_per_frame(), cfg.dim});
        }
        const int64_t n_blocks = total_gtbs(cfg.variant);
        p.blocks.reserve(static_cast<size_t>(n_blocks));
        for (int64_t i = 0; i < n_blocks; ++i) {
            p.blocks.push_back(GtbParams<T>::build(cfg.dim, cfg.heads, cfg.hidden, cfg.ffn_kind, rng));
        }
        if (cfg.final_norm) p.final_ln = LayerNormParams<T>::make(cfg.dim);
        p.dec_w = detail::init_weight<T>({cfg.dim, pd}, rng);
        p.dec_b = Tensor<T>::zeros({pd});
        return p;
    }

    template <typename Fn>
    void for_each_param(Fn&& fn) {
        fn("embed.w", embed_w);
        fn("embed.b", embed_b);
        fn("embed.ln.gamma", embed_ln.gamma);
        fn("embed.ln.beta", embed_ln.beta);
        if (pos_embed.defined()) fn("pos_embed", pos_embed);
        for (size_t i = 0; i < blocks.size(); ++i) {
            const std::string prefix = "block" + std::to_string(i) + ".";
            GtbParams<T>& b = blocks[i];
            fn(prefix + "ln1.gamma", b.ln1.gamma);
            fn(prefix + "ln1.beta", b.ln1.beta);
            fn(prefix + "attn.w_query", b.attn.w_query);
            fn(prefix + "attn.b_query", b.attn.b_query);
            fn(prefix + "attn.w_key", b.attn.w_key);
            fn(prefix + "attn.b_key", b.attn.b_key);
            fn(prefix + "attn.w_value", b.attn.w_value);
            fn(prefix + "attn.b_value", b.attn.b_value);
            fn(prefix + "attn.w_out", b.attn.w_out);
            fn(prefix + "attn.b_out", b.attn.b_out);
            fn(prefix + "ln2.gamma", b.ln2.gamma);
            fn(prefix + "ln2.beta", b.ln2.beta);
            if (auto* sw = std::get_if<SwiGluParams<T>>(&b.ffn)) {
                fn(prefix + "ffn.w_gate", sw->w_gate);
                fn(prefix + "ffn.b_gate", sw->b_gate);
                fn(prefix + "ffn.w_value", sw->w_value);
                fn(prefix + "ffn.b_value", sw->b_value);
                fn(prefix + "ffn.w_out", sw->w_out);
                fn(prefix + "ffn.b_out", sw->b_out);
            } else {
                auto& mlp = std::get<MlpParams<T>>(b.ffn);
                fn(prefix + "ffn.w_in", mlp.w_in);
                fn(prefix + "ffn.b_in", mlp.b_in);
                fn(prefix + "ffn.w_out", mlp.w_out);
                fn(prefix + "ffn.b_out", mlp.b_out);
            }
        }
        if (final_ln.gamma.defined()) {
            fn("final_ln.gamma", final_ln.gamma);
            fn("final_ln.beta", final_ln.beta);
        }
        fn("dec.w", dec_w);
        fn("dec.b", dec_b);
    }

    int64_t parameter_count() {
        int64_t n = 0;
        for_each_param([&n](const std::string&, Tensor<T>& t) { n += t.numel(); });
        return n;
    }
};

// ---------------------------------------------------------------------------
// Model forward
// ---------------------------------------------------------------------------

// Frames [B,T,C,H,W] -> token grid [B,T,N,D]: non-overlapping p x p patches
// flattened (row-major within the patch, channel last), linearly projected
// and layer-normalized.
template <typename T>
Value<T> patch_embed(Tape<T>& tp, const Value<T>& frames, const ModelConfig& cfg, ModelParams<T>& params) {
    const Shape& fs = frames.shape();
    if (fs.size() != 5) throw ShapeError("patch_embed: frames must be [B,T,C,H,W], got " + shape_str(fs));
    const int64_t B = fs[0], Tn = fs[1], C = fs[2], H = fs[3], W = fs[4];
    if (C != cfg.channels || H != cfg.height || W != cfg.width) {
        throw ShapeError("patch_embed: frame dims " + shape_str(fs) + " do not match the model configuration");
    }
    if (H % cfg.patch != 0 || W % cfg.patch != 0) {
        throw ConfigError("patch_embed: frame size is not divisible by patch size " + std::to_string(cfg.patch));
    }
    const int64_t p = cfg.patch;
    const int64_t hp = H / p, wp = W / p;
    Value<T> x = reshape(tp, frames, {B, Tn, C, hp, p, wp, p});
    x = permute(tp, x, {0, 1, 3, 5, 4, 6, 2});  // [B,T,hp,wp,p,p,C]
    x = reshape(tp, x, {B, Tn, hp * wp, p * p * C});
    x = linear(tp, x, params.embed_w, params.embed_b);
    return layer_norm(tp, x, params.embed_ln);
}

// Token grid [B,T,N,D] -> frames [B,T,C,H,W]: per-token linear map back to
// patch pixels, patches placed at their original positions.
template <typename T>
Value<T> patch_recover(Tape<T>& tp, const Value<T>& tokens, const ModelConfig& cfg, ModelParams<T>& params) {
    const Shape& ts = tokens.shape();
    if (ts.size() != 4) throw ShapeError("patch_recover: tokens must be [B,T,N,D], got " + shape_str(ts));
    const int64_t B = ts[0], Tn = ts[1];
    const int64_t p = cfg.patch;
    const int64_t hp = cfg.height / p, wp = cfg.width / p;
    if (ts[2] != hp * wp || ts[3] != cfg.dim) {
        throw ShapeError("patch_recover: token grid " + shape_str(ts) + " does not match the model configuration");
    }
    Value<T> y = linear(tp, tokens, params.dec_w, params.dec_b);  // [B,T,N,p*p*C]
    y = reshape(tp, y, {B, Tn, hp, wp, p, p, cfg.channels});
    y = permute(tp, y, {0, 1, 6, 2, 4, 3, 5});  // [B,T,C,hp,p,wp,p]
    return reshape(tp, y, {B, Tn, cfg.channels, cfg.height, cfg.width});
}

// Attention over the N patches of each frame; frames do not interact.
template <typename T>
Value<T> spatial_pass(Tape<T>& tp, const Value<T>& x, const GtbParams<T>& block, const DropSpec& drop,
                      int64_t block_index, int64_t total_blocks, Rng& rng) {
    const Shape s = x.shape();  // [B,T,N,D]
    Value<T> flat = reshape(tp, x, {s[0] * s[1], s[2], s[3]});
    flat = gtb_forward(tp, flat, block, drop, block_index, total_blocks, rng);
    return reshape(tp, flat, s);
}

// Attention over the T time steps of each patch position; patches do not
// interact.
template <typename T>
Value<T> temporal_pass(Tape<T>& tp, const Value<T>& x, const GtbParams<T>& block, const DropSpec& drop,
                       int64_t block_index, int64_t total_blocks, Rng& rng) {
    const Shape s = x.shape();  // [B,T,N,D]
    Value<T> t = permute(tp, x, {0, 2, 1, 3});  // [B,N,T,D]
    t = reshape(tp, t, {s[0] * s[2], s[1], s[3]});
    t = gtb_forward(tp, t, block, drop, block_index, total_blocks, rng);
    t = reshape(tp, t, {s[0], s[2], s[1], s[3]});
    return permute(tp, t, {0, 2, 1, 3});
}

// Attention over all T*N tokens at once.
template <typename T>
Value<T> full_pass(Tape<T>& tp, const Value<T>& x, const GtbParams<T>& block, const DropSpec& drop,
                   int64_t block_index, int64_t total_blocks, Rng& rng) {
    const Shape s = x.shape();
    Value<T> flat = reshape(tp, x, {s[0], s[1] * s[2], s[3]});
    flat = gtb_forward(tp, flat, block, drop, block_index, total_blocks, rng);
    return reshape(tp, flat, s);
}

// Runs the variant's block schedule over the token grid. Block parameters
// are consumed in schedule order; with layer_skip each PredFormer layer's
// output additionally adds its input.
template <typename T>
Value<T> encoder_forward(Tape<T>& tp, const Value<T>& x, const ModelConfig& cfg, ModelParams<T>& params,
                         const DropSpec& drop, Rng& rng) {
    const auto schedule = block_schedule(cfg.variant);
    const int64_t total_blocks = total_gtbs(cfg.variant);
    if (static_cast<int64_t>(params.blocks.size()) != total_blocks) {
        throw ConfigError("encoder_forward: parameter block count " + std::to_string(params.blocks.size()) +
                          " does not match schedule length " + std::to_string(total_blocks));
    }
    Value<T> h = x;
    int64_t block_index = 0;
    for (const auto& layer : schedule) {
        Value<T> layer_in = h;
        for (AxisKind axis : layer) {
            const GtbParams<T>& block = params.blocks[static_cast<size_t>(block_index)];
            switch (axis) {
                case AxisKind::Spatial:
                    h = spatial_pass(tp, h, block, drop, block_index, total_blocks, rng);
                    break;
                case AxisKind::Temporal:
                    h = temporal_pass(tp, h, block, drop, block_index, total_blocks, rng);
                    break;
                case AxisKind::Full:
                    h = full_pass(tp, h, block, drop, block_index, total_blocks, rng);
                    break;
            }
            ++block_index;
        }
        if (cfg.variant.layer_skip) h = add(tp, layer_in, h);
    }
    return h;
}

// End-to-end predictor: embed, add positional encoding, encode, (final LN),
// decode back to frames. `mode` selects train/eval behavior of dropout and
// stochastic depth regardless of what cfg.drop.mode says.
template <typename T>
Value<T> model_forward(Tape<T>& tp, const Value<T>& frames, const ModelConfig& cfg, ModelParams<T>& params,
                       Mode mode, Rng& rng) {
    DropSpec drop = cfg.drop;
    drop.mode = mode;
    Value<T> x = patch_embed(tp, frames, cfg, params);
    if (cfg.pe_kind == PeKind::Learnable) {
        x = add_broadcast(tp, x, tp.param(params.pos_embed));
    } else {
        Tensor<T> pe = positional_encoding<T>(cfg.t_in, cfg.patches_per_frame(), cfg.dim);
        x = add_broadcast(tp, x, Value<T>(pe));
    }
    x = encoder_forward(tp, x, cfg, params, drop, rng);
    if (cfg.final_norm) x = layer_norm(tp, x, params.final_ln);
    return patch_recover(tp, x, cfg, params);
}

// Convenience wrapper for inference on plain tensors.
template <typename T>
Tensor<T> predict(const ModelConfig& cfg, ModelParams<T>& params, const Tensor<T>& frames, uint64_t dropout_seed = 0) {
    Tape<T> tp(false);
    Rng rng(dropout_seed);
    return model_forward(tp, Value<T>(frames), cfg, params, Mode::Eval, rng).data;
}

}  // namespace predformer
