#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "predformer/rng.hpp"
#include "predformer/tensor.hpp"

namespace predformer {

enum class ObjectKind { Square, Cross, Disk };

inline std::string object_kind_name(ObjectKind k) {
    switch (k) {
        case ObjectKind::Square:
            return "square";
        case ObjectKind::Cross:
            return "cross";
        case ObjectKind::Disk:
            return "disk";
    }
    throw Error("unknown object kind");
}

inline std::optional<ObjectKind> parse_object_kind(const std::string& s) {
    if (s == "square") return ObjectKind::Square;
    if (s == "cross") return ObjectKind::Cross;
    if (s == "disk") return ObjectKind::Disk;
    return std::nullopt;
}

// Parameters of the synthetic moving-shapes generator. Positions and
// velocities are integers and the bounce arithmetic is integer-only, so a
// given (spec, count, frames) triple produces bit-identical sequences on
// every platform.
struct ShapeSpec {
    int64_t height = 32;
    int64_t width = 32;
    int64_t num_objects = 2;
    std::vector<ObjectKind> kinds = {ObjectKind::Square, ObjectKind::Cross, ObjectKind::Disk};
    int64_t min_size = 6;
    int64_t max_size = 8;
    int64_t min_speed = 1;
    int64_t max_speed = 3;
    bool allow_zero_speed = false;  // testing hook: permits static objects
    uint64_t seed = 0;

    void validate() const {
        if (height < 2 || width < 2) throw ConfigError("canvas must be at least 2x2");
        if (num_objects < 1) throw ConfigError("at least one object required");
        if (kinds.empty()) throw ConfigError("object kind list must not be empty");
        if (min_size < 1 || min_size > max_size) throw ConfigError("invalid object size range");
        if (max_size >= std::min(height, width) / 2) {
            throw ConfigError("object size must stay below half the canvas (got max size " +
                              std::to_string(max_size) + " on " + std::to_string(height) + "x" +
                              std::to_string(width) + ")");
        }
        const int64_t speed_floor = allow_zero_speed ? 0 : 1;
        if (min_speed < speed_floor || min_speed > max_speed) {
            throw ConfigError("speeds must be >= 1 (or >= 0 with the zero-speed flag) and min <= max");
        }
    }
};

// Frame sequences plus the context/target split they were generated for.
template <typename T>
struct SequenceBatch {
    Tensor<T> frames;  // [B, T + T', C, H, W], values in [0, 1]
    int64_t t_in = 0;
    int64_t t_out = 0;
};

namespace detail {

// Specular reflection of an overshooting coordinate into [0, limit],
// flipping the velocity sign once per wall crossing.
inline void reflect_axis(int64_t& pos, int64_t& vel, int64_t limit) {
    pos += vel;
    while (pos < 0 || pos > limit) {
        if (pos < 0) {
            pos = -pos;
        } else {
            pos = 2 * limit - pos;
        }
        vel = -vel;
    }
}

struct MovingObject {
    ObjectKind kind;
    int64_t size;
    int64_t x, y;    // top-left corner
    int64_t vx, vy;  // pixels per frame
};

template <typename T>
void rasterize(const MovingObject& o, int64_t height, int64_t width, T* frame) {
    auto put = [&](int64_t row, int64_t col) {
        if (row >= 0 && row < height && col >= 0 && col < width) frame[row * width + col] = T(1);
    };
    switch (o.kind) {
        case ObjectKind::Square:
            for (int64_t r = 0; r < o.size; ++r)
                for (int64_t c = 0; c < o.size; ++c) put(o.y + r, o.x + c);
            break;
        case ObjectKind::Cross: {
            const int64_t bar = std::max<int64_t>(1, o.size / 3);
            const int64_t off = (o.size - bar) / 2;
            for (int64_t r = 0; r < o.size; ++r)
                for (int64_t c = 0; c < bar; ++c) put(o.y + r, o.x + off + c);
            for (int64_t r = 0; r < bar; ++r)
                for (int64_t c = 0; c < o.size; ++c) put(o.y + off + r, o.x + c);
            break;
        }
        case ObjectKind::Disk: {
            // Disk of diameter `size`; the comparison is done in half-pixel
            // units to keep the center exact for even sizes.
            const int64_t s = o.size;
            for (int64_t r = 0; r < s; ++r) {
                for (int64_t c = 0; c < s; ++c) {
                    const int64_t dy = 2 * r - (s - 1);
                    const int64_t dx = 2 * c - (s - 1);
                    if (dy * dy + dx * dx <= s * s) put(o.y + r, o.x + c);
                }
            }
            break;
        }
    }
}

}  // namespace detail

// Generates `count` sequences of `frames_total` frames. Objects move with
// constant integer velocity and bounce specularly off the canvas borders;
// overlaps composite by per-pixel max (all object pixels are exactly 1).
// Sequence i is generated from an rng seeded with spec.seed ^ i, so distinct
// sequences are independent and generation order does not matter.
template <typename T>
Tensor<T> gen_moving_shapes(const ShapeSpec& spec, int64_t count, int64_t frames_total) {
    spec.validate();
    if (count < 1 || frames_total < 1) throw ConfigError("count and frame total must be >= 1");
    Tensor<T> out({count, frames_total, 1, spec.height, spec.width});
    auto buf = out.mut_data();
    const int64_t frame_px = spec.height * spec.width;

    for (int64_t s = 0; s < count; ++s) {
        Rng rng(spec.seed ^ static_cast<uint64_t>(s));
        std::vector<detail::MovingObject> objects;
        objects.reserve(static_cast<size_t>(spec.num_objects));
        for (int64_t o = 0; o < spec.num_objects; ++o) {
            detail::MovingObject obj;
            obj.kind = spec.kinds[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(spec.kinds.size()) - 1))];
            obj.size = rng.uniform_int(spec.min_size, spec.max_size);
            obj.x = rng.uniform_int(0, spec.width - obj.size);
            obj.y = rng.uniform_int(0, spec.height - obj.size);
            const int64_t sx = rng.uniform_int(spec.min_speed, spec.max_speed);
            obj.vx = rng.bernoulli(0.5) ? sx : -sx;
            const int64_t sy = rng.uniform_int(spec.min_speed, spec.max_speed);
            obj.vy = rng.bernoulli(0.5) ? sy : -sy;
            objects.push_back(obj);
        }
        for (int64_t f = 0; f < frames_total; ++f) {
            T* frame = buf.data() + (s * frames_total + f) * frame_px;
            for (const auto& obj : objects) detail::rasterize(obj, spec.height, spec.width, frame);
            for (auto& obj : objects) {
                detail::reflect_axis(obj.x, obj.vx, spec.width - obj.size);
                detail::reflect_axis(obj.y, obj.vy, spec.height - obj.size);
            }
        }
    }
    return out;
}

template <typename T>
SequenceBatch<T> gen_sequence_batch(const ShapeSpec& spec, int64_t count, int64_t t_in, int64_t t_out) {
    return SequenceBatch<T>{gen_moving_shapes<T>(spec, count, t_in + t_out), t_in, t_out};
}

// Prefix/suffix split of [B, T+T', C, H, W] into context and target.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_context_target(const Tensor<T>& frames, int64_t t_in, int64_t t_out) {
    if (frames.ndim() != 5) {
        throw ShapeError("split_context_target: frames must be [B,T,C,H,W], got " + shape_str(frames.shape()));
    }
    if (frames.dim(1) != t_in + t_out) {
        throw ShapeError("split_context_target: frame axis " + std::to_string(frames.dim(1)) +
                         " does not equal T + T' = " + std::to_string(t_in + t_out));
    }
    const int64_t B = frames.dim(0);
    Shape ctx_shape = frames.shape();
    ctx_shape[1] = t_in;
    Shape tgt_shape = frames.shape();
    tgt_shape[1] = t_out;
    Tensor<T> ctx(ctx_shape);
    Tensor<T> tgt(tgt_shape);
    const int64_t frame_sz = frames.numel() / (B * (t_in + t_out));
    const T* src = frames.data().data();
    T* cp = ctx.mut_data().data();
    T* tp = tgt.mut_data().data();
    for (int64_t b = 0; b < B; ++b) {
        const T* row = src + b * (t_in + t_out) * frame_sz;
        std::copy(row, row + t_in * frame_sz, cp + b * t_in * frame_sz);
        std::copy(row + t_in * frame_sz, row + (t_in + t_out) * frame_sz, tp + b * t_out * frame_sz);
    }
    return {std::move(ctx), std::move(tgt)};
}

template <typename T>
SequenceBatch<T> make_sequence_batch(Tensor<T> frames, int64_t t_in, int64_t t_out) {
    if (frames.ndim() != 5 || frames.dim(1) != t_in + t_out) {
        throw ShapeError("sequence batch: frames " + shape_str(frames.shape()) + " do not match T=" +
                         std::to_string(t_in) + ", T'=" + std::to_string(t_out));
    }
    return SequenceBatch<T>{std::move(frames), t_in, t_out};
}

}  // namespace predformer
