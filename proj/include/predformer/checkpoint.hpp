#pragma once

#include <array>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "predformer/config.hpp"
#include "predformer/tensor_file.hpp"
#include "predformer/train.hpp"

namespace predformer {

// Serialized training state, format "PFCK" version 1, little-endian:
//
//   magic "PFCK", version u16
//   u32 config length, config text (model.* / train.* key=value lines)
//   u32 parameter count
//   per parameter: u16 name length, name bytes, tensor record (PFTS)
//   u64 optimizer step, then per parameter: first-moment tensor,
//     then per parameter: second-moment tensor
//   u64 global step, u64 total steps
//   rng state: 4 x u64
//   u64 history length, per entry: f64 loss, f64 lr
//
// load(save(x)) restores forward outputs and the next optimizer step
// bitwise.
inline constexpr uint16_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'P', 'F', 'C', 'K'};

template <typename T>
struct Checkpoint {
    ModelConfig model;
    TrainConfig train;
    ModelParams<T> params;
    OptimizerState<T> opt;
    int64_t global_step = 0;
    int64_t total_steps = 0;
    std::array<uint64_t, 4> rng_state{};
    std::vector<std::pair<double, double>> history;  // (loss, lr)

    static Checkpoint capture(const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                              const ModelParams<T>& params_in, const TrainState<T>& state) {
        Checkpoint ck;
        ck.model = model_cfg;
        ck.train = train_cfg;
        ck.params = params_in;
        ck.opt = state.opt;
        ck.global_step = state.global_step;
        ck.total_steps = state.total_steps;
        ck.rng_state = state.dropout_rng.state();
        ck.history = state.history;
        return ck;
    }

    TrainState<T> restore_state() const {
        TrainState<T> s;
        s.opt = opt;
        s.global_step = global_step;
        s.total_steps = total_steps;
        s.dropout_rng = Rng(0);
        s.dropout_rng.set_state(rng_state);
        s.history = history;
        return s;
    }
};

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) {
    write_le<uint16_t>(os, static_cast<uint16_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
    const auto len = read_le<uint16_t>(is);
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw IoError(IoError::Code::Truncated, "checkpoint: truncated string");
    return s;
}

inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_le<uint64_t>(is)); }
inline void write_f64(std::ostream& os, double v) { write_le<uint64_t>(os, std::bit_cast<uint64_t>(v)); }

}  // namespace detail

template <typename T>
void save_checkpoint(const std::string& path, const Checkpoint<T>& ck) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError(IoError::Code::Unwritable, "checkpoint: cannot open '" + path + "' for writing");
    os.write(kCheckpointMagic, 4);
    detail::write_le<uint16_t>(os, kCheckpointVersion);

    KvDoc doc;
    model_config_to_kv(ck.model, doc);
    train_config_to_kv(ck.train, doc);
    std::string cfg_text;
    for (const auto& e : doc.entries()) cfg_text += e.first + " = " + e.second + "\n";
    detail::write_le<uint32_t>(os, static_cast<uint32_t>(cfg_text.size()));
    os.write(cfg_text.data(), static_cast<std::streamsize>(cfg_text.size()));

    Checkpoint<T>& mut = const_cast<Checkpoint<T>&>(ck);
    auto refs = collect_params(mut.params);
    if (refs.size() != ck.opt.m.size() || refs.size() != ck.opt.v.size()) {
        throw IoError(IoError::Code::BadHeader, "checkpoint: optimizer state does not match parameter count");
    }
    detail::write_le<uint32_t>(os, static_cast<uint32_t>(refs.size()));
    for (const auto& r : refs) {
        detail::write_string(os, r.name);
        write_tensor(os, *r.tensor);
    }
    detail::write_le<uint64_t>(os, static_cast<uint64_t>(ck.opt.step));
    for (const auto& t : ck.opt.m) write_tensor(os, t);
    for (const auto& t : ck.opt.v) write_tensor(os, t);
    detail::write_le<uint64_t>(os, static_cast<uint64_t>(ck.global_step));
    detail::write_le<uint64_t>(os, static_cast<uint64_t>(ck.total_steps));
    for (uint64_t w : ck.rng_state) detail::write_le<uint64_t>(os, w);
    detail::write_le<uint64_t>(os, static_cast<uint64_t>(ck.history.size()));
    for (const auto& [loss, lr] : ck.history) {
        detail::write_f64(os, loss);
        detail::write_f64(os, lr);
    }
    if (!os) throw IoError(IoError::Code::Unwritable, "checkpoint: write failed");
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(IoError::Code::Unreadable, "checkpoint: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
        throw IoError(IoError::Code::BadMagic, "checkpoint: bad magic");
    }
    const auto version = detail::read_le<uint16_t>(is);
    if (version != kCheckpointVersion) {
        throw IoError(IoError::Code::VersionMismatch,
                      "checkpoint: unsupported version " + std::to_string(version));
    }
    const auto cfg_len = detail::read_le<uint32_t>(is);
    std::string cfg_text(cfg_len, '\0');
    is.read(cfg_text.data(), cfg_len);
    if (!is) throw IoError(IoError::Code::Truncated, "checkpoint: truncated config record");

    Checkpoint<T> ck;
    const KvDoc doc = KvDoc::parse(cfg_text);
    ck.model = model_config_from_kv(doc);
    ck.train = train_config_from_kv(doc);
    ck.params = ModelParams<T>::zeros(ck.model);

    auto refs = collect_params(ck.params);
    const auto n_params = detail::read_le<uint32_t>(is);
    if (n_params != refs.size()) {
        throw IoError(IoError::Code::BadHeader, "checkpoint: parameter count " + std::to_string(n_params) +
                                                    " does not match the stored configuration");
    }
    for (auto& r : refs) {
        const std::string name = detail::read_string(is);
        if (name != r.name) {
            throw IoError(IoError::Code::BadHeader,
                          "checkpoint: parameter '" + name + "' where '" + r.name + "' was expected");
        }
        Tensor<T> t = read_tensor_as<T>(is);
        if (t.shape() != r.tensor->shape()) {
            throw IoError(IoError::Code::BadHeader, "checkpoint: parameter '" + name + "' has shape " +
                                                        shape_str(t.shape()) + ", expected " +
                                                        shape_str(r.tensor->shape()));
        }
        *r.tensor = std::move(t);
    }
    ck.opt.step = static_cast<int64_t>(detail::read_le<uint64_t>(is));
    ck.opt.m.reserve(refs.size());
    ck.opt.v.reserve(refs.size());
    for (size_t i = 0; i < refs.size(); ++i) ck.opt.m.push_back(read_tensor_as<T>(is));
    for (size_t i = 0; i < refs.size(); ++i) ck.opt.v.push_back(read_tensor_as<T>(is));
    ck.global_step = static_cast<int64_t>(detail::read_le<uint64_t>(is));
    ck.total_steps = static_cast<int64_t>(detail::read_le<uint64_t>(is));
    for (auto& w : ck.rng_state) w = detail::read_le<uint64_t>(is);
    const auto n_hist = detail::read_le<uint64_t>(is);
    ck.history.reserve(n_hist);
    for (uint64_t i = 0; i < n_hist; ++i) {
        const double loss = detail::read_f64(is);
        const double lr = detail::read_f64(is);
        ck.history.emplace_back(loss, lr);
    }
    return ck;
}

}  // namespace predformer
