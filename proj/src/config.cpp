#include "predformer/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace predformer {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& want) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + want);
}

}  // namespace

void KvDoc::set(const std::string& key, const std::string& value) {
    for (auto& e : entries_) {
        if (e.first == key) {
            e.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

bool KvDoc::contains(const std::string& key) const { return get(key).has_value(); }

std::optional<std::string> KvDoc::get(const std::string& key) const {
    for (const auto& e : entries_) {
        if (e.first == key) return e.second;
    }
    return std::nullopt;
}

std::string KvDoc::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

int64_t KvDoc::get_int(const std::string& key, int64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        const int64_t out = std::stoll(*v, &pos);
        if (pos != v->size()) bad_value(key, *v, "an integer");
        return out;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, *v, "an integer");
    }
}

uint64_t KvDoc::get_u64(const std::string& key, uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        const uint64_t out = std::stoull(*v, &pos);
        if (pos != v->size()) bad_value(key, *v, "an unsigned integer");
        return out;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, *v, "an unsigned integer");
    }
}

double KvDoc::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        const double out = std::stod(*v, &pos);
        if (pos != v->size()) bad_value(key, *v, "a number");
        return out;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, *v, "a number");
    }
}

bool KvDoc::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    bad_value(key, *v, "a boolean");
}

std::string KvDoc::serialize() const {
    // Group into sections by key prefix, preserving first-seen order.
    std::vector<std::string> sections;
    auto section_of = [](const std::string& key) {
        const auto dot = key.find('.');
        return dot == std::string::npos ? std::string() : key.substr(0, dot);
    };
    for (const auto& e : entries_) {
        const std::string s = section_of(e.first);
        if (std::find(sections.begin(), sections.end(), s) == sections.end()) sections.push_back(s);
    }
    std::ostringstream os;
    bool first = true;
    for (const auto& s : sections) {
        if (!first) os << '\n';
        first = false;
        if (!s.empty()) os << '[' << s << "]\n";
        for (const auto& e : entries_) {
            if (section_of(e.first) != s) continue;
            const std::string tail = s.empty() ? e.first : e.first.substr(s.size() + 1);
            os << tail << " = " << e.second << '\n';
        }
    }
    return os.str();
}

KvDoc KvDoc::parse(const std::string& text) {
    KvDoc doc;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (doc.contains(key)) throw ConfigError("config: duplicate key '" + key + "'");
        doc.set(key, value);
    }
    return doc;
}

KvDoc KvDoc::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError(IoError::Code::Unreadable, "config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
}

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

std::string pe_kind_name(PeKind k) { return k == PeKind::SinusoidalAbsolute ? "sinusoidal" : "learnable"; }

std::optional<PeKind> parse_pe_kind(const std::string& s) {
    if (s == "sinusoidal") return PeKind::SinusoidalAbsolute;
    if (s == "learnable") return PeKind::Learnable;
    return std::nullopt;
}

std::string ffn_kind_name(FfnKind k) { return k == FfnKind::SwiGlu ? "swiglu" : "mlp"; }

std::optional<FfnKind> parse_ffn_kind(const std::string& s) {
    if (s == "swiglu") return FfnKind::SwiGlu;
    if (s == "mlp") return FfnKind::Mlp;
    return std::nullopt;
}

std::string drop_schedule_name(DropSchedule s) { return s == DropSchedule::Uniform ? "uniform" : "linear"; }

std::optional<DropSchedule> parse_drop_schedule(const std::string& s) {
    if (s == "uniform") return DropSchedule::Uniform;
    if (s == "linear") return DropSchedule::Linear;
    return std::nullopt;
}

std::string scheduler_name(SchedulerKind k) { return k == SchedulerKind::OneCycle ? "onecycle" : "cosine"; }

std::optional<SchedulerKind> parse_scheduler(const std::string& s) {
    if (s == "onecycle") return SchedulerKind::OneCycle;
    if (s == "cosine") return SchedulerKind::Cosine;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Model / train config <-> kv
// ---------------------------------------------------------------------------

void model_config_to_kv(const ModelConfig& cfg, KvDoc& doc) {
    doc.set("model.variant", variant_name(cfg.variant.kind));
    doc.set("model.layers", std::to_string(cfg.variant.layers));
    doc.set("model.layer_skip", cfg.variant.layer_skip ? "true" : "false");
    doc.set("model.t_in", std::to_string(cfg.t_in));
    doc.set("model.t_out", std::to_string(cfg.t_out));
    doc.set("model.channels", std::to_string(cfg.channels));
    doc.set("model.height", std::to_string(cfg.height));
    doc.set("model.width", std::to_string(cfg.width));
    doc.set("model.patch", std::to_string(cfg.patch));
    doc.set("model.dim", std::to_string(cfg.dim));
    doc.set("model.heads", std::to_string(cfg.heads));
    doc.set("model.hidden", std::to_string(cfg.hidden));
    doc.set("model.pe", pe_kind_name(cfg.pe_kind));
    doc.set("model.ffn", ffn_kind_name(cfg.ffn_kind));
    doc.set("model.final_norm", cfg.final_norm ? "true" : "false");
    doc.set("model.attn_dropout", format_double(cfg.drop.attn_dropout));
    doc.set("model.ffn_dropout", format_double(cfg.drop.ffn_dropout));
    doc.set("model.drop_path", format_double(cfg.drop.drop_path_rate));
    doc.set("model.drop_path_schedule", drop_schedule_name(cfg.drop.schedule));
}

ModelConfig model_config_from_kv(const KvDoc& doc, const ModelConfig& defaults) {
    ModelConfig cfg = defaults;
    if (auto v = doc.get("model.variant")) {
        auto kind = parse_variant(*v);
        if (!kind) {
            std::string names;
            for (const auto& n : variant_names()) names += (names.empty() ? "" : ", ") + n;
            throw ConfigError("unknown variant '" + *v + "'; valid names: " + names);
        }
        cfg.variant.kind = *kind;
    }
    cfg.variant.layers = doc.get_int("model.layers", cfg.variant.layers);
    cfg.variant.layer_skip = doc.get_bool("model.layer_skip", cfg.variant.layer_skip);
    cfg.t_in = doc.get_int("model.t_in", cfg.t_in);
    cfg.t_out = doc.get_int("model.t_out", cfg.t_out);
    cfg.channels = doc.get_int("model.channels", cfg.channels);
    cfg.height = doc.get_int("model.height", cfg.height);
    cfg.width = doc.get_int("model.width", cfg.width);
    cfg.patch = doc.get_int("model.patch", cfg.patch);
    cfg.dim = doc.get_int("model.dim", cfg.dim);
    cfg.heads = doc.get_int("model.heads", cfg.heads);
    cfg.hidden = doc.get_int("model.hidden", cfg.hidden);
    if (auto v = doc.get("model.pe")) {
        auto k = parse_pe_kind(*v);
        if (!k) throw ConfigError("model.pe must be 'sinusoidal' or 'learnable', got '" + *v + "'");
        cfg.pe_kind = *k;
    }
    if (auto v = doc.get("model.ffn")) {
        auto k = parse_ffn_kind(*v);
        if (!k) throw ConfigError("model.ffn must be 'swiglu' or 'mlp', got '" + *v + "'");
        cfg.ffn_kind = *k;
    }
    cfg.final_norm = doc.get_bool("model.final_norm", cfg.final_norm);
    cfg.drop.attn_dropout = doc.get_double("model.attn_dropout", cfg.drop.attn_dropout);
    cfg.drop.ffn_dropout = doc.get_double("model.ffn_dropout", cfg.drop.ffn_dropout);
    cfg.drop.drop_path_rate = doc.get_double("model.drop_path", cfg.drop.drop_path_rate);
    if (auto v = doc.get("model.drop_path_schedule")) {
        auto k = parse_drop_schedule(*v);
        if (!k) throw ConfigError("model.drop_path_schedule must be 'uniform' or 'linear', got '" + *v + "'");
        cfg.drop.schedule = *k;
    }
    return cfg;
}

void train_config_to_kv(const TrainConfig& cfg, KvDoc& doc) {
    doc.set("train.lr_max", format_double(cfg.lr_max));
    doc.set("train.weight_decay", format_double(cfg.weight_decay));
    doc.set("train.beta1", format_double(cfg.beta1));
    doc.set("train.beta2", format_double(cfg.beta2));
    doc.set("train.eps", format_double(cfg.eps));
    doc.set("train.epochs", std::to_string(cfg.epochs));
    doc.set("train.batch_size", std::to_string(cfg.batch_size));
    doc.set("train.scheduler", scheduler_name(cfg.scheduler));
    doc.set("train.grad_clip", format_double(cfg.grad_clip));
    doc.set("train.lr_min", format_double(cfg.lr_min));
    doc.set("train.seed", std::to_string(cfg.seed));
}

TrainConfig train_config_from_kv(const KvDoc& doc, const TrainConfig& defaults) {
    TrainConfig cfg = defaults;
    cfg.lr_max = doc.get_double("train.lr_max", cfg.lr_max);
    cfg.weight_decay = doc.get_double("train.weight_decay", cfg.weight_decay);
    cfg.beta1 = doc.get_double("train.beta1", cfg.beta1);
    cfg.beta2 = doc.get_double("train.beta2", cfg.beta2);
    cfg.eps = doc.get_double("train.eps", cfg.eps);
    cfg.epochs = doc.get_int("train.epochs", cfg.epochs);
    cfg.batch_size = doc.get_int("train.batch_size", cfg.batch_size);
    if (auto v = doc.get("train.scheduler")) {
        auto k = parse_scheduler(*v);
        if (!k) throw ConfigError("train.scheduler must be 'onecycle' or 'cosine', got '" + *v + "'");
        cfg.scheduler = *k;
    }
    cfg.grad_clip = doc.get_double("train.grad_clip", cfg.grad_clip);
    cfg.lr_min = doc.get_double("train.lr_min", cfg.lr_min);
    cfg.seed = doc.get_u64("train.seed", cfg.seed);
    return cfg;
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k = {"run.seed", "run.out", "run.checkpoint_every", "data.train", "data.val"};
        KvDoc probe;
        model_config_to_kv(ModelConfig{}, probe);
        train_config_to_kv(TrainConfig{}, probe);
        for (const auto& e : probe.entries()) k.insert(e.first);
        return k;
    }();
    return keys;
}

}  // namespace

RunConfig RunConfig::from_kv(const KvDoc& doc) { return from_kv(doc, RunConfig{}); }

RunConfig RunConfig::from_file(const std::string& path) { return from_file(path, RunConfig{}); }

RunConfig RunConfig::from_kv(const KvDoc& doc, const RunConfig& defaults) {
    for (const auto& e : doc.entries()) {
        if (known_keys().count(e.first) == 0) {
            throw ConfigError("unknown config key '" + e.first + "'");
        }
    }
    RunConfig rc = defaults;
    rc.seed = doc.get_u64("run.seed", rc.seed);
    rc.out_dir = doc.get_string("run.out", rc.out_dir);
    rc.checkpoint_every = doc.get_int("run.checkpoint_every", rc.checkpoint_every);
    rc.train_data = doc.get_string("data.train", rc.train_data);
    rc.val_data = doc.get_string("data.val", rc.val_data);
    rc.model = model_config_from_kv(doc, rc.model);
    rc.train = train_config_from_kv(doc, rc.train);
    // run.seed is the root seed; train.seed only diverges when set explicitly.
    if (doc.contains("run.seed") && !doc.contains("train.seed")) rc.train.seed = rc.seed;
    return rc;
}

RunConfig RunConfig::from_file(const std::string& path, const RunConfig& defaults) {
    return from_kv(KvDoc::parse_file(path), defaults);
}

KvDoc RunConfig::to_kv() const {
    KvDoc doc;
    doc.set("run.seed", std::to_string(seed));
    doc.set("run.out", out_dir);
    doc.set("run.checkpoint_every", std::to_string(checkpoint_every));
    doc.set("data.train", train_data);
    doc.set("data.val", val_data);
    model_config_to_kv(model, doc);
    train_config_to_kv(train, doc);
    return doc;
}

std::string RunConfig::serialize() const { return to_kv().serialize(); }

}  // namespace predformer
