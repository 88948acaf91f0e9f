#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "predformer/model.hpp"
#include "predformer/train.hpp"

namespace predformer {

// Ordered key=value document. The text form accepts flat "a.b = v" lines or
// "[section]" headers that prefix the keys which follow; '#' and ';' start
// comments. Duplicate keys are rejected while parsing; set() overwrites.
class KvDoc {
public:
    void set(const std::string& key, const std::string& value);
    bool contains(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Sectioned text with every key the document holds, suitable both for
    // config echoing and for re-parsing.
    std::string serialize() const;

    static KvDoc parse(const std::string& text);
    static KvDoc parse_file(const std::string& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Enum name helpers shared by configs, reports and the CLI.
std::string pe_kind_name(PeKind k);
std::optional<PeKind> parse_pe_kind(const std::string& s);
std::string ffn_kind_name(FfnKind k);
std::optional<FfnKind> parse_ffn_kind(const std::string& s);
std::string drop_schedule_name(DropSchedule s);
std::optional<DropSchedule> parse_drop_schedule(const std::string& s);
std::string scheduler_name(SchedulerKind k);
std::optional<SchedulerKind> parse_scheduler(const std::string& s);

// ModelConfig / TrainConfig <-> flat keys under "model." / "train.".
void model_config_to_kv(const ModelConfig& cfg, KvDoc& doc);
ModelConfig model_config_from_kv(const KvDoc& doc, const ModelConfig& defaults = {});
void train_config_to_kv(const TrainConfig& cfg, KvDoc& doc);
TrainConfig train_config_from_kv(const KvDoc& doc, const TrainConfig& defaults = {});

// Everything one CLI run needs: merged model + training configuration plus
// data paths and output location. Unknown keys are rejected.
struct RunConfig {
    uint64_t seed = 0;
    std::string out_dir;
    std::string train_data;
    std::string val_data;
    int64_t checkpoint_every = 0;  // epochs between checkpoints; 0 = final only
    ModelConfig model;
    TrainConfig train;

    static RunConfig from_kv(const KvDoc& doc);
    static RunConfig from_kv(const KvDoc& doc, const RunConfig& defaults);
    static RunConfig from_file(const std::string& path);
    static RunConfig from_file(const std::string& path, const RunConfig& defaults);
    KvDoc to_kv() const;
    std::string serialize() const;
};

}  // namespace predformer
