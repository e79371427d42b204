#pragma once
// The command layer: configuration files, the five pipeline commands
// (synth, annotate, attributes, predict, eval), batch parallelism, and the
// run manifest each command writes alongside its outputs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "duologue/core.hpp"
#include "json.hpp"

namespace duologue::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "duologue.manifest.v1";

// ── configuration ───────────────────────────────────────────────────────────

// Parses the JSON configuration tree. Every key is optional and falls back
// to the built-in default; unknown keys are errors so typos never silently
// disable anything. Throws ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config_file(const std::string& path);

// Comma-separated prompt section list, e.g. "samples,basics". Named
// sections are enabled, the rest disabled. Accepts samples / emotions /
// sentiment / basics (case-insensitive, "emotion" works too). Throws
// ConfigError on unknown names or an empty list.
FeatureToggles parse_features(const std::string& csv);

// Flags shared by every command. Optional fields override the config file.
struct CommonOptions {
    std::string config_path;  // empty = built-in defaults
    std::string out_dir = ".";
    bool mock = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> features_csv;
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
};

// Config file + overrides, validated.
PipelineConfig resolve_config(const CommonOptions& common);

// ── run manifest ────────────────────────────────────────────────────────────

struct RunManifest {
    std::string command;
    nlohmann::ordered_json config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;   // files this run wrote, manifest excluded
    std::vector<std::string> warnings;  // merged in input order
    std::vector<std::string> failures;  // "item: reason", input order
    long long llm_calls = 0;
    long long llm_chars_in = 0;
    long long llm_chars_out = 0;
    std::string started_at;
    std::string finished_at;
};

nlohmann::ordered_json manifest_to_json(const RunManifest& m);

// Current time, ISO 8601 UTC. Honors SOURCE_DATE_EPOCH so archived runs can
// be byte-reproducible.
std::string timestamp_utc();

// ── commands ────────────────────────────────────────────────────────────────
// Each command writes its outputs into out_dir, prints per-item failures to
// stderr, writes manifest.json last (atomically), and returns the process
// exit code: 0 only when every item succeeded.

struct SynthOptions {
    int count = 1;
    int beats = 40;
    bool boundary_fixtures = true;
    double silence_rate = 0.35;
};

// transcript_NNN.json + transcript_NNN.truth.jsonl per conversation, plus
// human_labels.jsonl: per-speaker trait labels derived from the ground-truth
// statistics with fixed thresholds.
int cmd_synth(const CommonOptions& common, const SynthOptions& opts);

struct AnnotateOptions {
    std::vector<std::string> inputs;  // transcript files
};

// <conversation_id>.dialog.jsonl per input: the full preprocessing chain
// (trim, laugh integration, segmentation, overlaps, backchannel resolution,
// affect classification).
int cmd_annotate(const CommonOptions& common, const AnnotateOptions& opts);

struct AttributesOptions {
    std::vector<std::string> inputs;  // dialog dataset files
};

// attributes.jsonl (raw per-speaker statistics, cohort = all inputs, speaker
// A then B per conversation) and buckets.jsonl (rendered relative groups).
int cmd_attributes(const CommonOptions& common, const AttributesOptions& opts);

struct PredictOptions {
    std::vector<std::string> inputs;  // dialog dataset files
    std::string attributes_path;
};

// predictions.jsonl: one averaged five-query trait read per attributes row,
// prompts built from the row's statistics, cohort buckets/means, and samples
// drawn from the matching dataset.
int cmd_predict(const CommonOptions& common, const PredictOptions& opts);

struct EvalOptions {
    std::string predictions_path;
    std::string labels_path;
    std::string attributes_path;
    std::string trend_table_path;  // empty = built-in table
};

// metrics.json + metrics.txt: per-trait trend scores against the attribute
// table, per-trait correlation and mean cosine against the human labels.
int cmd_eval(const CommonOptions& common, const EvalOptions& opts);

}  // namespace duologue::pipeline
