#include "duologue/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "duologue/annotate.hpp"
#include "duologue/attributes.hpp"
#include "duologue/classify.hpp"
#include "duologue/evaluate.hpp"
#include "duologue/gateway.hpp"
#include "duologue/ingest.hpp"
#include "duologue/io.hpp"
#include "duologue/personality.hpp"
#include "duologue/rng.hpp"
#include "duologue/synth.hpp"

namespace duologue::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ── configuration ───────────────────────────────────────────────────────────

namespace {

void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown config key: " + prefix + it.key());
    }
}

template <typename T>
void read_key(const json& j, const char* key, const std::string& prefix, T& into) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        into = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key " + prefix + key + " has the wrong type");
    }
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    expect_keys(j,
                {"gap_threshold_s", "min_overlap_s", "sample_count", "sample_min_dur_s",
                 "personality_query_count", "bucket_k1", "bucket_k2", "context_before",
                 "context_after", "rng_seed", "features", "llm", "classifiers"},
                "");
    PipelineConfig cfg;
    read_key(j, "gap_threshold_s", "", cfg.gap_threshold_s);
    read_key(j, "min_overlap_s", "", cfg.min_overlap_s);
    read_key(j, "sample_count", "", cfg.sample_count);
    read_key(j, "sample_min_dur_s", "", cfg.sample_min_dur_s);
    read_key(j, "personality_query_count", "", cfg.personality_query_count);
    read_key(j, "bucket_k1", "", cfg.bucket_k1);
    read_key(j, "bucket_k2", "", cfg.bucket_k2);
    read_key(j, "context_before", "", cfg.context_before);
    read_key(j, "context_after", "", cfg.context_after);
    read_key(j, "rng_seed", "", cfg.rng_seed);

    if (auto it = j.find("features"); it != j.end()) {
        expect_keys(*it, {"samples", "emotions", "sentiment", "basics"}, "features.");
        read_key(*it, "samples", "features.", cfg.features.samples);
        read_key(*it, "emotions", "features.", cfg.features.emotions);
        read_key(*it, "sentiment", "features.", cfg.features.sentiment);
        read_key(*it, "basics", "features.", cfg.features.basics);
    }
    if (auto it = j.find("llm"); it != j.end()) {
        expect_keys(*it,
                    {"endpoint", "model", "api_key_env", "classification_temperature",
                     "personality_temperature", "max_attempts", "backoff_base_ms", "deadline_ms",
                     "max_in_flight", "journal_path"},
                    "llm.");
        read_key(*it, "endpoint", "llm.", cfg.llm.endpoint);
        read_key(*it, "model", "llm.", cfg.llm.model);
        read_key(*it, "api_key_env", "llm.", cfg.llm.api_key_env);
        read_key(*it, "classification_temperature", "llm.", cfg.llm.classification_temperature);
        read_key(*it, "personality_temperature", "llm.", cfg.llm.personality_temperature);
        read_key(*it, "max_attempts", "llm.", cfg.llm.max_attempts);
        read_key(*it, "backoff_base_ms", "llm.", cfg.llm.backoff_base_ms);
        read_key(*it, "deadline_ms", "llm.", cfg.llm.deadline_ms);
        read_key(*it, "max_in_flight", "llm.", cfg.llm.max_in_flight);
        read_key(*it, "journal_path", "llm.", cfg.llm.journal_path);
    }
    if (auto it = j.find("classifiers"); it != j.end()) {
        expect_keys(*it, {"emotion_endpoint", "sentiment_endpoint", "max_attempts"},
                    "classifiers.");
        read_key(*it, "emotion_endpoint", "classifiers.", cfg.classifiers.emotion_endpoint);
        read_key(*it, "sentiment_endpoint", "classifiers.", cfg.classifiers.sentiment_endpoint);
        read_key(*it, "max_attempts", "classifiers.", cfg.classifiers.max_attempts);
    }
    return cfg;
}

ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json j;
    j["gap_threshold_s"] = cfg.gap_threshold_s;
    j["min_overlap_s"] = cfg.min_overlap_s;
    j["sample_count"] = cfg.sample_count;
    j["sample_min_dur_s"] = cfg.sample_min_dur_s;
    j["personality_query_count"] = cfg.personality_query_count;
    j["bucket_k1"] = cfg.bucket_k1;
    j["bucket_k2"] = cfg.bucket_k2;
    j["context_before"] = cfg.context_before;
    j["context_after"] = cfg.context_after;
    j["rng_seed"] = cfg.rng_seed;
    j["features"] = {{"samples", cfg.features.samples},
                     {"emotions", cfg.features.emotions},
                     {"sentiment", cfg.features.sentiment},
                     {"basics", cfg.features.basics}};
    j["llm"] = {{"endpoint", cfg.llm.endpoint},
                {"model", cfg.llm.model},
                {"api_key_env", cfg.llm.api_key_env},
                {"classification_temperature", cfg.llm.classification_temperature},
                {"personality_temperature", cfg.llm.personality_temperature},
                {"max_attempts", cfg.llm.max_attempts},
                {"backoff_base_ms", cfg.llm.backoff_base_ms},
                {"deadline_ms", cfg.llm.deadline_ms},
                {"max_in_flight", cfg.llm.max_in_flight},
                {"journal_path", cfg.llm.journal_path}};
    j["classifiers"] = {{"emotion_endpoint", cfg.classifiers.emotion_endpoint},
                        {"sentiment_endpoint", cfg.classifiers.sentiment_endpoint},
                        {"max_attempts", cfg.classifiers.max_attempts}};
    return j;
}

PipelineConfig load_config_file(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    return config_from_json(j);
}

FeatureToggles parse_features(const std::string& csv) {
    FeatureToggles f;
    f.samples = f.emotions = f.sentiment = f.basics = false;
    std::size_t pos = 0;
    int seen = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        std::string name = normalize_key(csv.substr(pos, comma - pos));
        pos = comma + 1;
        if (name.empty()) continue;
        ++seen;
        if (name == "samples" || name == "sample") {
            f.samples = true;
        } else if (name == "emotions" || name == "emotion") {
            f.emotions = true;
        } else if (name == "sentiment" || name == "sentiments") {
            f.sentiment = true;
        } else if (name == "basics" || name == "basicstats" || name == "basicstatistics") {
            f.basics = true;
        } else {
            throw ConfigError("unknown prompt section in --features: " + name);
        }
    }
    if (seen == 0) throw ConfigError("--features needs at least one section");
    return f;
}

PipelineConfig resolve_config(const CommonOptions& common) {
    PipelineConfig cfg =
        common.config_path.empty() ? PipelineConfig{} : load_config_file(common.config_path);
    if (common.seed) cfg.rng_seed = *common.seed;
    if (common.features_csv) cfg.features = parse_features(*common.features_csv);
    if (common.endpoint) cfg.llm.endpoint = *common.endpoint;
    if (common.model) cfg.llm.model = *common.model;
    validate_config(cfg);
    return cfg;
}

// ── run manifest ────────────────────────────────────────────────────────────

std::string timestamp_utc() {
    std::time_t t = 0;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["schema"] = kManifestSchema;
    j["tool_version"] = kToolVersion;
    j["command"] = m.command;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["warnings"] = m.warnings;
    j["failures"] = m.failures;
    j["llm"] = {{"calls", m.llm_calls}, {"chars_in", m.llm_chars_in},
                {"chars_out", m.llm_chars_out}};
    return j;
}

namespace {

// Manifest goes last so its output list only ever names files that exist.
void write_manifest(const std::string& out_dir, RunManifest& m) {
    m.finished_at = timestamp_utc();
    io::write_text_file_atomic((fs::path(out_dir) / "manifest.json").string(),
                               manifest_to_json(m).dump(2) + "\n");
}

// Per-item bookkeeping for a parallel batch; merged in input order at the end.
struct ItemOutcome {
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;
    std::string error;  // empty = ok
};

void merge_outcomes(const std::vector<ItemOutcome>& items, const std::vector<std::string>& names,
                    RunManifest& m) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (const auto& w : items[i].warnings) m.warnings.push_back(names[i] + ": " + w);
        for (const auto& o : items[i].outputs) m.outputs.push_back(o);
        if (!items[i].error.empty()) m.failures.push_back(names[i] + ": " + items[i].error);
    }
}

void report_failures(const RunManifest& m) {
    for (const auto& f : m.failures) std::cerr << "error: " << f << "\n";
}

// Runs fn(0..n-1) on a bounded pool; fn must handle its own exceptions.
void for_each_parallel(std::size_t n, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// Call/byte counters shared by every worker; safe to use concurrently.
class CountingChatClient final : public gateway::ChatClient {
  public:
    explicit CountingChatClient(gateway::ChatClient& inner) : inner_(inner) {}

    gateway::ChatOutcome complete(const std::string& prompt, double temperature,
                                  std::uint64_t seed) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        chars_in_.fetch_add(static_cast<long long>(prompt.size()), std::memory_order_relaxed);
        auto out = inner_.complete(prompt, temperature, seed);
        chars_out_.fetch_add(static_cast<long long>(out.text.size()), std::memory_order_relaxed);
        return out;
    }

    void fill(RunManifest& m) const {
        m.llm_calls = calls_.load();
        m.llm_chars_in = chars_in_.load();
        m.llm_chars_out = chars_out_.load();
    }

  private:
    gateway::ChatClient& inner_;
    std::atomic<long long> calls_{0};
    std::atomic<long long> chars_in_{0};
    std::atomic<long long> chars_out_{0};
};

std::unique_ptr<gateway::ChatClient> make_chat_client(const PipelineConfig& cfg, bool mock) {
    if (mock) {
        return std::make_unique<gateway::MockChatClient>(
            [](const std::string& prompt, std::uint64_t seed) {
                return synth::mock_chat(prompt, seed);
            });
    }
    if (!gateway::credential_from_env(cfg.llm.api_key_env)) {
        throw ConfigError("no credential: set " + cfg.llm.api_key_env + " or pass --mock");
    }
    return std::make_unique<gateway::HttpChatClient>(cfg.llm);
}

std::unique_ptr<classify::TextClassifier> make_text_classifier(const std::string& endpoint,
                                                               int max_attempts, bool mock) {
    if (mock || endpoint.empty()) return std::make_unique<classify::LexiconClassifier>();
    return std::make_unique<classify::HttpTextClassifier>(endpoint, max_attempts);
}

}  // namespace

// ── synth ───────────────────────────────────────────────────────────────────

namespace {

// Coarse trait labels read off the ground-truth statistics, so synthetic
// batches come with a self-consistent stand-in for human annotation.
TraitScores pseudo_labels(const attributes::SpeakerAttributes& a) {
    auto step = [](double v, double t1, double t2, double t3, double t4) {
        if (v < t1) return -100.0;
        if (v < t2) return -50.0;
        if (v < t3) return 0.0;
        if (v < t4) return 50.0;
        return 100.0;
    };
    TraitScores s{};
    s[0] = step(a.avg_turn_duration_s, 2.0, 3.5, 5.0, 7.0);
    s[1] = step(a.cognitive_bc_per_min_other, 0.25, 0.75, 1.5, 3.0);
    s[2] = step(static_cast<double>(a.num_turns), 8, 15, 25, 40);
    s[3] = step(a.emotive_bc_per_min_other, 0.25, 0.75, 1.5, 3.0);
    s[4] = step(a.interjections_per_12min, 1.0, 3.0, 6.0, 10.0);
    return s;
}

}  // namespace

int cmd_synth(const CommonOptions& common, const SynthOptions& opts) {
    RunManifest m;
    m.command = "synth";
    m.started_at = timestamp_utc();
    PipelineConfig cfg = resolve_config(common);
    m.config = config_to_json(cfg);
    if (opts.count < 1) throw ConfigError("--count must be at least 1");
    fs::create_directories(common.out_dir);

    std::vector<ItemOutcome> items(static_cast<std::size_t>(opts.count));
    std::vector<std::string> names(items.size());
    std::vector<std::array<std::optional<evaluate::HumanLabels>, 2>> labels(items.size());

    for_each_parallel(items.size(), [&](std::size_t i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof idbuf, "synth_%03zu", i);
        names[i] = idbuf;
        try {
            synth::SynthSpec spec;
            spec.id = idbuf;
            spec.seed = substream_seed(cfg.rng_seed, "conv" + std::to_string(i));
            spec.beats = opts.beats;
            spec.include_boundary_fixtures = opts.boundary_fixtures;
            spec.silence_rate = opts.silence_rate;
            auto result = synth::generate_conversation(spec);

            char base[40];
            std::snprintf(base, sizeof base, "transcript_%03zu", i);
            fs::path transcript = fs::path(common.out_dir) / (std::string(base) + ".json");
            fs::path truth = fs::path(common.out_dir) / (std::string(base) + ".truth.jsonl");
            io::write_text_file_atomic(transcript.string(),
                                       ingest::serialize_transcript(result.doc));
            io::write_text_file_atomic(truth.string(), io::dataset_to_jsonl(result.truth));
            items[i].outputs.push_back(transcript.string());
            items[i].outputs.push_back(truth.string());

            for (Speaker sp : {Speaker::A, Speaker::B}) {
                auto attrs =
                    attributes::compute_attributes(result.truth, sp, &items[i].warnings);
                evaluate::HumanLabels h;
                h.conversation_id = result.truth.id;
                h.speaker = sp;
                h.scores = pseudo_labels(attrs);
                labels[i][sp == Speaker::A ? 0 : 1] = h;
            }
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    });

    std::vector<evaluate::HumanLabels> rows;
    for (const auto& pair : labels)
        for (const auto& h : pair)
            if (h) rows.push_back(*h);
    fs::path labels_path = fs::path(common.out_dir) / "human_labels.jsonl";
    io::write_text_file_atomic(labels_path.string(), io::labels_to_jsonl(rows));

    merge_outcomes(items, names, m);
    m.outputs.push_back(labels_path.string());
    report_failures(m);
    write_manifest(common.out_dir, m);
    std::cout << "synth: " << (items.size() - m.failures.size()) << " of " << items.size()
              << " conversations written to " << common.out_dir << "\n";
    return m.failures.empty() ? 0 : 1;
}

// ── annotate ────────────────────────────────────────────────────────────────

int cmd_annotate(const CommonOptions& common, const AnnotateOptions& opts) {
    RunManifest m;
    m.command = "annotate";
    m.started_at = timestamp_utc();
    PipelineConfig cfg = resolve_config(common);
    m.config = config_to_json(cfg);
    m.inputs = opts.inputs;
    if (opts.inputs.empty()) throw ConfigError("annotate needs at least one transcript file");

    auto chat = make_chat_client(cfg, common.mock);  // fails before any work
    CountingChatClient counting(*chat);
    auto emotion_clf = make_text_classifier(cfg.classifiers.emotion_endpoint,
                                            cfg.classifiers.max_attempts, common.mock);
    auto sentiment_clf = make_text_classifier(cfg.classifiers.sentiment_endpoint,
                                              cfg.classifiers.max_attempts, common.mock);
    fs::create_directories(common.out_dir);

    std::vector<ItemOutcome> items(opts.inputs.size());
    std::mutex claimed_mu;
    std::set<std::string> claimed;

    for_each_parallel(items.size(), [&](std::size_t i) {
        try {
            auto doc = ingest::parse_transcript(io::read_text_file(opts.inputs[i]));
            Conversation conv = annotate::annotate_geometry(doc, cfg);
            auto resolved = classify::resolve_backchannels(conv, counting, cfg);
            items[i].warnings = resolved.warnings;
            if (resolved.fatal) {
                items[i].error = std::string(chat_error_kind_name(resolved.fatal->kind)) + ": " +
                                 resolved.fatal->message;
                return;
            }
            auto affect = classify::classify_affect(conv, *emotion_clf, *sentiment_clf);
            for (auto& w : affect.warnings) items[i].warnings.push_back(std::move(w));

            fs::path out = fs::path(common.out_dir) / (conv.id + ".dialog.jsonl");
            {
                std::lock_guard<std::mutex> lock(claimed_mu);
                if (!claimed.insert(out.string()).second) {
                    items[i].error = "duplicate conversation id: " + conv.id;
                    return;
                }
            }
            io::write_text_file_atomic(out.string(), io::dataset_to_jsonl(conv));
            items[i].outputs.push_back(out.string());
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    });

    merge_outcomes(items, opts.inputs, m);
    counting.fill(m);
    report_failures(m);
    write_manifest(common.out_dir, m);
    std::cout << "annotate: " << (items.size() - m.failures.size()) << " of " << items.size()
              << " conversations written to " << common.out_dir << "\n";
    return m.failures.empty() ? 0 : 1;
}

// ── attributes ──────────────────────────────────────────────────────────────

int cmd_attributes(const CommonOptions& common, const AttributesOptions& opts) {
    RunManifest m;
    m.command = "attributes";
    m.started_at = timestamp_utc();
    PipelineConfig cfg = resolve_config(common);
    m.config = config_to_json(cfg);
    m.inputs = opts.inputs;
    if (opts.inputs.empty()) throw ConfigError("attributes needs at least one dataset file");
    fs::create_directories(common.out_dir);

    std::vector<attributes::SpeakerAttributes> cohort;
    for (const auto& path : opts.inputs) {
        try {
            Conversation conv = io::dataset_from_jsonl(io::read_text_file(path));
            for (Speaker sp : {Speaker::A, Speaker::B}) {
                std::vector<std::string> warnings;
                cohort.push_back(attributes::compute_attributes(conv, sp, &warnings));
                for (const auto& w : warnings) m.warnings.push_back(path + ": " + w);
            }
        } catch (const std::exception& e) {
            m.failures.push_back(path + ": " + e.what());
        }
    }

    fs::path attrs_path = fs::path(common.out_dir) / "attributes.jsonl";
    io::write_text_file_atomic(attrs_path.string(), io::attributes_to_jsonl(cohort));
    m.outputs.push_back(attrs_path.string());

    if (cohort.size() < 4) {
        m.failures.push_back("cohort of " + std::to_string(cohort.size()) +
                             " speakers is too small for relative buckets (need 4)");
    } else {
        std::string buckets_bytes;
        {
            ordered_json header{{"schema", "duologue.buckets.v1"}};
            buckets_bytes = header.dump();
            buckets_bytes.push_back('\n');
        }
        for (std::size_t i = 0; i < cohort.size(); ++i) {
            auto buckets =
                personality::basic_stat_buckets(cohort, i, cfg.bucket_k1, cfg.bucket_k2);
            ordered_json row;
            row["conversation_id"] = cohort[i].conversation_id;
            row["speaker"] = std::string(1, speaker_char(cohort[i].speaker));
            ordered_json rendered;
            for (std::size_t s = 0; s < attributes::kBasicStats.size(); ++s) {
                rendered[attributes::kBasicStats[s].key] =
                    attributes::render_bucket(attributes::kBasicStats[s].key, buckets[s]);
            }
            row["buckets"] = rendered;
            buckets_bytes += row.dump();
            buckets_bytes.push_back('\n');
        }
        fs::path buckets_path = fs::path(common.out_dir) / "buckets.jsonl";
        io::write_text_file_atomic(buckets_path.string(), buckets_bytes);
        m.outputs.push_back(buckets_path.string());
    }

    report_failures(m);
    write_manifest(common.out_dir, m);
    std::cout << "attributes: " << cohort.size() << " speakers from " << opts.inputs.size()
              << " conversations written to " << common.out_dir << "\n";
    return m.failures.empty() ? 0 : 1;
}

// ── predict ─────────────────────────────────────────────────────────────────

int cmd_predict(const CommonOptions& common, const PredictOptions& opts) {
    RunManifest m;
    m.command = "predict";
    m.started_at = timestamp_utc();
    PipelineConfig cfg = resolve_config(common);
    m.config = config_to_json(cfg);
    m.inputs = opts.inputs;
    if (opts.attributes_path.empty()) throw ConfigError("predict needs --attributes");
    m.inputs.push_back(opts.attributes_path);

    auto chat = make_chat_client(cfg, common.mock);
    CountingChatClient counting(*chat);

    auto cohort = io::attributes_from_jsonl(io::read_text_file(opts.attributes_path));
    if (cohort.size() < 4) {
        throw ConfigError("cohort of " + std::to_string(cohort.size()) +
                          " speakers is too small for relative buckets (need 4)");
    }
    auto means = personality::cohort_means(cohort);

    std::map<std::string, Conversation> datasets;
    for (const auto& path : opts.inputs) {
        Conversation conv = io::dataset_from_jsonl(io::read_text_file(path));
        std::string id = conv.id;
        if (!datasets.emplace(id, std::move(conv)).second)
            throw ConfigError("duplicate conversation id across datasets: " + id);
    }
    fs::create_directories(common.out_dir);

    std::vector<ItemOutcome> items(cohort.size());
    std::vector<std::string> names(cohort.size());
    std::vector<std::optional<personality::TraitPrediction>> rows(cohort.size());

    for_each_parallel(cohort.size(), [&](std::size_t i) {
        const auto& target = cohort[i];
        names[i] = target.conversation_id + "/" + speaker_char(target.speaker);
        try {
            auto found = datasets.find(target.conversation_id);
            if (found == datasets.end())
                throw std::runtime_error("no dataset file for this conversation");
            auto buckets = personality::basic_stat_buckets(cohort, i, cfg.bucket_k1,
                                                           cfg.bucket_k2);
            std::uint64_t sample_seed = substream_seed(
                cfg.rng_seed,
                target.conversation_id + "|samples|" + speaker_char(target.speaker));
            auto samples =
                personality::select_samples(found->second, target.speaker,
                                            static_cast<std::size_t>(cfg.sample_count),
                                            cfg.sample_min_dur_s, sample_seed);
            std::string prompt = personality::build_personality_prompt(target, buckets, samples,
                                                                       means, cfg.features);
            auto result = personality::predict_personality(counting, prompt, cfg,
                                                           target.conversation_id,
                                                           target.speaker);
            if (!result.ok()) {
                items[i].error = std::string(chat_error_kind_name(result.error->kind)) + ": " +
                                 result.error->message;
                return;
            }
            rows[i] = std::move(result.prediction);
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    });

    std::vector<personality::TraitPrediction> written;
    for (auto& r : rows)
        if (r) written.push_back(std::move(*r));
    fs::path out = fs::path(common.out_dir) / "predictions.jsonl";
    io::write_text_file_atomic(out.string(), io::predictions_to_jsonl(written));

    merge_outcomes(items, names, m);
    m.outputs.push_back(out.string());
    counting.fill(m);
    report_failures(m);
    write_manifest(common.out_dir, m);
    std::cout << "predict: " << written.size() << " of " << cohort.size()
              << " speakers written to " << common.out_dir << "\n";
    return m.failures.empty() ? 0 : 1;
}

// ── eval ────────────────────────────────────────────────────────────────────

int cmd_eval(const CommonOptions& common, const EvalOptions& opts) {
    RunManifest m;
    m.command = "eval";
    m.started_at = timestamp_utc();
    PipelineConfig cfg = resolve_config(common);
    m.config = config_to_json(cfg);
    if (opts.predictions_path.empty() || opts.labels_path.empty() ||
        opts.attributes_path.empty()) {
        throw ConfigError("eval needs --predictions, --labels, and --attributes");
    }
    m.inputs = {opts.predictions_path, opts.labels_path, opts.attributes_path};
    if (!opts.trend_table_path.empty()) m.inputs.push_back(opts.trend_table_path);
    fs::create_directories(common.out_dir);

    try {
        auto preds = io::predictions_from_jsonl(io::read_text_file(opts.predictions_path));
        auto labels = io::labels_from_jsonl(io::read_text_file(opts.labels_path));
        auto attrs = io::attributes_from_jsonl(io::read_text_file(opts.attributes_path));
        evaluate::TrendTable table = opts.trend_table_path.empty()
                                         ? evaluate::TrendTable::builtin()
                                         : evaluate::TrendTable::from_csv_file(
                                               opts.trend_table_path);

        auto trend = evaluate::trend_score(preds, attrs, table);
        auto sim = evaluate::label_similarity(preds, labels);
        for (const auto& w : trend.warnings) m.warnings.push_back(w);
        for (const auto& w : sim.warnings) m.warnings.push_back(w);

        std::string text = evaluate::metrics_to_text(trend, sim);
        fs::path json_path = fs::path(common.out_dir) / "metrics.json";
        fs::path text_path = fs::path(common.out_dir) / "metrics.txt";
        io::write_text_file_atomic(json_path.string(),
                                   evaluate::metrics_to_json(trend, sim).dump(2) + "\n");
        io::write_text_file_atomic(text_path.string(), text);
        m.outputs.push_back(json_path.string());
        m.outputs.push_back(text_path.string());
        std::cout << text;
    } catch (const std::exception& e) {
        m.failures.push_back(std::string("eval: ") + e.what());
    }

    report_failures(m);
    write_manifest(common.out_dir, m);
    return m.failures.empty() ? 0 : 1;
}

}  // namespace duologue::pipeline
