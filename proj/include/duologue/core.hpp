#pragma once
// Core domain model for the two-channel dialog pipeline: tokens, responses,
// conversations, trait labels/scores, and the pipeline configuration.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace duologue {

// ── time ────────────────────────────────────────────────────────────────────
// All internal arithmetic runs on integer milliseconds so threshold
// comparisons (700 ms gaps, 700 ms overlaps) are exact. Files speak seconds
// and are converted at the I/O boundary.

using Millis = std::int64_t;

inline Millis seconds_to_ms(double s) { return static_cast<Millis>(std::llround(s * 1000.0)); }
inline double ms_to_seconds(Millis ms) { return static_cast<double>(ms) / 1000.0; }

// ── speakers and tokens ─────────────────────────────────────────────────────

enum class Speaker { A, B };

inline Speaker other(Speaker s) { return s == Speaker::A ? Speaker::B : Speaker::A; }
char speaker_char(Speaker s);
Speaker speaker_from_char(char c);  // throws std::invalid_argument

enum class TokenKind { Word, Laughter, StartLaugh, EndLaugh };

// A spoken word or a laughter marker. StartLaugh/EndLaugh are point markers
// (start_ms == end_ms); Laughter spans the laugh; Word spans the word.
struct Token {
    TokenKind kind = TokenKind::Word;
    std::string text;  // only for kind == Word
    Millis start_ms = 0;
    Millis end_ms = 0;
};

Token make_word(std::string text, Millis start_ms, Millis end_ms);

// Dataset surface: [Laughter] / [StartLaugh] / [EndLaugh].
std::string render_token(const Token& t);
std::string render_text(const std::vector<Token>& tokens);

// Prompt surface renders standalone laughter as [Laugh].
std::string render_token_for_prompt(const Token& t);
std::string render_text_for_prompt(const std::vector<Token>& tokens);

// ── responses ───────────────────────────────────────────────────────────────

enum class ResponseLabel {
    Turn,
    EmotiveBackchannel,
    CognitiveBackchannel,
    SuccessfulInterjection,
    UnsuccessfulInterjection,
    PendingBackchannel,  // transient: awaiting backchannel classification
};

std::string label_name(ResponseLabel label);
ResponseLabel label_from_name(std::string_view name);  // throws std::invalid_argument

enum class OverlapKind { Partial, Fully };

std::string overlap_kind_name(OverlapKind kind);
OverlapKind overlap_kind_from_name(std::string_view name);

// Set on the overlapping (later-starting) response; points at the overlappee.
struct OverlapRef {
    OverlapKind kind = OverlapKind::Partial;
    int partner_response_id = -1;
};

enum class Emotion7 { Anger, Disgust, Fear, Joy, Neutral, Sadness, Surprise };
enum class Sentiment3 { Positive, Neutral, Negative };

inline constexpr int kEmotion7Count = 7;
inline constexpr int kSentiment3Count = 3;

std::string emotion7_name(Emotion7 e);
std::string sentiment3_name(Sentiment3 s);
Emotion7 emotion7_from_name(std::string_view name);
Sentiment3 sentiment3_from_name(std::string_view name);

struct Response {
    int id = -1;  // unique within a conversation, assigned in time order
    Speaker speaker = Speaker::A;
    std::vector<Token> tokens;  // non-empty, time-ordered
    ResponseLabel label = ResponseLabel::Turn;
    std::optional<OverlapRef> overlap;
    Emotion7 emotion = Emotion7::Neutral;
    Sentiment3 sentiment = Sentiment3::Neutral;
    // Five-class verdict fields, present only on resolved backchannel targets.
    std::optional<std::string> bc_emotion5;
    std::optional<std::string> bc_sentiment5;

    Millis start_ms() const { return tokens.front().start_ms; }
    Millis end_ms() const { return tokens.back().end_ms; }
    Millis duration_ms() const { return end_ms() - start_ms(); }
    std::string text() const { return render_text(tokens); }
};

struct Conversation {
    std::string id;
    Millis duration_ms = 0;  // >= every response end
    std::string source;      // provenance note (input path, generator seed)
    std::vector<Response> responses;  // both speakers interleaved, time-ordered
};

// ── Big Five traits ─────────────────────────────────────────────────────────

enum class Trait { Openness, Conscientiousness, Extraversion, Agreeableness, Neuroticism };

inline constexpr int kTraitCount = 5;
inline constexpr std::array<Trait, kTraitCount> kTraits = {
    Trait::Openness, Trait::Conscientiousness, Trait::Extraversion,
    Trait::Agreeableness, Trait::Neuroticism};

std::string trait_name(Trait t);

enum class TraitLabel { HighlyAligned, Aligned, Neutral, Opposed, HighlyOpposed };

// highly aligned 100, aligned 50, neutral 0, opposed -50, highly opposed -100
double label_to_score(TraitLabel label);
std::string trait_label_name(TraitLabel label);

// Tolerant parse: case-insensitive, ignores spaces/underscores/hyphens.
std::optional<TraitLabel> trait_label_from_text(std::string_view text);

using TraitScores = std::array<double, kTraitCount>;

// Per-trait arithmetic mean. Throws std::invalid_argument on empty input.
TraitScores average_scores(const std::vector<TraitScores>& scores);

// ── configuration ───────────────────────────────────────────────────────────

struct LlmSettings {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o-mini";
    std::string api_key_env = "LLM_API_KEY";  // credential comes from the environment only
    double classification_temperature = 0.0;
    double personality_temperature = 0.7;
    int max_attempts = 4;      // first try + retries for transient failures
    int backoff_base_ms = 250; // doubled per retry
    int deadline_ms = 60000;   // per-request wall clock budget
    int max_in_flight = 4;
    std::string journal_path;  // empty = no request journal
};

struct ClassifierSettings {
    std::string emotion_endpoint;    // empty = use the built-in lexicon mock
    std::string sentiment_endpoint;  // empty = use the built-in lexicon mock
    int max_attempts = 2;            // one retry, then neutral fallback
};

// Character-prompt section toggles.
struct FeatureToggles {
    bool samples = true;
    bool emotions = true;
    bool sentiment = true;
    bool basics = true;
};

struct PipelineConfig {
    double gap_threshold_s = 0.7;   // responses merge when the gap is smaller
    double min_overlap_s = 0.7;     // overlaps shorter than this are ignored
    int sample_count = 20;          // responses sampled per speaker for prompts
    double sample_min_dur_s = 2.0;  // samples must be strictly longer
    int personality_query_count = 5;
    double bucket_k1 = 0.8;         // |value-mean| <= k1*IQR  -> Normal
    double bucket_k2 = 1.2;         // |value-mean| <= k2*IQR  -> High/Low
    int context_before = 3;         // history window around the overlappee
    int context_after = 3;
    std::uint64_t rng_seed = 0;
    FeatureToggles features;
    LlmSettings llm;
    ClassifierSettings classifiers;

    Millis gap_threshold_ms() const { return seconds_to_ms(gap_threshold_s); }
    Millis min_overlap_ms() const { return seconds_to_ms(min_overlap_s); }
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schema or syntax violation in any input file (transcript, dataset,
// config, trend table). Messages carry a location.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Throws ConfigError on out-of-range values (negative thresholds, zero
// queries, k1 > k2, bad context window...).
void validate_config(const PipelineConfig& cfg);

// ── small shared helpers ────────────────────────────────────────────────────

// Lowercases and strips spaces/underscores/hyphens; used for tolerant
// matching of JSON keys and label values coming back from a model.
std::string normalize_key(std::string_view s);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

// One-decimal percentage, e.g. 2.77 -> "2.8".
std::string format_pct(double v);

}  // namespace duologue
