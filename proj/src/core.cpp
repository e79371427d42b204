#include "duologue/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "duologue/rng.hpp"

namespace duologue {

char speaker_char(Speaker s) { return s == Speaker::A ? 'A' : 'B'; }

Speaker speaker_from_char(char c) {
    if (c == 'A' || c == 'a') return Speaker::A;
    if (c == 'B' || c == 'b') return Speaker::B;
    throw std::invalid_argument(std::string("unknown speaker: ") + c);
}

Token make_word(std::string text, Millis start_ms, Millis end_ms) {
    Token t;
    t.kind = TokenKind::Word;
    t.text = std::move(text);
    t.start_ms = start_ms;
    t.end_ms = end_ms;
    return t;
}

std::string render_token(const Token& t) {
    switch (t.kind) {
        case TokenKind::Word: return t.text;
        case TokenKind::Laughter: return "[Laughter]";
        case TokenKind::StartLaugh: return "[StartLaugh]";
        case TokenKind::EndLaugh: return "[EndLaugh]";
    }
    return {};
}

std::string render_token_for_prompt(const Token& t) {
    // Prompt text shows standalone laughter as [Laugh]; the dataset keeps
    // the [Laughter] vocabulary.
    if (t.kind == TokenKind::Laughter) return "[Laugh]";
    return render_token(t);
}

namespace {

template <typename RenderFn>
std::string join_tokens(const std::vector<Token>& tokens, RenderFn render) {
    std::string out;
    for (const Token& t : tokens) {
        if (!out.empty()) out += ' ';
        out += render(t);
    }
    return out;
}

}  // namespace

std::string render_text(const std::vector<Token>& tokens) {
    return join_tokens(tokens, render_token);
}

std::string render_text_for_prompt(const std::vector<Token>& tokens) {
    return join_tokens(tokens, render_token_for_prompt);
}

std::string label_name(ResponseLabel label) {
    switch (label) {
        case ResponseLabel::Turn: return "turn";
        case ResponseLabel::EmotiveBackchannel: return "emotive_backchannel";
        case ResponseLabel::CognitiveBackchannel: return "cognitive_backchannel";
        case ResponseLabel::SuccessfulInterjection: return "successful_interjection";
        case ResponseLabel::UnsuccessfulInterjection: return "unsuccessful_interjection";
        case ResponseLabel::PendingBackchannel: return "pending_backchannel";
    }
    return {};
}

ResponseLabel label_from_name(std::string_view name) {
    if (name == "turn") return ResponseLabel::Turn;
    if (name == "emotive_backchannel") return ResponseLabel::EmotiveBackchannel;
    if (name == "cognitive_backchannel") return ResponseLabel::CognitiveBackchannel;
    if (name == "successful_interjection") return ResponseLabel::SuccessfulInterjection;
    if (name == "unsuccessful_interjection") return ResponseLabel::UnsuccessfulInterjection;
    if (name == "pending_backchannel") return ResponseLabel::PendingBackchannel;
    throw std::invalid_argument("unknown response label: " + std::string(name));
}

std::string overlap_kind_name(OverlapKind kind) {
    return kind == OverlapKind::Partial ? "partial" : "fully";
}

OverlapKind overlap_kind_from_name(std::string_view name) {
    if (name == "partial") return OverlapKind::Partial;
    if (name == "fully") return OverlapKind::Fully;
    throw std::invalid_argument("unknown overlap kind: " + std::string(name));
}

std::string emotion7_name(Emotion7 e) {
    switch (e) {
        case Emotion7::Anger: return "anger";
        case Emotion7::Disgust: return "disgust";
        case Emotion7::Fear: return "fear";
        case Emotion7::Joy: return "joy";
        case Emotion7::Neutral: return "neutral";
        case Emotion7::Sadness: return "sadness";
        case Emotion7::Surprise: return "surprise";
    }
    return {};
}

Emotion7 emotion7_from_name(std::string_view name) {
    for (int i = 0; i < kEmotion7Count; ++i) {
        auto e = static_cast<Emotion7>(i);
        if (emotion7_name(e) == name) return e;
    }
    throw std::invalid_argument("unknown emotion class: " + std::string(name));
}

std::string sentiment3_name(Sentiment3 s) {
    switch (s) {
        case Sentiment3::Positive: return "positive";
        case Sentiment3::Neutral: return "neutral";
        case Sentiment3::Negative: return "negative";
    }
    return {};
}

Sentiment3 sentiment3_from_name(std::string_view name) {
    for (int i = 0; i < kSentiment3Count; ++i) {
        auto s = static_cast<Sentiment3>(i);
        if (sentiment3_name(s) == name) return s;
    }
    throw std::invalid_argument("unknown sentiment class: " + std::string(name));
}

std::string trait_name(Trait t) {
    switch (t) {
        case Trait::Openness: return "openness";
        case Trait::Conscientiousness: return "conscientiousness";
        case Trait::Extraversion: return "extraversion";
        case Trait::Agreeableness: return "agreeableness";
        case Trait::Neuroticism: return "neuroticism";
    }
    return {};
}

double label_to_score(TraitLabel label) {
    switch (label) {
        case TraitLabel::HighlyAligned: return 100.0;
        case TraitLabel::Aligned: return 50.0;
        case TraitLabel::Neutral: return 0.0;
        case TraitLabel::Opposed: return -50.0;
        case TraitLabel::HighlyOpposed: return -100.0;
    }
    return 0.0;
}

std::string trait_label_name(TraitLabel label) {
    switch (label) {
        case TraitLabel::HighlyAligned: return "highly aligned";
        case TraitLabel::Aligned: return "aligned";
        case TraitLabel::Neutral: return "neutral";
        case TraitLabel::Opposed: return "opposed";
        case TraitLabel::HighlyOpposed: return "highly opposed";
    }
    return {};
}

std::optional<TraitLabel> trait_label_from_text(std::string_view text) {
    const std::string key = normalize_key(text);
    if (key == "highlyaligned") return TraitLabel::HighlyAligned;
    if (key == "aligned") return TraitLabel::Aligned;
    if (key == "neutral") return TraitLabel::Neutral;
    if (key == "opposed") return TraitLabel::Opposed;
    if (key == "highlyopposed") return TraitLabel::HighlyOpposed;
    return std::nullopt;
}

TraitScores average_scores(const std::vector<TraitScores>& scores) {
    if (scores.empty()) throw std::invalid_argument("average_scores: empty input");
    TraitScores avg{};
    for (const TraitScores& s : scores)
        for (int t = 0; t < kTraitCount; ++t) avg[t] += s[t];
    for (int t = 0; t < kTraitCount; ++t) avg[t] /= static_cast<double>(scores.size());
    return avg;
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.gap_threshold_s <= 0) throw ConfigError("gap_threshold_s must be positive");
    if (cfg.min_overlap_s <= 0) throw ConfigError("min_overlap_s must be positive");
    if (cfg.sample_count <= 0) throw ConfigError("sample_count must be positive");
    if (cfg.sample_min_dur_s < 0) throw ConfigError("sample_min_dur_s must be non-negative");
    if (cfg.personality_query_count <= 0)
        throw ConfigError("personality_query_count must be positive");
    if (cfg.bucket_k1 <= 0 || cfg.bucket_k2 <= 0)
        throw ConfigError("bucket multipliers must be positive");
    if (cfg.bucket_k1 > cfg.bucket_k2)
        throw ConfigError("bucket_k1 must not exceed bucket_k2");
    if (cfg.context_before < 0 || cfg.context_after < 0)
        throw ConfigError("context window must be non-negative");
    if (cfg.llm.max_attempts < 1) throw ConfigError("llm.max_attempts must be at least 1");
    if (cfg.llm.deadline_ms <= 0) throw ConfigError("llm.deadline_ms must be positive");
    if (cfg.llm.max_in_flight < 1) throw ConfigError("llm.max_in_flight must be at least 1");
    if (cfg.classifiers.max_attempts < 1)
        throw ConfigError("classifiers.max_attempts must be at least 1");
}

std::string normalize_key(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "0";
    return std::string(buf, ptr);
}

std::string format_pct(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::uint64_t substream_seed(std::uint64_t root, std::string_view name) {
    // FNV-1a over the name, then one splitmix64 step to decorrelate from root.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    SplitMix64 mix(root ^ h);
    return mix.next();
}

}  // namespace duologue
