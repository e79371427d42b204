#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "duologue/core.hpp"
#include "json.hpp"

namespace duologue::attributes {

// Per-speaker summary of one conversation. Percentages are stored raw
// (unrounded); one-decimal formatting happens at render time.
struct SpeakerAttributes {
    std::string conversation_id;
    Speaker speaker = Speaker::A;

    int num_turns = 0;
    double avg_turn_duration_s = 0.0;
    double laughs_per_min_speech = 0.0;
    double emotive_bc_per_min_other = 0.0;
    double cognitive_bc_per_min_other = 0.0;
    double interjections_per_12min = 0.0;

    std::array<double, 7> emotion_pct{};    // Emotion7 order
    std::array<double, 3> sentiment_pct{};  // Sentiment3 order

    double value_for(const std::string& key) const;
    // all 16 (key, value) rows in canonical order: emotions, sentiments, basics
    std::vector<std::pair<std::string, double>> as_rows() const;
};

// canonical row keys, in the order tables and exports use
extern const std::array<std::string, 16> kAttributeKeys;

// The six scalar statistics shown in the character prompt, in prompt order.
struct BasicStat {
    const char* key;
    const char* label;
};
extern const std::array<BasicStat, 6> kBasicStats;

SpeakerAttributes compute_attributes(const Conversation& conv, Speaker speaker,
                                     std::vector<std::string>* warnings = nullptr);

enum class RelativeBucket { VeryLow, Low, Normal, High, VeryHigh };

// Judge `value` against the cohort's mean and interquartile range. Boundary
// equality resolves toward the less extreme bucket.
RelativeBucket bucket_for_value(const std::vector<double>& cohort, double value,
                                double k1 = 0.8, double k2 = 1.2);
// Bucket one cohort member (the cohort includes the target).
RelativeBucket bucketize(const std::vector<double>& cohort, std::size_t target_index,
                         double k1 = 0.8, double k2 = 1.2);

// Display word for a bucket, spelled per attribute family: counts read
// Few/Many, durations Short/Long, rates Infrequent/Frequent.
std::string render_bucket(const std::string& attribute_key, RelativeBucket bucket);

nlohmann::ordered_json attributes_to_json(const SpeakerAttributes& a);
SpeakerAttributes attributes_from_json(const nlohmann::json& j);

}  // namespace duologue::attributes
