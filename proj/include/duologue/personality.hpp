#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "duologue/attributes.hpp"
#include "duologue/core.hpp"
#include "duologue/gateway.hpp"
#include "json.hpp"

namespace duologue::personality {

// Batch-wide mean of each emotion/sentiment percentage, shown next to the
// speaker's own numbers as "(average: …%)".
struct CohortMeans {
    std::array<double, 7> emotion_pct{};
    std::array<double, 3> sentiment_pct{};
};

CohortMeans cohort_means(const std::vector<attributes::SpeakerAttributes>& cohort);

// Buckets for the six basic statistics of cohort[target], in kBasicStats order.
std::array<attributes::RelativeBucket, 6> basic_stat_buckets(
    const std::vector<attributes::SpeakerAttributes>& cohort, std::size_t target,
    double k1 = 0.8, double k2 = 1.2);

// Seeded uniform pick of up to `n` responses with label Turn or
// SuccessfulInterjection and duration strictly above min_dur_s. Undersupply
// returns everything that qualifies.
std::vector<std::string> select_samples(const Conversation& conv, Speaker speaker,
                                        std::size_t n, double min_dur_s,
                                        std::uint64_t seed);

std::string build_personality_prompt(const attributes::SpeakerAttributes& attrs,
                                     const std::array<attributes::RelativeBucket, 6>& buckets,
                                     const std::vector<std::string>& samples,
                                     const CohortMeans& means,
                                     const FeatureToggles& features);

struct TraitPrediction {
    std::string conversation_id;
    Speaker speaker = Speaker::A;
    TraitScores scores{};  // mean of label scores per trait
    std::array<std::vector<TraitLabel>, kTraitCount> raw_labels;
    int query_count = 0;
};

struct PredictionResult {
    TraitPrediction prediction;
    std::optional<gateway::ChatError> error;  // set means the prediction is unusable
    bool ok() const { return !error.has_value(); }
};

inline constexpr int kQueryAttempts = 3;

// Ask the same prompt cfg.personality_query_count times and average the
// verdicts. A query whose replies never parse fails the whole prediction.
PredictionResult predict_personality(gateway::ChatClient& client, const std::string& prompt,
                                     const PipelineConfig& cfg,
                                     const std::string& conversation_id, Speaker speaker);

nlohmann::ordered_json prediction_to_json(const TraitPrediction& p);
TraitPrediction prediction_from_json(const nlohmann::json& j);

}  // namespace duologue::personality
