#include "duologue/personality.hpp"

#include <stdexcept>

#include "duologue/assets/character_prompt_v1.hpp"
#include "duologue/rng.hpp"

namespace duologue::personality {

CohortMeans cohort_means(const std::vector<attributes::SpeakerAttributes>& cohort) {
    CohortMeans m;
    if (cohort.empty()) return m;
    for (const auto& a : cohort) {
        for (std::size_t i = 0; i < 7; ++i) m.emotion_pct[i] += a.emotion_pct[i];
        for (std::size_t i = 0; i < 3; ++i) m.sentiment_pct[i] += a.sentiment_pct[i];
    }
    auto n = static_cast<double>(cohort.size());
    for (auto& v : m.emotion_pct) v /= n;
    for (auto& v : m.sentiment_pct) v /= n;
    return m;
}

std::array<attributes::RelativeBucket, 6> basic_stat_buckets(
    const std::vector<attributes::SpeakerAttributes>& cohort, std::size_t target,
    double k1, double k2) {
    if (target >= cohort.size())
        throw std::invalid_argument("bucket target index out of range");
    std::array<attributes::RelativeBucket, 6> out{};
    for (std::size_t s = 0; s < attributes::kBasicStats.size(); ++s) {
        std::vector<double> values;
        values.reserve(cohort.size());
        for (const auto& a : cohort)
            values.push_back(a.value_for(attributes::kBasicStats[s].key));
        out[s] = attributes::bucketize(values, target, k1, k2);
    }
    return out;
}

std::vector<std::string> select_samples(const Conversation& conv, Speaker speaker,
                                        std::size_t n, double min_dur_s,
                                        std::uint64_t seed) {
    auto min_ms = seconds_to_ms(min_dur_s);
    std::vector<const Response*> pool;
    for (const auto& r : conv.responses) {
        if (r.speaker != speaker) continue;
        if (r.label != ResponseLabel::Turn && r.label != ResponseLabel::SuccessfulInterjection)
            continue;
        if (r.duration_ms() > min_ms) pool.push_back(&r);
    }
    SplitMix64 rng(seed);
    fisher_yates(pool, rng);
    if (pool.size() > n) pool.resize(n);
    std::vector<std::string> out;
    out.reserve(pool.size());
    for (const auto* r : pool) out.push_back(render_text_for_prompt(r->tokens));
    return out;
}

namespace {

void replace_hole(std::string& text, const std::string& hole, const std::string& value) {
    auto pos = text.find(hole);
    while (pos != std::string::npos) {
        text.replace(pos, hole.size(), value);
        pos = text.find(hole, pos + value.size());
    }
}

std::string pct_line(const std::string& name, double own, double avg) {
    return "  " + name + ": " + format_pct(own) + "% (average: " + format_pct(avg) + "%)";
}

}  // namespace

std::string build_personality_prompt(const attributes::SpeakerAttributes& attrs,
                                     const std::array<attributes::RelativeBucket, 6>& buckets,
                                     const std::vector<std::string>& samples,
                                     const CohortMeans& means,
                                     const FeatureToggles& features) {
    if (!features.samples && !features.emotions && !features.sentiment && !features.basics)
        throw ConfigError("personality prompt needs at least one feature enabled");

    std::vector<std::string> sections;

    if (features.samples) {
        std::string block = "Sample Responses:";
        for (std::size_t i = 0; i < samples.size(); ++i)
            block += "\n  Sample " + std::to_string(i + 1) + ": " + samples[i];
        sections.push_back(std::move(block));
    }
    if (features.emotions) {
        std::string block = "Emotions:";
        for (std::size_t i = 0; i < 7; ++i)
            block += "\n" + pct_line(emotion7_name(static_cast<Emotion7>(i)),
                                     attrs.emotion_pct[i], means.emotion_pct[i]);
        sections.push_back(std::move(block));
    }
    if (features.sentiment) {
        std::string block = "Sentiment:";
        for (std::size_t i = 0; i < 3; ++i)
            block += "\n" + pct_line(sentiment3_name(static_cast<Sentiment3>(i)),
                                     attrs.sentiment_pct[i], means.sentiment_pct[i]);
        sections.push_back(std::move(block));
    }
    if (features.basics) {
        std::string block = "Basic Statistics:";
        for (std::size_t s = 0; s < attributes::kBasicStats.size(); ++s)
            block += std::string("\n  ") + attributes::kBasicStats[s].label + ": " +
                     attributes::render_bucket(attributes::kBasicStats[s].key, buckets[s]);
        sections.push_back(std::move(block));
    }

    std::string joined;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (i > 0) joined += "\n\n";
        joined += sections[i];
    }

    std::string prompt = assets::character_prompt_v1;
    replace_hole(prompt, "${SAMPLES_INTRO}",
                 features.samples
                     ? "Additionally, we also show some sample responses spoken by the "
                       "target speaker. We randomly extract some samples from 12-minute "
                       "conversations. We excluded special tokens like commas, periods, "
                       "or question marks.\n\n"
                     : "");
    replace_hole(prompt, "${SECTIONS}", joined);
    return prompt;
}

namespace {

std::optional<std::array<TraitLabel, kTraitCount>> parse_trait_verdict(
    const std::string& reply) {
    auto j = gateway::extract_trailing_json(reply);
    if (!j || !j->is_object()) return std::nullopt;
    std::array<TraitLabel, kTraitCount> labels{};
    std::array<bool, kTraitCount> seen{};
    for (auto it = j->begin(); it != j->end(); ++it) {
        std::string key = normalize_key(it.key());
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            if (key != normalize_key(trait_name(kTraits[t]))) continue;
            if (!it.value().is_string()) return std::nullopt;
            auto label = trait_label_from_text(it.value().get<std::string>());
            if (!label) return std::nullopt;
            labels[t] = *label;
            seen[t] = true;
        }
    }
    for (bool s : seen)
        if (!s) return std::nullopt;
    return labels;
}

}  // namespace

PredictionResult predict_personality(gateway::ChatClient& client, const std::string& prompt,
                                     const PipelineConfig& cfg,
                                     const std::string& conversation_id, Speaker speaker) {
    PredictionResult res;
    res.prediction.conversation_id = conversation_id;
    res.prediction.speaker = speaker;

    std::uint64_t base = substream_seed(
        cfg.rng_seed, conversation_id + "|personality|" + speaker_char(speaker));

    std::array<double, kTraitCount> sums{};
    int queries = cfg.personality_query_count;
    for (int q = 0; q < queries; ++q) {
        std::optional<std::array<TraitLabel, kTraitCount>> labels;
        for (int attempt = 1; attempt <= kQueryAttempts && !labels; ++attempt) {
            std::uint64_t seed = substream_seed(
                base, "q" + std::to_string(q) + "a" + std::to_string(attempt));
            auto out = client.complete(prompt, cfg.llm.personality_temperature, seed);
            if (out.error) {
                res.error = out.error;
                return res;
            }
            labels = parse_trait_verdict(out.text);
        }
        if (!labels) {
            res.error = gateway::ChatError{
                gateway::ChatErrorKind::MalformedResponse,
                conversation_id + " speaker " + speaker_char(speaker) + ": query " +
                    std::to_string(q + 1) + " returned no parseable trait verdict in " +
                    std::to_string(kQueryAttempts) + " attempts"};
            return res;
        }
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            res.prediction.raw_labels[t].push_back((*labels)[t]);
            sums[t] += label_to_score((*labels)[t]);
        }
    }
    res.prediction.query_count = queries;
    for (std::size_t t = 0; t < kTraitCount; ++t)
        res.prediction.scores[t] = queries > 0 ? sums[t] / queries : 0.0;
    return res;
}

nlohmann::ordered_json prediction_to_json(const TraitPrediction& p) {
    nlohmann::ordered_json j;
    j["conversation_id"] = p.conversation_id;
    j["speaker"] = std::string(1, speaker_char(p.speaker));
    j["query_count"] = p.query_count;
    nlohmann::ordered_json scores;
    for (std::size_t t = 0; t < kTraitCount; ++t)
        scores[trait_name(kTraits[t])] = p.scores[t];
    j["scores"] = std::move(scores);
    nlohmann::ordered_json raw;
    for (std::size_t t = 0; t < kTraitCount; ++t) {
        nlohmann::ordered_json labels = nlohmann::ordered_json::array();
        for (auto l : p.raw_labels[t]) labels.push_back(trait_label_name(l));
        raw[trait_name(kTraits[t])] = std::move(labels);
    }
    j["labels"] = std::move(raw);
    return j;
}

TraitPrediction prediction_from_json(const nlohmann::json& j) {
    TraitPrediction p;
    p.conversation_id = j.at("conversation_id").get<std::string>();
    std::string sp = j.at("speaker").get<std::string>();
    if (sp != "A" && sp != "B") throw ParseError("speaker must be \"A\" or \"B\", got " + sp);
    p.speaker = sp == "A" ? Speaker::A : Speaker::B;
    p.query_count = j.at("query_count").get<int>();
    for (std::size_t t = 0; t < kTraitCount; ++t) {
        p.scores[t] = j.at("scores").at(trait_name(kTraits[t])).get<double>();
        for (const auto& l : j.at("labels").at(trait_name(kTraits[t]))) {
            auto label = trait_label_from_text(l.get<std::string>());
            if (!label) throw ParseError("unknown trait label: " + l.get<std::string>());
            p.raw_labels[t].push_back(*label);
        }
    }
    return p;
}

}  // namespace duologue::personality
