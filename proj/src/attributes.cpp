#include "duologue/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace duologue::attributes {

const std::array<std::string, 16> kAttributeKeys = {
    "emotion_anger",
    "emotion_disgust",
    "emotion_fear",
    "emotion_joy",
    "emotion_neutral",
    "emotion_sadness",
    "emotion_surprise",
    "sentiment_positive",
    "sentiment_neutral",
    "sentiment_negative",
    "num_turns",
    "avg_turn_duration_s",
    "laughs_per_min_speech",
    "emotive_bc_per_min_other",
    "cognitive_bc_per_min_other",
    "interjections_per_12min",
};

const std::array<BasicStat, 6> kBasicStats = {{
    {"num_turns", "Number of turns"},
    {"avg_turn_duration_s", "Talking time per turn"},
    {"laughs_per_min_speech", "Frequency of Laughter"},
    {"emotive_bc_per_min_other", "Frequency of Emotive Backchannel"},
    {"cognitive_bc_per_min_other", "Frequency of Cognitive Backchannel"},
    {"interjections_per_12min", "Frequency of interjections"},
}};

double SpeakerAttributes::value_for(const std::string& key) const {
    for (std::size_t i = 0; i < 7; ++i)
        if (key == kAttributeKeys[i]) return emotion_pct[i];
    for (std::size_t i = 0; i < 3; ++i)
        if (key == kAttributeKeys[7 + i]) return sentiment_pct[i];
    if (key == "num_turns") return static_cast<double>(num_turns);
    if (key == "avg_turn_duration_s") return avg_turn_duration_s;
    if (key == "laughs_per_min_speech") return laughs_per_min_speech;
    if (key == "emotive_bc_per_min_other") return emotive_bc_per_min_other;
    if (key == "cognitive_bc_per_min_other") return cognitive_bc_per_min_other;
    if (key == "interjections_per_12min") return interjections_per_12min;
    throw std::invalid_argument("unknown attribute key: " + key);
}

std::vector<std::pair<std::string, double>> SpeakerAttributes::as_rows() const {
    std::vector<std::pair<std::string, double>> rows;
    rows.reserve(kAttributeKeys.size());
    for (const auto& key : kAttributeKeys) rows.emplace_back(key, value_for(key));
    return rows;
}

namespace {

int laugh_events(const Response& r) {
    int n = 0;
    for (const auto& t : r.tokens) {
        if (t.kind == TokenKind::Laughter) ++n;
        if (t.kind == TokenKind::StartLaugh) ++n;  // its [EndLaugh] is the same event
    }
    return n;
}

double per_minute(double count, Millis speech_ms) {
    if (speech_ms <= 0) return 0.0;
    return count * 60000.0 / static_cast<double>(speech_ms);
}

}  // namespace

SpeakerAttributes compute_attributes(const Conversation& conv, Speaker speaker,
                                     std::vector<std::string>* warnings) {
    SpeakerAttributes a;
    a.conversation_id = conv.id;
    a.speaker = speaker;

    Millis own_speech = 0;
    Millis other_speech = 0;
    Millis turn_ms = 0;
    int laughs = 0;
    int emotive = 0;
    int cognitive = 0;
    int interjections = 0;
    int own_responses = 0;
    std::array<int, 7> emotion_counts{};
    std::array<int, 3> sentiment_counts{};

    for (const auto& r : conv.responses) {
        if (r.speaker != speaker) {
            other_speech += r.duration_ms();
            continue;
        }
        own_speech += r.duration_ms();
        ++own_responses;
        laughs += laugh_events(r);
        emotion_counts[static_cast<std::size_t>(r.emotion)]++;
        sentiment_counts[static_cast<std::size_t>(r.sentiment)]++;
        switch (r.label) {
            case ResponseLabel::Turn:
            case ResponseLabel::SuccessfulInterjection:
                ++a.num_turns;
                turn_ms += r.duration_ms();
                break;
            case ResponseLabel::EmotiveBackchannel:
                ++emotive;
                break;
            case ResponseLabel::CognitiveBackchannel:
                ++cognitive;
                break;
            case ResponseLabel::UnsuccessfulInterjection:
                break;
            case ResponseLabel::PendingBackchannel:
                if (warnings)
                    warnings->push_back(conv.id + ": response " + std::to_string(r.id) +
                                        " still pending classification; not counted");
                break;
        }
        if (r.label == ResponseLabel::SuccessfulInterjection ||
            r.label == ResponseLabel::UnsuccessfulInterjection)
            ++interjections;
    }

    if (a.num_turns > 0)
        a.avg_turn_duration_s = ms_to_seconds(turn_ms) / a.num_turns;

    if (own_speech <= 0 && warnings)
        warnings->push_back(conv.id + ": speaker " + speaker_char(speaker) +
                            " has no speaking time; rates set to 0");
    if (other_speech <= 0 && warnings)
        warnings->push_back(conv.id + ": speaker " + speaker_char(other(speaker)) +
                            " has no speaking time; partner-relative rates set to 0");

    a.laughs_per_min_speech = per_minute(laughs, own_speech);
    a.emotive_bc_per_min_other = per_minute(emotive, other_speech);
    a.cognitive_bc_per_min_other = per_minute(cognitive, other_speech);
    if (conv.duration_ms > 0)
        a.interjections_per_12min =
            interjections * 720.0 / ms_to_seconds(conv.duration_ms);
    else if (warnings)
        warnings->push_back(conv.id + ": zero conversation duration; interjection rate set to 0");

    if (own_responses > 0) {
        for (std::size_t i = 0; i < 7; ++i)
            a.emotion_pct[i] = 100.0 * emotion_counts[i] / own_responses;
        for (std::size_t i = 0; i < 3; ++i)
            a.sentiment_pct[i] = 100.0 * sentiment_counts[i] / own_responses;
    }
    return a;
}

namespace {

// linear-interpolation quantile at fraction p of the sorted data
double quantile(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    double h = p * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(h);
    double frac = h - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

RelativeBucket bucket_for_value(const std::vector<double>& cohort, double value,
                                double k1, double k2) {
    if (cohort.size() < 4)
        throw std::invalid_argument("bucketing needs a cohort of at least 4 values, got " +
                                    std::to_string(cohort.size()));
    double mean = std::accumulate(cohort.begin(), cohort.end(), 0.0) /
                  static_cast<double>(cohort.size());
    std::vector<double> sorted = cohort;
    std::sort(sorted.begin(), sorted.end());
    double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);

    double d = value - mean;
    if (std::abs(d) <= k1 * iqr) return RelativeBucket::Normal;
    if (std::abs(d) <= k2 * iqr)
        return d > 0 ? RelativeBucket::High : RelativeBucket::Low;
    return d > 0 ? RelativeBucket::VeryHigh : RelativeBucket::VeryLow;
}

RelativeBucket bucketize(const std::vector<double>& cohort, std::size_t target_index,
                         double k1, double k2) {
    if (target_index >= cohort.size())
        throw std::invalid_argument("bucketize target index out of range");
    return bucket_for_value(cohort, cohort[target_index], k1, k2);
}

namespace {

const std::array<const char*, 5> kCountWords = {"Very Few", "Few", "Normal", "Many",
                                                "Very Many"};
const std::array<const char*, 5> kDurationWords = {"Very Short", "Short", "Normal", "Long",
                                                   "Very Long"};
const std::array<const char*, 5> kRateWords = {"Very Infrequent", "Infrequent", "Normal",
                                               "Frequent", "Very Frequent"};

}  // namespace

std::string render_bucket(const std::string& attribute_key, RelativeBucket bucket) {
    auto slot = static_cast<std::size_t>(bucket);
    if (attribute_key == "num_turns") return kCountWords[slot];
    if (attribute_key == "avg_turn_duration_s") return kDurationWords[slot];
    if (attribute_key == "laughs_per_min_speech" ||
        attribute_key == "emotive_bc_per_min_other" ||
        attribute_key == "cognitive_bc_per_min_other" ||
        attribute_key == "interjections_per_12min")
        return kRateWords[slot];
    throw std::invalid_argument("no bucket rendering for attribute: " + attribute_key);
}

nlohmann::ordered_json attributes_to_json(const SpeakerAttributes& a) {
    nlohmann::ordered_json j;
    j["conversation_id"] = a.conversation_id;
    j["speaker"] = std::string(1, speaker_char(a.speaker));
    j["num_turns"] = a.num_turns;
    j["avg_turn_duration_s"] = a.avg_turn_duration_s;
    j["laughs_per_min_speech"] = a.laughs_per_min_speech;
    j["emotive_bc_per_min_other"] = a.emotive_bc_per_min_other;
    j["cognitive_bc_per_min_other"] = a.cognitive_bc_per_min_other;
    j["interjections_per_12min"] = a.interjections_per_12min;
    nlohmann::ordered_json emotions;
    for (std::size_t i = 0; i < 7; ++i)
        emotions[emotion7_name(static_cast<Emotion7>(i))] = a.emotion_pct[i];
    j["emotions"] = std::move(emotions);
    nlohmann::ordered_json sentiments;
    for (std::size_t i = 0; i < 3; ++i)
        sentiments[sentiment3_name(static_cast<Sentiment3>(i))] = a.sentiment_pct[i];
    j["sentiments"] = std::move(sentiments);
    return j;
}

SpeakerAttributes attributes_from_json(const nlohmann::json& j) {
    SpeakerAttributes a;
    a.conversation_id = j.at("conversation_id").get<std::string>();
    std::string sp = j.at("speaker").get<std::string>();
    if (sp != "A" && sp != "B") throw ParseError("speaker must be \"A\" or \"B\", got " + sp);
    a.speaker = sp == "A" ? Speaker::A : Speaker::B;
    a.num_turns = j.at("num_turns").get<int>();
    a.avg_turn_duration_s = j.at("avg_turn_duration_s").get<double>();
    a.laughs_per_min_speech = j.at("laughs_per_min_speech").get<double>();
    a.emotive_bc_per_min_other = j.at("emotive_bc_per_min_other").get<double>();
    a.cognitive_bc_per_min_other = j.at("cognitive_bc_per_min_other").get<double>();
    a.interjections_per_12min = j.at("interjections_per_12min").get<double>();
    for (std::size_t i = 0; i < 7; ++i)
        a.emotion_pct[i] =
            j.at("emotions").at(emotion7_name(static_cast<Emotion7>(i))).get<double>();
    for (std::size_t i = 0; i < 3; ++i)
        a.sentiment_pct[i] =
            j.at("sentiments").at(sentiment3_name(static_cast<Sentiment3>(i))).get<double>();
    return a;
}

}  // namespace duologue::attributes
