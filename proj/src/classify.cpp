#include "duologue/classify.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#include "duologue/assets/backchannel_prompt_v1.hpp"
#include "duologue/rng.hpp"
#include "httplib.h"
#include "json.hpp"

namespace duologue::classify {

using nlohmann::json;

namespace {

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
    std::size_t at = 0;
    while ((at = text.find(key, at)) != std::string::npos) {
        text.replace(at, key.size(), value);
        at += value.size();
    }
    return text;
}

const std::array<const char*, 5> kEmotion5 = {"neutral", "sad", "angry", "happy", "surprised"};
const std::array<const char*, 5> kSentiment5 = {"very positive", "positive", "neutral",
                                                "negative", "very negative"};

std::optional<std::string> canonical(const json& j, const char* key,
                                     const auto& vocabulary) {
    if (!j.contains(key) || !j[key].is_string()) return std::nullopt;
    std::string normalized = normalize_key(j[key].get<std::string>());
    for (const char* entry : vocabulary)
        if (normalized == normalize_key(entry)) return std::string(entry);
    return std::nullopt;
}

}  // namespace

int marker_slot(const Response& r, Millis instant_ms) {
    const auto& tk = r.tokens;
    const int n = static_cast<int>(tk.size());
    int best = 0;
    Millis best_d = -1;
    for (int k = 0; k <= n; ++k) {
        Millis lo = k == 0 ? tk.front().start_ms : tk[static_cast<std::size_t>(k - 1)].end_ms;
        Millis hi = k == n ? tk.back().end_ms : tk[static_cast<std::size_t>(k)].start_ms;
        Millis d = instant_ms < lo ? lo - instant_ms : instant_ms > hi ? instant_ms - hi : 0;
        if (best_d < 0 || d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::string render_history_line(const Response& r) {
    return std::string("Speaker ") + speaker_char(r.speaker) + ": " +
           render_text_for_prompt(r.tokens);
}

std::string build_backchannel_prompt(const Conversation& conv, int target_id,
                                     const PipelineConfig& cfg) {
    const Response& target = conv.responses.at(static_cast<std::size_t>(target_id));
    if (!target.overlap)
        throw std::logic_error("cannot build a classification prompt for a response "
                               "without an overlap");
    const Response& host =
        conv.responses.at(static_cast<std::size_t>(target.overlap->partner_response_id));

    const std::string target_text = render_text_for_prompt(target.tokens);
    const std::string marker = std::string("{{{(TARGET) Speaker ") +
                               speaker_char(target.speaker) + ": " + target_text + "}}}";

    const int lo = std::max(0, host.id - cfg.context_before);
    const int hi = std::min(static_cast<int>(conv.responses.size()) - 1,
                            host.id + cfg.context_after);
    std::string history;
    for (int id = lo; id <= hi; ++id) {
        const Response& r = conv.responses.at(static_cast<std::size_t>(id));
        if (r.id == target.id) continue;
        if (!history.empty()) history += "\n";
        if (r.id != host.id) {
            history += render_history_line(r);
            continue;
        }
        const int slot = marker_slot(host, target.start_ms());
        std::string line = std::string("Speaker ") + speaker_char(host.speaker) + ":";
        for (int k = 0; k <= static_cast<int>(host.tokens.size()); ++k) {
            if (k == slot) line += " " + marker;
            if (k < static_cast<int>(host.tokens.size()))
                line += " " + render_token_for_prompt(host.tokens[static_cast<std::size_t>(k)]);
        }
        history += line;
    }

    std::string prompt = assets::backchannel_prompt_v1;
    prompt = replace_all(prompt, "${TARGET_TEXT}", target_text);
    prompt = replace_all(prompt, "${TARGET_SPEAKER}",
                         std::string(1, speaker_char(target.speaker)));
    prompt = replace_all(prompt, "${HISTORY}", history);
    return prompt;
}

ResolveResult resolve_backchannels(Conversation& conv, gateway::ChatClient& client,
                                   const PipelineConfig& cfg) {
    ResolveResult res;
    for (Response& r : conv.responses) {
        if (r.label != ResponseLabel::PendingBackchannel) continue;
        const std::string prompt = build_backchannel_prompt(conv, r.id, cfg);
        const std::uint64_t base = substream_seed(
            cfg.rng_seed, conv.id + "|backchannel|" + std::to_string(r.id));
        bool decided = false;
        for (int attempt = 0; attempt < kVerdictAttempts && !decided; ++attempt) {
            auto out = client.complete(prompt, cfg.llm.classification_temperature,
                                       base + static_cast<std::uint64_t>(attempt));
            if (out.error) {
                res.fatal = out.error;
                return res;
            }
            auto verdict = gateway::extract_trailing_json(out.text);
            if (!verdict) continue;
            std::string type;
            if (verdict->contains("interjection type") &&
                (*verdict)["interjection type"].is_string())
                type = normalize_key((*verdict)["interjection type"].get<std::string>());
            if (type == "emotive") r.label = ResponseLabel::EmotiveBackchannel;
            else if (type == "cognitive") r.label = ResponseLabel::CognitiveBackchannel;
            else if (type == "notbackchannel") r.label = ResponseLabel::UnsuccessfulInterjection;
            else continue;
            r.bc_emotion5 = canonical(*verdict, "emotion", kEmotion5);
            r.bc_sentiment5 = canonical(*verdict, "sentiment", kSentiment5);
            decided = true;
            ++res.resolved;
        }
        if (!decided) {
            r.label = ResponseLabel::UnsuccessfulInterjection;
            res.warnings.push_back(conv.id + ": response " + std::to_string(r.id) +
                                   " got no parseable verdict in " +
                                   std::to_string(kVerdictAttempts) +
                                   " attempts; labeled unsuccessful interjection");
        }
    }
    return res;
}

std::map<std::string, double> LexiconClassifier::scores(
    const std::string& text, const std::vector<std::string>& classes) {
    static const std::map<std::string, std::string> kWordClass = {
        // emotion
        {"funny", "joy"}, {"love", "joy"}, {"great", "joy"}, {"best", "joy"},
        {"happy", "joy"}, {"wow", "surprise"}, {"oh", "surprise"},
        {"terrible", "anger"}, {"hate", "anger"}, {"angry", "anger"},
        {"sad", "sadness"}, {"sorry", "sadness"}, {"scared", "fear"},
        {"afraid", "fear"}, {"gross", "disgust"}, {"disgusting", "disgust"},
    };
    static const std::map<std::string, std::string> kWordSentiment = {
        {"funny", "positive"}, {"love", "positive"}, {"great", "positive"},
        {"best", "positive"}, {"happy", "positive"}, {"wow", "positive"},
        {"terrible", "negative"}, {"hate", "negative"}, {"angry", "negative"},
        {"sad", "negative"}, {"sorry", "negative"}, {"scared", "negative"},
        {"gross", "negative"}, {"disgusting", "negative"},
    };

    std::map<std::string, double> out;
    std::string word;
    auto tally = [&] {
        if (word.empty()) return;
        for (const auto* table : {&kWordClass, &kWordSentiment}) {
            auto hit = table->find(word);
            if (hit == table->end()) continue;
            if (std::find(classes.begin(), classes.end(), hit->second) != classes.end())
                out[hit->second] += 1.0;
        }
        word.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) tally();
        else word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    tally();
    return out;
}

HttpTextClassifier::HttpTextClassifier(std::string endpoint, int max_attempts)
    : max_attempts_(std::max(1, max_attempts)) {
    std::tie(base_url_, path_) = gateway::split_endpoint(endpoint);
}

std::map<std::string, double> HttpTextClassifier::scores(
    const std::string& text, const std::vector<std::string>& classes) {
    const std::string body = json{{"text", text}, {"classes", classes}}.dump();
    std::string last_error = "no attempt made";
    for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        httplib::Client client(base_url_);
        client.set_connection_timeout(std::chrono::seconds(10));
        client.set_read_timeout(std::chrono::seconds(10));
        auto res = client.Post(path_, body, "application/json");
        if (!res) {
            last_error = std::string("transport failure: ") + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "unexpected HTTP " + std::to_string(res->status);
            continue;
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("labels") ||
            !parsed["labels"].is_object()) {
            last_error = "response body is not a label map";
            continue;
        }
        std::map<std::string, double> out;
        for (const auto& [name, score] : parsed["labels"].items())
            if (score.is_number()) out[name] = score.get<double>();
        return out;
    }
    throw ClassifyError("text classification failed after " +
                        std::to_string(max_attempts_) + " attempts: " + last_error);
}

namespace {

std::string spoken_text(const Response& r) {
    std::string out;
    for (const Token& t : r.tokens) {
        if (t.kind != TokenKind::Word) continue;
        if (!out.empty()) out += " ";
        out += t.text;
    }
    return out;
}

// First class with the strictly highest positive score; no signal -> nullopt.
std::optional<std::string> argmax_class(const std::map<std::string, double>& scores,
                                        const std::vector<std::string>& classes) {
    std::optional<std::string> best;
    double best_score = 0.0;
    for (const auto& c : classes) {
        auto hit = scores.find(c);
        double s = hit == scores.end() ? 0.0 : hit->second;
        if (s > best_score) {
            best_score = s;
            best = c;
        }
    }
    return best;
}

}  // namespace

AffectResult classify_affect(Conversation& conv, TextClassifier& emotion_clf,
                             TextClassifier& sentiment_clf) {
    static const std::vector<std::string> kEmotionClasses = {
        "anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise"};
    static const std::vector<std::string> kSentimentClasses = {"positive", "neutral",
                                                               "negative"};
    AffectResult res;
    for (Response& r : conv.responses) {
        r.emotion = Emotion7::Neutral;
        r.sentiment = Sentiment3::Neutral;
        const std::string text = spoken_text(r);
        if (text.empty()) continue;
        try {
            if (auto e = argmax_class(emotion_clf.scores(text, kEmotionClasses),
                                      kEmotionClasses))
                r.emotion = emotion7_from_name(*e);
            if (auto s = argmax_class(sentiment_clf.scores(text, kSentimentClasses),
                                      kSentimentClasses))
                r.sentiment = sentiment3_from_name(*s);
        } catch (const std::exception& e) {
            res.warnings.push_back(conv.id + ": response " + std::to_string(r.id) +
                                   " kept neutral affect: " + e.what());
        }
    }
    return res;
}

}  // namespace duologue::classify
