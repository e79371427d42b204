#include "duologue/ingest.hpp"

#include <algorithm>

#include "json.hpp"

namespace duologue::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

const Channel& TranscriptDocument::channel(Speaker s) const {
    for (const Channel& c : channels)
        if (c.speaker == s) return c;
    throw std::logic_error("transcript has no channel for requested speaker");
}

std::vector<Interval> TranscriptDocument::laughs_for(Speaker s) const {
    std::vector<Interval> out;
    for (const SpeakerInterval& l : laughs)
        if (l.speaker == s) out.push_back({l.start_ms, l.end_ms});
    return out;
}

std::vector<Interval> TranscriptDocument::silences_for(Speaker s) const {
    std::vector<Interval> out;
    for (const SpeakerInterval& l : silences)
        if (l.speaker == s) out.push_back({l.start_ms, l.end_ms});
    return out;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError("transcript: " + where + ": " + what);
}

const json& require_field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_string()) fail(where, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_number()) fail(where, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

Speaker require_speaker(const json& obj, const std::string& where) {
    std::string s = require_string(obj, "speaker", where);
    if (s != "A" && s != "B") fail(where, "speaker must be \"A\" or \"B\", got \"" + s + "\"");
    return speaker_from_char(s[0]);
}

std::vector<SpeakerInterval> parse_interval_list(const json& doc, const char* key,
                                                 bool required, const std::string& where) {
    std::vector<SpeakerInterval> out;
    auto it = doc.find(key);
    if (it == doc.end()) {
        if (required) fail(where, std::string("missing field '") + key + "'");
        return out;
    }
    if (!it->is_array()) fail(where, std::string("field '") + key + "' must be an array");
    int idx = 0;
    for (const json& item : *it) {
        const std::string loc = where + "." + key + "[" + std::to_string(idx) + "]";
        SpeakerInterval iv;
        iv.speaker = require_speaker(item, loc);
        iv.start_ms = seconds_to_ms(require_number(item, "start", loc));
        iv.end_ms = seconds_to_ms(require_number(item, "end", loc));
        if (iv.start_ms > iv.end_ms) fail(loc, "start > end");
        out.push_back(iv);
        ++idx;
    }
    std::stable_sort(out.begin(), out.end(), [](const SpeakerInterval& a, const SpeakerInterval& b) {
        if (a.speaker != b.speaker) return a.speaker == Speaker::A;
        if (a.start_ms != b.start_ms) return a.start_ms < b.start_ms;
        return a.end_ms < b.end_ms;
    });
    return out;
}

// Merge overlapping or touching intervals per speaker (input sorted).
std::vector<SpeakerInterval> merge_per_speaker(std::vector<SpeakerInterval> ivs) {
    std::vector<SpeakerInterval> out;
    for (const SpeakerInterval& iv : ivs) {
        if (!out.empty() && out.back().speaker == iv.speaker &&
            iv.start_ms <= out.back().end_ms) {
            out.back().end_ms = std::max(out.back().end_ms, iv.end_ms);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

}  // namespace

TranscriptDocument parse_transcript(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("transcript: invalid JSON: ") + e.what());
    }
    const std::string top = "document";
    TranscriptDocument out;
    out.conversation_id = require_string(doc, "conversation_id", top);
    if (out.conversation_id.empty()) fail(top, "conversation_id must be non-empty");
    const double duration_s = require_number(doc, "duration_s", top);
    if (duration_s < 0) fail(top, "duration_s must be non-negative");
    out.duration_ms = seconds_to_ms(duration_s);

    const json& channels = require_field(doc, "channels", top);
    if (!channels.is_array() || channels.size() != 2)
        fail(top, "channels must be an array of exactly 2 entries");

    bool seen[2] = {false, false};
    for (std::size_t ci = 0; ci < channels.size(); ++ci) {
        const std::string cloc = "channels[" + std::to_string(ci) + "]";
        Channel ch;
        ch.speaker = require_speaker(channels[ci], cloc);
        if (seen[static_cast<int>(ch.speaker)])
            fail(cloc, "duplicate channel for speaker " + std::string(1, speaker_char(ch.speaker)));
        seen[static_cast<int>(ch.speaker)] = true;

        const json& words = require_field(channels[ci], "words", cloc);
        if (!words.is_array()) fail(cloc, "field 'words' must be an array");
        for (std::size_t wi = 0; wi < words.size(); ++wi) {
            const std::string wloc = cloc + ".words[" + std::to_string(wi) + "]";
            WordSpan w;
            w.text = require_string(words[wi], "text", wloc);
            if (w.text.empty()) fail(wloc, "word text must be non-empty");
            w.start_ms = seconds_to_ms(require_number(words[wi], "start", wloc));
            w.end_ms = seconds_to_ms(require_number(words[wi], "end", wloc));
            if (w.start_ms > w.end_ms) fail(wloc, "start > end");
            if (!ch.words.empty() && w.start_ms < ch.words.back().end_ms)
                fail(wloc, "words out of order or overlapping within the channel");
            ch.words.push_back(std::move(w));
        }
        out.channels.push_back(std::move(ch));
    }
    // Canonical channel order: A first.
    std::stable_sort(out.channels.begin(), out.channels.end(),
                     [](const Channel& a, const Channel& b) {
                         return static_cast<int>(a.speaker) < static_cast<int>(b.speaker);
                     });

    out.laughs = parse_interval_list(doc, "laughs", /*required=*/true, top);
    out.silences = merge_per_speaker(parse_interval_list(doc, "silences", /*required=*/false, top));
    return out;
}

std::string serialize_transcript(const TranscriptDocument& doc) {
    ordered_json j;
    j["conversation_id"] = doc.conversation_id;
    j["duration_s"] = ms_to_seconds(doc.duration_ms);
    j["channels"] = ordered_json::array();
    for (const Channel& ch : doc.channels) {
        ordered_json cj;
        cj["speaker"] = std::string(1, speaker_char(ch.speaker));
        cj["words"] = ordered_json::array();
        for (const WordSpan& w : ch.words) {
            cj["words"].push_back({{"text", w.text},
                                   {"start", ms_to_seconds(w.start_ms)},
                                   {"end", ms_to_seconds(w.end_ms)}});
        }
        j["channels"].push_back(std::move(cj));
    }
    auto intervals_to_json = [](const std::vector<SpeakerInterval>& ivs) {
        ordered_json arr = ordered_json::array();
        for (const SpeakerInterval& iv : ivs) {
            arr.push_back({{"speaker", std::string(1, speaker_char(iv.speaker))},
                           {"start", ms_to_seconds(iv.start_ms)},
                           {"end", ms_to_seconds(iv.end_ms)}});
        }
        return arr;
    };
    j["laughs"] = intervals_to_json(doc.laughs);
    if (!doc.silences.empty()) j["silences"] = intervals_to_json(doc.silences);
    return j.dump();
}

std::vector<WordSpan> trim_silences(const std::vector<WordSpan>& words,
                                    const std::vector<Interval>& silences) {
    std::vector<WordSpan> out;
    out.reserve(words.size());
    for (const WordSpan& w : words) {
        if (w.start_ms == w.end_ms) {
            // A point word survives only when it is not inside (or touching)
            // a silence interval.
            bool covered = false;
            for (const Interval& s : silences) {
                if (s.start_ms > w.start_ms) break;
                if (s.end_ms >= w.start_ms) { covered = true; break; }
            }
            if (!covered) out.push_back(w);
            continue;
        }
        // Walk silences intersecting the word and keep the longest uncovered run.
        Millis cur = w.start_ms;
        Millis best_lo = 0, best_hi = 0, best_len = 0;
        auto consider = [&](Millis lo, Millis hi) {
            if (hi - lo > best_len) {
                best_lo = lo;
                best_hi = hi;
                best_len = hi - lo;
            }
        };
        for (const Interval& s : silences) {
            if (s.start_ms >= w.end_ms) break;
            if (s.end_ms <= cur) continue;
            const Millis ss = std::max(s.start_ms, cur);
            consider(cur, ss);
            cur = std::min(s.end_ms, w.end_ms);
        }
        consider(cur, w.end_ms);
        if (best_len > 0) out.push_back({w.text, best_lo, best_hi});
    }
    return out;
}

}  // namespace duologue::ingest
