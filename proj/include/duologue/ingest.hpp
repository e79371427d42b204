#pragma once
// Transcript ingestion: the two-channel word-timestamped transcript format,
// validation, and silence trimming.

#include <string>
#include <vector>

#include "duologue/core.hpp"

namespace duologue::ingest {

struct WordSpan {
    std::string text;
    Millis start_ms = 0;
    Millis end_ms = 0;

    bool operator==(const WordSpan&) const = default;
};

struct Interval {
    Millis start_ms = 0;
    Millis end_ms = 0;

    bool operator==(const Interval&) const = default;
};

struct Channel {
    Speaker speaker = Speaker::A;
    std::vector<WordSpan> words;  // time-ordered, non-overlapping
};

// An interval attributed to one speaker (laughter or silence).
struct SpeakerInterval {
    Speaker speaker = Speaker::A;
    Millis start_ms = 0;
    Millis end_ms = 0;
};

struct TranscriptDocument {
    std::string conversation_id;
    Millis duration_ms = 0;
    std::vector<Channel> channels;          // exactly two: A then B
    std::vector<SpeakerInterval> laughs;    // sorted by (speaker, start)
    std::vector<SpeakerInterval> silences;  // per speaker: sorted, merged, disjoint

    const Channel& channel(Speaker s) const;
    std::vector<Interval> laughs_for(Speaker s) const;
    std::vector<Interval> silences_for(Speaker s) const;
};

// Parses and validates a transcript. Throws ParseError with a location on
// schema violations (missing fields, bad speaker tags, start > end,
// out-of-order or overlapping words within a channel).
TranscriptDocument parse_transcript(const std::string& bytes);

// Inverse of parse_transcript; parse(serialize(doc)) == doc.
std::string serialize_transcript(const TranscriptDocument& doc);

// Clips every word to its largest sub-interval not covered by silence and
// drops words that lie entirely inside silence. Silences must be sorted and
// disjoint (parse_transcript guarantees this). Idempotent; never reorders;
// never grows a span. Ties between equally large sub-intervals keep the
// earliest one.
std::vector<WordSpan> trim_silences(const std::vector<WordSpan>& words,
                                    const std::vector<Interval>& silences);

}  // namespace duologue::ingest
