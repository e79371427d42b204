#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "duologue/core.hpp"
#include "duologue/ingest.hpp"

namespace duologue::synth {

// Knobs for one generated conversation. Every run with the same spec is
// byte-identical.
struct SynthSpec {
    std::string id = "synth_000";
    std::uint64_t seed = 1;
    int beats = 40;                         // scripted events to emit
    bool include_boundary_fixtures = true;  // exact 700 ms gaps/overlaps, end ties, shared starts
    double silence_rate = 0.35;             // chance a turn is followed by a recorded silence
};

// A generated transcript plus the conversation the pipeline is expected to
// produce from it. Truth responses carry the right spans, speakers, labels
// and overlap links; their token lists are the raw scripted words (laugh
// markers are exercised by their own tests), and emotion/sentiment stay at
// defaults.
struct SynthResult {
    ingest::TranscriptDocument doc;
    Conversation truth;
};

SynthResult generate_conversation(const SynthSpec& spec);

// Word-boundary classification rules used both when scripting ground truth
// and when answering prompts offline: six or more words always reads as a
// turn grab ("not backchannel"), otherwise "wow"/"oh" make it emotive and
// "yeah"/"i see"/"right" make it cognitive. Bracketed tokens like [Laugh]
// are not words.
std::string mock_backchannel_verdict(const std::string& text);

// Five-class affect the offline stand-in reports for a backchannel target.
std::pair<std::string, std::string> mock_affect5(const std::string& text);

// Offline chat completion: recognizes the two prompt shapes this program
// sends (backchannel classification, personality read) and answers each with
// short reasoning plus a trailing JSON verdict. Pure function of (prompt,
// seed); unknown prompts get a JSON-free reply.
std::string mock_chat(const std::string& prompt, std::uint64_t seed);

}  // namespace duologue::synth
