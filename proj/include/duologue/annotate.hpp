#pragma once
// Response construction for one conversation: weaving laughter into the word
// stream, segmenting responses at 700 ms gaps, detecting cross-speaker
// overlaps, and assigning geometry-derived candidate labels.

#include <string>
#include <vector>

#include "duologue/core.hpp"
#include "duologue/ingest.hpp"

namespace duologue::annotate {

// Weaves one speaker's laugh events into their word stream.
//  - A laugh intersecting no word becomes a standalone Laughter token
//    spanning the laugh.
//  - Otherwise a StartLaugh point marker is inserted immediately before the
//    first intersecting word and an EndLaugh immediately after the last.
// Intersection means positive span overlap; touching endpoints do not count.
// Intersecting laugh events are merged first so markers always nest.
std::vector<Token> integrate_laughs(const std::vector<ingest::WordSpan>& words,
                                    const std::vector<ingest::Interval>& laughs);

// Splits a token stream into response token groups: consecutive tokens stay
// in one response while the inter-token gap is strictly below the threshold.
// A gap of exactly the threshold separates responses. Point markers
// participate like ordinary tokens. Split StartLaugh/EndLaugh pairs are
// repaired afterwards (see repair_split_laughs).
std::vector<std::vector<Token>> build_responses(const std::vector<Token>& tokens,
                                                Millis gap_threshold_ms);

// Restores the laugh-pairing invariant per response group: any EndLaugh
// without an opener gets a StartLaugh at the group head, any StartLaugh
// without a closer gets an EndLaugh at the group tail.
void repair_split_laughs(std::vector<std::vector<Token>>& groups);

// Interleaves both speakers' response groups by start time and assigns
// conversation-unique ids in that order.
Conversation assemble_conversation(std::string conversation_id, Millis duration_ms,
                                   std::vector<std::vector<Token>> groups_a,
                                   std::vector<std::vector<Token>> groups_b);

struct OverlapAnnotation {
    int overlappee_id = -1;  // earlier-starting response
    int overlapper_id = -1;  // later-starting response, the other speaker
    OverlapKind kind = OverlapKind::Partial;
    Millis overlap_start_ms = 0;
    Millis overlap_end_ms = 0;
};

// Every cross-speaker response pair whose span intersection is at least
// min_overlap_ms, with the later-starting response as overlapper. Pairs that
// start on the same millisecond produce no annotation (neither response
// starts strictly later). Partial = the overlappee stops first (ties on end
// count as Partial); Fully = the overlapper finishes inside the overlappee.
// Sorted by (overlap start, overlapper id, overlappee id).
std::vector<OverlapAnnotation> detect_overlaps(const Conversation& conv,
                                               Millis min_overlap_ms);

// Geometry-derived candidate labels: Partial overlappers become
// SuccessfulInterjection, Fully overlappers become PendingBackchannel,
// everything else stays Turn. A response overlapping several partners takes
// its label from the earliest-starting overlap; on exact start ties a
// Partial overlap wins over a Fully one. The winning annotation is recorded
// on the overlapper's overlap field.
void assign_candidate_labels(Conversation& conv,
                             const std::vector<OverlapAnnotation>& overlaps);

// The full geometric stage for one parsed document: trim silences, integrate
// laughs, segment, interleave, detect overlaps, assign candidate labels.
// Backchannel resolution and affect classification happen downstream.
Conversation annotate_geometry(const ingest::TranscriptDocument& doc,
                               const PipelineConfig& cfg);

}  // namespace duologue::annotate
