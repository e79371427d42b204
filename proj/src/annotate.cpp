#include "duologue/annotate.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace duologue::annotate {

namespace {

bool intersects(Millis a_start, Millis a_end, Millis b_start, Millis b_end) {
    return a_start < b_end && a_end > b_start;
}

std::vector<ingest::Interval> merge_intersecting(std::vector<ingest::Interval> laughs) {
    std::sort(laughs.begin(), laughs.end(), [](const auto& a, const auto& b) {
        if (a.start_ms != b.start_ms) return a.start_ms < b.start_ms;
        return a.end_ms < b.end_ms;
    });
    std::vector<ingest::Interval> out;
    for (const ingest::Interval& l : laughs) {
        // Strictly intersecting events merge; touching ones stay separate
        // (separate pairs still nest).
        if (!out.empty() && l.start_ms < out.back().end_ms) {
            out.back().end_ms = std::max(out.back().end_ms, l.end_ms);
        } else {
            out.push_back(l);
        }
    }
    return out;
}

Token point_marker(TokenKind kind, Millis at_ms) {
    Token t;
    t.kind = kind;
    t.start_ms = at_ms;
    t.end_ms = at_ms;
    return t;
}

}  // namespace

std::vector<Token> integrate_laughs(const std::vector<ingest::WordSpan>& words,
                                    const std::vector<ingest::Interval>& laughs) {
    const std::vector<ingest::Interval> merged = merge_intersecting(laughs);

    // For each laugh, the range of intersecting words (or none -> standalone).
    std::vector<int> starts_at(words.size(), 0);
    std::vector<int> ends_at(words.size(), 0);
    std::vector<ingest::Interval> standalone;
    for (const ingest::Interval& l : merged) {
        std::size_t first = words.size(), last = words.size();
        for (std::size_t wi = 0; wi < words.size(); ++wi) {
            if (intersects(words[wi].start_ms, words[wi].end_ms, l.start_ms, l.end_ms)) {
                if (first == words.size()) first = wi;
                last = wi;
            } else if (words[wi].start_ms >= l.end_ms) {
                break;
            }
        }
        if (first == words.size()) {
            standalone.push_back(l);
        } else {
            ++starts_at[first];
            ++ends_at[last];
        }
    }

    std::vector<Token> out;
    out.reserve(words.size() + 2 * merged.size());
    std::size_t next_standalone = 0;
    auto flush_standalone_before = [&](Millis t) {
        while (next_standalone < standalone.size() &&
               standalone[next_standalone].start_ms < t) {
            Token tok;
            tok.kind = TokenKind::Laughter;
            tok.start_ms = standalone[next_standalone].start_ms;
            tok.end_ms = standalone[next_standalone].end_ms;
            out.push_back(tok);
            ++next_standalone;
        }
    };

    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        flush_standalone_before(words[wi].start_ms);
        for (int k = 0; k < starts_at[wi]; ++k)
            out.push_back(point_marker(TokenKind::StartLaugh, words[wi].start_ms));
        out.push_back(make_word(words[wi].text, words[wi].start_ms, words[wi].end_ms));
        for (int k = 0; k < ends_at[wi]; ++k)
            out.push_back(point_marker(TokenKind::EndLaugh, words[wi].end_ms));
    }
    flush_standalone_before(std::numeric_limits<Millis>::max());
    return out;
}

std::vector<std::vector<Token>> build_responses(const std::vector<Token>& tokens,
                                                Millis gap_threshold_ms) {
    std::vector<std::vector<Token>> groups;
    for (const Token& t : tokens) {
        if (groups.empty() || t.start_ms - groups.back().back().end_ms >= gap_threshold_ms) {
            groups.emplace_back();
        }
        groups.back().push_back(t);
    }
    repair_split_laughs(groups);
    return groups;
}

void repair_split_laughs(std::vector<std::vector<Token>>& groups) {
    for (std::vector<Token>& g : groups) {
        int depth = 0;
        int unmatched_ends = 0;
        for (const Token& t : g) {
            if (t.kind == TokenKind::StartLaugh) {
                ++depth;
            } else if (t.kind == TokenKind::EndLaugh) {
                if (depth > 0)
                    --depth;
                else
                    ++unmatched_ends;
            }
        }
        if (unmatched_ends > 0) {
            const Millis head = g.front().start_ms;
            g.insert(g.begin(), static_cast<std::size_t>(unmatched_ends),
                     point_marker(TokenKind::StartLaugh, head));
        }
        if (depth > 0) {
            const Millis tail = g.back().end_ms;
            g.insert(g.end(), static_cast<std::size_t>(depth),
                     point_marker(TokenKind::EndLaugh, tail));
        }
    }
}

Conversation assemble_conversation(std::string conversation_id, Millis duration_ms,
                                   std::vector<std::vector<Token>> groups_a,
                                   std::vector<std::vector<Token>> groups_b) {
    Conversation conv;
    conv.id = std::move(conversation_id);
    conv.responses.reserve(groups_a.size() + groups_b.size());
    auto add_all = [&](std::vector<std::vector<Token>>& groups, Speaker sp) {
        for (std::vector<Token>& g : groups) {
            assert(!g.empty());
            Response r;
            r.speaker = sp;
            r.tokens = std::move(g);
            conv.responses.push_back(std::move(r));
        }
    };
    add_all(groups_a, Speaker::A);
    add_all(groups_b, Speaker::B);
    std::stable_sort(conv.responses.begin(), conv.responses.end(),
                     [](const Response& x, const Response& y) {
                         if (x.start_ms() != y.start_ms()) return x.start_ms() < y.start_ms();
                         if (x.speaker != y.speaker) return x.speaker == Speaker::A;
                         return x.end_ms() < y.end_ms();
                     });
    Millis max_end = 0;
    for (std::size_t i = 0; i < conv.responses.size(); ++i) {
        conv.responses[i].id = static_cast<int>(i);
        max_end = std::max(max_end, conv.responses[i].end_ms());
    }
    conv.duration_ms = std::max(duration_ms, max_end);
    return conv;
}

std::vector<OverlapAnnotation> detect_overlaps(const Conversation& conv,
                                               Millis min_overlap_ms) {
    std::vector<OverlapAnnotation> out;
    const auto& rs = conv.responses;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        for (std::size_t j = 0; j < rs.size(); ++j) {
            if (i == j || rs[i].speaker == rs[j].speaker) continue;
            // i is the overlappee: j must start strictly later.
            if (rs[j].start_ms() <= rs[i].start_ms()) continue;
            const Millis o_start = rs[j].start_ms();
            const Millis o_end = std::min(rs[i].end_ms(), rs[j].end_ms());
            if (o_end - o_start < min_overlap_ms) continue;
            OverlapAnnotation a;
            a.overlappee_id = rs[i].id;
            a.overlapper_id = rs[j].id;
            a.kind = rs[i].end_ms() <= rs[j].end_ms() ? OverlapKind::Partial
                                                      : OverlapKind::Fully;
            a.overlap_start_ms = o_start;
            a.overlap_end_ms = o_end;
            out.push_back(a);
        }
    }
    std::sort(out.begin(), out.end(), [](const OverlapAnnotation& a, const OverlapAnnotation& b) {
        if (a.overlap_start_ms != b.overlap_start_ms)
            return a.overlap_start_ms < b.overlap_start_ms;
        if (a.overlapper_id != b.overlapper_id) return a.overlapper_id < b.overlapper_id;
        return a.overlappee_id < b.overlappee_id;
    });
    return out;
}

void assign_candidate_labels(Conversation& conv,
                             const std::vector<OverlapAnnotation>& overlaps) {
    // Response ids are their index in the time-sorted list.
    auto find_response = [&](int id) -> const Response& {
        const auto idx = static_cast<std::size_t>(id);
        assert(idx < conv.responses.size() && conv.responses[idx].id == id);
        return conv.responses[idx];
    };
    // Annotation preference order per overlapper: earliest overlap start,
    // then Partial before Fully, then earliest partner start, then partner id.
    auto better = [&](const OverlapAnnotation& a, const OverlapAnnotation& b) {
        if (a.overlap_start_ms != b.overlap_start_ms)
            return a.overlap_start_ms < b.overlap_start_ms;
        if (a.kind != b.kind) return a.kind == OverlapKind::Partial;
        const Millis pa = find_response(a.overlappee_id).start_ms();
        const Millis pb = find_response(b.overlappee_id).start_ms();
        if (pa != pb) return pa < pb;
        return a.overlappee_id < b.overlappee_id;
    };

    std::vector<const OverlapAnnotation*> chosen(conv.responses.size(), nullptr);
    for (const OverlapAnnotation& a : overlaps) {
        const OverlapAnnotation*& slot = chosen[static_cast<std::size_t>(a.overlapper_id)];
        if (slot == nullptr || better(a, *slot)) slot = &a;
    }
    for (Response& r : conv.responses) {
        const OverlapAnnotation* a = chosen[static_cast<std::size_t>(r.id)];
        if (a == nullptr) continue;
        r.overlap = OverlapRef{a->kind, a->overlappee_id};
        r.label = a->kind == OverlapKind::Partial ? ResponseLabel::SuccessfulInterjection
                                                  : ResponseLabel::PendingBackchannel;
    }
}

Conversation annotate_geometry(const ingest::TranscriptDocument& doc,
                               const PipelineConfig& cfg) {
    auto tokens_for = [&](Speaker sp) {
        const std::vector<ingest::WordSpan> trimmed =
            ingest::trim_silences(doc.channel(sp).words, doc.silences_for(sp));
        return integrate_laughs(trimmed, doc.laughs_for(sp));
    };
    auto groups_a = build_responses(tokens_for(Speaker::A), cfg.gap_threshold_ms());
    auto groups_b = build_responses(tokens_for(Speaker::B), cfg.gap_threshold_ms());
    Conversation conv = assemble_conversation(doc.conversation_id, doc.duration_ms,
                                              std::move(groups_a), std::move(groups_b));
    assign_candidate_labels(conv, detect_overlaps(conv, cfg.min_overlap_ms()));
    return conv;
}

}  // namespace duologue::annotate
