#include "duologue/synth.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <numeric>

#include "duologue/rng.hpp"
#include "json.hpp"

namespace duologue::synth {

using ingest::SpeakerInterval;
using ingest::WordSpan;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kNarration = {
    "so",      "we",      "went",    "there",   "and",    "then",   "it",     "was",
    "really",  "kind",    "of",      "funny",   "because", "my",    "brother", "tried",
    "to",      "cook",    "dinner",  "for",     "everyone", "that", "night",  "the",
    "whole",   "thing",   "got",     "out",     "hand",   "honestly", "best", "part",
    "watching", "him",    "explain", "what",    "happened", "great", "terrible", "love",
    "story",   "after",   "always",  "never",   "maybe",  "pretty", "much",   "weekend",
};

// Guests in fully-contained overlaps draw from pools with a known verdict.
const std::vector<std::vector<std::string>> kEmotive = {
    {"wow"}, {"oh", "wow"}, {"oh"}, {"wow", "wow"}};
const std::vector<std::vector<std::string>> kCognitive = {
    {"yeah"}, {"i", "see"}, {"right"}, {"yeah", "yeah"}};
const std::vector<std::vector<std::string>> kGrab = {
    {"no", "wait", "that", "is", "not", "what", "happened"},
    {"hang", "on", "let", "me", "tell", "this", "part"},
    {"okay", "but", "you", "are", "missing", "the", "point"},
    {"hold", "on", "i", "want", "to", "say", "something"},
};
const std::vector<std::vector<std::string>> kJump = {
    {"wait", "wait", "i", "have", "to", "jump", "in"},
    {"let", "me", "stop", "you", "there", "for", "a", "second"},
    {"sorry", "but", "this", "reminds", "me", "of", "something"},
};

enum class Beat {
    Turn,
    Partial,
    FullyEmotive,
    FullyCognitive,
    FullyGrab,
    LaughContained,
    LaughInGap,
    LaughResponse,
    // boundary fixtures
    Gap700,
    Gap699,
    Overlap700,
    Overlap699,
    EndTie,
    SharedStart,
};

struct Draft {
    Speaker sp = Speaker::A;
    std::vector<Token> tokens;
    ResponseLabel label = ResponseLabel::Turn;
    std::optional<OverlapKind> kind;
    int partner = -1;  // emission index of the overlappee draft

    Millis start() const { return tokens.front().start_ms; }
    Millis end() const { return tokens.back().end_ms; }
};

struct Emitted {
    Millis start = 0;
    Millis end = 0;
    std::vector<Token> tokens;
};

int idx(Speaker s) { return s == Speaker::A ? 0 : 1; }

struct Gen {
    const SynthSpec& spec;
    SplitMix64 rng;
    std::array<std::vector<WordSpan>, 2> words;
    std::vector<SpeakerInterval> laughs;
    std::vector<SpeakerInterval> silences;
    std::vector<Draft> drafts;
    std::array<Millis, 2> cursor{0, 0};  // earliest allowed start of the next own token
    Millis global_end = 0;               // latest trimmed token end across both channels

    explicit Gen(const SynthSpec& s) : spec(s), rng(substream_seed(s.seed, s.id)) {}

    Millis lead_in() { return rng.range(80, 2200); }

    std::vector<std::string> narration(int n) {
        std::vector<std::string> out;
        for (int k = 0; k < n; ++k) out.push_back(kNarration[rng.below(kNarration.size())]);
        return out;
    }

    Emitted emit_words(Speaker s, Millis t0, const std::vector<std::string>& ws) {
        Millis t = t0;
        Emitted em;
        em.start = t0;
        for (std::size_t k = 0; k < ws.size(); ++k) {
            if (k > 0) t += rng.range(40, 400);
            Millis d = rng.range(150, 600);
            words[idx(s)].push_back({ws[k], t, t + d});
            em.tokens.push_back(make_word(ws[k], t, t + d));
            t += d;
        }
        em.end = t;
        return em;
    }

    // Keeps adding narration words until the span is long enough.
    Emitted emit_span(Speaker s, Millis t0, Millis min_span, int min_words) {
        Millis t = t0;
        Emitted em;
        em.start = t0;
        while (static_cast<int>(em.tokens.size()) < min_words || t - t0 < min_span) {
            if (!em.tokens.empty()) t += rng.range(40, 400);
            Millis d = rng.range(150, 600);
            const std::string& w = kNarration[rng.below(kNarration.size())];
            words[idx(s)].push_back({w, t, t + d});
            em.tokens.push_back(make_word(w, t, t + d));
            t += d;
        }
        em.end = t;
        return em;
    }

    // Spreads the given words across exactly [ts, te] (80 ms pauses).
    Emitted lay_words(Speaker s, Millis ts, Millis te, const std::vector<std::string>& ws) {
        const auto n = static_cast<Millis>(ws.size());
        const Millis avail = te - ts - 80 * (n - 1);
        assert(avail >= n);
        Emitted em;
        em.start = ts;
        Millis t = ts;
        for (Millis k = 0; k < n; ++k) {
            Millis d = avail / n + (k == n - 1 ? avail % n : 0);
            const std::string& w = ws[static_cast<std::size_t>(k)];
            words[idx(s)].push_back({w, t, t + d});
            em.tokens.push_back(make_word(w, t, t + d));
            t += d + (k < n - 1 ? 80 : 0);
        }
        em.end = te;
        return em;
    }

    // Trims a word list so it fits within [ts, te] spacing; picks how many
    // words of `pool_entry` fit the span.
    std::vector<std::string> fit_words(const std::vector<std::string>& pool_entry, Millis span) {
        auto max_fit = static_cast<std::size_t>(std::max<Millis>(1, (span + 80) / 230));
        std::vector<std::string> out(pool_entry.begin(),
                                     pool_entry.begin() +
                                         std::min(pool_entry.size(), max_fit));
        return out;
    }

    int push_draft(Draft d) {
        drafts.push_back(std::move(d));
        return static_cast<int>(drafts.size()) - 1;
    }

    void bump(Speaker s, Millis own_end) {
        cursor[idx(s)] = own_end + 700;
        global_end = std::max(global_end, own_end);
    }

    // A recorded silence right after the words of speaker s. The raw word is
    // stretched into the silence (trimming restores it) and sometimes a ghost
    // word is recorded wholly inside the silence (trimming drops it).
    void attach_silence(Speaker s) {
        WordSpan& w = words[idx(s)].back();
        const Millis we = w.end_ms;
        const Millis len = rng.range(500, 1600);
        silences.push_back({s, we, we + len});
        w.end_ms = we + rng.range(1, len / 2);
        if (rng.chance(0.5)) {
            const std::string& ghost = kNarration[rng.below(kNarration.size())];
            words[idx(s)].push_back({ghost, we + len - 140, we + len - 20});
        }
        cursor[idx(s)] = std::max(cursor[idx(s)], we + len + 60);
    }

    void turn_beat(Speaker s) {
        Millis t0 = std::max(global_end + lead_in(), cursor[idx(s)]);
        auto em = emit_words(s, t0, narration(static_cast<int>(rng.range(1, 12))));
        push_draft({s, em.tokens, ResponseLabel::Turn, std::nullopt, -1});
        bump(s, em.end);
        if (rng.chance(spec.silence_rate)) attach_silence(s);
    }

    void gap_fixture_beat(Speaker s, Millis gap) {
        Millis t0 = std::max(global_end + lead_in(), cursor[idx(s)]);
        auto em1 = emit_words(s, t0, narration(static_cast<int>(rng.range(2, 4))));
        auto em2 = emit_words(s, em1.end + gap, narration(static_cast<int>(rng.range(2, 4))));
        if (gap >= 700) {
            push_draft({s, em1.tokens, ResponseLabel::Turn, std::nullopt, -1});
            push_draft({s, em2.tokens, ResponseLabel::Turn, std::nullopt, -1});
        } else {
            std::vector<Token> merged = em1.tokens;
            merged.insert(merged.end(), em2.tokens.begin(), em2.tokens.end());
            push_draft({s, merged, ResponseLabel::Turn, std::nullopt, -1});
        }
        bump(s, em2.end);
    }

    void laugh_contained_beat(Speaker s) {
        Millis t0 = std::max(global_end + lead_in(), cursor[idx(s)]);
        auto em = emit_words(s, t0, narration(static_cast<int>(rng.range(4, 10))));
        const auto n = em.tokens.size();
        auto i = rng.below(n);
        auto j = i + rng.below(n - i);
        const Token& wi = em.tokens[i];
        const Token& wj = em.tokens[j];
        Millis a = rng.range(wi.start_ms, wi.end_ms - 1);
        Millis b = rng.range(std::max(wj.start_ms + 1, a + 1), wj.end_ms);
        laughs.push_back({s, a, b});
        push_draft({s, em.tokens, ResponseLabel::Turn, std::nullopt, -1});
        bump(s, em.end);
    }

    void laugh_in_gap_beat(Speaker s) {
        Millis t0 = std::max(global_end + lead_in(), cursor[idx(s)]);
        auto em1 = emit_words(s, t0, narration(static_cast<int>(rng.range(1, 4))));
        Millis gap = rng.range(400, 640);
        auto em2 = emit_words(s, em1.end + gap, narration(static_cast<int>(rng.range(1, 4))));
        Millis a = em1.end + rng.range(40, 120);
        Millis b = em2.start - rng.range(40, 120);
        laughs.push_back({s, a, b});
        std::vector<Token> merged = em1.tokens;
        merged.insert(merged.end(), em2.tokens.begin(), em2.tokens.end());
        push_draft({s, merged, ResponseLabel::Turn, std::nullopt, -1});
        bump(s, em2.end);
    }

    void laugh_response_beat(Speaker s) {
        Millis a = std::max(global_end + rng.range(760, 2000), cursor[idx(s)] + 60);
        Millis b = a + rng.range(350, 900);
        laughs.push_back({s, a, b});
        push_draft({s, {Token{TokenKind::Laughter, "", a, b}}, ResponseLabel::Turn,
                    std::nullopt, -1});
        bump(s, b);
    }

    // Host talks for a while; guest lands fully inside and is later resolved
    // by the backchannel classifier. `verdict` 0=emotive 1=cognitive 2=grab.
    void fully_beat(Speaker host_sp, int verdict) {
        Speaker g = other(host_sp);
        Millis t0 = std::max({global_end + lead_in(), cursor[idx(host_sp)], cursor[idx(g)]});
        auto host = emit_span(host_sp, t0, 4200, 8);
        const Millis t1 = host.end;

        bool exact = verdict != 2 && rng.chance(0.15);
        std::vector<std::string> text;
        Millis len = 0;
        if (exact) {
            text = verdict == 0 ? kEmotive[0] : kCognitive[0];
            len = 700;  // the narrowest qualifying overlap
        } else {
            const auto& pool = verdict == 0 ? kEmotive : verdict == 1 ? kCognitive : kGrab;
            text = pool[rng.below(pool.size())];
            const auto n = static_cast<Millis>(text.size());
            const Millis floor = std::max<Millis>(750, n * 150 + (n - 1) * 80);
            len = rng.range(floor, std::max<Millis>(2200, floor + 300));
        }
        Millis ts = rng.range(t0 + 200, t1 - len - 100);
        auto guest = lay_words(g, ts, ts + len, text);

        int host_idx = push_draft({host_sp, host.tokens, ResponseLabel::Turn, std::nullopt, -1});
        ResponseLabel lbl = verdict == 0   ? ResponseLabel::EmotiveBackchannel
                            : verdict == 1 ? ResponseLabel::CognitiveBackchannel
                                           : ResponseLabel::UnsuccessfulInterjection;
        push_draft({g, guest.tokens, lbl, OverlapKind::Fully, host_idx});
        cursor[idx(host_sp)] = t1 + 700;
        cursor[idx(g)] = guest.end + 700;
        global_end = std::max(global_end, t1);
    }

    // Host talks; guest starts later and keeps going (or exercises one of the
    // boundary variants around the overlap rules).
    void partial_beat(Speaker host_sp, Beat variant) {
        Speaker g = other(host_sp);
        Millis t0 = std::max({global_end + lead_in(), cursor[idx(host_sp)], cursor[idx(g)]});
        auto host = emit_span(host_sp, t0, 4200, 8);
        const Millis t1 = host.end;

        Millis ts = 0, te = 0;
        bool annotated = false;
        switch (variant) {
            case Beat::Partial:
                ts = rng.range(t0 + 200, t1 - 900);
                te = t1 + rng.range(150, 900);
                annotated = true;
                break;
            case Beat::Overlap700:  // exactly the minimum qualifying overlap
                ts = t1 - 700;
                te = t1 + rng.range(150, 900);
                annotated = true;
                break;
            case Beat::Overlap699:  // one millisecond short of qualifying
                ts = t1 - 699;
                te = t1 + rng.range(150, 900);
                annotated = false;
                break;
            case Beat::EndTie:  // both stop at the same instant
                ts = rng.range(t0 + 200, t1 - 900);
                te = t1;
                annotated = true;
                break;
            case Beat::SharedStart:  // same onset never reads as an overlap
                ts = t0;
                te = rng.range(t0 + 900, t1 - 100);
                annotated = false;
                break;
            default:
                assert(false);
        }
        std::vector<std::string> text =
            variant == Beat::SharedStart
                ? narration(static_cast<int>(rng.range(2, 5)))
                : fit_words(kJump[rng.below(kJump.size())], te - ts);
        auto guest = lay_words(g, ts, te, text);

        int host_idx = push_draft({host_sp, host.tokens, ResponseLabel::Turn, std::nullopt, -1});
        if (annotated) {
            push_draft({g, guest.tokens, ResponseLabel::SuccessfulInterjection,
                        OverlapKind::Partial, host_idx});
        } else {
            push_draft({g, guest.tokens, ResponseLabel::Turn, std::nullopt, -1});
        }
        cursor[idx(host_sp)] = t1 + 700;
        cursor[idx(g)] = guest.end + 700;
        global_end = std::max(global_end, std::max(t1, guest.end));
    }

    void dispatch(Beat b, Speaker s) {
        switch (b) {
            case Beat::Turn: turn_beat(s); break;
            case Beat::Partial:
            case Beat::Overlap700:
            case Beat::Overlap699:
            case Beat::EndTie:
            case Beat::SharedStart: partial_beat(s, b); break;
            case Beat::FullyEmotive: fully_beat(s, 0); break;
            case Beat::FullyCognitive: fully_beat(s, 1); break;
            case Beat::FullyGrab: fully_beat(s, 2); break;
            case Beat::LaughContained: laugh_contained_beat(s); break;
            case Beat::LaughInGap: laugh_in_gap_beat(s); break;
            case Beat::LaughResponse: laugh_response_beat(s); break;
            case Beat::Gap700: gap_fixture_beat(s, 700); break;
            case Beat::Gap699: gap_fixture_beat(s, 699); break;
        }
    }

    std::vector<Beat> plan() {
        std::vector<Beat> out;
        if (spec.include_boundary_fixtures) {
            out = {Beat::Gap700, Beat::Gap699,   Beat::Overlap700,
                   Beat::Overlap699, Beat::EndTie, Beat::SharedStart};
            if (static_cast<int>(out.size()) > spec.beats)
                out.resize(static_cast<std::size_t>(spec.beats));
        }
        while (static_cast<int>(out.size()) < spec.beats) {
            auto roll = rng.below(100);
            Beat b = Beat::Turn;
            if (roll < 34) b = Beat::Turn;
            else if (roll < 46) b = Beat::Partial;
            else if (roll < 58) b = Beat::FullyEmotive;
            else if (roll < 70) b = Beat::FullyCognitive;
            else if (roll < 78) b = Beat::FullyGrab;
            else if (roll < 86) b = Beat::LaughContained;
            else if (roll < 92) b = Beat::LaughInGap;
            else b = Beat::LaughResponse;
            out.push_back(b);
        }
        fisher_yates(out, rng);
        return out;
    }
};

}  // namespace

SynthResult generate_conversation(const SynthSpec& spec) {
    Gen g(spec);
    Speaker s = Speaker::A;
    for (Beat b : g.plan()) {
        g.dispatch(b, s);
        s = other(s);
    }

    SynthResult out;
    out.doc.conversation_id = spec.id;
    Millis raw_end = 0;
    for (int c = 0; c < 2; ++c)
        for (const WordSpan& w : g.words[c]) raw_end = std::max(raw_end, w.end_ms);
    for (const SpeakerInterval& l : g.laughs) raw_end = std::max(raw_end, l.end_ms);
    for (const SpeakerInterval& si : g.silences) raw_end = std::max(raw_end, si.end_ms);
    out.doc.duration_ms = raw_end + g.rng.range(400, 1500);
    out.doc.channels = {{Speaker::A, std::move(g.words[0])},
                        {Speaker::B, std::move(g.words[1])}};
    auto by_speaker_time = [](const SpeakerInterval& a, const SpeakerInterval& b) {
        return std::tie(a.speaker, a.start_ms, a.end_ms) <
               std::tie(b.speaker, b.start_ms, b.end_ms);
    };
    std::sort(g.laughs.begin(), g.laughs.end(), by_speaker_time);
    std::sort(g.silences.begin(), g.silences.end(), by_speaker_time);
    out.doc.laughs = std::move(g.laughs);
    out.doc.silences = std::move(g.silences);

    // Order the truth the way the assembler orders responses.
    std::vector<int> order(g.drafts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        const Draft& a = g.drafts[static_cast<std::size_t>(x)];
        const Draft& b = g.drafts[static_cast<std::size_t>(y)];
        if (a.start() != b.start()) return a.start() < b.start();
        if (a.sp != b.sp) return a.sp == Speaker::A;
        return a.end() < b.end();
    });
    std::vector<int> pos(order.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        pos[static_cast<std::size_t>(order[k])] = static_cast<int>(k);

    out.truth.id = spec.id;
    out.truth.duration_ms = out.doc.duration_ms;
    out.truth.source = "synth seed " + std::to_string(spec.seed);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Draft& d = g.drafts[static_cast<std::size_t>(order[k])];
        Response r;
        r.id = static_cast<int>(k);
        r.speaker = d.sp;
        r.tokens = d.tokens;
        r.label = d.label;
        if (d.kind) r.overlap = OverlapRef{*d.kind, pos[static_cast<std::size_t>(d.partner)]};
        out.truth.responses.push_back(std::move(r));
    }
    return out;
}

namespace {

std::vector<std::string> spoken_words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && cur.front() != '[') out.push_back(cur);
        cur.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) flush();
        else cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    flush();
    return out;
}

std::optional<std::string> line_after(const std::string& text, const std::string& marker) {
    auto at = text.find(marker);
    if (at == std::string::npos) return std::nullopt;
    auto from = at + marker.size();
    auto end = text.find('\n', from);
    return text.substr(from, end == std::string::npos ? std::string::npos : end - from);
}

}  // namespace

std::string mock_backchannel_verdict(const std::string& text) {
    auto ws = spoken_words(text);
    if (ws.size() >= 6) return "not backchannel";
    for (const auto& w : ws)
        if (w == "wow" || w == "oh") return "emotive";
    for (std::size_t k = 0; k < ws.size(); ++k) {
        if (ws[k] == "yeah" || ws[k] == "right") return "cognitive";
        if (ws[k] == "i" && k + 1 < ws.size() && ws[k + 1] == "see") return "cognitive";
    }
    return "not backchannel";
}

std::pair<std::string, std::string> mock_affect5(const std::string& text) {
    auto ws = spoken_words(text);
    bool wow = false, oh = false, cog = false;
    for (std::size_t k = 0; k < ws.size(); ++k) {
        wow |= ws[k] == "wow";
        oh |= ws[k] == "oh";
        cog |= ws[k] == "yeah" || ws[k] == "right" ||
               (ws[k] == "i" && k + 1 < ws.size() && ws[k + 1] == "see");
    }
    if (wow) return {"surprised", "very positive"};
    if (oh) return {"surprised", "neutral"};
    if (cog) return {"neutral", "positive"};
    return {"neutral", "neutral"};
}

namespace {

struct Ladder {
    const char* prefix;
    std::array<const char*, 5> names;  // most aligned first
};

// One behavior line drives each trait; the rungs match the wording the
// attribute report uses.
const std::array<Ladder, kTraitCount> kLadders = {{
    {"Talking time per turn: ", {"Very Long", "Long", "Normal", "Short", "Very Short"}},
    {"Frequency of Cognitive Backchannel: ",
     {"Very Frequent", "Frequent", "Normal", "Infrequent", "Very Infrequent"}},
    {"Number of turns: ", {"Very Many", "Many", "Normal", "Few", "Very Few"}},
    {"Frequency of Emotive Backchannel: ",
     {"Very Frequent", "Frequent", "Normal", "Infrequent", "Very Infrequent"}},
    {"Frequency of interjections: ",
     {"Very Frequent", "Frequent", "Normal", "Infrequent", "Very Infrequent"}},
}};

const std::array<TraitLabel, 5> kLabelBySlot = {
    TraitLabel::HighlyAligned, TraitLabel::Aligned, TraitLabel::Neutral,
    TraitLabel::Opposed, TraitLabel::HighlyOpposed};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::string mock_chat(const std::string& prompt, std::uint64_t seed) {
    if (auto target = line_after(prompt, "Target interjection text: ")) {
        std::string verdict = mock_backchannel_verdict(*target);
        auto [emotion, sentiment] = mock_affect5(*target);
        ordered_json out;
        out["interjection text"] = *target;
        out["interjection type"] = verdict;
        out["emotion"] = emotion;
        out["sentiment"] = sentiment;
        return "1. The neighbors discuss an ongoing story.\n"
               "2. The target text is \"" + *target + "\".\n"
               "3-6. Applying the stated definitions gives the result below.\n" +
               out.dump();
    }
    if (prompt.find("Big Five Inventory") != std::string::npos) {
        ordered_json out;
        for (int t = 0; t < kTraitCount; ++t) {
            const Ladder& ladder = kLadders[static_cast<std::size_t>(t)];
            TraitLabel label = TraitLabel::Neutral;
            if (auto value = line_after(prompt, ladder.prefix)) {
                for (std::size_t slot = 0; slot < ladder.names.size(); ++slot) {
                    if (*value == ladder.names[slot]) {
                        label = kLabelBySlot[slot];
                        break;
                    }
                }
            } else {
                auto h = substream_seed(seed ^ fnv1a(prompt), trait_name(kTraits[t]));
                label = kLabelBySlot[h % 5];
            }
            out[trait_name(kTraits[t])] = trait_label_name(label);
        }
        return "1-7. Summarized the behavior report.\n"
               "8. Final classification follows.\n" +
               out.dump();
    }
    return "There is no recognizable task in this prompt.";
}

}  // namespace duologue::synth
