// Acceptance checks for the whole pipeline. Each criterion prints exactly
// one PASS/FAIL line; the process exits nonzero if any criterion failed.
// Tolerances and budgets are pinned as constants below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "duologue/annotate.hpp"
#include "duologue/attributes.hpp"
#include "duologue/classify.hpp"
#include "duologue/core.hpp"
#include "duologue/evaluate.hpp"
#include "duologue/gateway.hpp"
#include "duologue/io.hpp"
#include "duologue/personality.hpp"
#include "duologue/rng.hpp"
#include "duologue/synth.hpp"
#include "httplib.h"
#include "json.hpp"
#include "oracle_labels.hpp"

using namespace duologue;
namespace fs = std::filesystem;
using steady = std::chrono::steady_clock;

namespace {

constexpr double kHandFixtureTol = 1e-9;     // recorded three-speaker arithmetic
constexpr double kPearsonOracleTol = 1e-12;  // two-pass vs. raw-moment formula
constexpr double kOracleBudgetSeconds = 30.0;
constexpr double kPipelineBudgetSeconds = 60.0;

struct Criterion {
    std::string name;
    bool pass = true;
    std::string note;

    explicit Criterion(std::string n) : name(std::move(n)) {}

    void fail(const std::string& why) {
        if (pass) {
            pass = false;
            note = why;
        }
    }
    void expect(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
};

double seconds_since(steady::time_point t0) {
    return std::chrono::duration<double>(steady::now() - t0).count();
}

std::string fmt_secs(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f s", s);
    return buf;
}

// ── 1: segmentation and overlap vs. ground truth and a brute-force oracle ──

Criterion check_segmentation_oracle() {
    Criterion c{"segmentation/overlap labels equal ground truth and brute-force oracle "
                "on 1000 seeded conversations"};
    auto t0 = steady::now();
    PipelineConfig cfg;
    gateway::MockChatClient chat(
        [](const std::string& p, std::uint64_t s) { return synth::mock_chat(p, s); });

    long long responses = 0;
    for (int k = 0; k < 1000 && c.pass; ++k) {
        synth::SynthSpec spec;
        spec.id = "acc_seg_" + std::to_string(k);
        spec.seed = substream_seed(4242, "seg" + std::to_string(k));
        spec.beats = 30;
        spec.include_boundary_fixtures = true;  // exact-threshold gaps/overlaps + end ties
        auto r = synth::generate_conversation(spec);

        Conversation conv = annotate::annotate_geometry(r.doc, cfg);
        auto resolved = classify::resolve_backchannels(conv, chat, cfg);
        std::string at = "conversation " + std::to_string(k);
        c.expect(!resolved.fatal.has_value(), at + ": backchannel resolution failed");
        if (!c.pass) break;

        auto orc = oracle::oracle_labels(r.doc, cfg.gap_threshold_ms(), cfg.min_overlap_ms(),
                                         synth::mock_backchannel_verdict);
        c.expect(conv.responses.size() == r.truth.responses.size() &&
                     conv.responses.size() == orc.size(),
                 at + ": response count mismatch");
        if (!c.pass) break;

        for (std::size_t i = 0; i < conv.responses.size() && c.pass; ++i) {
            const Response& got = conv.responses[i];
            const Response& want = r.truth.responses[i];
            const oracle::OracleResponse& ref = orc[i];
            std::string where = at + ", response " + std::to_string(i);
            c.expect(got.speaker == want.speaker && got.speaker == ref.speaker,
                     where + ": speaker mismatch");
            c.expect(got.start_ms() == want.start_ms() && got.start_ms() == ref.start,
                     where + ": start mismatch");
            c.expect(got.end_ms() == want.end_ms() && got.end_ms() == ref.end,
                     where + ": end mismatch");
            c.expect(got.label == want.label && got.label == ref.label,
                     where + ": label " + label_name(got.label) + " vs truth " +
                         label_name(want.label) + " vs oracle " + label_name(ref.label));
            c.expect(got.overlap.has_value() == want.overlap.has_value() &&
                         got.overlap.has_value() == ref.kind.has_value(),
                     where + ": overlap presence mismatch");
            if (got.overlap && want.overlap && ref.kind) {
                c.expect(got.overlap->kind == want.overlap->kind &&
                             got.overlap->kind == *ref.kind,
                         where + ": overlap kind mismatch");
                c.expect(got.overlap->partner_response_id ==
                                 want.overlap->partner_response_id &&
                             got.overlap->partner_response_id == ref.partner,
                         where + ": overlap partner mismatch");
            }
            ++responses;
        }
    }
    double secs = seconds_since(t0);
    c.expect(secs < kOracleBudgetSeconds, "took " + fmt_secs(secs) + ", budget " +
                                              fmt_secs(kOracleBudgetSeconds));
    if (c.pass)
        c.note = std::to_string(responses) + " responses agreed, " + fmt_secs(secs);
    return c;
}

// ── 2: laughter weaving cases and the pairing invariant ────────────────────

Criterion check_laugh_integration() {
    Criterion c{"laughter weaving: marker pair around intersecting words, standalone "
                "token otherwise, pairing invariant on 1000 fuzzed inputs"};

    std::vector<ingest::WordSpan> words = {
        {"a", 0, 280}, {"b", 340, 620}, {"c", 680, 960}};

    // A laugh overlapping the second and third words gets wrapped in markers.
    auto tokens = annotate::integrate_laughs(words, {{300, 700}});
    c.expect(render_text(tokens) == "a [StartLaugh] b c [EndLaugh]",
             "intersecting case rendered \"" + render_text(tokens) + "\"");

    // A laugh inside a gap, touching neither word, becomes its own token.
    tokens = annotate::integrate_laughs(words, {{290, 330}});
    c.expect(render_text(tokens) == "a [Laughter] b c",
             "empty-intersection case rendered \"" + render_text(tokens) + "\"");

    // Touching endpoints do not count as intersection.
    tokens = annotate::integrate_laughs(words, {{280, 340}});
    c.expect(render_text(tokens) == "a [Laughter] b c",
             "touching case rendered \"" + render_text(tokens) + "\"");

    SplitMix64 rng(99001);
    for (int trial = 0; trial < 1000 && c.pass; ++trial) {
        std::vector<ingest::WordSpan> ws;
        Millis t = rng.range(0, 500);
        for (int i = 0, n = static_cast<int>(rng.below(13)); i < n; ++i) {
            Millis len = rng.range(50, 400);
            ws.push_back({"w" + std::to_string(i), t, t + len});
            t += len + rng.range(0, 900);
        }
        std::vector<ingest::Interval> laughs;
        Millis lt = rng.range(0, 400);
        for (int i = 0, m = static_cast<int>(rng.below(5)); i < m; ++i) {
            Millis len = rng.range(20, 600);
            laughs.push_back({lt, lt + len});
            lt += rng.range(10, 1200);
        }

        auto toks = annotate::integrate_laughs(ws, laughs);
        long starts = 0, ends = 0;
        for (const auto& tok : toks) {
            if (tok.kind == TokenKind::StartLaugh) ++starts;
            if (tok.kind == TokenKind::EndLaugh) ++ends;
        }
        c.expect(starts == ends, "trial " + std::to_string(trial) +
                                     ": unequal marker counts after weaving");

        auto groups = annotate::build_responses(toks, 700);
        annotate::repair_split_laughs(groups);
        for (const auto& g : groups) {
            long depth = 0;
            for (const auto& tok : g) {
                if (tok.kind == TokenKind::StartLaugh) ++depth;
                if (tok.kind == TokenKind::EndLaugh) --depth;
                c.expect(depth >= 0, "trial " + std::to_string(trial) +
                                         ": closing marker before opener in a response");
            }
            c.expect(depth == 0, "trial " + std::to_string(trial) +
                                     ": unbalanced markers in a response");
        }
    }
    if (c.pass) c.note = "3 fixed cases + 1000 fuzzed inputs";
    return c;
}

// ── 3: relative bucketing vs. an independent re-implementation ─────────────

attributes::RelativeBucket reference_bucket(std::vector<double> cohort, double value) {
    double sum = 0;
    for (double v : cohort) sum += v;
    double mean = sum / static_cast<double>(cohort.size());
    std::sort(cohort.begin(), cohort.end());
    auto interp = [&](double p) {
        double pos = p * static_cast<double>(cohort.size() - 1);
        std::size_t below = static_cast<std::size_t>(std::floor(pos));
        std::size_t above = static_cast<std::size_t>(std::ceil(pos));
        if (below == above) return cohort[below];
        return cohort[below] * (static_cast<double>(above) - pos) +
               cohort[above] * (pos - static_cast<double>(below));
    };
    double iqr = interp(0.75) - interp(0.25);
    double d = value - mean;
    double mag = d < 0 ? -d : d;
    if (mag <= 0.8 * iqr) return attributes::RelativeBucket::Normal;
    if (mag <= 1.2 * iqr)
        return d > 0 ? attributes::RelativeBucket::High : attributes::RelativeBucket::Low;
    return d > 0 ? attributes::RelativeBucket::VeryHigh : attributes::RelativeBucket::VeryLow;
}

Criterion check_bucketizer() {
    Criterion c{"relative buckets equal an independent re-implementation on 500 cohorts "
                "and are translation/scale invariant on 200 checks"};
    SplitMix64 rng(35007);

    for (int trial = 0; trial < 500 && c.pass; ++trial) {
        std::size_t n = 4 + rng.below(29);
        std::vector<double> cohort(n);
        // Mix continuous values with small integers so ties show up often.
        for (auto& v : cohort)
            v = rng.chance(0.3) ? static_cast<double>(rng.range(0, 5))
                                : -50.0 + 100.0 * rng.unit();
        for (std::size_t i = 0; i < n; ++i) {
            auto got = attributes::bucketize(cohort, i);
            auto want = reference_bucket(cohort, cohort[i]);
            c.expect(got == want, "cohort " + std::to_string(trial) + ", member " +
                                      std::to_string(i) + ": bucket disagrees with reference");
        }
        double probe = -60.0 + 120.0 * rng.unit();
        c.expect(attributes::bucket_for_value(cohort, probe) ==
                     reference_bucket(cohort, probe),
                 "cohort " + std::to_string(trial) + ": probe bucket disagrees");
    }

    for (int trial = 0; trial < 200 && c.pass; ++trial) {
        std::size_t n = 4 + rng.below(12);
        std::vector<double> cohort(n);
        for (auto& v : cohort) v = -20.0 + 40.0 * rng.unit();
        double a = 0.1 + 4.9 * rng.unit();
        double b = -100.0 + 200.0 * rng.unit();
        std::size_t i = rng.below(n);
        std::vector<double> moved(n);
        for (std::size_t k = 0; k < n; ++k) moved[k] = a * cohort[k] + b;
        c.expect(attributes::bucketize(moved, i) == attributes::bucketize(cohort, i),
                 "check " + std::to_string(trial) + ": bucket changed under y = " +
                     format_double(a) + "x + " + format_double(b));
    }
    if (c.pass) c.note = "500 cohorts exact, 200 affine checks";
    return c;
}

// ── 4: alignment label scores and five-query averaging ─────────────────────

Criterion check_score_mapping() {
    Criterion c{"alignment labels map to 100/50/0/-50/-100 and five query verdicts "
                "[100,50,50,0,100] average to 60"};
    c.expect(label_to_score(TraitLabel::HighlyAligned) == 100.0, "highly aligned != 100");
    c.expect(label_to_score(TraitLabel::Aligned) == 50.0, "aligned != 50");
    c.expect(label_to_score(TraitLabel::Neutral) == 0.0, "neutral != 0");
    c.expect(label_to_score(TraitLabel::Opposed) == -50.0, "opposed != -50");
    c.expect(label_to_score(TraitLabel::HighlyOpposed) == -100.0, "highly opposed != -100");

    std::vector<TraitLabel> verdicts = {TraitLabel::HighlyAligned, TraitLabel::Aligned,
                                        TraitLabel::Aligned, TraitLabel::Neutral,
                                        TraitLabel::HighlyAligned};
    std::vector<TraitScores> queries;
    for (TraitLabel v : verdicts) {
        TraitScores s{};
        s.fill(label_to_score(v));
        queries.push_back(s);
    }
    TraitScores avg = average_scores(queries);
    for (double v : avg) c.expect(v == 60.0, "average is " + format_double(v) + ", want 60");
    if (c.pass) c.note = "exact";
    return c;
}

// ── 5: metric fixtures ──────────────────────────────────────────────────────

personality::TraitPrediction pred_row(const std::string& conv, double extraversion) {
    personality::TraitPrediction p;
    p.conversation_id = conv;
    p.speaker = Speaker::A;
    p.scores[2] = extraversion;
    return p;
}

attributes::SpeakerAttributes attr_row(const std::string& conv, int turns, double laughs) {
    attributes::SpeakerAttributes a;
    a.conversation_id = conv;
    a.speaker = Speaker::A;
    a.num_turns = turns;
    a.laughs_per_min_speech = laughs;
    return a;
}

double pearson_raw_moments(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) /
           (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

Criterion check_metric_fixtures() {
    Criterion c{"metric fixtures: single-cell trend = +/-1 exactly, recorded hand "
                "arithmetic to 1e-9, pearson oracle to 1e-12, cosine +/-1 exactly"};

    const std::string head = "attribute,openness,conscientiousness,extraversion,"
                             "agreeableness,neuroticism\n";

    // One nonzero cell: the trend score collapses to sign(cell) * r, and the
    // {-1,0,1} vectors keep that correlation exact.
    {
        std::vector<personality::TraitPrediction> preds = {
            pred_row("s0", -1), pred_row("s1", 0), pred_row("s2", 1)};
        std::vector<attributes::SpeakerAttributes> attrs = {
            attr_row("s0", -1, 0), attr_row("s1", 0, 0), attr_row("s2", 1, 0)};
        auto plus = evaluate::TrendTable::from_csv(head + "num_turns,0,0,30,0,0\n", false);
        auto minus = evaluate::TrendTable::from_csv(head + "num_turns,0,0,-30,0,0\n", false);
        double up = evaluate::trend_score(preds, attrs, plus).per_trait[2];
        double down = evaluate::trend_score(preds, attrs, minus).per_trait[2];
        c.expect(up == 1.0, "positive single-cell trend is " + format_double(up));
        c.expect(down == -1.0, "negative single-cell trend is " + format_double(down));
    }

    // Three-speaker fixture against arithmetic recorded from a hand run.
    {
        std::vector<personality::TraitPrediction> preds = {
            pred_row("h0", 10), pred_row("h1", 50), pred_row("h2", 30)};
        std::vector<attributes::SpeakerAttributes> attrs = {
            attr_row("h0", 5, 2), attr_row("h1", 9, 1), attr_row("h2", 6, 4)};
        auto table = evaluate::TrendTable::from_csv(
            head + "num_turns,0,0,60,0,0\nlaughs_per_min_speech,0,0,-20,0,0\n", false);
        auto ts = evaluate::trend_score(preds, attrs, table);
        const double want = 0.8024084009613892;  // 0.75*r(turns) - 0.25*r(laughs)
        c.expect(std::fabs(ts.per_trait[2] - want) <= kHandFixtureTol,
                 "hand fixture trend is " + format_double(ts.per_trait[2]));
        c.expect(std::fabs(ts.average - want / 5.0) <= kHandFixtureTol,
                 "hand fixture average is " + format_double(ts.average));
    }

    // Correlation against an independent raw-moment formula.
    {
        SplitMix64 rng(50021);
        for (int trial = 0; trial < 100 && c.pass; ++trial) {
            std::size_t n = 3 + rng.below(48);
            std::vector<double> x(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = -5.0 + 10.0 * rng.unit();
                y[i] = -5.0 + 10.0 * rng.unit();
            }
            double got = evaluate::pearson(x, y);
            double want = pearson_raw_moments(x, y);
            c.expect(std::fabs(got - want) <= kPearsonOracleTol,
                     "vector " + std::to_string(trial) + ": |" + format_double(got) + " - " +
                         format_double(want) + "| > 1e-12");
        }
    }

    // Identity and antipodal label sets; integer-norm vectors keep it exact.
    {
        std::vector<TraitScores> vecs = {TraitScores{2, 4, 5, 6, 0},
                                         TraitScores{0, 0, 3, 4, 0},
                                         TraitScores{0, 0, 0, 6, 8}};
        std::vector<personality::TraitPrediction> preds;
        std::vector<evaluate::HumanLabels> same, flipped;
        for (std::size_t i = 0; i < vecs.size(); ++i) {
            personality::TraitPrediction p;
            p.conversation_id = "c" + std::to_string(i);
            p.speaker = Speaker::A;
            p.scores = vecs[i];
            preds.push_back(p);
            evaluate::HumanLabels h;
            h.conversation_id = p.conversation_id;
            h.speaker = Speaker::A;
            h.scores = vecs[i];
            same.push_back(h);
            for (auto& v : h.scores) v = -v;
            flipped.push_back(h);
        }
        double cos_same = evaluate::label_similarity(preds, same).mean_cosine;
        double cos_flip = evaluate::label_similarity(preds, flipped).mean_cosine;
        c.expect(cos_same == 1.0, "identity cosine is " + format_double(cos_same));
        c.expect(cos_flip == -1.0, "antipodal cosine is " + format_double(cos_flip));
    }
    if (c.pass) c.note = "all fixtures within pinned tolerances";
    return c;
}

// ── 6: prompt contents and section toggles ──────────────────────────────────

Conversation buffet_fixture() {
    auto strided = [](const std::vector<std::string>& ws, Millis start) {
        std::vector<Token> out;
        Millis t = start;
        for (const auto& w : ws) {
            out.push_back(make_word(w, t, t + 280));
            t += 340;
        }
        return out;
    };
    auto mk = [](int id, Speaker sp, std::vector<Token> toks, ResponseLabel label,
                 std::optional<OverlapRef> ov = std::nullopt) {
        Response r;
        r.id = id;
        r.speaker = sp;
        r.tokens = std::move(toks);
        r.label = label;
        r.overlap = ov;
        return r;
    };

    Conversation conv;
    conv.id = "buffet";
    conv.duration_ms = 26000;

    auto toks0 = strided({"yeah", "exactly", "i", "am", "like", "all", "you", "can",
                          "eat", "all"},
                         0);
    toks0.push_back(Token{TokenKind::StartLaugh, "", 3400, 3400});
    auto tail0 = strided({"day", "long"}, 3400);
    toks0.insert(toks0.end(), tail0.begin(), tail0.end());
    conv.responses.push_back(mk(0, Speaker::B, toks0, ResponseLabel::Turn));

    conv.responses.push_back(mk(1, Speaker::A, {Token{TokenKind::Laughter, "", 4400, 5000}},
                                ResponseLabel::Turn));

    auto toks2 = strided({"because", "it", "is", "open"}, 5200);
    toks2.push_back(Token{TokenKind::EndLaugh, "", 6500, 6500});
    auto tail2 = strided({"day",  "right", "so",    "you",   "can",    "just", "sort",
                          "of",   "walk",  "in",    "i",     "used",   "to",   "go",
                          "you",  "know",  "we",    "used",  "to",     "go",   "at",
                          "11",   "when",  "it",    "first", "opened", "and",  "then",
                          "eat",  "for",   "like",  "an",    "hour",   "you",  "know",
                          "and",  "then",  "talk",  "to",    "like",   "two",  "and",
                          "then", "eat",   "again"},
                         6560);
    toks2.insert(toks2.end(), tail2.begin(), tail2.end());
    conv.responses.push_back(mk(2, Speaker::B, toks2, ResponseLabel::Turn));

    conv.responses.push_back(mk(3, Speaker::A, {make_word("yeah", 7880, 8680)},
                                ResponseLabel::PendingBackchannel,
                                OverlapRef{OverlapKind::Fully, 2}));

    conv.responses.push_back(mk(4, Speaker::B, {Token{TokenKind::Laughter, "", 22500, 23200}},
                                ResponseLabel::Turn));

    auto toks5 = strided({"that's", "a", "way", "to", "get", "your", "money's"}, 23300);
    toks5.insert(toks5.begin(), Token{TokenKind::StartLaugh, "", 23300, 23300});
    toks5.push_back(Token{TokenKind::EndLaugh, "", 25620, 25620});
    conv.responses.push_back(mk(5, Speaker::A, toks5, ResponseLabel::Turn));
    return conv;
}

attributes::SpeakerAttributes character_attrs() {
    attributes::SpeakerAttributes a;
    a.conversation_id = "fixture";
    a.speaker = Speaker::A;
    a.num_turns = 20;
    a.avg_turn_duration_s = 2.4;
    a.laughs_per_min_speech = 3.1;
    a.emotive_bc_per_min_other = 1.2;
    a.cognitive_bc_per_min_other = 0.8;
    a.interjections_per_12min = 4.0;
    a.emotion_pct = {100.0 / 36, 100.0 / 36, 100.0 / 36, 500.0 / 36,
                     2500.0 / 36, 100.0 / 36, 200.0 / 36};
    a.sentiment_pct = {600.0 / 36, 2300.0 / 36, 700.0 / 36};
    return a;
}

Criterion check_prompts() {
    Criterion c{"prompt assembly: history marker and template sections present, "
                "each feature toggle removes exactly its section"};

    PipelineConfig cfg;
    Conversation conv = buffet_fixture();
    std::string bc = classify::build_backchannel_prompt(conv, 3, cfg);
    for (const char* needle :
         {"{{{(TARGET) Speaker A: yeah}}}", "Target interjection text: yeah",
          "The speaker who speaks the text inside triple curly blankets: A",
          "Your task is to classify the type of backchannel",
          "1. Summarize conversation before and after the target response.",
          "Your response must include the classification result in JSON format",
          "'interjection type'"}) {
        c.expect(bc.find(needle) != std::string::npos,
                 std::string("classification prompt lacks \"") + needle + "\"");
    }
    c.expect(bc.find("so you {{{(TARGET) Speaker A: yeah}}} can just") != std::string::npos,
             "marker not spliced at the target onset");

    auto attrs = character_attrs();
    std::array<attributes::RelativeBucket, 6> buckets = {
        attributes::RelativeBucket::Normal, attributes::RelativeBucket::Low,
        attributes::RelativeBucket::VeryHigh, attributes::RelativeBucket::High,
        attributes::RelativeBucket::Normal, attributes::RelativeBucket::Normal};
    std::vector<std::string> samples = {
        "yeah you do not have to [Laugh]",
        "but it's still like they are cooking it so it's not really",
        "[StartLaugh] i hope you have learned [EndLaugh] a lot more since then"};
    personality::CohortMeans means;
    means.emotion_pct = {3.7, 3.7, 3.1, 11.4, 48.3, 10.7, 19.0};
    means.sentiment_pct = {12.0, 58.8, 29.2};

    FeatureToggles all;
    std::string full =
        personality::build_personality_prompt(attrs, buckets, samples, means, all);
    const std::array<std::string, 4> headers = {"Sample Responses:", "Emotions:",
                                                "Sentiment:", "Basic Statistics:"};
    for (const auto& h : headers)
        c.expect(full.find(h) != std::string::npos, "full prompt lacks \"" + h + "\"");
    c.expect(full.find("neutral: 69.4% (average: 48.3%)") != std::string::npos,
             "own/average percentage line missing or misformatted");
    c.expect(full.find("Number of turns: Normal") != std::string::npos,
             "bucket rendering missing from statistics");

    for (std::size_t off = 0; off < headers.size(); ++off) {
        FeatureToggles t;
        t.samples = off != 0;
        t.emotions = off != 1;
        t.sentiment = off != 2;
        t.basics = off != 3;
        std::string p = personality::build_personality_prompt(attrs, buckets, samples, means, t);
        for (std::size_t h = 0; h < headers.size(); ++h) {
            bool present = p.find(headers[h]) != std::string::npos;
            c.expect(present == (h != off),
                     "with " + headers[off] + " disabled, section " + headers[h] +
                         (present ? " unexpectedly present" : " unexpectedly missing"));
        }
    }
    bool threw = false;
    try {
        FeatureToggles none;
        none.samples = none.emotions = none.sentiment = none.basics = false;
        personality::build_personality_prompt(attrs, buckets, samples, means, none);
    } catch (const ConfigError&) {
        threw = true;
    }
    c.expect(threw, "all-sections-off did not raise a configuration error");
    if (c.pass) c.note = "marker, sections, and toggles verified";
    return c;
}

// ── 7: end-to-end determinism through the command-line binary ───────────────

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        files[fs::relative(entry.path(), root).string()] =
            io::read_text_file(entry.path().string());
    }
    return files;
}

bool run_cli_pipeline(const fs::path& root, Criterion& c) {
    const std::string cli = DUOLOGUE_CLI_PATH;
    auto run = [&](const std::string& args, const char* stage) {
        std::string cmd = "cd '" + root.string() + "' && SOURCE_DATE_EPOCH=1700000000 '" +
                          cli + "' " + args + " > /dev/null 2> /dev/null";
        int rc = std::system(cmd.c_str());
        c.expect(rc == 0, std::string(stage) + " stage exited nonzero");
        return rc == 0;
    };
    return run("synth --count 10 --seed 31 --out-dir synth", "synth") &&
           run("annotate --mock --seed 31 --out-dir annotated synth/transcript_*.json",
               "annotate") &&
           run("attributes --out-dir stats annotated/*.dialog.jsonl", "attributes") &&
           run("predict --mock --seed 31 --out-dir predicted --attributes "
               "stats/attributes.jsonl annotated/*.dialog.jsonl",
               "predict") &&
           run("eval --out-dir metrics --predictions predicted/predictions.jsonl "
               "--labels synth/human_labels.jsonl --attributes stats/attributes.jsonl",
               "eval");
}

Criterion check_end_to_end_determinism() {
    Criterion c{"generate -> annotate -> attributes -> predict -> eval is "
                "byte-reproducible for a 10-conversation batch"};
    fs::path a = fs::temp_directory_path() / "duologue_acc_run1";
    fs::path b = fs::temp_directory_path() / "duologue_acc_run2";
    fs::remove_all(a);
    fs::remove_all(b);
    fs::create_directories(a);
    fs::create_directories(b);

    auto t0 = steady::now();
    bool ok1 = run_cli_pipeline(a, c);
    double run1 = seconds_since(t0);
    c.expect(run1 < kPipelineBudgetSeconds,
             "first run took " + fmt_secs(run1) + ", budget " +
                 fmt_secs(kPipelineBudgetSeconds));

    t0 = steady::now();
    bool ok2 = run_cli_pipeline(b, c);
    double run2 = seconds_since(t0);
    c.expect(run2 < kPipelineBudgetSeconds,
             "second run took " + fmt_secs(run2) + ", budget " +
                 fmt_secs(kPipelineBudgetSeconds));

    if (ok1 && ok2) {
        auto ta = read_tree(a);
        auto tb = read_tree(b);
        c.expect(ta.size() >= 40, "unexpectedly few output files: " +
                                      std::to_string(ta.size()));
        c.expect(ta.size() == tb.size(), "runs produced different file counts");
        for (const auto& [name, bytes] : ta) {
            auto it = tb.find(name);
            if (it == tb.end()) {
                c.fail("second run lacks " + name);
                break;
            }
            if (it->second != bytes) {
                c.fail("byte difference in " + name);
                break;
            }
        }
        if (c.pass)
            c.note = std::to_string(ta.size()) + " files identical, runs " + fmt_secs(run1) +
                     " and " + fmt_secs(run2);
    }
    fs::remove_all(a);
    fs::remove_all(b);
    return c;
}

// ── 8: HTTP gateway robustness ──────────────────────────────────────────────

struct StubServer {
    httplib::Server svr;
    int port = 0;
    std::thread th;

    bool start() {
        port = svr.bind_to_any_port("127.0.0.1");
        if (port <= 0) return false;
        th = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
        return true;
    }
    ~StubServer() {
        svr.stop();
        if (th.joinable()) th.join();
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    }
};

std::string chat_body(const std::string& content) {
    return nlohmann::json{
        {"choices",
         nlohmann::json::array({nlohmann::json{{"message", {{"content", content}}}}})}}
        .dump();
}

Criterion check_gateway() {
    Criterion c{"gateway: retry after 429, per-request deadline, trailing-JSON "
                "recovery on 500 fuzzed replies"};
    setenv("DUOLOGUE_ACC_KEY", "k", 1);

    {
        StubServer s;
        std::atomic<int> hits{0};
        s.svr.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                       if (++hits <= 2) {
                           res.status = 429;
                           return;
                       }
                       res.set_content(chat_body("recovered"), "application/json");
                   });
        c.expect(s.start(), "could not bind stub server");
        LlmSettings cfg;
        cfg.endpoint = s.endpoint();
        cfg.api_key_env = "DUOLOGUE_ACC_KEY";
        cfg.max_attempts = 4;
        cfg.backoff_base_ms = 1;
        gateway::HttpChatClient client(cfg);
        auto out = client.complete("ping", 0.0, 1);
        c.expect(out.ok() && out.text == "recovered",
                 "did not recover after two 429 responses");
        c.expect(hits.load() == 3,
                 "expected 3 attempts, saw " + std::to_string(hits.load()));
    }

    {
        StubServer s;
        s.svr.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                       std::this_thread::sleep_for(std::chrono::milliseconds(600));
                       res.set_content(chat_body("too late"), "application/json");
                   });
        c.expect(s.start(), "could not bind stub server");
        LlmSettings cfg;
        cfg.endpoint = s.endpoint();
        cfg.api_key_env = "DUOLOGUE_ACC_KEY";
        cfg.max_attempts = 10;
        cfg.backoff_base_ms = 1;
        cfg.deadline_ms = 200;
        gateway::HttpChatClient client(cfg);
        auto t0 = steady::now();
        auto out = client.complete("ping", 0.0, 1);
        double secs = seconds_since(t0);
        c.expect(!out.ok(), "deadline did not fail the request");
        c.expect(secs < 5.0, "gave up only after " + fmt_secs(secs));
    }

    {
        SplitMix64 rng(81001);
        const std::string alphabet = "{}\"\\:,ab {0[]\n";
        for (int trial = 0; trial < 500 && c.pass; ++trial) {
            nlohmann::json want = {{"verdict", "v" + std::to_string(trial)},
                                   {"n", trial}};
            std::string text;
            std::size_t len = rng.below(81);
            for (std::size_t i = 0; i < len; ++i)
                text.push_back(alphabet[rng.below(alphabet.size())]);
            text += "\n" + want.dump();
            auto got = gateway::extract_trailing_json(text);
            c.expect(got.has_value() && *got == want,
                     "reply " + std::to_string(trial) + ": appended object not recovered");
        }
    }
    unsetenv("DUOLOGUE_ACC_KEY");
    if (c.pass) c.note = "retry, deadline, and 500 fuzzed extractions";
    return c;
}

// ── 9: optional live smoke against a configured endpoint ────────────────────

Criterion check_live_smoke() {
    Criterion c{"live smoke: one backchannel classification and one trait prediction "
                "against the configured endpoint"};
    const char* enabled = std::getenv("DUOLOGUE_LIVE_SMOKE");
    if (!enabled || std::string(enabled) != "1") {
        c.note = "skipped: set DUOLOGUE_LIVE_SMOKE=1 to enable";
        return c;
    }

    PipelineConfig cfg;
    if (const char* ep = std::getenv("DUOLOGUE_SMOKE_ENDPOINT"); ep && *ep)
        cfg.llm.endpoint = ep;
    if (const char* model = std::getenv("DUOLOGUE_SMOKE_MODEL"); model && *model)
        cfg.llm.model = model;
    if (!gateway::credential_from_env(cfg.llm.api_key_env)) {
        c.note = "skipped: no credential in " + cfg.llm.api_key_env;
        return c;
    }

    gateway::HttpChatClient client(cfg.llm);
    Conversation conv = buffet_fixture();
    auto resolved = classify::resolve_backchannels(conv, client, cfg);
    c.expect(!resolved.fatal.has_value(),
             "backchannel call failed: " +
                 (resolved.fatal ? resolved.fatal->message : std::string()));
    c.expect(resolved.warnings.empty(), "backchannel verdict was not parseable");
    c.expect(conv.responses[3].label != ResponseLabel::PendingBackchannel,
             "target response still pending");

    auto attrs = character_attrs();
    std::array<attributes::RelativeBucket, 6> buckets{};
    personality::CohortMeans means;
    means.emotion_pct = {3.7, 3.7, 3.1, 11.4, 48.3, 10.7, 19.0};
    means.sentiment_pct = {12.0, 58.8, 29.2};
    FeatureToggles all;
    std::string prompt = personality::build_personality_prompt(
        attrs, buckets, {"yeah you do not have to"}, means, all);
    PipelineConfig one = cfg;
    one.personality_query_count = 1;
    auto result = personality::predict_personality(client, prompt, one, "smoke", Speaker::A);
    c.expect(result.ok(), "trait prediction failed: " +
                              (result.error ? result.error->message : std::string()));
    if (c.pass) c.note = "live verdicts parsed";
    return c;
}

}  // namespace

int main() {
    std::vector<Criterion> results;
    results.push_back(check_segmentation_oracle());
    results.push_back(check_laugh_integration());
    results.push_back(check_bucketizer());
    results.push_back(check_score_mapping());
    results.push_back(check_metric_fixtures());
    results.push_back(check_prompts());
    results.push_back(check_end_to_end_determinism());
    results.push_back(check_gateway());
    results.push_back(check_live_smoke());

    int failures = 0;
    for (const auto& c : results) {
        failures += c.pass ? 0 : 1;
        std::printf("%s  %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.note.empty() ? "" : " - ", c.note.c_str());
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, results.size());
    return failures == 0 ? 0 : 1;
}
