#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "duologue/ingest.hpp"
#include "duologue/rng.hpp"

using namespace duologue;
using namespace duologue::ingest;

namespace {

const char* kMinimalDoc = R"({
  "conversation_id": "c1",
  "duration_s": 30.0,
  "channels": [
    {"speaker": "B", "words": [{"text": "hi", "start": 1.5, "end": 1.9}]},
    {"speaker": "A", "words": [
      {"text": "hello", "start": 0.2, "end": 0.8},
      {"text": "there", "start": 0.9, "end": 1.3}
    ]}
  ],
  "laughs": [{"speaker": "A", "start": 5.0, "end": 6.0}],
  "silences": [
    {"speaker": "B", "start": 10.0, "end": 11.0},
    {"speaker": "B", "start": 10.5, "end": 12.0},
    {"speaker": "A", "start": 3.0, "end": 4.0}
  ]
})";

}  // namespace

TEST_CASE("parse_transcript reads a valid document") {
    TranscriptDocument doc = parse_transcript(kMinimalDoc);
    CHECK(doc.conversation_id == "c1");
    CHECK(doc.duration_ms == 30000);
    REQUIRE(doc.channels.size() == 2);
    // Channels are normalized to A-first regardless of input order.
    CHECK(doc.channels[0].speaker == Speaker::A);
    CHECK(doc.channels[1].speaker == Speaker::B);
    REQUIRE(doc.channel(Speaker::A).words.size() == 2);
    CHECK(doc.channel(Speaker::A).words[0].text == "hello");
    CHECK(doc.channel(Speaker::A).words[0].start_ms == 200);
    CHECK(doc.channel(Speaker::A).words[0].end_ms == 800);
    CHECK(doc.channel(Speaker::B).words[0].text == "hi");
    REQUIRE(doc.laughs.size() == 1);
    CHECK(doc.laughs[0].start_ms == 5000);
}

TEST_CASE("parse_transcript merges overlapping silences per speaker") {
    TranscriptDocument doc = parse_transcript(kMinimalDoc);
    auto b = doc.silences_for(Speaker::B);
    REQUIRE(b.size() == 1);
    CHECK(b[0].start_ms == 10000);
    CHECK(b[0].end_ms == 12000);
    auto a = doc.silences_for(Speaker::A);
    REQUIRE(a.size() == 1);
    CHECK(a[0].start_ms == 3000);
}

TEST_CASE("parse_transcript rejects malformed documents") {
    CHECK_THROWS_AS(parse_transcript("not json"), ParseError);
    CHECK_THROWS_AS(parse_transcript("{}"), ParseError);

    // start > end
    CHECK_THROWS_AS(parse_transcript(R"({
      "conversation_id": "x", "duration_s": 5,
      "channels": [
        {"speaker": "A", "words": [{"text": "w", "start": 2.0, "end": 1.0}]},
        {"speaker": "B", "words": []}
      ],
      "laughs": []
    })"),
                    ParseError);

    // out-of-order words within a channel
    CHECK_THROWS_AS(parse_transcript(R"({
      "conversation_id": "x", "duration_s": 5,
      "channels": [
        {"speaker": "A", "words": [
          {"text": "b", "start": 2.0, "end": 2.5},
          {"text": "a", "start": 1.0, "end": 1.5}
        ]},
        {"speaker": "B", "words": []}
      ],
      "laughs": []
    })"),
                    ParseError);

    // overlapping words within a channel
    CHECK_THROWS_AS(parse_transcript(R"({
      "conversation_id": "x", "duration_s": 5,
      "channels": [
        {"speaker": "A", "words": [
          {"text": "a", "start": 1.0, "end": 2.0},
          {"text": "b", "start": 1.5, "end": 2.5}
        ]},
        {"speaker": "B", "words": []}
      ],
      "laughs": []
    })"),
                    ParseError);

    // duplicate channel speakers
    CHECK_THROWS_AS(parse_transcript(R"({
      "conversation_id": "x", "duration_s": 5,
      "channels": [
        {"speaker": "A", "words": []},
        {"speaker": "A", "words": []}
      ],
      "laughs": []
    })"),
                    ParseError);

    // wrong channel count
    CHECK_THROWS_AS(parse_transcript(R"({
      "conversation_id": "x", "duration_s": 5,
      "channels": [{"speaker": "A", "words": []}],
      "laughs": []
    })"),
                    ParseError);

    // unknown speaker tag
    CHECK_THROWS_AS(parse_transcript(R"({
      "conversation_id": "x", "duration_s": 5,
      "channels": [
        {"speaker": "C", "words": []},
        {"speaker": "B", "words": []}
      ],
      "laughs": []
    })"),
                    ParseError);
}

TEST_CASE("parse errors carry a location") {
    try {
        parse_transcript(R"({
          "conversation_id": "x", "duration_s": 5,
          "channels": [
            {"speaker": "A", "words": [{"text": "w", "start": 2.0, "end": 1.0}]},
            {"speaker": "B", "words": []}
          ],
          "laughs": []
        })");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("words[0]") != std::string::npos);
        CHECK(msg.find("start > end") != std::string::npos);
    }
}

TEST_CASE("serialize then parse is the identity") {
    TranscriptDocument doc = parse_transcript(kMinimalDoc);
    const std::string bytes = serialize_transcript(doc);
    TranscriptDocument doc2 = parse_transcript(bytes);
    CHECK(serialize_transcript(doc2) == bytes);
    CHECK(doc2.conversation_id == doc.conversation_id);
    CHECK(doc2.duration_ms == doc.duration_ms);
    CHECK(doc2.channel(Speaker::A).words == doc.channel(Speaker::A).words);
    CHECK(doc2.channel(Speaker::B).words == doc.channel(Speaker::B).words);
    CHECK(doc2.laughs.size() == doc.laughs.size());
    CHECK(doc2.silences.size() == doc.silences.size());
}

// ── trim_silences ────────────────────────────────────────────────────────────

TEST_CASE("trim clips a word at a silence boundary") {
    std::vector<WordSpan> words = {{"okay", 1000, 2000}};
    std::vector<Interval> silences = {{1800, 3000}};
    auto out = trim_silences(words, silences);
    REQUIRE(out.size() == 1);
    CHECK(out[0].text == "okay");
    CHECK(out[0].start_ms == 1000);
    CHECK(out[0].end_ms == 1800);
}

TEST_CASE("trim drops words entirely inside silence") {
    std::vector<WordSpan> words = {{"gone", 1000, 2000}, {"kept", 4000, 4500}};
    std::vector<Interval> silences = {{500, 2500}};
    auto out = trim_silences(words, silences);
    REQUIRE(out.size() == 1);
    CHECK(out[0].text == "kept");
}

TEST_CASE("trim keeps the largest uncovered run, earliest on ties") {
    // Silence splits [0,1000] into [0,300] and [500,1000]: the later run wins.
    auto out = trim_silences({{"w", 0, 1000}}, {{300, 500}});
    REQUIRE(out.size() == 1);
    CHECK(out[0].start_ms == 500);
    CHECK(out[0].end_ms == 1000);

    // Equal runs [0,400] and [600,1000]: earliest wins.
    auto tie = trim_silences({{"w", 0, 1000}}, {{400, 600}, {1000, 1200}});
    REQUIRE(tie.size() == 1);
    CHECK(tie[0].start_ms == 0);
    CHECK(tie[0].end_ms == 400);
}

TEST_CASE("trim leaves words that only touch a silence") {
    auto out = trim_silences({{"w", 1000, 2000}}, {{2000, 3000}, {500, 1000}});
    REQUIRE(out.size() == 1);
    CHECK(out[0].start_ms == 1000);
    CHECK(out[0].end_ms == 2000);
}

TEST_CASE("trim drops point words inside or touching silence, keeps others") {
    auto out = trim_silences({{"p", 1500, 1500}}, {{1000, 2000}});
    CHECK(out.empty());
    auto touch = trim_silences({{"p", 2000, 2000}}, {{1000, 2000}});
    CHECK(touch.empty());
    auto keep = trim_silences({{"p", 2500, 2500}}, {{1000, 2000}});
    REQUIRE(keep.size() == 1);
    CHECK(keep[0].start_ms == 2500);
}

namespace {

// Independent 1 ms discretized implementation: mark covered cells, take the
// longest uncovered run (earliest on ties).
std::vector<WordSpan> trim_oracle(const std::vector<WordSpan>& words,
                                  const std::vector<Interval>& silences) {
    std::vector<WordSpan> out;
    for (const WordSpan& w : words) {
        const Millis n = w.end_ms - w.start_ms;
        if (n == 0) {
            bool covered = false;
            for (const Interval& s : silences)
                if (s.start_ms <= w.start_ms && w.start_ms <= s.end_ms) covered = true;
            if (!covered) out.push_back(w);
            continue;
        }
        std::vector<bool> covered(static_cast<std::size_t>(n), false);
        for (const Interval& s : silences) {
            for (Millis t = std::max(s.start_ms, w.start_ms);
                 t < std::min(s.end_ms, w.end_ms); ++t) {
                covered[static_cast<std::size_t>(t - w.start_ms)] = true;
            }
        }
        Millis best_lo = 0, best_len = 0, cur_lo = 0, cur_len = 0;
        for (Millis i = 0; i <= n; ++i) {
            if (i < n && !covered[static_cast<std::size_t>(i)]) {
                if (cur_len == 0) cur_lo = i;
                ++cur_len;
            } else {
                if (cur_len > best_len) {
                    best_len = cur_len;
                    best_lo = cur_lo;
                }
                cur_len = 0;
            }
        }
        if (best_len > 0)
            out.push_back({w.text, w.start_ms + best_lo, w.start_ms + best_lo + best_len});
    }
    return out;
}

}  // namespace

TEST_CASE("trim matches the 1 ms discretized oracle on fuzzed inputs") {
    SplitMix64 rng(substream_seed(2024, "trim-fuzz"));
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<WordSpan> words;
        Millis t = 0;
        const int n_words = static_cast<int>(rng.range(1, 12));
        for (int i = 0; i < n_words; ++i) {
            t += rng.range(0, 40);
            Millis len = rng.range(1, 60);
            words.push_back({"w" + std::to_string(i), t, t + len});
            t += len;
        }
        // Random disjoint sorted silences over the same range.
        std::vector<Interval> silences;
        Millis s = rng.range(0, 30);
        while (s < t + 50) {
            Millis len = rng.range(1, 70);
            silences.push_back({s, s + len});
            s += len + rng.range(1, 60);
        }
        auto got = trim_silences(words, silences);
        auto want = trim_oracle(words, silences);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].text == want[i].text);
            CHECK(got[i].start_ms == want[i].start_ms);
            CHECK(got[i].end_ms == want[i].end_ms);
        }
        // Idempotence and no-growth.
        auto again = trim_silences(got, silences);
        CHECK(again.size() == got.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(again[i].start_ms == got[i].start_ms);
            CHECK(again[i].end_ms == got[i].end_ms);
        }
        for (std::size_t i = 1; i < got.size(); ++i)
            CHECK(got[i - 1].end_ms <= got[i].start_ms);  // never reorders
    }
}
