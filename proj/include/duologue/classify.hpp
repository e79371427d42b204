#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duologue/core.hpp"
#include "duologue/gateway.hpp"

namespace duologue::classify {

// ---- chat-driven backchannel resolution ----

// Index of the between-token slot in `r` closest to an instant: 0 is before
// the first token, tokens().size() is after the last. A slot inside the gap
// containing the instant has distance zero; ties go to the earlier slot.
int marker_slot(const Response& r, Millis instant_ms);

// One dialog line the way prompts show it ("Speaker A: wow [Laugh]").
std::string render_history_line(const Response& r);

// Fills the classification template for one pending response: the target
// text and speaker, plus a history window of responses around the partner
// with a {{{(TARGET) ...}}} marker spliced into the partner's line at the
// slot nearest the target's onset. The target never appears as its own line.
std::string build_backchannel_prompt(const Conversation& conv, int target_id,
                                     const PipelineConfig& cfg);

struct ResolveResult {
    std::vector<std::string> warnings;
    // Set when the chat client reported a hard failure; earlier responses in
    // the conversation keep the labels they already received.
    std::optional<gateway::ChatError> fatal;
    int resolved = 0;
};

// Queries the client for every response still marked as a pending
// backchannel and rewrites its label from the verdict. Unparseable verdicts
// are retried a fixed number of times, then counted as unsuccessful
// interjections with a warning.
ResolveResult resolve_backchannels(Conversation& conv, gateway::ChatClient& client,
                                   const PipelineConfig& cfg);

inline constexpr int kVerdictAttempts = 3;

// ---- per-response emotion and sentiment ----

struct ClassifyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TextClassifier {
  public:
    virtual ~TextClassifier() = default;
    // Score per class name; higher wins, absent counts as zero. Throws
    // ClassifyError when no answer could be obtained.
    virtual std::map<std::string, double> scores(const std::string& text,
                                                 const std::vector<std::string>& classes) = 0;
};

// Offline stand-in: counts keyword hits from a small fixed lexicon.
class LexiconClassifier final : public TextClassifier {
  public:
    std::map<std::string, double> scores(const std::string& text,
                                         const std::vector<std::string>& classes) override;
};

// POSTs {"text","classes"} as JSON and expects {"labels": {class: score}}.
class HttpTextClassifier final : public TextClassifier {
  public:
    HttpTextClassifier(std::string endpoint, int max_attempts);

    std::map<std::string, double> scores(const std::string& text,
                                         const std::vector<std::string>& classes) override;

  private:
    std::string base_url_;
    std::string path_;
    int max_attempts_;
};

struct AffectResult {
    std::vector<std::string> warnings;
};

// Assigns every response an emotion and a sentiment from its spoken words.
// Responses with no spoken words (pure laughter) and responses whose
// classifier gave no signal stay neutral.
AffectResult classify_affect(Conversation& conv, TextClassifier& emotion_clf,
                             TextClassifier& sentiment_clf);

}  // namespace duologue::classify
