#pragma once
// File formats: the line-delimited dataset/attribute/prediction/label files
// and the plain-file helpers the command layer is built on. Every format is
// a JSONL stream whose first line is a versioned header object.

#include <string>
#include <vector>

#include "duologue/attributes.hpp"
#include "duologue/core.hpp"
#include "duologue/evaluate.hpp"
#include "duologue/personality.hpp"

namespace duologue::io {

// Schema tags carried in each file's header line.
inline constexpr const char* kDialogSchema = "duologue.dialog.v1";
inline constexpr const char* kAttributesSchema = "duologue.attributes.v1";
inline constexpr const char* kPredictionsSchema = "duologue.predictions.v1";
inline constexpr const char* kLabelsSchema = "duologue.labels.v1";

// Whole-file helpers. Throw std::runtime_error with the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& bytes);
// Writes to a sibling temp file and renames it into place, so readers never
// observe a half-written file.
void write_text_file_atomic(const std::string& path, const std::string& bytes);

// One annotated conversation as JSONL: a header line
//   {"schema","conversation_id","duration_s","source"}
// then one line per response with fields
//   conversation_id, response_id, speaker, start, end, label, text,
//   overlap ({kind, partner} | null), emotion, sentiment,
//   bc_emotion5 | null, bc_sentiment5 | null.
// Times are seconds; text carries laugh tokens inline.
std::string dataset_to_jsonl(const Conversation& conv);

// Inverse of dataset_to_jsonl. Word-level timing is not stored in the file,
// so reloaded tokens share their response's span; response spans, text,
// labels and affect round-trip exactly. Throws ParseError with a line
// number on schema violations.
Conversation dataset_from_jsonl(const std::string& bytes);

std::string attributes_to_jsonl(const std::vector<attributes::SpeakerAttributes>& rows);
std::vector<attributes::SpeakerAttributes> attributes_from_jsonl(const std::string& bytes);

std::string predictions_to_jsonl(const std::vector<personality::TraitPrediction>& rows);
std::vector<personality::TraitPrediction> predictions_from_jsonl(const std::string& bytes);

std::string labels_to_jsonl(const std::vector<evaluate::HumanLabels>& rows);
std::vector<evaluate::HumanLabels> labels_from_jsonl(const std::string& bytes);

}  // namespace duologue::io
