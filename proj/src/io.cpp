#include "duologue/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace duologue::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw std::runtime_error("read failed: " + path);
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_text_file_atomic(const std::string& path, const std::string& bytes) {
    std::string tmp = path + ".tmp";
    write_text_file(tmp, bytes);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw std::runtime_error("rename failed: " + path + ": " + ec.message());
    }
}

namespace {

// Splits a JSONL stream into parsed lines, checking the header's schema tag.
// Returns the header object through `header`.
std::vector<json> parse_jsonl(const std::string& bytes, const char* schema, json& header) {
    std::vector<json> lines;
    std::istringstream in(bytes);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object())
            throw ParseError("line " + std::to_string(lineno) + ": expected an object");
        if (header.is_null()) {
            if (!j.contains("schema") || !j["schema"].is_string())
                throw ParseError("line 1: missing schema header");
            if (j["schema"].get<std::string>() != schema)
                throw ParseError("line 1: schema is \"" + j["schema"].get<std::string>() +
                                 "\", expected \"" + schema + "\"");
            header = std::move(j);
            continue;
        }
        lines.push_back(std::move(j));
    }
    if (header.is_null()) throw ParseError("empty file: no schema header");
    return lines;
}

const json& field(const json& j, const char* key, int lineno) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError("line " + std::to_string(lineno) + ": missing field \"" + key + "\"");
    return *it;
}

// Rebuilds a token list from the rendered dataset text. Per-word timing is
// not persisted, so words share the response span and laugh markers sit at
// its edges; counts and rendered text survive the round trip.
std::vector<Token> tokens_from_text(const std::string& text, Millis start_ms, Millis end_ms) {
    std::vector<Token> tokens;
    std::istringstream in(text);
    std::string piece;
    while (in >> piece) {
        Token t;
        if (piece == "[Laughter]") {
            t.kind = TokenKind::Laughter;
            t.start_ms = start_ms;
            t.end_ms = end_ms;
        } else if (piece == "[StartLaugh]") {
            t.kind = TokenKind::StartLaugh;
            t.start_ms = start_ms;
            t.end_ms = start_ms;
        } else if (piece == "[EndLaugh]") {
            t.kind = TokenKind::EndLaugh;
            t.start_ms = end_ms;
            t.end_ms = end_ms;
        } else {
            t.kind = TokenKind::Word;
            t.text = piece;
            t.start_ms = start_ms;
            t.end_ms = end_ms;
        }
        tokens.push_back(std::move(t));
    }
    if (tokens.empty()) throw std::invalid_argument("response with empty text");
    // The span accessors read the first and last token directly.
    tokens.front().start_ms = start_ms;
    tokens.back().end_ms = end_ms;
    if (tokens.back().kind == TokenKind::StartLaugh) tokens.back().start_ms = end_ms;
    if (tokens.front().kind == TokenKind::EndLaugh) tokens.front().end_ms = start_ms;
    return tokens;
}

template <typename ToJson>
std::string rows_to_jsonl(ordered_json header, const auto& rows, ToJson to_json) {
    std::string out = header.dump();
    out.push_back('\n');
    for (const auto& row : rows) {
        out += to_json(row).dump();
        out.push_back('\n');
    }
    return out;
}

}  // namespace

std::string dataset_to_jsonl(const Conversation& conv) {
    ordered_json header;
    header["schema"] = kDialogSchema;
    header["conversation_id"] = conv.id;
    header["duration_s"] = ms_to_seconds(conv.duration_ms);
    header["source"] = conv.source;

    return rows_to_jsonl(header, conv.responses, [&](const Response& r) {
        ordered_json j;
        j["conversation_id"] = conv.id;
        j["response_id"] = r.id;
        j["speaker"] = std::string(1, speaker_char(r.speaker));
        j["start"] = ms_to_seconds(r.start_ms());
        j["end"] = ms_to_seconds(r.end_ms());
        j["label"] = label_name(r.label);
        j["text"] = r.text();
        if (r.overlap) {
            j["overlap"] = {{"kind", overlap_kind_name(r.overlap->kind)},
                            {"partner", r.overlap->partner_response_id}};
        } else {
            j["overlap"] = nullptr;
        }
        j["emotion"] = emotion7_name(r.emotion);
        j["sentiment"] = sentiment3_name(r.sentiment);
        j["bc_emotion5"] = r.bc_emotion5 ? json(*r.bc_emotion5) : json(nullptr);
        j["bc_sentiment5"] = r.bc_sentiment5 ? json(*r.bc_sentiment5) : json(nullptr);
        return j;
    });
}

Conversation dataset_from_jsonl(const std::string& bytes) {
    json header;
    auto lines = parse_jsonl(bytes, kDialogSchema, header);

    Conversation conv;
    conv.id = field(header, "conversation_id", 1).get<std::string>();
    conv.duration_ms = seconds_to_ms(field(header, "duration_s", 1).get<double>());
    if (header.contains("source")) conv.source = header["source"].get<std::string>();

    int lineno = 1;
    for (const auto& j : lines) {
        ++lineno;
        const std::string at = "line " + std::to_string(lineno) + ": ";
        try {
            Response r;
            if (field(j, "conversation_id", lineno).get<std::string>() != conv.id)
                throw ParseError(at + "conversation_id differs from the header");
            r.id = field(j, "response_id", lineno).get<int>();
            auto sp = field(j, "speaker", lineno).get<std::string>();
            if (sp.size() != 1) throw ParseError(at + "speaker must be one character");
            r.speaker = speaker_from_char(sp[0]);
            Millis start = seconds_to_ms(field(j, "start", lineno).get<double>());
            Millis end = seconds_to_ms(field(j, "end", lineno).get<double>());
            if (end < start) throw ParseError(at + "response ends before it starts");
            r.label = label_from_name(field(j, "label", lineno).get<std::string>());
            r.tokens = tokens_from_text(field(j, "text", lineno).get<std::string>(), start, end);
            const json& ov = field(j, "overlap", lineno);
            if (!ov.is_null()) {
                OverlapRef ref;
                ref.kind = overlap_kind_from_name(field(ov, "kind", lineno).get<std::string>());
                ref.partner_response_id = field(ov, "partner", lineno).get<int>();
                r.overlap = ref;
            }
            r.emotion = emotion7_from_name(field(j, "emotion", lineno).get<std::string>());
            r.sentiment = sentiment3_from_name(field(j, "sentiment", lineno).get<std::string>());
            const json& be = field(j, "bc_emotion5", lineno);
            if (!be.is_null()) r.bc_emotion5 = be.get<std::string>();
            const json& bs = field(j, "bc_sentiment5", lineno);
            if (!bs.is_null()) r.bc_sentiment5 = bs.get<std::string>();
            conv.responses.push_back(std::move(r));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return conv;
}

std::string attributes_to_jsonl(const std::vector<attributes::SpeakerAttributes>& rows) {
    ordered_json header{{"schema", kAttributesSchema}};
    return rows_to_jsonl(header, rows,
                         [](const auto& a) { return attributes::attributes_to_json(a); });
}

std::vector<attributes::SpeakerAttributes> attributes_from_jsonl(const std::string& bytes) {
    json header;
    auto lines = parse_jsonl(bytes, kAttributesSchema, header);
    std::vector<attributes::SpeakerAttributes> rows;
    rows.reserve(lines.size());
    int lineno = 1;
    for (const auto& j : lines) {
        ++lineno;
        try {
            rows.push_back(attributes::attributes_from_json(j));
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

std::string predictions_to_jsonl(const std::vector<personality::TraitPrediction>& rows) {
    ordered_json header{{"schema", kPredictionsSchema}};
    return rows_to_jsonl(header, rows,
                         [](const auto& p) { return personality::prediction_to_json(p); });
}

std::vector<personality::TraitPrediction> predictions_from_jsonl(const std::string& bytes) {
    json header;
    auto lines = parse_jsonl(bytes, kPredictionsSchema, header);
    std::vector<personality::TraitPrediction> rows;
    rows.reserve(lines.size());
    int lineno = 1;
    for (const auto& j : lines) {
        ++lineno;
        try {
            rows.push_back(personality::prediction_from_json(j));
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

std::string labels_to_jsonl(const std::vector<evaluate::HumanLabels>& rows) {
    ordered_json header{{"schema", kLabelsSchema}};
    return rows_to_jsonl(header, rows,
                         [](const auto& h) { return evaluate::human_labels_to_json(h); });
}

std::vector<evaluate::HumanLabels> labels_from_jsonl(const std::string& bytes) {
    json header;
    auto lines = parse_jsonl(bytes, kLabelsSchema, header);
    std::vector<evaluate::HumanLabels> rows;
    rows.reserve(lines.size());
    int lineno = 1;
    for (const auto& j : lines) {
        ++lineno;
        try {
            rows.push_back(evaluate::human_labels_from_json(j));
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace duologue::io
