#include "duologue/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "duologue/assets/trend_table_v1.hpp"

namespace duologue::evaluate {

double pearson(const std::vector<double>& x, const std::vector<double>& y,
               std::vector<std::string>* warnings) {
    if (x.size() != y.size())
        throw std::invalid_argument("pearson needs equal lengths, got " +
                                    std::to_string(x.size()) + " and " +
                                    std::to_string(y.size()));
    if (x.size() < 2)
        throw std::invalid_argument("pearson needs at least 2 points, got " +
                                    std::to_string(x.size()));
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        if (warnings)
            warnings->push_back("correlation of a constant vector is undefined; using 0");
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

bool TrendTable::has_row(const std::string& attribute) const {
    return std::find(rows.begin(), rows.end(), attribute) != rows.end();
}

double TrendTable::cell(const std::string& attribute, std::size_t trait) const {
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i] == attribute) return cells[i][trait];
    throw std::invalid_argument("trend table has no row for attribute: " + attribute);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        auto b = f.find_first_not_of(" \t");
        auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
    }
    return fields;
}

}  // namespace

TrendTable TrendTable::from_csv(const std::string& text, bool require_complete) {
    TrendTable table;
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (!saw_header) {
            if (fields.size() != 1 + kTraitCount)
                throw ParseError("trend table header needs attribute + " +
                                 std::to_string(kTraitCount) + " trait columns");
            for (std::size_t t = 0; t < kTraitCount; ++t) {
                if (normalize_key(fields[t + 1]) != normalize_key(trait_name(kTraits[t])))
                    throw ParseError("trend table column " + std::to_string(t + 1) +
                                     " must be " + trait_name(kTraits[t]) + ", got " +
                                     fields[t + 1]);
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 1 + kTraitCount)
            throw ParseError("trend table row for " +
                             (fields.empty() ? std::string("?") : fields[0]) +
                             " has wrong field count");
        if (table.has_row(fields[0]))
            throw ParseError("trend table repeats attribute row: " + fields[0]);
        std::array<double, kTraitCount> row{};
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            try {
                row[t] = std::stod(fields[t + 1]);
            } catch (const std::exception&) {
                throw ParseError("trend table cell (" + fields[0] + ", " +
                                 trait_name(kTraits[t]) + ") is not a number: " +
                                 fields[t + 1]);
            }
            if (row[t] < -100.0 || row[t] > 100.0)
                throw ParseError("trend table cell (" + fields[0] + ", " +
                                 trait_name(kTraits[t]) + ") outside [-100, 100]");
        }
        table.rows.push_back(fields[0]);
        table.cells.push_back(row);
    }
    if (!saw_header) throw ParseError("trend table is empty");
    if (require_complete) {
        for (const auto& key : attributes::kAttributeKeys)
            if (!table.has_row(key))
                throw ParseError("trend table is missing attribute row: " + key);
        for (const auto& row : table.rows) {
            if (std::find(attributes::kAttributeKeys.begin(),
                          attributes::kAttributeKeys.end(),
                          row) == attributes::kAttributeKeys.end())
                throw ParseError("trend table has unknown attribute row: " + row);
        }
    }
    return table;
}

TrendTable TrendTable::from_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) throw ParseError("cannot read trend table file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return from_csv(ss.str(), true);
}

const TrendTable& TrendTable::builtin() {
    static const TrendTable table = from_csv(assets::trend_table_v1, true);
    return table;
}

namespace {

// (conversation, speaker) -> index pairs present on both sides, in prediction order
template <typename Rhs>
std::vector<std::pair<std::size_t, std::size_t>> join_speakers(
    const std::vector<personality::TraitPrediction>& predictions, const std::vector<Rhs>& rhs) {
    std::map<std::pair<std::string, char>, std::size_t> lookup;
    for (std::size_t i = 0; i < rhs.size(); ++i)
        lookup[{rhs[i].conversation_id, speaker_char(rhs[i].speaker)}] = i;
    std::vector<std::pair<std::size_t, std::size_t>> joined;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        auto it = lookup.find(
            {predictions[i].conversation_id, speaker_char(predictions[i].speaker)});
        if (it != lookup.end()) joined.emplace_back(i, it->second);
    }
    return joined;
}

}  // namespace

TrendScore trend_score(const std::vector<personality::TraitPrediction>& predictions,
                       const std::vector<attributes::SpeakerAttributes>& attrs,
                       const TrendTable& table) {
    auto joined = join_speakers(predictions, attrs);
    if (joined.size() < 2)
        throw std::invalid_argument(
            "trend score needs at least 2 speakers present in both predictions and "
            "attributes, got " +
            std::to_string(joined.size()));

    TrendScore out;

    // correlation of each attribute row with each trait's predictions
    std::vector<std::vector<double>> attr_values(table.rows.size());
    for (std::size_t a = 0; a < table.rows.size(); ++a) {
        attr_values[a].reserve(joined.size());
        for (const auto& [pi, ai] : joined)
            attr_values[a].push_back(attrs[ai].value_for(table.rows[a]));
    }

    double total = 0.0;
    for (std::size_t t = 0; t < kTraitCount; ++t) {
        std::vector<double> pred;
        pred.reserve(joined.size());
        for (const auto& [pi, ai] : joined) pred.push_back(predictions[pi].scores[t]);

        double weight_sum = 0.0;
        for (std::size_t a = 0; a < table.rows.size(); ++a)
            weight_sum += std::abs(table.cells[a][t]);
        if (weight_sum == 0.0) {
            out.warnings.push_back(std::string("trend table column for ") +
                                   trait_name(kTraits[t]) + " is all zero; score set to 0");
            out.per_trait[t] = 0.0;
            continue;
        }
        double score = 0.0;
        for (std::size_t a = 0; a < table.rows.size(); ++a) {
            double cell = table.cells[a][t];
            if (cell == 0.0) continue;
            double r = pearson(pred, attr_values[a], &out.warnings);
            double w = std::abs(cell) / weight_sum;
            score += w * (cell > 0 ? 1.0 : -1.0) * r;
        }
        out.per_trait[t] = score;
        total += score;
    }
    out.average = total / kTraitCount;
    return out;
}

nlohmann::ordered_json human_labels_to_json(const HumanLabels& h) {
    nlohmann::ordered_json j;
    j["conversation_id"] = h.conversation_id;
    j["speaker"] = std::string(1, speaker_char(h.speaker));
    nlohmann::ordered_json scores;
    for (std::size_t t = 0; t < kTraitCount; ++t)
        scores[trait_name(kTraits[t])] = h.scores[t];
    j["scores"] = std::move(scores);
    return j;
}

HumanLabels human_labels_from_json(const nlohmann::json& j) {
    HumanLabels h;
    h.conversation_id = j.at("conversation_id").get<std::string>();
    std::string sp = j.at("speaker").get<std::string>();
    if (sp != "A" && sp != "B") throw ParseError("speaker must be \"A\" or \"B\", got " + sp);
    h.speaker = sp == "A" ? Speaker::A : Speaker::B;
    for (std::size_t t = 0; t < kTraitCount; ++t) {
        h.scores[t] = j.at("scores").at(trait_name(kTraits[t])).get<double>();
        if (h.scores[t] < -100.0 || h.scores[t] > 100.0)
            throw ParseError("human label for " + std::string(trait_name(kTraits[t])) +
                             " outside [-100, 100]");
    }
    return h;
}

LabelSimilarity label_similarity(const std::vector<personality::TraitPrediction>& predictions,
                                 const std::vector<HumanLabels>& human) {
    auto joined = join_speakers(predictions, human);
    if (joined.empty())
        throw std::invalid_argument(
            "no speakers appear in both the predictions and the human labels");

    LabelSimilarity out;

    for (std::size_t t = 0; t < kTraitCount; ++t) {
        std::vector<double> pred, truth;
        pred.reserve(joined.size());
        truth.reserve(joined.size());
        for (const auto& [pi, hi] : joined) {
            pred.push_back(predictions[pi].scores[t]);
            truth.push_back(human[hi].scores[t]);
        }
        if (pred.size() < 2) {
            out.warnings.push_back(std::string("only one joined speaker; correlation for ") +
                                   trait_name(kTraits[t]) + " set to 0");
            out.per_trait_r[t] = 0.0;
        } else {
            out.per_trait_r[t] = pearson(pred, truth, &out.warnings);
        }
        out.average_r += out.per_trait_r[t] / kTraitCount;
    }

    double cos_sum = 0.0;
    for (const auto& [pi, hi] : joined) {
        double dot = 0, np = 0, nh = 0;
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            dot += predictions[pi].scores[t] * human[hi].scores[t];
            np += predictions[pi].scores[t] * predictions[pi].scores[t];
            nh += human[hi].scores[t] * human[hi].scores[t];
        }
        if (np == 0.0 || nh == 0.0) {
            out.warnings.push_back(predictions[pi].conversation_id + " speaker " +
                                   speaker_char(predictions[pi].speaker) +
                                   ": zero score vector; skipped in cosine mean");
            continue;
        }
        cos_sum += dot / (std::sqrt(np) * std::sqrt(nh));
        ++out.compared;
    }
    if (out.compared > 0) {
        out.mean_cosine = cos_sum / out.compared;
    } else {
        out.warnings.push_back("every speaker was skipped; cosine mean set to 0");
        out.mean_cosine = 0.0;
    }
    return out;
}

nlohmann::ordered_json metrics_to_json(const TrendScore& trend, const LabelSimilarity& sim) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json ts;
    for (std::size_t t = 0; t < kTraitCount; ++t)
        ts[trait_name(kTraits[t])] = trend.per_trait[t];
    ts["average"] = trend.average;
    j["trend_score"] = std::move(ts);
    nlohmann::ordered_json corr;
    for (std::size_t t = 0; t < kTraitCount; ++t)
        corr[trait_name(kTraits[t])] = sim.per_trait_r[t];
    corr["average"] = sim.average_r;
    j["label_correlation"] = std::move(corr);
    j["mean_cosine"] = sim.mean_cosine;
    j["cosine_speakers"] = sim.compared;
    std::vector<std::string> warnings = trend.warnings;
    warnings.insert(warnings.end(), sim.warnings.begin(), sim.warnings.end());
    j["warnings"] = warnings;
    return j;
}

std::string metrics_to_text(const TrendScore& trend, const LabelSimilarity& sim) {
    std::ostringstream ss;
    ss << "trend score\n";
    for (std::size_t t = 0; t < kTraitCount; ++t)
        ss << "  " << trait_name(kTraits[t]) << ": " << format_double(trend.per_trait[t])
           << "\n";
    ss << "  average: " << format_double(trend.average) << "\n";
    ss << "correlation with human labels\n";
    for (std::size_t t = 0; t < kTraitCount; ++t)
        ss << "  " << trait_name(kTraits[t]) << ": " << format_double(sim.per_trait_r[t])
           << "\n";
    ss << "  average: " << format_double(sim.average_r) << "\n";
    ss << "mean cosine similarity: " << format_double(sim.mean_cosine) << " over "
       << sim.compared << " speakers\n";
    return ss.str();
}

}  // namespace duologue::evaluate
