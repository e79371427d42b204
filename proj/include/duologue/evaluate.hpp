#pragma once

#include <array>
#include <string>
#include <vector>

#include "duologue/attributes.hpp"
#include "duologue/core.hpp"
#include "duologue/personality.hpp"
#include "json.hpp"

namespace duologue::evaluate {

// Pearson correlation. Zero variance on either side yields 0 with a warning.
double pearson(const std::vector<double>& x, const std::vector<double>& y,
               std::vector<std::string>* warnings = nullptr);

// Expected direction and strength of each (attribute, trait) relationship.
struct TrendTable {
    std::vector<std::string> rows;  // attribute keys
    std::vector<std::array<double, kTraitCount>> cells;

    bool has_row(const std::string& attribute) const;
    double cell(const std::string& attribute, std::size_t trait) const;

    // the table shipped with the library (all 16 attribute rows)
    static const TrendTable& builtin();
    // parse CSV text: header "attribute,<five trait names>", one row per line.
    // require_complete demands exactly the 16 canonical attribute rows.
    static TrendTable from_csv(const std::string& text, bool require_complete);
    static TrendTable from_csv_file(const std::string& path);
};

struct TrendScore {
    TraitScores per_trait{};
    double average = 0.0;
    std::vector<std::string> warnings;
};

// score_t = Σ_a w_{a,t} · sign(T_{a,t}) · r(pred_t, attr_a), weights L1-normalized
// per trait column. Predictions and attributes join on (conversation, speaker).
TrendScore trend_score(const std::vector<personality::TraitPrediction>& predictions,
                       const std::vector<attributes::SpeakerAttributes>& attrs,
                       const TrendTable& table);

struct HumanLabels {
    std::string conversation_id;
    Speaker speaker = Speaker::A;
    TraitScores scores{};
};

nlohmann::ordered_json human_labels_to_json(const HumanLabels& h);
HumanLabels human_labels_from_json(const nlohmann::json& j);

struct LabelSimilarity {
    TraitScores per_trait_r{};
    double average_r = 0.0;
    double mean_cosine = 0.0;
    int compared = 0;  // speakers that entered the cosine mean
    std::vector<std::string> warnings;
};

LabelSimilarity label_similarity(const std::vector<personality::TraitPrediction>& predictions,
                                 const std::vector<HumanLabels>& human);

nlohmann::ordered_json metrics_to_json(const TrendScore& trend, const LabelSimilarity& sim);
std::string metrics_to_text(const TrendScore& trend, const LabelSimilarity& sim);

}  // namespace duologue::evaluate
