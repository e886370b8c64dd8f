#pragma once

// Intrinsic metrics (MAP, MEP), the frame / co-hyponymy generalization analysis, and cloze
// probing with position and template-polarity robustness tables.

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cae/encoder.hpp"
#include "cae/split.hpp"

namespace cae::eval {

/// 2ab / (a + b), or 0 when a + b = 0.
double harmonic_mean(double a, double b) noexcept;

struct MapPrediction {
    std::string reference;
    std::string predicted;
};

struct MapMetrics {
    double macro_seen = 0.0;
    double macro_unseen = 0.0;
    double harmonic_mean = 0.0;
    double micro = 0.0;
    std::map<std::string, double> per_class;  // lemma -> accuracy
    std::size_t n_seen_classes = 0;
    std::size_t n_unseen_classes = 0;
};

/// Throws std::invalid_argument on empty input or a reference lemma without a class.
MapMetrics map_metrics(const std::vector<MapPrediction>& preds, const split::VerbClassMap& verb_class);

/// Percentage of instances whose masked frames are all correct. Throws on an empty list or an
/// empty instance.
double mep_metrics(const std::vector<std::vector<bool>>& instances);

/// lemma -> evoked frames.
using LemmaFrames = std::map<std::string, std::set<std::string>>;

/// lemma -> direct hypernyms.
using HypernymMap = std::map<std::string, std::set<std::string>>;

struct GeneralizationOptions {
    /// 1 = direct hypernyms only; larger values also follow hypernyms of hypernyms.
    std::size_t hypernym_depth = 1;
};

struct GeneralizationReport {
    double pct_false_sharing_frame = 0.0;
    double pct_false_cohyponym = 0.0;
    std::size_t n_pairs = 0;
    std::vector<std::string> warnings;
};

/// Pairs with reference == predicted are ignored. Lemmas missing from both resources count as
/// non-sharing and are reported in warnings.
GeneralizationReport generalization_analysis(const std::vector<MapPrediction>& false_predictions,
                                             const LemmaFrames& frames, const HypernymMap& hypernyms,
                                             const GeneralizationOptions& opts = {});

enum class Polarity { Original, Inverse };

std::string_view to_string(Polarity p) noexcept;
Polarity polarity_from_string(std::string_view s);

struct ProbeItem {
    std::string id;
    std::string template_text;  // contains "[MASK]" once
    std::vector<std::string> candidates;
    std::size_t answer_index = 0;
    std::string group;
    Polarity polarity = Polarity::Original;
    std::size_t answer_position = 1;  // answer_index + 1
};

struct ProbeDiagnostic {
    std::string item_id;
    std::string message;
};

/// Returns a diagnostic message, or an empty string for a well-formed item.
std::string validate_probe_item(const ProbeItem& item);

/// JSON-lines; malformed lines raise SchemaError.
std::vector<ProbeItem> parse_probe_items(std::string_view jsonl);
std::string probe_items_to_jsonl(const std::vector<ProbeItem>& items);

/// Logit of each candidate at the item's mask slot. Candidates that cannot be scored get
/// -infinity.
class CandidateScorer {
public:
    virtual ~CandidateScorer() = default;
    virtual std::vector<double> candidate_logits(const ProbeItem& item) const = 0;
};

/// Scores with the MAM head on a text-only input.
class ModelScorer final : public CandidateScorer {
public:
    explicit ModelScorer(const model::ModelState& state) : state_(state) {}
    std::vector<double> candidate_logits(const ProbeItem& item) const override;

private:
    const model::ModelState& state_;
};

struct ProbeChoice {
    std::size_t item = 0;  // index into the input list
    std::size_t chosen = 0;
    std::vector<double> probabilities;
    bool correct = false;
};

struct ProbeResult {
    std::vector<ProbeChoice> choices;
    std::vector<ProbeDiagnostic> diagnostics;  // rejected items and unscorable candidates
};

/// Softmax over the four candidate logits; ties go to the lowest index.
std::size_t choose_candidate(const std::vector<double>& logits, std::vector<double>* probabilities = nullptr);

ProbeResult probe_cloze(const std::vector<ProbeItem>& items, const CandidateScorer& scorer);

struct GroupRobustness {
    double accuracy = 0.0;
    double original = 0.0;
    double inverse = 0.0;
    double delta = 0.0;  // |original - inverse|
    bool paired = false;
};

struct RobustnessReport {
    std::array<double, 4> position_accuracy{};
    std::array<std::size_t, 4> position_count{};
    std::map<std::string, GroupRobustness> groups;
    double macro_delta = 0.0;  // over paired groups
    double accuracy = 0.0;
    std::vector<std::string> warnings;
};

/// Throws std::invalid_argument when an answer position is absent or an item is malformed.
RobustnessReport probe_robustness(const std::vector<std::pair<ProbeItem, std::size_t>>& choices);

struct EvalReport {
    std::optional<MapMetrics> map;
    std::optional<double> mep_accuracy;
    std::optional<GeneralizationReport> generalization;
    std::optional<RobustnessReport> probe;
};

nlohmann::json to_json(const EvalReport& report);
/// Fixed-width human-readable dump.
std::string to_table(const EvalReport& report);

}  // namespace cae::eval
