#pragma once

// Result-verb mining over a normalized lexical-resource snapshot.
//
// A snapshot is JSON-lines; every record carries a "kind" in
// {verbnet, imsitu, framenet, wordnet, concreteness, kinetics}:
//
//   {"kind":"verbnet","lemma":"split","sense_id":"break-45.1",
//    "thematic_roles":["Agent","Patient","Result"],
//    "selectional_restrictions":{"Patient":["solid"]}}
//   {"kind":"imsitu","lemma":"block","roles":["agent","blocked","obstacle"]}
//   {"kind":"framenet","lemma":"simmer","frames":["Apply_heat"],
//    "frame_elements":{"Apply_heat":["Cook","Food","Result"]}}
//   {"kind":"wordnet","lemma":"roast","hypernyms":["cook.v.03"]}
//   {"kind":"concreteness","lemma":"water","rating":4.8}
//   {"kind":"kinetics","lemma":"dance"}

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cae/common.hpp"

namespace cae::lexicon {

struct VerbNetEntry {
    std::string lemma;
    std::string sense_id;
    std::vector<std::string> thematic_roles;
    std::map<std::string, std::set<std::string>> selectional_restrictions;
};

struct ImSituEntry {
    std::string lemma;
    std::vector<std::string> roles;
};

struct FrameNetEntry {
    std::string lemma;
    std::set<std::string> frames;
    std::map<std::string, std::set<std::string>> frame_elements;
};

struct LexicalSnapshot {
    std::vector<VerbNetEntry> verbnet_entries;
    std::vector<ImSituEntry> imsitu_entries;
    std::vector<FrameNetEntry> framenet_entries;
    std::map<std::string, std::set<std::string>> wordnet_entries;  // lemma -> direct hypernyms
    std::map<std::string, double> concreteness;
    std::set<std::string> kinetics_verbs;

    bool empty() const noexcept {
        return verbnet_entries.empty() && imsitu_entries.empty() && framenet_entries.empty();
    }

    /// Every frame id mentioned by any FrameNet entry.
    std::set<std::string> all_frames() const;
};

/// Parses and validates snapshot text. Throws SchemaError with the line number.
LexicalSnapshot parse_snapshot(std::string_view jsonl);
LexicalSnapshot load_snapshot(const std::string& path);

enum class Verdict { Sure, Unsure };

std::string_view to_string(Verdict v) noexcept;

struct SenseRef {
    std::string id;
    std::string source;  // "verbnet" | "imsitu"

    auto operator<=>(const SenseRef&) const = default;
};

struct ResultVerb {
    std::string lemma;
    std::vector<SenseRef> senses;
    Ternary visualness = Ternary::Unknown;
    Ternary effect_causing = Ternary::Unknown;
    Verdict verdict = Verdict::Unsure;
    std::set<std::string> frames;
    bool phrasal = false;

    bool operator==(const ResultVerb&) const = default;
};

struct MiningOptions {
    std::set<std::string> invalid_second_roles = default_invalid_second_roles();
    std::set<std::string> patient_visual_tags = {"concrete", "solid"};
    std::set<std::string> effect_elements = {"Result", "Effect"};

    /// imSitu roles that may not occupy the second position of a visual verb.
    static std::set<std::string> default_invalid_second_roles();
};

/// One ResultVerb per verb lemma found in VerbNet, imSitu or FrameNet, sorted by lemma.
std::vector<ResultVerb> identify_result_verbs(const LexicalSnapshot& snap, const MiningOptions& opts = {});

/// frame id -> lemmas evoking it.
std::map<std::string, std::set<std::string>> verb_frame_index(const std::vector<ResultVerb>& verbs);

std::string to_jsonl(const std::vector<ResultVerb>& verbs);
std::vector<ResultVerb> parse_result_verbs(std::string_view jsonl);

}  // namespace cae::lexicon
