#pragma once

// Generalized zero-shot split: verbs are drawn seen/unseen within each frame, then clips
// of seen verbs go 80/10/10 and clips of unseen verbs 0/50/50 across train/val/test.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cae/corpus.hpp"

namespace cae::split {

enum class VerbClass { Seen, Unseen };
enum class Split { Train, Val, Test };

std::string_view to_string(VerbClass c) noexcept;
std::string_view to_string(Split s) noexcept;
VerbClass verb_class_from_string(std::string_view s);
Split split_from_string(std::string_view s);

struct SplitConfig {
    std::uint64_t seed = 42;
    double seen_fraction_per_frame = 0.8;
    std::array<double, 3> seen_clip_ratio{0.8, 0.1, 0.1};
    std::array<double, 3> unseen_clip_ratio{0.0, 0.5, 0.5};
    std::set<std::string> excluded_seen_lemmas;  // forced unseen (verbs the visual backbone was trained on)

    /// Throws std::invalid_argument when ratios do not sum to 1 or fractions leave [0,1].
    void validate() const;
};

using FrameIndex = std::map<std::string, std::set<std::string>>;
using VerbClassMap = std::map<std::string, VerbClass>;

/// Each lemma is drawn once, under its lexicographically smallest frame.
VerbClassMap assign_verb_classes(const FrameIndex& frame_index, const SplitConfig& cfg);

struct ZeroShotStats {
    double pct_videos = 0.0;
    double pct_actions = 0.0;
    double pct_objects = 0.0;
};

struct SplitStats {
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
    ZeroShotStats val;
    ZeroShotStats test;
};

struct SplitManifest {
    VerbClassMap verb_class;
    std::map<std::string, Split> clip_assignment;  // clip id -> split
    SplitStats stats;
};

/// Throws std::invalid_argument listing every verb without a class, and std::logic_error if the
/// result would place an unseen-verb clip in train.
SplitManifest assign_clip_splits(const std::vector<corpus::ClipRecord>& clips, const VerbClassMap& verb_class,
                                 const SplitConfig& cfg);

/// % of `items` whose video / verb / any object never occurs in `train`.
ZeroShotStats zero_shot_stats(const std::vector<const corpus::ClipRecord*>& train,
                              const std::vector<const corpus::ClipRecord*>& items);

// Manifest JSON-lines: one {"verb","class"} line per verb, one {"clip_id","split","clip"} line
// per clip in id order, and a trailing {"stats":{...}} line.
std::string manifest_to_jsonl(const SplitManifest& manifest, const std::vector<corpus::ClipRecord>& clips);

struct LoadedManifest {
    SplitManifest manifest;
    std::vector<corpus::ClipRecord> clips;  // id order

    std::vector<corpus::ClipRecord> clips_in(Split s) const;
};

LoadedManifest parse_manifest(std::string_view jsonl);

FrameIndex parse_frame_index(std::string_view json_text);
std::string frame_index_to_json(const FrameIndex& index);

}  // namespace cae::split
