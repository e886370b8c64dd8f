#pragma once

// Deterministic synthetic inputs: a lexical snapshot and subtitle pool for the demo pipeline,
// generated clip corpora for split and training tests, and cloze probe items.

#include <cstdint>
#include <string>
#include <vector>

#include "cae/corpus.hpp"
#include "cae/eval.hpp"
#include "cae/split.hpp"

namespace cae::synthetic {

/// Snapshot rows for the sure verbs attach, bend, chop, stretch, tie, split, grill, simmer and
/// the unsure verbs activate, block, carve, sniff, warm, plus the phrasal warm_up, hypernyms,
/// noun concreteness ratings and Kinetics verbs.
std::string demo_snapshot_jsonl();

struct SubtitleOptions {
    std::uint64_t seed = 7;
    std::size_t n_categories = 2;
    std::size_t tasks_per_category = 2;
    std::size_t videos_per_task = 6;
    std::size_t records_per_video = 20;
};

/// Annotated subtitle records mixing single-result-verb sentences with multi-verb, non-result,
/// phrasal and closely spaced distractors.
std::vector<corpus::SubtitleRecord> demo_subtitles(const SubtitleOptions& opts = {});

struct CorpusOptions {
    std::uint64_t seed = 42;
    std::size_t n_clips = 1000;
    std::size_t n_verbs = 40;
    std::size_t verbs_per_frame = 4;
    std::size_t n_videos = 100;
    std::size_t n_objects = 30;
    std::size_t n_categories = 4;
    double clip_len_s = 4.0;
    double clip_spacing_s = 10.0;
};

struct ClipCorpus {
    std::vector<corpus::ClipRecord> clips;
    split::FrameIndex frames;  // frame -> verbs
};

/// Clips of "<verb> the <object> <modifier>" where every clip text is unique when the object
/// and modifier pools allow it. Verbs are grouped verbs_per_frame to a frame.
ClipCorpus clip_corpus(const CorpusOptions& opts);

/// Probe items over the six affordance groups, balanced over answer positions and polarity.
std::vector<eval::ProbeItem> demo_probe_items(std::size_t per_group_polarity = 4, std::uint64_t seed = 3);

}  // namespace cae::synthetic
