#pragma once

// Video-pool filtering and causal action-effect clip extraction from
// pre-annotated subtitle records (lemma, UPOS and dependency labels are inputs).

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cae::corpus {

struct Token {
    std::string surface;
    std::string lemma;
    std::string upos;
    std::string dep_label;

    bool operator==(const Token&) const = default;
};

struct SubtitleRecord {
    std::string video_id;
    std::string category;
    std::string task_id;
    std::int64_t view_count = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string text;
    std::vector<Token> tokens;
};

struct ClipRecord {
    std::string video_id;
    std::string category;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string result_verb;
    std::size_t verb_token_index = 0;
    std::set<std::string> objects;
    std::vector<Token> tokens;
    std::string text;

    /// Stable identifier "<video_id>@<start in ms>". Unique because accepted clips of one
    /// video are at least the minimum gap apart.
    std::string id() const;

    bool operator==(const ClipRecord&) const = default;
};

struct Diagnostic {
    std::string video_id;
    double start_s = 0.0;
    std::string message;
};

struct PoolFilter {
    std::size_t min_verb_types = 15;
    std::size_t min_clips_per_verb = 100;
    std::size_t top_k_per_task = 15;
};

/// Keeps categories with more than `min_verb_types` verb types that each occur in more than
/// `min_clips_per_verb` records, then the `top_k_per_task` most viewed videos of every task
/// (ties by video id).
std::set<std::string> filter_video_pool(const std::vector<SubtitleRecord>& records,
                                        const std::set<std::string>& result_verbs, const PoolFilter& opts = {});

struct ExtractOptions {
    double min_gap_s = 5.0;
    double object_min_concreteness = 4.0;  // strict: rating must exceed it
    std::set<std::string> object_deps = {"dobj", "pobj"};
};

/// Streaming extractor. Feed records in per-video start order; every accepted clip is
/// handed to the sink immediately. Per-video state is only the last accepted start time.
class ClipExtractor {
public:
    using Sink = std::function<void(ClipRecord)>;
    using DiagnosticSink = std::function<void(Diagnostic)>;

    ClipExtractor(std::set<std::string> result_verbs, const std::map<std::string, double>& concreteness,
                  ExtractOptions opts, Sink sink, DiagnosticSink diag = {});

    void push(const SubtitleRecord& rec);

private:
    std::set<std::string> verbs_;
    const std::map<std::string, double>& concreteness_;
    ExtractOptions opts_;
    Sink sink_;
    DiagnosticSink diag_;
    std::map<std::string, double> last_start_;
};

struct ExtractResult {
    std::vector<ClipRecord> clips;
    std::vector<Diagnostic> diagnostics;
};

/// Batch form: stable-sorts records by (video_id, start_s) and runs the streaming extractor.
/// Phrasal lemmas (containing '_') are never treated as result verbs.
ExtractResult extract_cae_clips(std::vector<SubtitleRecord> records, const std::set<std::string>& result_verbs,
                                const std::map<std::string, double>& concreteness, const ExtractOptions& opts = {});

/// Treats a clip as a subtitle record again (used for idempotence checks and re-extraction).
SubtitleRecord as_record(const ClipRecord& clip);

struct CategoryStats {
    std::size_t n_videos = 0;
    std::size_t n_clips = 0;
    std::vector<std::string> top_verbs;

    bool operator==(const CategoryStats&) const = default;
};

std::map<std::string, CategoryStats> corpus_stats(const std::vector<ClipRecord>& clips, std::size_t top_n = 5);

// JSON-lines I/O.
std::vector<SubtitleRecord> parse_subtitles(std::string_view jsonl);
std::vector<ClipRecord> parse_clips(std::string_view jsonl);
std::string to_jsonl(const std::vector<ClipRecord>& clips);
std::string to_jsonl(const std::vector<SubtitleRecord>& records);

}  // namespace cae::corpus
