#pragma once

// Stage orchestration with dependency checks, provenance records and quarantine of partial
// outputs.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cae/config.hpp"
#include "cae/lexicon.hpp"
#include "cae/corpus.hpp"
#include "cae/eval.hpp"
#include "cae/trainer.hpp"
#include "cae/split.hpp"

namespace cae::pipeline {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kQuarantineSuffix = ".quarantine";

enum class Stage { Verbs, Extract, Split, Features, Pretrain, Eval, Probe };

std::string_view to_string(Stage s) noexcept;
Stage stage_from_string(std::string_view s);
/// Comma-separated list; throws std::invalid_argument on an unknown name.
std::vector<Stage> parse_stages(std::string_view csv);

struct Paths {
    std::string snapshot;
    std::string pool;
    std::string features;  // optional CAEF input; synthetic features when empty
    std::string probe;
    std::string out_dir = "out";
};

struct TrainSettings {
    std::uint64_t steps = 200;
    std::size_t eval_interval = 50;
};

struct PipelineConfig {
    std::uint64_t seed = 42;
    Paths paths;
    corpus::PoolFilter pool_filter;
    corpus::ExtractOptions extract;
    split::SplitConfig split;
    model::ModelConfig model;
    TrainSettings train;
    std::vector<Stage> stages;
};

/// Relative paths are resolved against `base_dir`. Unknown keys are rejected.
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::string& base_dir);
PipelineConfig load_pipeline_config(const std::string& path);

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kStageFailure = 1;
inline constexpr int kUsageError = 2;

/// Runs `stages` in pipeline order. Missing inputs give kUsageError before anything runs; a
/// throwing stage gives kStageFailure and its partial outputs are renamed with
/// kQuarantineSuffix.
int run(const PipelineConfig& cfg, const std::vector<Stage>& stages, std::ostream& log);

/// Artifact file names inside out_dir.
namespace artifact {
inline constexpr const char* kVerbs = "result_verbs.jsonl";
inline constexpr const char* kClips = "clips.jsonl";
inline constexpr const char* kManifest = "manifest.jsonl";
inline constexpr const char* kFeatures = "features.caef";
inline constexpr const char* kModel = "model.caem";
inline constexpr const char* kEval = "eval_report.json";
inline constexpr const char* kProbe = "probe_report.json";
}  // namespace artifact

/// {"stage","version","seed","inputs":{name:hash},"outputs":{name:hash}} with FNV-1a-64 hex
/// digests of file contents.
nlohmann::json provenance_record(Stage stage, std::uint64_t seed, const std::vector<std::string>& inputs,
                                 const std::vector<std::string>& outputs);

/// Single-stage operations shared by `run` and the CLI subcommands. Each writes its artifact
/// to `out`.
namespace ops {

/// Result verbs of a snapshot.
std::vector<lexicon::ResultVerb> verbs(const std::string& snapshot, const std::string& out);

/// Pool filtering then clip extraction with the sure verbs (all non-phrasal verbs when
/// include_unsure). Concreteness ratings come from a snapshot file.
corpus::ExtractResult extract(const std::string& pool, const std::string& verbs_file, const std::string& concreteness,
                              const corpus::PoolFilter& filter, const corpus::ExtractOptions& opts,
                              const std::string& out, bool include_unsure = false);

/// Frames come from the result-verb file; Kinetics verbs from the optional snapshot.
split::SplitManifest split(const std::string& clips, const std::string& verbs_file, const std::string& snapshot,
                           split::SplitConfig cfg, const std::string& out);

/// Feature rows for every sampled frame of every manifest clip, from `source` (a CAEF file)
/// or synthetic features when `source` is empty.
void features(const std::string& manifest, std::size_t dim, const std::string& source, const std::string& out);

model::PretrainResult pretrain(const std::string& manifest, const std::string& features_file, model::ModelConfig cfg,
                               const TrainSettings& train, const std::string& out, std::ostream& log);

/// JSON-lines {"clip_id","reference","predicted"}.
std::vector<model::MamPrediction> predict_mam(const std::string& checkpoint, const std::string& manifest,
                                              const std::string& features_file, split::Split which,
                                              const std::string& out);
/// JSON-lines {"clip_id","frames_correct"}.
std::vector<model::MemPrediction> predict_mem(const std::string& checkpoint, const std::string& manifest,
                                              const std::string& features_file, split::Split which,
                                              const std::string& out);

/// MAP with the generalization analysis over unseen-class errors, and MEP. Writes `out` and a
/// table dump next to it (".txt").
eval::EvalReport evaluate(const std::string& checkpoint, const std::string& manifest,
                          const std::string& features_file, const std::string& verbs_file,
                          const std::string& snapshot, split::Split which, const std::string& out);

/// Cloze probe with the MAM head. Writes the robustness report and a table dump.
eval::EvalReport probe(const std::string& checkpoint, const std::string& items, const std::string& out);

std::vector<eval::MapPrediction> read_map_predictions(const std::string& path);
std::vector<std::vector<bool>> read_mep_predictions(const std::string& path);

/// Writes `report` as JSON to `out` and as a table to `out + ".txt"`.
void write_report(const eval::EvalReport& report, const std::string& out);

}  // namespace ops

}  // namespace cae::pipeline
