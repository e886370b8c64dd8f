#pragma once

// Dataset preparation, example assembly, the optimizer loop and accuracy evaluation.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cae/candidates.hpp"
#include "cae/corpus.hpp"
#include "cae/encoder.hpp"
#include "cae/features.hpp"
#include "cae/optimizer.hpp"
#include "cae/tokenizer.hpp"

namespace cae::model {

/// A clip with its encoded subtitle and frame sequence, cut to the model's length limits.
struct PreparedClip {
    std::string id;
    std::string video_id;
    std::string verb;  // lemma
    std::set<std::string> objects;
    EncodedText text;
    features::FrameSequence frames;
};

/// Text longer than max_text_len keeps a window centred on the verb. Frame sequences longer
/// than max_video_len are subsampled evenly and re-segmented.
PreparedClip prepare_clip(const corpus::ClipRecord& clip, const Vocab& vocab, const features::FeatureProvider& provider,
                          const ModelConfig& cfg);

class Dataset {
public:
    explicit Dataset(std::vector<PreparedClip> clips);

    /// Clips whose padded window yields fewer than three frames are left out and listed in
    /// skipped().
    static Dataset build(const std::vector<corpus::ClipRecord>& clips, const Vocab& vocab,
                         const features::FeatureProvider& provider, const ModelConfig& cfg);

    const std::vector<std::string>& skipped() const noexcept { return skipped_; }

    std::size_t size() const noexcept { return clips_.size(); }
    const PreparedClip& clip(std::size_t i) const { return clips_.at(i); }
    const std::vector<PreparedClip>& clips() const noexcept { return clips_; }
    /// Negative pool over the same clips.
    const FramePool& pool() const noexcept { return pool_; }

private:
    std::vector<PreparedClip> clips_;
    FramePool pool_;
    std::vector<std::string> skipped_;
};

/// Vocabulary over all clip texts and verb lemmas.
Vocab build_vocab(const std::vector<corpus::ClipRecord>& clips, std::size_t max_size);

/// Training example: masking per the configured strategy.
Example make_mam_example(const ModelConfig& cfg, const PreparedClip& clip, Rng& rng, std::size_t record_index);
/// Inference example: only the verb is masked.
Example make_mam_inference_example(const ModelConfig& cfg, const PreparedClip& clip);
/// Every [AFT] frame is zeroed and gets its own candidate set drawn from the dataset pool.
Example make_mem_example(const ModelConfig& cfg, const Dataset& data, std::size_t clip_index, Rng& rng);

/// Task trained on optimizer update `step`.
Task task_for_step(TaskMode mode, std::uint64_t step) noexcept;

struct StepRecord {
    std::uint64_t step = 0;
    Task task = Task::Mam;
    double loss = 0.0;
    double lr = 0.0;
};

class TrainingAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Owns the model state during training. One update = grad_accum micro-batches of
/// batch_size examples; MULTI alternates MAM and MEM updates, each task drawing from its own
/// seeded half of the training clips.
class Trainer {
public:
    Trainer(ModelState state, const Dataset& train);

    StepRecord step();
    const ModelState& state() const noexcept { return state_; }
    ModelState& state() noexcept { return state_; }
    const std::vector<StepRecord>& history() const noexcept { return history_; }
    const std::vector<std::size_t>& task_clips(Task t) const { return t == Task::Mam ? mam_clips_ : mem_clips_; }

    /// Reference reported when a step aborts on a non-finite loss.
    void set_last_good(std::string ref) { last_good_ = std::move(ref); }

private:
    std::size_t next_clip(Task t);

    ModelState state_;
    const Dataset& train_;
    AdamW opt_;
    Rng rng_;
    std::vector<std::size_t> mam_clips_, mem_clips_;
    std::vector<std::size_t> mam_order_, mem_order_;
    std::size_t mam_cursor_ = 0, mem_cursor_ = 0;
    std::size_t mam_records_ = 0;
    std::vector<StepRecord> history_;
    std::string last_good_ = "none";
};

struct MamPrediction {
    std::string clip_id;
    std::string reference;
    std::string predicted;
};

std::vector<MamPrediction> predict_mam(const ModelState& state, const Dataset& data);

struct MemPrediction {
    std::string clip_id;
    std::vector<bool> frames_correct;
};

/// Candidate sets are seeded per clip from `seed`, so repeated calls agree.
std::vector<MemPrediction> predict_mem(const ModelState& state, const Dataset& data, std::uint64_t seed);

double mam_accuracy(const std::vector<MamPrediction>& preds);
double mem_accuracy(const std::vector<MemPrediction>& preds);

struct PretrainOptions {
    std::uint64_t steps = 0;
    std::size_t eval_interval = 0;  // 0 = evaluate only at the end
    std::string checkpoint_path;    // best checkpoint is written here when non-empty
    std::function<void(const StepRecord&)> on_step;
    std::function<void(std::uint64_t step, double score)> on_eval;
};

struct PretrainResult {
    ModelState best;
    double best_score = -1.0;
    std::uint64_t best_step = 0;
    std::vector<StepRecord> history;
};

/// Validation score: task accuracy, or the mean of both accuracies for MULTI.
double validation_score(const ModelState& state, const Dataset& val);

PretrainResult pretrain(ModelState init, const Dataset& train, const Dataset& val, const PretrainOptions& opts);

/// Max over all parameters of |analytic - numeric| / max(|analytic|, |numeric|, floor), using
/// central differences with step `epsilon`.
struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t n_checked = 0;
};

GradCheckResult grad_check(const ModelState& state, const Example& ex, Task task, double epsilon = 1e-5,
                           double floor = 1e-6);

}  // namespace cae::model
