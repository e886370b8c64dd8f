#include "cae/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "cae/checkpoint.hpp"

namespace cae::model {

using features::Segment;

namespace {

std::vector<PooledClip> pooled(const std::vector<PreparedClip>& clips) {
    std::vector<PooledClip> out;
    out.reserve(clips.size());
    for (const auto& c : clips) out.push_back({c.video_id, c.objects, c.frames});
    return out;
}

features::FrameSequence subsample(const features::FrameSequence& seq, std::size_t max_len) {
    if (seq.size() <= max_len) return seq;
    features::FrameSequence out;
    out.video_id = seq.video_id;
    out.dim = seq.dim;
    for (std::size_t k = 0; k < max_len; ++k) {
        const std::size_t i = k * seq.size() / max_len;
        out.times.push_back(seq.times[i]);
        const auto r = seq.row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
    }
    out.segments = features::segment_labels(out.size());
    return out;
}

Mat frame_matrix(const features::FrameSequence& seq) {
    Mat m(static_cast<Eigen::Index>(seq.size()), static_cast<Eigen::Index>(seq.dim));
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto r = seq.row(i);
        for (std::size_t d = 0; d < seq.dim; ++d)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = static_cast<double>(r[d]);
    }
    return m;
}

MaskingParams masking_params(const ModelConfig& cfg) {
    return {cfg.mask_prob, cfg.verb_replace_dist, cfg.vocab_size};
}

}  // namespace

PreparedClip prepare_clip(const corpus::ClipRecord& clip, const Vocab& vocab, const features::FeatureProvider& provider,
                          const ModelConfig& cfg) {
    PreparedClip p;
    p.id = clip.id();
    p.video_id = clip.video_id;
    p.verb = to_lower_ascii(clip.result_verb);
    p.objects = clip.objects;
    p.text = encode_clip_text(clip, vocab);
    if (p.text.ids.size() > cfg.max_text_len) {
        const std::size_t n = p.text.ids.size();
        const std::size_t half = cfg.max_text_len / 2;
        std::size_t start = p.text.verb_position > half ? p.text.verb_position - half : 0;
        start = std::min(start, n - cfg.max_text_len);
        p.text.ids = std::vector<TokenId>(p.text.ids.begin() + static_cast<std::ptrdiff_t>(start),
                                          p.text.ids.begin() + static_cast<std::ptrdiff_t>(start + cfg.max_text_len));
        p.text.verb_position -= start;
    }
    p.frames = subsample(features::build_frame_sequence(clip.video_id, clip.start_s, clip.end_s, provider),
                         cfg.max_video_len);
    return p;
}

Dataset::Dataset(std::vector<PreparedClip> clips) : clips_(std::move(clips)), pool_(pooled(clips_)) {}

Dataset Dataset::build(const std::vector<corpus::ClipRecord>& clips, const Vocab& vocab,
                       const features::FeatureProvider& provider, const ModelConfig& cfg) {
    std::vector<PreparedClip> prepared;
    std::vector<std::string> skipped;
    for (const auto& c : clips) {
        if (features::sample_frame_times(c.start_s, c.end_s).size() < 3) {
            skipped.push_back(c.id());
            continue;
        }
        prepared.push_back(prepare_clip(c, vocab, provider, cfg));
    }
    Dataset d(std::move(prepared));
    d.skipped_ = std::move(skipped);
    return d;
}

Vocab build_vocab(const std::vector<corpus::ClipRecord>& clips, std::size_t max_size) {
    std::map<std::string, std::size_t> counts;
    for (const auto& c : clips) count_clip_words(c, counts);
    return Vocab::build(counts, max_size);
}

Example make_mam_example(const ModelConfig& cfg, const PreparedClip& clip, Rng& rng, std::size_t record_index) {
    Example ex;
    ex.plan = mam_mask(clip.text.ids, clip.text.verb_position, cfg.masking_strategy, rng, masking_params(cfg),
                       record_index);
    ex.token_ids = ex.plan.apply(clip.text.ids);
    ex.frames = frame_matrix(clip.frames);
    ex.segments = clip.frames.segments;
    ex.ablation = cfg.ablation;
    return ex;
}

Example make_mam_inference_example(const ModelConfig& cfg, const PreparedClip& clip) {
    Example ex;
    ex.plan = verb_inference_plan(clip.text.ids, clip.text.verb_position);
    ex.token_ids = ex.plan.apply(clip.text.ids);
    ex.frames = frame_matrix(clip.frames);
    ex.segments = clip.frames.segments;
    ex.ablation = cfg.ablation;
    return ex;
}

Example make_mem_example(const ModelConfig& cfg, const Dataset& data, std::size_t clip_index, Rng& rng) {
    const auto& clip = data.clip(clip_index);
    Example ex;
    ex.token_ids = clip.text.ids;
    ex.frames = frame_matrix(clip.frames);
    ex.segments = clip.frames.segments;
    ex.ablation = cfg.ablation;
    for (auto& [frame, set] : mem_candidates(clip_index, data.pool(), cfg.neg_sampling, rng, cfg.candidate_cap)) {
        ex.frames.row(static_cast<Eigen::Index>(frame)).setZero();
        ex.mem_targets.push_back({frame, std::move(set)});
    }
    return ex;
}

Task task_for_step(TaskMode mode, std::uint64_t step) noexcept {
    switch (mode) {
        case TaskMode::Mam: return Task::Mam;
        case TaskMode::Mem: return Task::Mem;
        case TaskMode::Multi: return step % 2 == 0 ? Task::Mam : Task::Mem;
    }
    return Task::Mam;
}

Trainer::Trainer(ModelState state, const Dataset& train)
    : state_(std::move(state)),
      train_(train),
      opt_(state_.config.optimizer, state_.weights),
      rng_(mix_seed(state_.config.seed, fnv1a("trainer"))) {
    if (train_.size() == 0) throw std::invalid_argument("empty training set");
    std::vector<std::size_t> all(train_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (state_.config.task_mode == TaskMode::Multi) {
        if (all.size() < 2) throw std::invalid_argument("MULTI training needs at least two clips");
        Rng halves(mix_seed(state_.config.seed, fnv1a("multi-halves")));
        halves.shuffle(all);
        const std::size_t cut = (all.size() + 1) / 2;
        mam_clips_.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cut));
        mem_clips_.assign(all.begin() + static_cast<std::ptrdiff_t>(cut), all.end());
        std::sort(mam_clips_.begin(), mam_clips_.end());
        std::sort(mem_clips_.begin(), mem_clips_.end());
    } else {
        mam_clips_ = all;
        mem_clips_ = all;
    }
}

std::size_t Trainer::next_clip(Task t) {
    auto& order = t == Task::Mam ? mam_order_ : mem_order_;
    auto& cursor = t == Task::Mam ? mam_cursor_ : mem_cursor_;
    if (cursor >= order.size()) {
        order = task_clips(t);
        rng_.shuffle(order);
        cursor = 0;
    }
    return order[cursor++];
}

StepRecord Trainer::step() {
    const auto& cfg = state_.config;
    StepRecord rec;
    rec.step = state_.step;
    rec.task = task_for_step(cfg.task_mode, state_.step);
    rec.lr = learning_rate(cfg.optimizer, state_.step);

    Weights grad = state_.weights.zeros_like();
    const std::size_t total = cfg.batch_size * cfg.optimizer.grad_accum;
    const double scale = 1.0 / static_cast<double>(total);
    double loss = 0.0;
    try {
        for (std::size_t i = 0; i < total; ++i) {
            const std::size_t c = next_clip(rec.task);
            const Example ex = rec.task == Task::Mam ? make_mam_example(cfg, train_.clip(c), rng_, mam_records_++)
                                                     : make_mem_example(cfg, train_, c, rng_);
            loss += loss_and_grad(state_, ex, rec.task, &grad, scale);
        }
    } catch (const NumericalError& e) {
        throw TrainingAborted(std::string(e.what()) + " at step " + std::to_string(rec.step) +
                              "; last good checkpoint: " + last_good_);
    }
    rec.loss = loss * scale;
    bool finite = std::isfinite(rec.loss);
    visit_tensors(grad, [&](const std::string&, const Mat& g, bool) { finite = finite && g.allFinite(); });
    if (!finite)
        throw TrainingAborted("non-finite loss or gradient at step " + std::to_string(rec.step) +
                              "; last good checkpoint: " + last_good_);
    opt_.step(state_.weights, grad, state_.step);
    ++state_.step;
    history_.push_back(rec);
    return rec;
}

std::vector<MamPrediction> predict_mam(const ModelState& state, const Dataset& data) {
    std::vector<MamPrediction> out;
    for (const auto& c : data.clips()) {
        const auto ids = mam_predict(state, make_mam_inference_example(state.config, c));
        out.push_back({c.id, c.verb, state.vocab.token(ids.at(0))});
    }
    return out;
}

std::vector<MemPrediction> predict_mem(const ModelState& state, const Dataset& data, std::uint64_t seed) {
    std::vector<MemPrediction> out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        Rng rng(mix_seed(seed, fnv1a(data.clip(i).id)));
        const Example ex = make_mem_example(state.config, data, i, rng);
        const auto chosen = mem_predict(state, ex);
        MemPrediction p{data.clip(i).id, {}};
        for (std::size_t k = 0; k < chosen.size(); ++k)
            p.frames_correct.push_back(chosen[k] == ex.mem_targets[k].candidates.positive);
        out.push_back(std::move(p));
    }
    return out;
}

double mam_accuracy(const std::vector<MamPrediction>& preds) {
    if (preds.empty()) throw std::invalid_argument("no predictions");
    std::size_t ok = 0;
    for (const auto& p : preds) ok += p.reference == p.predicted;
    return 100.0 * static_cast<double>(ok) / static_cast<double>(preds.size());
}

double mem_accuracy(const std::vector<MemPrediction>& preds) {
    if (preds.empty()) throw std::invalid_argument("no predictions");
    std::size_t ok = 0;
    for (const auto& p : preds)
        ok += !p.frames_correct.empty() && std::all_of(p.frames_correct.begin(), p.frames_correct.end(),
                                                       [](bool b) { return b; });
    return 100.0 * static_cast<double>(ok) / static_cast<double>(preds.size());
}

double validation_score(const ModelState& state, const Dataset& val) {
    switch (state.config.task_mode) {
        case TaskMode::Mam: return mam_accuracy(predict_mam(state, val));
        case TaskMode::Mem: return mem_accuracy(predict_mem(state, val, state.config.seed));
        case TaskMode::Multi:
            return 0.5 * (mam_accuracy(predict_mam(state, val)) +
                          mem_accuracy(predict_mem(state, val, state.config.seed)));
    }
    return 0.0;
}

PretrainResult pretrain(ModelState init, const Dataset& train, const Dataset& val, const PretrainOptions& opts) {
    Trainer trainer(std::move(init), train);
    PretrainResult result;
    result.best = trainer.state();

    auto evaluate = [&] {
        if (val.size() == 0) {
            result.best = trainer.state();
            result.best_step = trainer.state().step;
            return;
        }
        const double score = validation_score(trainer.state(), val);
        if (opts.on_eval) opts.on_eval(trainer.state().step, score);
        if (score > result.best_score) {
            result.best_score = score;
            result.best_step = trainer.state().step;
            result.best = trainer.state();
            if (!opts.checkpoint_path.empty()) {
                save_checkpoint(result.best, opts.checkpoint_path);
                trainer.set_last_good(opts.checkpoint_path + " (step " + std::to_string(result.best_step) + ")");
            }
        }
    };

    for (std::uint64_t s = 0; s < opts.steps; ++s) {
        const auto rec = trainer.step();
        if (opts.on_step) opts.on_step(rec);
        if (opts.eval_interval > 0 && (s + 1) % opts.eval_interval == 0 && s + 1 < opts.steps) evaluate();
    }
    evaluate();
    if (val.size() == 0 && !opts.checkpoint_path.empty()) save_checkpoint(result.best, opts.checkpoint_path);
    result.history = trainer.history();
    return result;
}

GradCheckResult grad_check(const ModelState& state, const Example& ex, Task task, double epsilon, double floor) {
    ModelState probe = state;
    Weights analytic = state.weights.zeros_like();
    loss_and_grad(state, ex, task, &analytic, 1.0);

    std::vector<std::pair<std::string, Mat*>> params;
    std::vector<const Mat*> grads;
    visit_tensors(probe.weights, [&](const std::string& name, Mat& m, bool) { params.emplace_back(name, &m); });
    visit_tensors(analytic, [&](const std::string&, const Mat& m, bool) { grads.push_back(&m); });

    GradCheckResult r;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Mat& p = *params[t].second;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double orig = p.data()[i];
            p.data()[i] = orig + epsilon;
            const double lp = loss_and_grad(probe, ex, task, nullptr);
            p.data()[i] = orig - epsilon;
            const double lm = loss_and_grad(probe, ex, task, nullptr);
            p.data()[i] = orig;
            const double numeric = (lp - lm) / (2.0 * epsilon);
            const double a = grads[t]->data()[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            ++r.n_checked;
            if (rel > r.max_rel_error) {
                r.max_rel_error = rel;
                r.worst_tensor = params[t].first;
                r.worst_analytic = a;
                r.worst_numeric = numeric;
            }
        }
    }
    return r;
}

}  // namespace cae::model
