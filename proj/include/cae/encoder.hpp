#pragma once

// Hierarchical video-language encoder: input embedders, a cross-modal transformer over the
// concatenated [text; video] sequence, and a temporal transformer over the video half whose
// output is added back to the local video embeddings. Heads: MAM (vocabulary logits on local
// text embeddings) and MEM (projection of final video embeddings scored against candidates).
//
// Everything is computed in double precision with hand-written backward passes.

#include <cstdint>
#include <concepts>
#include <functional>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cae/candidates.hpp"
#include "cae/config.hpp"
#include "cae/features.hpp"
#include "cae/masking.hpp"
#include "cae/tokenizer.hpp"

namespace cae::model {

using Mat = Eigen::MatrixXd;

/// allowed(i, j) = 1 when position i may attend to position j.
using AttentionMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct LayerWeights {
    Mat ln1_g, ln1_b;
    Mat wq, bq, wk, bk, wv, bv, wo, bo;
    Mat ln2_g, ln2_b;
    Mat w1, b1, w2, b2;
};

/// Every trainable tensor. Row vectors are stored as 1 x N matrices.
struct Weights {
    Mat tok_emb, text_pos, text_seg, text_ln_g, text_ln_b;
    Mat feat_proj, feat_bias, video_pos, video_seg, video_ln_g, video_ln_b;
    std::vector<LayerWeights> cross;
    std::vector<LayerWeights> temporal;
    Mat temporal_ln_g, temporal_ln_b;
    Mat mam_ln_g, mam_ln_b, mam_out, mam_bias;
    Mat mem_proj, mem_bias;

    /// Same shapes, all zeros.
    Weights zeros_like() const;
    std::size_t parameter_count() const;
};

namespace detail {

template <class L, class F>
void visit_layer(L& l, const std::string& prefix, F& f) {
    f(prefix + "ln1.g", l.ln1_g, false);
    f(prefix + "ln1.b", l.ln1_b, false);
    f(prefix + "attn.wq", l.wq, true);
    f(prefix + "attn.bq", l.bq, false);
    f(prefix + "attn.wk", l.wk, true);
    f(prefix + "attn.bk", l.bk, false);
    f(prefix + "attn.wv", l.wv, true);
    f(prefix + "attn.bv", l.bv, false);
    f(prefix + "attn.wo", l.wo, true);
    f(prefix + "attn.bo", l.bo, false);
    f(prefix + "ln2.g", l.ln2_g, false);
    f(prefix + "ln2.b", l.ln2_b, false);
    f(prefix + "mlp.w1", l.w1, true);
    f(prefix + "mlp.b1", l.b1, false);
    f(prefix + "mlp.w2", l.w2, true);
    f(prefix + "mlp.b2", l.b2, false);
}

}  // namespace detail

/// Calls f(name, tensor, decays) for every tensor of `w` in a fixed order. `decays` is true
/// for weight matrices and false for biases, gains and embeddings. Works on const and
/// mutable Weights.
template <class W, class F>
    requires std::same_as<std::remove_const_t<W>, Weights>
void visit_tensors(W& w, F&& f) {
    f("embed.tok", w.tok_emb, false);
    f("embed.text_pos", w.text_pos, false);
    f("embed.text_seg", w.text_seg, false);
    f("embed.text_ln.g", w.text_ln_g, false);
    f("embed.text_ln.b", w.text_ln_b, false);
    f("embed.feat_proj", w.feat_proj, true);
    f("embed.feat_bias", w.feat_bias, false);
    f("embed.video_pos", w.video_pos, false);
    f("embed.video_seg", w.video_seg, false);
    f("embed.video_ln.g", w.video_ln_g, false);
    f("embed.video_ln.b", w.video_ln_b, false);
    for (std::size_t i = 0; i < w.cross.size(); ++i) detail::visit_layer(w.cross[i], "cross." + std::to_string(i) + ".", f);
    for (std::size_t i = 0; i < w.temporal.size(); ++i)
        detail::visit_layer(w.temporal[i], "temporal." + std::to_string(i) + ".", f);
    f("temporal.ln.g", w.temporal_ln_g, false);
    f("temporal.ln.b", w.temporal_ln_b, false);
    f("mam.ln.g", w.mam_ln_g, false);
    f("mam.ln.b", w.mam_ln_b, false);
    f("mam.out", w.mam_out, true);
    f("mam.bias", w.mam_bias, false);
    f("mem.proj", w.mem_proj, true);
    f("mem.bias", w.mem_bias, false);
}

/// Visits the same tensor of two structurally identical Weights in lockstep.
template <class F>
void visit_pairs(Weights& a, const Weights& b, F&& f) {
    std::vector<const Mat*> rhs;
    visit_tensors(b, [&](const std::string&, const Mat& m, bool) { rhs.push_back(&m); });
    std::size_t i = 0;
    visit_tensors(a, [&](const std::string& name, Mat& m, bool decays) { f(name, m, *rhs.at(i++), decays); });
}

/// Shapes are a pure function of the config. Gains start at 1, biases at 0, everything else
/// N(0, init_std^2).
Weights init_weights(const ModelConfig& cfg, std::uint64_t seed);

struct ModelState {
    ModelConfig config;
    Weights weights;
    Vocab vocab;
    std::uint64_t step = 0;

    static ModelState create(const ModelConfig& cfg, Vocab vocab);
};

struct MemTarget {
    std::size_t frame = 0;  // row in Example::frames
    CandidateSet candidates;
};

/// One clip-subtitle pair ready for the encoder.
struct Example {
    std::vector<TokenId> token_ids;    // model input, masking already applied
    MaskingPlan plan;                  // MAM targets (may be empty)
    Mat frames;                        // |V| x feature_dim, masked [AFT] rows zeroed
    std::vector<features::Segment> segments;
    std::vector<MemTarget> mem_targets;
    Ablation ablation = Ablation::None;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Blocks text<->video attention under either ablation.
AttentionMask attention_mask(std::size_t n_text, std::size_t n_video, Ablation ablation);

/// LN(token + position + text segment) rows followed by LN(projected feature + position +
/// segment) rows. Throws std::invalid_argument on length or feature-dimension mismatch.
Mat embed_inputs(const ModelState& state, const Example& ex);

Mat cross_modal_encode(const ModelState& state, const Mat& embeddings, const AttentionMask& mask);

/// local + LN(temporal stack(local)).
Mat temporal_encode(const ModelState& state, const Mat& local_video);

struct EncoderOutput {
    Mat local_text;   // |S| x H
    Mat local_video;  // |V| x H
    Mat final_video;  // |V| x H
};

EncoderOutput encode(const ModelState& state, const Example& ex);

/// Vocabulary logits for each row of `local_text` selected by `positions`.
Mat mam_logits(const ModelState& state, const Mat& local_text, const std::vector<std::size_t>& positions);

/// Mean cross-entropy of the original ids at the plan's positions. Throws on an empty plan.
double mam_loss(const ModelState& state, const Mat& local_text, const MaskingPlan& plan);

/// MEM scores (before temperature) of each candidate for the masked frame.
Eigen::VectorXd mem_scores(const ModelState& state, const Mat& final_video, const MemTarget& target);

/// Argmax with ties to the lowest index.
std::size_t argmax_lowest(const Eigen::VectorXd& v);

/// Predicted token per plan target (argmax over the vocabulary). Throws if the plan is empty.
std::vector<TokenId> mam_predict(const ModelState& state, const Example& ex);

/// Chosen candidate per MEM target. Throws if a candidate set is empty.
std::vector<std::size_t> mem_predict(const ModelState& state, const Example& ex);

/// Loss of `task` on one example; when `grad` is non-null, adds scale * dLoss/dWeights into it.
double loss_and_grad(const ModelState& state, const Example& ex, Task task, Weights* grad, double scale = 1.0);

}  // namespace cae::model
