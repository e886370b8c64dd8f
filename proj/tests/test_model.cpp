#include <gtest/gtest.h>

#include <cmath>

#include "cae/candidates.hpp"
#include "cae/encoder.hpp"
#include "cae/masking.hpp"
#include "cae/tokenizer.hpp"
#include "cae/trainer.hpp"
#include "support.hpp"

using namespace cae;
using namespace cae::model;
using cae::test::random_matrix;

namespace {

// Reference arithmetic written with plain loops.
std::vector<double> ref_ln(const std::vector<double>& x, const Mat& g, const Mat& b, double eps) {
    const double n = static_cast<double>(x.size());
    double mu = 0.0, var = 0.0;
    for (double v : x) mu += v;
    mu /= n;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= n;
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = (x[i] - mu) / std::sqrt(var + eps) * g(0, static_cast<Eigen::Index>(i)) + b(0, static_cast<Eigen::Index>(i));
    return y;
}

std::vector<double> row_of(const Mat& m, Eigen::Index r) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
    return v;
}

std::vector<double> affine(const std::vector<double>& x, const Mat& w, const Mat& b) {
    std::vector<double> y(static_cast<std::size_t>(w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        double s = b(0, j);
        for (Eigen::Index i = 0; i < w.rows(); ++i) s += x[static_cast<std::size_t>(i)] * w(i, j);
        y[static_cast<std::size_t>(j)] = s;
    }
    return y;
}

Mat ref_layer(const LayerWeights& w, const Mat& x, const AttentionMask& mask, std::size_t heads, double eps) {
    const auto n = x.rows();
    const auto h = static_cast<std::size_t>(x.cols());
    const std::size_t dh = h / heads;
    std::vector<std::vector<double>> q, k, v;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto a = ref_ln(row_of(x, i), w.ln1_g, w.ln1_b, eps);
        q.push_back(affine(a, w.wq, w.bq));
        k.push_back(affine(a, w.wk, w.bk));
        v.push_back(affine(a, w.wv, w.bv));
    }
    Mat out(n, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> o(h, 0.0);
        for (std::size_t hd = 0; hd < heads; ++hd) {
            std::vector<double> s(static_cast<std::size_t>(n), 0.0);
            double mx = -1e300;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!mask(i, j)) continue;
                double dot = 0.0;
                for (std::size_t d = 0; d < dh; ++d) dot += q[i][hd * dh + d] * k[j][hd * dh + d];
                s[j] = dot / std::sqrt(static_cast<double>(dh));
                mx = std::max(mx, s[j]);
            }
            double z = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (mask(i, j)) z += std::exp(s[j] - mx);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!mask(i, j)) continue;
                const double p = std::exp(s[j] - mx) / z;
                for (std::size_t d = 0; d < dh; ++d) o[hd * dh + d] += p * v[j][hd * dh + d];
            }
        }
        auto x1 = affine(o, w.wo, w.bo);
        for (std::size_t c = 0; c < h; ++c) x1[c] += x(i, static_cast<Eigen::Index>(c));
        auto hid = affine(ref_ln(x1, w.ln2_g, w.ln2_b, eps), w.w1, w.b1);
        for (double& t : hid) t = 0.5 * t * (1.0 + std::erf(t / std::sqrt(2.0)));
        const auto m = affine(hid, w.w2, w.b2);
        for (std::size_t c = 0; c < h; ++c) out(i, static_cast<Eigen::Index>(c)) = x1[c] + m[c];
    }
    return out;
}

void randomize(Weights& w, std::uint64_t seed) {
    Rng rng(seed);
    visit_tensors(w, [&](const std::string&, Mat& m, bool) { m = 0.5 * random_matrix(m.rows(), m.cols(), rng); });
}

void zero_layer(LayerWeights& l) {
    for (Mat* m : {&l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo, &l.w1, &l.b1, &l.w2, &l.b2}) m->setZero();
}

PooledClip pooled(const std::string& video, std::vector<double> times, std::set<std::string> objects = {}) {
    PooledClip c;
    c.video_id = video;
    c.objects = std::move(objects);
    c.frames.video_id = video;
    c.frames.times = std::move(times);
    c.frames.segments = features::segment_labels(c.frames.times.size());
    c.frames.dim = 3;
    for (double t : c.frames.times) {
        const auto f = features::synth_features(video, t, 3);
        c.frames.features.insert(c.frames.features.end(), f.begin(), f.end());
    }
    return c;
}

}  // namespace

// Tokenizer -------------------------------------------------------------------------------------

TEST(Tokenizer, SplitsWordsAndKeepsMask) {
    EXPECT_EQ(split_words("Chop the Carrots, don't [MASK] it!"),
              (std::vector<std::string>{"chop", "the", "carrots", "don't", "[MASK]", "it"}));
    EXPECT_EQ(normalize_text("  Peel   THE apple. "), "peel the apple");
}

TEST(Tokenizer, VocabOrderingCapAndUnknowns) {
    const auto v = Vocab::build({{"the", 9}, {"cut", 4}, {"apple", 4}, {"rare", 1}}, 6);
    EXPECT_EQ(v.tokens(), (std::vector<std::string>{"[PAD]", "[UNK]", "[MASK]", "the", "apple", "cut"}));
    EXPECT_EQ(v.id("rare"), Vocab::kUnk);
    EXPECT_EQ(tokenize("cut the [MASK]", v), (std::vector<TokenId>{5, 3, Vocab::kMask}));
    EXPECT_EQ(detokenize(tokenize("Cut the apple", v), v), "cut the apple");
    EXPECT_THROW(Vocab::from_tokens({"a", "b", "c"}), std::invalid_argument);
}

TEST(Tokenizer, ClipVerbIsEncodedByLemma) {
    corpus::ClipRecord c;
    c.result_verb = "chop";
    c.verb_token_index = 1;
    c.tokens = {test::tok("I", "i", "PRON", "nsubj"), test::tok("chopped", "chop", "VERB", "ROOT"),
                test::tok("onions", "onion", "NOUN", "dobj")};
    const auto v = Vocab::from_tokens({"[PAD]", "[UNK]", "[MASK]", "i", "chop", "onions"});
    const auto enc = encode_clip_text(c, v);
    EXPECT_EQ(enc.ids, (std::vector<TokenId>{3, 4, 5}));
    EXPECT_EQ(enc.verb_position, 1u);
    std::map<std::string, std::size_t> counts;
    count_clip_words(c, counts);
    EXPECT_EQ(counts, (std::map<std::string, std::size_t>{{"chop", 1}, {"i", 1}, {"onions", 1}}));
}

// Masking ---------------------------------------------------------------------------------------

TEST(Masking, VerbOnlyTargetsTheVerb) {
    Rng rng(1);
    const std::vector<TokenId> ids{3, 4, 5, 6};
    MaskingParams p;
    p.replace_dist = {1.0, 0.0, 0.0};
    p.vocab_size = 10;
    const auto plan = mam_mask(ids, 1, MaskingStrategy::VerbOnly, rng, p);
    ASSERT_EQ(plan.targets.size(), 1u);
    EXPECT_EQ(plan.targets[0], (MaskedPosition{1, 4, Replacement::Mask, Vocab::kMask}));
    EXPECT_EQ(plan.apply(ids), (std::vector<TokenId>{3, Vocab::kMask, 5, 6}));
}

TEST(Masking, ReplacementKindsFollowDistribution) {
    Rng rng(2);
    const std::vector<TokenId> ids{3, 4};
    MaskingParams p;
    p.vocab_size = 50;
    std::array<int, 3> n{};
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        const auto t = mam_mask(ids, 0, MaskingStrategy::VerbOnly, rng, p).targets.at(0);
        ++n[static_cast<std::size_t>(t.kind)];
        if (t.kind == Replacement::Random) {
            EXPECT_GE(t.replacement, Vocab::kReserved);
            EXPECT_LT(t.replacement, 50);
        }
        if (t.kind == Replacement::Unchanged) EXPECT_EQ(t.replacement, 3);
    }
    EXPECT_NEAR(n[0] / double(trials), 0.80, 0.015);
    EXPECT_NEAR(n[1] / double(trials), 0.15, 0.015);
    EXPECT_NEAR(n[2] / double(trials), 0.05, 0.01);
}

TEST(Masking, AlterSwitchesByRecordParity) {
    Rng rng(3);
    const std::vector<TokenId> ids{3, 4, 5, 6, 7, 8};
    MaskingParams p;
    p.vocab_size = 10;
    for (std::size_t r = 0; r < 200; ++r) {
        const auto plan = mam_mask(ids, 2, MaskingStrategy::VerbRandomAlter, rng, p, r);
        ASSERT_FALSE(plan.empty());
        const bool has_verb = std::any_of(plan.targets.begin(), plan.targets.end(),
                                          [](const auto& t) { return t.position == 2; });
        if (r % 2 == 0) {
            EXPECT_EQ(plan.targets.size(), 1u);
            EXPECT_TRUE(has_verb);
        } else {
            EXPECT_FALSE(has_verb);
        }
    }
}

TEST(Masking, JointAlwaysIncludesVerbPlusRandomTokens) {
    Rng rng(4);
    std::vector<TokenId> ids(40, 9);
    MaskingParams p;
    p.vocab_size = 10;
    std::size_t extra = 0;
    const int trials = 500;
    for (int i = 0; i < trials; ++i) {
        const auto plan = mam_mask(ids, 7, MaskingStrategy::VerbRandomJoint, rng, p);
        EXPECT_TRUE(std::any_of(plan.targets.begin(), plan.targets.end(), [](const auto& t) { return t.position == 7; }));
        EXPECT_TRUE(std::is_sorted(plan.targets.begin(), plan.targets.end(),
                                   [](const auto& a, const auto& b) { return a.position < b.position; }));
        extra += plan.targets.size() - 1;
    }
    EXPECT_NEAR(extra / double(trials * 39), 0.15, 0.01);
}

TEST(Masking, InferencePlanAndBounds) {
    const std::vector<TokenId> ids{3, 4};
    EXPECT_EQ(verb_inference_plan(ids, 1).targets.at(0), (MaskedPosition{1, 4, Replacement::Mask, Vocab::kMask}));
    Rng rng(1);
    EXPECT_THROW(verb_inference_plan(ids, 2), std::out_of_range);
    EXPECT_THROW(mam_mask(ids, 5, MaskingStrategy::VerbOnly, rng, {}), std::out_of_range);
}

// Candidates ------------------------------------------------------------------------------------

TEST(Candidates, VideoBasedSetOfNine) {
    const FramePool pool({pooled("vid", {1, 3, 5, 7, 9, 11}), pooled("vid", {21, 23, 25, 27}), pooled("other", {1, 3, 5})});
    Rng rng(1);
    const auto set = mem_candidates(0, 4, pool, NegSampling::VideoBased, rng, 64);
    EXPECT_EQ(set.size(), 9u);
    EXPECT_EQ(set.provenance[set.positive], (FrameRef{0, 4, "vid", 9.0, features::Segment::Aft}));
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i == set.positive) continue;
        const auto& r = set.provenance[i];
        EXPECT_EQ(r.video_id, "vid");
        EXPECT_FALSE(r.clip == 0 && r.segment == features::Segment::Aft);
    }
    const auto row = pool.clip(0).frames.row(4);
    for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(set.features(static_cast<Eigen::Index>(set.positive), d), row[d]);
}

TEST(Candidates, BlockedTimesAndObjects) {
    // Clip 1 repeats the target's AFT times, so only its other frames may appear.
    const FramePool pool({pooled("vid", {1, 3, 5}, {"egg"}), pooled("vid", {5, 7, 9}, {"egg"}),
                          pooled("vid", {30, 32, 34}, {"pan"})});
    Rng rng(2);
    const auto set = mem_candidates(0, 2, pool, NegSampling::ObjectBased, rng, 64);
    std::set<double> times;
    for (std::size_t i = 0; i < set.size(); ++i)
        if (i != set.positive) times.insert(set.provenance[i].time_s);
    EXPECT_EQ(times, (std::set<double>{1, 3, 7, 9}));
}

TEST(Candidates, DegenerateSetThrows) {
    const FramePool pool({pooled("vid", {5, 5, 5})});
    Rng rng(3);
    EXPECT_THROW(mem_candidates(0, 2, pool, NegSampling::Randomized, rng, 64), std::runtime_error);
    EXPECT_THROW(mem_candidates(0, 0, pool, NegSampling::Randomized, rng, 64), std::invalid_argument);
}

TEST(Candidates, CapSubsamplesNegatives) {
    std::vector<PooledClip> clips;
    for (int i = 0; i < 20; ++i) clips.push_back(pooled("v" + std::to_string(i), {0, 2, 4, 6, 8, 10}));
    const FramePool pool(std::move(clips));
    Rng a(4), b(4);
    const auto set = mem_candidates(0, 5, pool, NegSampling::Randomized, a, 7);
    EXPECT_EQ(set.size(), 8u);
    const auto again = mem_candidates(0, 5, pool, NegSampling::Randomized, b, 7);
    EXPECT_EQ(again.provenance, set.provenance);
    EXPECT_EQ(mem_candidates(0, pool, NegSampling::Randomized, a, 7).size(), 2u);
}

TEST(Candidates, PositivePositionVaries) {
    const FramePool pool({pooled("vid", {1, 3, 5, 7, 9, 11})});
    Rng rng(5);
    std::set<std::size_t> positions;
    for (int i = 0; i < 200; ++i) positions.insert(mem_candidates(0, 5, pool, NegSampling::VideoBased, rng, 64).positive);
    EXPECT_EQ(positions.size(), 5u);
}

// NCE -------------------------------------------------------------------------------------------

TEST(Nce, EqualScoresAreUniform) {
    const auto p = nce_softmax(Eigen::VectorXd::Constant(4, 3.0), 0.7);
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(p(i), 0.25);
    CandidateSet c;
    c.features = Eigen::MatrixXd::Ones(4, 2);
    c.provenance.resize(4);
    EXPECT_NEAR(nce_loss(Eigen::Vector2d(1.0, -2.0), c, 1.0), std::log(4.0), 1e-12);
}

TEST(Nce, LargeScoresStayFiniteAndTemperatureSharpens) {
    Eigen::VectorXd s(3);
    s << 1000.0, 999.0, -1000.0;
    const auto p = nce_softmax(s, 1.0);
    EXPECT_TRUE(p.allFinite());
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GT(nce_softmax(s, 0.5)(0), p(0));
    EXPECT_THROW(nce_softmax(s, 0.0), std::invalid_argument);
    EXPECT_THROW(nce_softmax(Eigen::VectorXd(0), 1.0), std::invalid_argument);
}

// Encoder ---------------------------------------------------------------------------------------

TEST(Encoder, EmbeddingsMatchReference) {
    auto state = test::tiny_state(3);
    randomize(state.weights, 30);
    const auto ex = test::tiny_mam_example();
    const Mat e = embed_inputs(state, ex);
    const auto& w = state.weights;
    ASSERT_EQ(e.rows(), 8);
    for (Eigen::Index i = 0; i < 4; ++i) {
        std::vector<double> x(8);
        for (Eigen::Index c = 0; c < 8; ++c)
            x[c] = w.tok_emb(ex.token_ids[static_cast<std::size_t>(i)], c) + w.text_pos(i, c) + w.text_seg(0, c);
        const auto y = ref_ln(x, w.text_ln_g, w.text_ln_b, state.config.ln_eps);
        for (Eigen::Index c = 0; c < 8; ++c) EXPECT_NEAR(e(i, c), y[c], 1e-12);
    }
    for (Eigen::Index j = 0; j < 4; ++j) {
        auto x = affine(row_of(ex.frames, j), w.feat_proj, w.feat_bias);
        const auto seg = static_cast<Eigen::Index>(ex.segments[static_cast<std::size_t>(j)]);
        for (Eigen::Index c = 0; c < 8; ++c) x[c] += w.video_pos(j, c) + w.video_seg(seg, c);
        const auto y = ref_ln(x, w.video_ln_g, w.video_ln_b, state.config.ln_eps);
        for (Eigen::Index c = 0; c < 8; ++c) EXPECT_NEAR(e(4 + j, c), y[c], 1e-12);
    }
}

TEST(Encoder, ZeroWeightsEmbedToZero) {
    auto state = test::tiny_state();
    state.weights = state.weights.zeros_like();
    EXPECT_TRUE(embed_inputs(state, test::tiny_mam_example()).isZero(0.0));
}

TEST(Encoder, CrossLayerMatchesReference) {
    auto state = test::tiny_state(4);
    randomize(state.weights, 40);
    Rng rng(41);
    const Mat x = random_matrix(7, 8, rng);
    for (auto ablation : {Ablation::None, Ablation::TextOnly}) {
        const auto mask = attention_mask(3, 4, ablation);
        const Mat got = cross_modal_encode(state, x, mask);
        const Mat want = ref_layer(state.weights.cross[0], x, mask, 2, state.config.ln_eps);
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Encoder, TwoTokenAttentionByHand) {
    ModelConfig cfg = test::tiny_config();
    cfg.hidden_dim = 2;
    cfg.n_heads = 1;
    cfg.mlp_ratio = 1;
    auto state = ModelState::create(cfg, test::numbered_vocab(cfg.vocab_size));
    auto& l = state.weights.cross[0];
    zero_layer(l);
    l.ln1_g.setOnes();
    l.ln1_b.setZero();
    l.wq.setIdentity();
    l.wk.setIdentity();
    l.wv.setIdentity();
    l.wo.setIdentity();
    Mat x(2, 2);
    x << 1.0, -1.0, -1.0, 1.0;
    // LN of (1,-1) is (1,-1) up to eps; scores are +-2/sqrt(2).
    const double a = 1.0 / std::sqrt(1.0 + cfg.ln_eps);
    const double s = 2.0 * a * a / std::sqrt(2.0);
    const double p_same = std::exp(s) / (std::exp(s) + std::exp(-s));
    const double o = a * (2.0 * p_same - 1.0);
    const Mat y = cross_modal_encode(state, x, attention_mask(2, 0, Ablation::None));
    EXPECT_NEAR(y(0, 0), 1.0 + o, 1e-12);
    EXPECT_NEAR(y(0, 1), -1.0 - o, 1e-12);
    EXPECT_NEAR(y(1, 0), -1.0 - o, 1e-12);
}

TEST(Encoder, ZeroedLayerIsIdentity) {
    auto state = test::tiny_state(5);
    randomize(state.weights, 50);
    zero_layer(state.weights.cross[0]);
    Rng rng(51);
    const Mat x = random_matrix(6, 8, rng);
    EXPECT_EQ(cross_modal_encode(state, x, attention_mask(2, 4, Ablation::None)), x);
}

TEST(Encoder, AblationIsolatesModalities) {
    auto state = test::tiny_state(6);
    randomize(state.weights, 60);
    auto ex = test::tiny_mam_example();
    ex.ablation = Ablation::TextOnly;
    const auto a = encode(state, ex);
    auto other = ex;
    Rng rng(61);
    other.frames = random_matrix(4, 4, rng);
    const auto b = encode(state, other);
    EXPECT_EQ(a.local_text, b.local_text);
    other = ex;
    other.token_ids = {3, 4, 5, 6};
    EXPECT_EQ(encode(state, other).local_video, a.local_video);
    ex.ablation = Ablation::None;
    other = ex;
    other.frames = random_matrix(4, 4, rng);
    EXPECT_NE(encode(state, ex).local_text, encode(state, other).local_text);
}

TEST(Encoder, TemporalAddsNormalizedStack) {
    auto state = test::tiny_state(7);
    randomize(state.weights, 70);
    Rng rng(71);
    const Mat local = random_matrix(4, 8, rng);
    Mat y = ref_layer(state.weights.temporal[0], local, AttentionMask::Ones(4, 4), 2, state.config.ln_eps);
    Mat want = local;
    for (Eigen::Index i = 0; i < 4; ++i) {
        const auto n = ref_ln(row_of(y, i), state.weights.temporal_ln_g, state.weights.temporal_ln_b, state.config.ln_eps);
        for (Eigen::Index c = 0; c < 8; ++c) want(i, c) += n[c];
    }
    EXPECT_LT((temporal_encode(state, local) - want).cwiseAbs().maxCoeff(), 1e-10);

    state.weights.temporal_ln_g.setZero();
    state.weights.temporal_ln_b.setZero();
    EXPECT_EQ(temporal_encode(state, local), local);
    const auto out = encode(state, test::tiny_mam_example());
    EXPECT_EQ(out.final_video, out.local_video);
}

TEST(Encoder, MamLossOfUniformLogitsIsLogVocab) {
    ModelConfig cfg = test::tiny_config();
    cfg.vocab_size = 10;
    auto state = ModelState::create(cfg, test::numbered_vocab(10));
    state.weights.mam_out.setZero();
    state.weights.mam_bias.setZero();
    const auto ex = test::tiny_mam_example();
    const auto out = encode(state, ex);
    EXPECT_NEAR(mam_loss(state, out.local_text, ex.plan), std::log(10.0), 1e-12);
    EXPECT_NEAR(loss_and_grad(state, ex, Task::Mam, nullptr), std::log(10.0), 1e-12);
    EXPECT_THROW(mam_loss(state, out.local_text, MaskingPlan{}), std::invalid_argument);
}

TEST(Encoder, MamLossSaturatesAndAveragesPositions) {
    auto state = test::tiny_state(8);
    state.weights.mam_out.setZero();
    state.weights.mam_bias.setZero();
    state.weights.mam_bias(0, 6) = 60.0;
    auto ex = test::tiny_mam_example();
    const auto out = encode(state, ex);
    EXPECT_LT(mam_loss(state, out.local_text, ex.plan), 1e-20);

    ex.plan.targets.push_back({3, 9, Replacement::Unchanged, 9});
    const double l9 = std::log(11.0 + std::exp(60.0)) - 0.0;
    EXPECT_NEAR(mam_loss(state, out.local_text, ex.plan), 0.5 * (std::log1p(11.0 * std::exp(-60.0)) + l9), 1e-9);
}

TEST(Encoder, MamPredictPicksArgmaxWithLowestTie) {
    auto cfg = test::tiny_config();
    std::vector<std::string> words{"[PAD]", "[UNK]", "[MASK]", "cut", "whip", "stir"};
    while (words.size() < cfg.vocab_size) words.push_back("x" + std::to_string(words.size()));
    auto state = ModelState::create(cfg, Vocab::from_tokens(words));
    state.weights.mam_out.setZero();
    state.weights.mam_bias.setZero();
    auto ex = test::tiny_mam_example();
    EXPECT_EQ(mam_predict(state, ex), (std::vector<TokenId>{0}));
    state.weights.mam_bias(0, 4) = 2.0;
    EXPECT_EQ(state.vocab.token(mam_predict(state, ex).at(0)), "whip");
    ex.plan = {};
    EXPECT_THROW(mam_predict(state, ex), std::invalid_argument);
}

TEST(Encoder, MemPredictFollowsQueryDirection) {
    auto state = test::tiny_state(9);
    state.weights.mem_proj.setZero();
    state.weights.mem_bias.setZero();
    state.weights.mem_bias(0, 1) = 1.0;
    auto ex = test::tiny_mem_example();
    for (auto& t : ex.mem_targets) {
        t.candidates.features.setZero();
        t.candidates.features(3, 1) = 2.0;
        t.candidates.features(1, 1) = 2.0;
    }
    EXPECT_EQ(mem_predict(state, ex), (std::vector<std::size_t>{1, 1}));
    const auto out = encode(state, ex);
    EXPECT_DOUBLE_EQ(mem_scores(state, out.final_video, ex.mem_targets[0])(3), 2.0);
    EXPECT_EQ(argmax_lowest(Eigen::Vector3d(1, 5, 5)), 1u);
}

TEST(Encoder, ShapeMismatchesThrow) {
    const auto state = test::tiny_state();
    auto ex = test::tiny_mam_example();
    ex.frames = Mat::Zero(4, 5);
    EXPECT_THROW(embed_inputs(state, ex), std::invalid_argument);
    ex = test::tiny_mam_example();
    ex.segments.pop_back();
    EXPECT_THROW(embed_inputs(state, ex), std::invalid_argument);
    ex = test::tiny_mam_example();
    ex.token_ids.push_back(3);
    EXPECT_THROW(embed_inputs(state, ex), std::invalid_argument);
}

TEST(Encoder, InitializationShapesAndDeterminism) {
    auto a = test::tiny_state(12);
    const auto b = test::tiny_state(12);
    std::size_t count = 0;
    visit_pairs(a.weights, b.weights, [&](const std::string& name, Mat& x, const Mat& y, bool) {
        EXPECT_EQ(x, y) << name;
        count += static_cast<std::size_t>(x.size());
    });
    EXPECT_EQ(count, a.weights.parameter_count());
    EXPECT_TRUE(a.weights.text_ln_g.isOnes(0.0));
    EXPECT_TRUE(a.weights.mam_bias.isZero(0.0));
    EXPECT_NE(test::tiny_state(13).weights.tok_emb, a.weights.tok_emb);
}

TEST(Gradients, MatchFiniteDifferences) {
    for (auto ablation : {Ablation::None, Ablation::VideoOnly}) {
        const auto state = test::tiny_state(14);
        auto mam = test::tiny_mam_example();
        mam.ablation = ablation;
        auto mem = test::tiny_mem_example();
        mem.ablation = ablation;
        EXPECT_LT(grad_check(state, mam, Task::Mam).max_rel_error, 1e-4);
        EXPECT_LT(grad_check(state, mem, Task::Mem).max_rel_error, 1e-4);
    }
}

TEST(Gradients, ScaleAccumulatesLinearly) {
    const auto state = test::tiny_state(15);
    const auto ex = test::tiny_mam_example();
    auto g1 = state.weights.zeros_like();
    auto g2 = state.weights.zeros_like();
    const double l1 = loss_and_grad(state, ex, Task::Mam, &g1, 1.0);
    const double l2 = loss_and_grad(state, ex, Task::Mam, &g2, 0.5);
    loss_and_grad(state, ex, Task::Mam, &g2, 0.5);
    EXPECT_DOUBLE_EQ(l1, l2);
    visit_pairs(g1, g2, [](const std::string& name, Mat& a, const Mat& b, bool) {
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12) << name;
    });
}
