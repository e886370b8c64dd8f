// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cae/checkpoint.hpp"
#include "cae/eval.hpp"
#include "cae/features.hpp"
#include "cae/masking.hpp"
#include "cae/split.hpp"
#include "cae/synthetic.hpp"
#include "cae/trainer.hpp"
#include "support.hpp"

using namespace cae;
using test::Stopwatch;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

// 1 -------------------------------------------------------------------------------------------

Outcome harmonic_mean_check() {
    // 268/1000 correct on a seen class, 149/1000 on an unseen one.
    std::vector<eval::MapPrediction> preds;
    for (int i = 0; i < 1000; ++i) preds.push_back({"cut", i < 268 ? "cut" : "bake"});
    for (int i = 0; i < 1000; ++i) preds.push_back({"mince", i < 149 ? "mince" : "cut"});
    const split::VerbClassMap classes = {{"cut", split::VerbClass::Seen},
                                         {"bake", split::VerbClass::Seen},
                                         {"mince", split::VerbClass::Unseen}};
    Stopwatch sw;
    const auto m = eval::map_metrics(preds, classes);
    const double ms = sw.seconds() * 1e3;
    const double oracle = 2.0 * 26.8 * 14.9 / (26.8 + 14.9);
    const bool inputs_ok = std::abs(m.macro_seen - 26.8) < 1e-9 && std::abs(m.macro_unseen - 14.9) < 1e-9;
    const bool formula_ok = std::abs(m.harmonic_mean - oracle) < 1e-9;
    const bool target_ok = std::abs(m.harmonic_mean - 19.1) <= 0.05;
    return {inputs_ok && formula_ok && target_ok && ms < 1.0,
            fmt("seen %.2f unseen %.2f -> HM %.4f (formula %.4f, table 19.1, |diff| %.4f, tol 0.05), %.3f ms",
                m.macro_seen, m.macro_unseen, m.harmonic_mean, oracle, std::abs(m.harmonic_mean - 19.1), ms)};
}

// 2 -------------------------------------------------------------------------------------------

Outcome masking_statistics() {
    Stopwatch sw;
    Rng rng(2024);
    model::MaskingParams params;
    params.vocab_size = 50;
    const std::vector<model::TokenId> ids = {10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};  // verb at 0
    std::size_t non_verb = 0, targeted = 0;
    std::array<std::size_t, 3> kinds{};
    std::size_t verbs = 0;
    for (std::size_t r = 0; r < 10000; ++r) {
        const auto plan = model::mam_mask(ids, 0, model::MaskingStrategy::VerbRandomJoint, rng, params, r);
        for (const auto& t : plan.targets) {
            if (t.position != 0) ++targeted;
        }
        non_verb += ids.size() - 1;
    }
    for (std::size_t r = 0; r < 100000; ++r) {
        const auto plan = model::mam_mask(ids, 0, model::MaskingStrategy::VerbRandomJoint, rng, params, r);
        for (const auto& t : plan.targets) {
            if (t.position == 0) {
                ++kinds[static_cast<std::size_t>(t.kind)];
                ++verbs;
            }
        }
    }
    const double secs = sw.seconds();
    const double rate = 100.0 * static_cast<double>(targeted) / static_cast<double>(non_verb);
    std::array<double, 3> mix{};
    for (int k = 0; k < 3; ++k) mix[k] = 100.0 * static_cast<double>(kinds[k]) / static_cast<double>(verbs);
    const bool pass = non_verb >= 100000 && verbs >= 100000 && std::abs(rate - 15.0) <= 1.0 &&
                      std::abs(mix[0] - 80.0) <= 2.0 && std::abs(mix[1] - 15.0) <= 2.0 &&
                      std::abs(mix[2] - 5.0) <= 2.0 && secs < 5.0;
    return {pass, fmt("non-verb rate %.2f%% over %zu tokens; verb mix %.2f/%.2f/%.2f over %zu verbs; %.2f s", rate,
                      non_verb, mix[0], mix[1], mix[2], verbs, secs)};
}

// 3 -------------------------------------------------------------------------------------------

Outcome gradient_fidelity() {
    Stopwatch sw;
    const auto state = test::tiny_state(11);
    const auto mam = model::grad_check(state, test::tiny_mam_example(), model::Task::Mam);
    const auto mem = model::grad_check(state, test::tiny_mem_example(), model::Task::Mem);
    const double secs = sw.seconds();
    return {mam.max_rel_error < 1e-4 && mem.max_rel_error < 1e-4 && secs < 60.0,
            fmt("MAM max rel err %.2e (%s, %zu params); MEM %.2e (%s); %.2f s", mam.max_rel_error,
                mam.worst_tensor.c_str(), mam.n_checked, mem.max_rel_error, mem.worst_tensor.c_str(), secs)};
}

// 4 -------------------------------------------------------------------------------------------

Outcome nce_correctness() {
    Rng rng(4);
    double worst_sum = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(64));
        Eigen::VectorXd s(n);
        for (Eigen::Index i = 0; i < n; ++i) s(i) = 10.0 * rng.normal();
        const double tau = 0.05 + 2.0 * rng.uniform();
        worst_sum = std::max(worst_sum, std::abs(model::nce_softmax(s, tau).sum() - 1.0));
    }
    model::CandidateSet c;
    c.features = Eigen::MatrixXd::Identity(3, 3);
    c.provenance.resize(3);
    c.positive = 0;
    const Eigen::Vector3d q(2.0, 0.0, 0.0);
    const double p1 = model::nce_probability(q, c, 1.0)(0);
    const double p05 = model::nce_probability(q, c, 0.5)(0);
    const double o1 = std::exp(2.0) / (std::exp(2.0) + 2.0);
    const double o05 = std::exp(4.0) / (std::exp(4.0) + 2.0);
    const bool pass = worst_sum <= 1e-6 && std::abs(p1 - 0.7870) <= 1e-4 && std::abs(p05 - 0.9647) <= 1e-4 &&
                      std::abs(p1 - o1) < 1e-12 && std::abs(p05 - o05) < 1e-12;
    return {pass, fmt("max |sum-1| %.1e over 1000 random sets; tau=1 -> %.4f, tau=0.5 -> %.4f", worst_sum, p1, p05)};
}

// 5 -------------------------------------------------------------------------------------------

model::ModelState small_state(std::uint64_t seed, model::Ablation ablation) {
    model::ModelConfig cfg;
    cfg.vocab_size = 30;
    cfg.hidden_dim = 16;
    cfg.n_heads = 2;
    cfg.max_text_len = 8;
    cfg.max_video_len = 8;
    cfg.feature_dim = 8;
    cfg.init_std = 0.2;
    cfg.seed = seed;
    cfg.ablation = ablation;
    return model::ModelState::create(cfg, test::numbered_vocab(cfg.vocab_size));
}

Outcome ablation_invariance() {
    Rng rng(55);
    std::size_t mam_diff = 0, mem_diff = 0, trials = 0;
    const auto text_only = small_state(5, model::Ablation::TextOnly);
    const auto video_only = small_state(6, model::Ablation::VideoOnly);
    for (int trial = 0; trial < 50; ++trial, ++trials) {
        model::Example ex;
        for (int i = 0; i < 6; ++i) ex.token_ids.push_back(static_cast<model::TokenId>(3 + rng.below(27)));
        ex.plan.targets = {{2, ex.token_ids[2], model::Replacement::Mask, model::Vocab::kMask}};
        ex.token_ids[2] = model::Vocab::kMask;
        ex.frames = test::random_matrix(6, 8, rng);
        ex.segments = features::segment_labels(6);

        ex.ablation = model::Ablation::TextOnly;
        const auto base = model::encode(text_only, ex);
        const auto logits = model::mam_logits(text_only, base.local_text, {2});
        model::Example swapped = ex;
        swapped.frames = 100.0 * test::random_matrix(6, 8, rng);
        const auto logits2 = model::mam_logits(text_only, model::encode(text_only, swapped).local_text, {2});
        mam_diff += (logits.array() != logits2.array()).count();

        ex.ablation = model::Ablation::VideoOnly;
        model::MemTarget target;
        target.frame = 5;
        target.candidates.features = test::random_matrix(7, 8, rng);
        target.candidates.provenance.resize(7);
        ex.frames.row(5).setZero();
        const auto s1 = model::mem_scores(video_only, model::encode(video_only, ex).final_video, target);
        model::Example other = ex;
        for (auto& id : other.token_ids) id = static_cast<model::TokenId>(rng.below(30));
        const auto s2 = model::mem_scores(video_only, model::encode(video_only, other).final_video, target);
        mem_diff += (s1.array() != s2.array()).count();
    }
    return {mam_diff == 0 && mem_diff == 0,
            fmt("%zu trials: %zu differing MAM logits under text_only, %zu differing MEM scores under video_only",
                trials, mam_diff, mem_diff)};
}

// 6 -------------------------------------------------------------------------------------------

struct OverfitSetup {
    model::ModelConfig cfg;
    std::vector<corpus::ClipRecord> clips;
    model::Vocab vocab;
};

OverfitSetup overfit_setup() {
    synthetic::CorpusOptions o;
    o.seed = 6;
    o.n_clips = 32;
    o.n_verbs = 8;
    o.n_videos = 8;
    o.n_objects = 16;
    o.n_categories = 2;
    OverfitSetup s;
    s.clips = synthetic::clip_corpus(o).clips;
    s.vocab = model::build_vocab(s.clips, 64);
    s.cfg.vocab_size = s.vocab.size();
    s.cfg.hidden_dim = 32;
    s.cfg.n_heads = 4;
    s.cfg.n_cross_layers = 1;
    s.cfg.n_temporal_layers = 1;
    s.cfg.mlp_ratio = 2;
    s.cfg.max_text_len = 8;
    s.cfg.max_video_len = 8;
    s.cfg.feature_dim = 16;
    s.cfg.batch_size = 8;
    s.cfg.optimizer.grad_accum = 1;
    s.cfg.optimizer.lr = 1e-3;
    s.cfg.optimizer.warmup_steps = 50;
    s.cfg.optimizer.weight_decay = 0.0;
    s.cfg.seed = 7;
    return s;
}

struct OverfitRun {
    double mam = 0.0, mem = 0.0;
    std::uint64_t steps = 0;
};

OverfitRun overfit(const OverfitSetup& s, const model::Dataset& data, model::TaskMode mode, double target) {
    auto cfg = s.cfg;
    cfg.task_mode = mode;
    model::Trainer trainer(model::ModelState::create(cfg, s.vocab), data);
    OverfitRun r;
    const bool want_mam = mode != model::TaskMode::Mem;
    const bool want_mem = mode != model::TaskMode::Mam;
    while (r.steps < 2000) {
        trainer.step();
        ++r.steps;
        if (r.steps % 100 != 0) continue;
        // Train accuracy of each task over the clips that task trains on.
        if (want_mam) {
            const auto all = model::predict_mam(trainer.state(), data);
            std::vector<model::MamPrediction> own;
            for (auto i : trainer.task_clips(model::Task::Mam)) own.push_back(all[i]);
            r.mam = model::mam_accuracy(own);
        }
        if (want_mem) {
            const auto all = model::predict_mem(trainer.state(), data, 99);
            std::vector<model::MemPrediction> own;
            for (auto i : trainer.task_clips(model::Task::Mem)) own.push_back(all[i]);
            r.mem = model::mem_accuracy(own);
        }
        if ((!want_mam || r.mam >= target) && (!want_mem || r.mem >= target)) break;
    }
    return r;
}

Outcome overfit_harness() {
    Stopwatch sw;
    const auto s = overfit_setup();
    const features::SyntheticFeatures provider(s.cfg.feature_dim);
    const auto data = model::Dataset::build(s.clips, s.vocab, provider, s.cfg);
    const auto mam = overfit(s, data, model::TaskMode::Mam, 100.0);
    const auto mem = overfit(s, data, model::TaskMode::Mem, 100.0);
    const auto multi = overfit(s, data, model::TaskMode::Multi, 95.0);
    const double secs = sw.seconds();
    const bool pass = data.size() == 32 && s.vocab.size() <= 64 && mam.mam >= 100.0 && mem.mem >= 100.0 &&
                      multi.mam >= 95.0 && multi.mem >= 95.0 && secs < 600.0;
    return {pass, fmt("%zu clips, vocab %zu: MAM %.1f%% @%llu, MEM %.1f%% @%llu, MULTI %.1f/%.1f%% @%llu; %.1f s",
                      data.size(), s.vocab.size(), mam.mam, static_cast<unsigned long long>(mam.steps), mem.mem,
                      static_cast<unsigned long long>(mem.steps), multi.mam, multi.mem,
                      static_cast<unsigned long long>(multi.steps), secs)};
}

// 7 -------------------------------------------------------------------------------------------

Outcome untrained_mem_baseline() {
    synthetic::CorpusOptions o;
    o.seed = 77;
    o.n_clips = 200;
    o.n_verbs = 12;
    o.n_videos = 20;
    const auto clips = synthetic::clip_corpus(o).clips;
    const auto vocab = model::build_vocab(clips, 64);
    model::ModelConfig cfg;
    cfg.vocab_size = vocab.size();
    cfg.hidden_dim = 32;
    cfg.n_heads = 4;
    cfg.feature_dim = 16;
    cfg.neg_sampling = model::NegSampling::VideoBased;
    const features::SyntheticFeatures provider(cfg.feature_dim);
    const auto data = model::Dataset::build(clips, vocab, provider, cfg);

    std::size_t n = 0, correct = 0;
    double expected = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = 1000 + seed;
        const auto state = model::ModelState::create(cfg, vocab);
        for (std::size_t i = 0; i < data.size(); ++i) {
            Rng rng(mix_seed(seed, fnv1a(data.clip(i).id)));
            const auto ex = model::make_mem_example(cfg, data, i, rng);
            const auto chosen = model::mem_predict(state, ex);
            for (std::size_t k = 0; k < chosen.size(); ++k) {
                ++n;
                correct += chosen[k] == ex.mem_targets[k].candidates.positive;
                expected += 1.0 / static_cast<double>(ex.mem_targets[k].candidates.size());
            }
        }
    }
    const double acc = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
    const double chance = 100.0 * expected / static_cast<double>(n);
    return {n >= 1000 && std::abs(acc - chance) <= 2.0,
            fmt("%zu masked frames over 10 untrained models: accuracy %.2f%% vs mean 1/|C| %.2f%%", n, acc, chance)};
}

// 8 -------------------------------------------------------------------------------------------

Outcome split_invariants() {
    Stopwatch sw;
    synthetic::CorpusOptions o;
    o.seed = 8;
    o.n_clips = 10000;
    o.n_verbs = 48;
    o.verbs_per_frame = 5;
    o.n_videos = 400;
    o.n_objects = 60;
    const auto corpus = synthetic::clip_corpus(o);
    split::SplitConfig cfg;
    cfg.seed = 42;

    auto run = [&] {
        const auto classes = split::assign_verb_classes(corpus.frames, cfg);
        return split::assign_clip_splits(corpus.clips, classes, cfg);
    };
    const auto m = run();
    const std::string first = split::manifest_to_jsonl(m, corpus.clips);
    const std::string second = split::manifest_to_jsonl(run(), corpus.clips);
    const double secs = sw.seconds();

    std::map<std::string, std::array<std::size_t, 3>> per_verb;
    for (const auto& c : corpus.clips) ++per_verb[c.result_verb][static_cast<std::size_t>(m.clip_assignment.at(c.id()))];
    std::size_t unseen_train = 0, seen_bad = 0, unseen_bad = 0, n_seen = 0, n_unseen = 0;
    for (const auto& [verb, counts] : per_verb) {
        const double n = static_cast<double>(counts[0] + counts[1] + counts[2]);
        if (m.verb_class.at(verb) == split::VerbClass::Seen) {
            ++n_seen;
            if (std::abs(static_cast<double>(counts[0]) - 0.8 * n) > 1.0 ||
                std::abs(static_cast<double>(counts[1]) - 0.1 * n) > 1.0 ||
                std::abs(static_cast<double>(counts[2]) - 0.1 * n) > 1.0)
                ++seen_bad;
        } else {
            ++n_unseen;
            unseen_train += counts[0];
            // Exactly half each; an odd count leaves the extra clip in val.
            const auto total = counts[0] + counts[1] + counts[2];
            if (counts[1] != (total + 1) / 2 || counts[2] != total / 2) ++unseen_bad;
        }
    }
    const bool pass = corpus.clips.size() == 10000 && unseen_train == 0 && seen_bad == 0 && unseen_bad == 0 &&
                      n_unseen > 0 && first == second && secs < 10.0;
    return {pass, fmt("%zu seen / %zu unseen verbs; unseen clips in train %zu; seen off-ratio %zu; unseen off-ratio "
                      "%zu; rerun identical %s; %.2f s",
                      n_seen, n_unseen, unseen_train, seen_bad, unseen_bad, first == second ? "yes" : "no", secs)};
}

// 9 -------------------------------------------------------------------------------------------

corpus::SubtitleRecord record(std::string video, double start, std::string text, std::vector<corpus::Token> toks) {
    corpus::SubtitleRecord r;
    r.video_id = std::move(video);
    r.category = "cooking";
    r.task_id = "t1";
    r.start_s = start;
    r.end_s = start + 3.0;
    r.text = std::move(text);
    r.tokens = std::move(toks);
    return r;
}

Outcome extraction_rules() {
    using test::tok;
    std::vector<corpus::SubtitleRecord> recs;
    recs.push_back(record("v1", 10.0, "I chop the carrot",
                          {tok("I", "I", "PRON", "nsubj"), tok("chop", "chop", "VERB", "root"),
                           tok("the", "the", "DET", "det"), tok("carrot", "carrot", "NOUN", "dobj")}));
    recs.push_back(record("v1", 13.0, "slice the onion",
                          {tok("slice", "slice", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("onion", "onion", "NOUN", "dobj")}));
    recs.push_back(record("v1", 14.0, "chop and cut the garlic",
                          {tok("chop", "chop", "VERB", "root"), tok("and", "and", "CCONJ", "cc"),
                           tok("cut", "cut", "VERB", "conj"), tok("the", "the", "DET", "det"),
                           tok("garlic", "garlic", "NOUN", "dobj")}));
    recs.push_back(record("v1", 15.0, "heat it in the water for a short time",
                          {tok("heat", "heat", "VERB", "root"), tok("it", "it", "PRON", "dobj"),
                           tok("in", "in", "ADP", "prep"), tok("the", "the", "DET", "det"),
                           tok("water", "water", "NOUN", "pobj"), tok("for", "for", "ADP", "prep"),
                           tok("a", "a", "DET", "det"), tok("short", "short", "ADJ", "amod"),
                           tok("time", "time", "NOUN", "pobj")}));
    recs.push_back(record("v1", 21.0, "warm up the sauce",
                          {tok("warm up", "warm_up", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("sauce", "sauce", "NOUN", "dobj")}));
    recs.push_back(record("v1", 23.0, "the chef peels the apple",
                          {tok("the", "the", "DET", "det"), tok("chef", "chef", "NOUN", "nsubj"),
                           tok("peels", "peel", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("apple", "apple", "NOUN", "dobj")}));
    recs.push_back(record("v1", 24.0, "peel another apple",
                          {tok("peel", "peel", "VERB", "root"), tok("another", "another", "DET", "det"),
                           tok("apple", "apple", "NOUN", "dobj")}));
    recs.push_back(record("v2", 2.0, "bake the bread",
                          {tok("bake", "bake", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("bread", "bread", "NOUN", "dobj")}));
    recs.push_back(record("v2", 3.0, "cut the cake",
                          {tok("cut", "cut", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("cake", "cake", "NOUN", "dobj")}));
    recs.push_back(record("v3", 3.0, "cut the cake",
                          {tok("cut", "cut", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("cake", "cake", "NOUN", "dobj")}));
    recs.push_back(record("v3", 20.0, "the cut is deep",
                          {tok("the", "the", "DET", "det"), tok("cut", "cut", "NOUN", "nsubj"),
                           tok("is", "be", "AUX", "cop"), tok("deep", "deep", "ADJ", "root")}));
    recs.push_back(record("v3", 30.0, "fold it",
                          {tok("fold", "fold", "VERB", "root"), tok("it", "it", "PRON", "")}));
    recs.push_back(record("v3", 31.0, "fold the paper",
                          {tok("fold", "fold", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("paper", "paper", "NOUN", "dobj")}));
    recs.push_back(record("v3", 40.0, "stir the soup",
                          {tok("stir", "stir", "VERB", "root"), tok("the", "the", "DET", "det"),
                           tok("soup", "soup", "NOUN", "dobj")}));
    // Out of order on purpose: the batch extractor sorts per video.
    std::rotate(recs.begin(), recs.begin() + 5, recs.end());

    const std::set<std::string> verbs = {"bake", "chop", "cut", "fold", "heat", "peel", "slice", "warm_up"};
    const std::map<std::string, double> ratings = {{"carrot", 4.9}, {"onion", 4.8}, {"garlic", 4.8}, {"water", 4.8},
                                                   {"time", 2.0},   {"chef", 4.7},  {"apple", 5.0},  {"bread", 4.0},
                                                   {"cake", 4.9},   {"paper", 4.9}, {"sauce", 4.6},  {"soup", 4.7}};
    const auto result = corpus::extract_cae_clips(recs, verbs, ratings);

    using Expected = std::tuple<std::string, std::string, std::set<std::string>>;
    const std::vector<Expected> expected = {{"v1@10000", "chop", {"carrot"}}, {"v1@15000", "heat", {"water"}},
                                            {"v1@23000", "peel", {"apple"}},  {"v2@2000", "bake", {}},
                                            {"v3@3000", "cut", {"cake"}},     {"v3@31000", "fold", {"paper"}}};
    std::vector<Expected> got;
    for (const auto& c : result.clips) got.emplace_back(c.id(), c.result_verb, c.objects);
    const bool pass = got == expected && result.diagnostics.size() == 1;
    std::string ids;
    for (const auto& [id, verb, objs] : got) ids += id + ":" + verb + " ";
    return {pass, fmt("%zu clips [%s] vs 6 hand-enumerated; %zu diagnostics", got.size(), ids.c_str(),
                      result.diagnostics.size())};
}

// 10 ------------------------------------------------------------------------------------------

Outcome generalization_oracle() {
    const eval::LemmaFrames frames = {{"roast", {"Apply_heat"}}, {"fry", {"Apply_heat"}},
                                      {"put", {"Placing"}},      {"chop", {"Cutting"}},
                                      {"slice", {"Cutting"}},    {"bake", {"Apply_heat", "Cooking_creation"}},
                                      {"toast", {"Apply_heat"}}, {"peel", {"Removing"}},
                                      {"strip", {"Removing"}},   {"wash", {"Grooming"}}};
    const eval::HypernymMap hyper = {{"roast", {"cook.v.03"}},  {"fry", {"cook.v.03"}},     {"put", {"move.v.02"}},
                                     {"chop", {"cut.v.01"}},    {"slice", {"cut.v.01"}},    {"bake", {"create.v.05"}},
                                     {"toast", {"brown.v.01"}}, {"peel", {"remove.v.01"}}, {"strip", {"undress.v.01"}},
                                     {"wash", {"clean.v.01"}}};
    const std::vector<eval::MapPrediction> pairs = {{"roast", "fry"},  {"roast", "put"},  {"chop", "slice"},
                                                    {"bake", "toast"}, {"peel", "strip"}, {"whisk", "wash"}};
    const auto r = eval::generalization_analysis(pairs, frames, hyper);

    // Brute-force oracle over the pair list.
    auto shares = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        for (const auto& x : a)
            if (b.contains(x)) return true;
        return false;
    };
    auto get = [](const std::map<std::string, std::set<std::string>>& m, const std::string& k) {
        auto it = m.find(k);
        return it == m.end() ? std::set<std::string>{} : it->second;
    };
    std::size_t f = 0, h = 0;
    for (const auto& p : pairs) {
        f += shares(get(frames, p.reference), get(frames, p.predicted));
        h += shares(get(hyper, p.reference), get(hyper, p.predicted));
    }
    const double of = 100.0 * static_cast<double>(f) / 6.0;
    const double oh = 100.0 * static_cast<double>(h) / 6.0;
    const bool hand = f == 4 && h == 2;  // frames: roast/fry, chop/slice, bake/toast, peel/strip; co-hyponyms: first two
    const bool pass = hand && r.n_pairs == 6 && r.pct_false_sharing_frame == of && r.pct_false_cohyponym == oh &&
                      r.warnings.size() == 1;
    return {pass, fmt("frame-sharing %.4f%% (hand 4/6), co-hyponym %.4f%% (hand 2/6), %zu warning(s)",
                      r.pct_false_sharing_frame, r.pct_false_cohyponym, r.warnings.size())};
}

// 11 ------------------------------------------------------------------------------------------

eval::ProbeItem probe_item(const std::string& group, eval::Polarity pol, std::size_t answer, std::size_t k) {
    eval::ProbeItem it;
    it.id = group + "-" + std::string(eval::to_string(pol)) + "-" + std::to_string(k);
    it.group = group;
    it.polarity = pol;
    it.template_text = "the thing that is easiest to " + group + " is the [MASK] .";
    it.candidates = {"alpha", "beta", "gamma", "delta"};
    it.answer_index = answer;
    it.answer_position = answer + 1;
    return it;
}

Outcome probe_robustness_oracle() {
    // 40 items: 5 groups x 2 polarities x 4, answer positions cycling so each occurs 10 times.
    const std::vector<std::string> groups = {"stack", "roll", "grasp", "break", "slide"};
    Rng rng(1111);
    std::vector<std::pair<eval::ProbeItem, std::size_t>> choices;
    std::size_t pos = 0;
    for (const auto& g : groups)
        for (auto pol : {eval::Polarity::Original, eval::Polarity::Inverse})
            for (std::size_t k = 0; k < 4; ++k) {
                auto it = probe_item(g, pol, pos++ % 4, k);
                choices.emplace_back(it, static_cast<std::size_t>(rng.below(4)));
            }
    const auto r = eval::probe_robustness(choices);

    bool ok = true;
    for (std::size_t p = 0; p < 4; ++p) {
        std::size_t n = 0, c = 0;
        for (const auto& [it, ch] : choices)
            if (it.answer_index == p) {
                ++n;
                c += ch == it.answer_index;
            }
        ok = ok && n == 10 && r.position_count[p] == 10 && r.position_accuracy[p] == 100.0 * c / n;
    }
    double delta_sum = 0.0;
    for (const auto& g : groups) {
        std::array<std::size_t, 2> n{}, c{};
        for (const auto& [it, ch] : choices) {
            if (it.group != g) continue;
            const auto k = it.polarity == eval::Polarity::Original ? 0 : 1;
            ++n[k];
            c[k] += ch == it.answer_index;
        }
        const double d = std::abs(100.0 * c[0] / n[0] - 100.0 * c[1] / n[1]);
        delta_sum += d;
        ok = ok && std::abs(r.groups.at(g).delta - d) < 1e-12;
    }
    ok = ok && std::abs(r.macro_delta - delta_sum / 5.0) < 1e-12;

    // Original / inverse accuracies of the multi-task model, 50 items per cell.
    const std::vector<std::tuple<std::string, double, double, double>> table = {
        {"stack", 0.0, 68.0, 68.0}, {"roll", 40.0, 8.0, 32.0},  {"grasp", 2.0, 58.0, 56.0},
        {"break", 32.0, 20.0, 12.0}, {"slide", 80.0, 0.0, 80.0}, {"bounce", 0.0, 76.0, 76.0}};
    std::vector<std::pair<eval::ProbeItem, std::size_t>> paper;
    std::size_t q = 0;
    for (const auto& [g, ori, inv, delta] : table) {
        for (int pol = 0; pol < 2; ++pol) {
            const auto correct = static_cast<std::size_t>(std::lround((pol == 0 ? ori : inv) / 2.0));
            for (std::size_t k = 0; k < 50; ++k) {
                const std::size_t answer = q++ % 4;
                const auto p = pol == 0 ? eval::Polarity::Original : eval::Polarity::Inverse;
                paper.emplace_back(probe_item(g, p, answer, k), k < correct ? answer : (answer + 1) % 4);
            }
        }
    }
    const auto t = eval::probe_robustness(paper);
    bool table_ok = std::abs(t.macro_delta - 54.0) < 1e-9;
    for (const auto& [g, ori, inv, delta] : table) table_ok = table_ok && std::abs(t.groups.at(g).delta - delta) < 1e-9;
    const double slide = t.groups.at("slide").delta;
    return {ok && table_ok, fmt("40-item oracle %s; slide (%.1f, %.1f) -> delta %.1f; macro delta %.1f",
                                ok ? "matches" : "MISMATCH", t.groups.at("slide").original,
                                t.groups.at("slide").inverse, slide, t.macro_delta)};
}

// 12 ------------------------------------------------------------------------------------------

Outcome round_trips() {
    const auto dir = test::temp_dir("acceptance_roundtrip");
    features::FeatureStore store(24);
    for (int v = 0; v < 5; ++v)
        for (double t : features::sample_frame_times(10.0 * v, 10.0 * v + 4.0)) {
            const std::string id = "vid" + std::to_string(v);
            store.add(id, t, features::synth_features(id, t, 24));
        }
    const std::string caef1 = (dir / "a.caef").string(), caef2 = (dir / "b.caef").string();
    store.save(caef1);
    features::FeatureStore::load(caef1).save(caef2);
    const bool caef_ok = read_file(caef1) == read_file(caef2) &&
                         features::FeatureStore::deserialize(store.serialize()).serialize() == store.serialize();

    auto state = small_state(12, model::Ablation::None);
    state.step = 777;
    const std::string m1 = (dir / "a.caem").string(), m2 = (dir / "b.caem").string();
    model::save_checkpoint(state, m1);
    model::save_checkpoint(model::load_checkpoint(m1), m2);
    const auto bytes = model::serialize_checkpoint(state);
    const bool caem_ok = read_file(m1) == read_file(m2) &&
                         model::serialize_checkpoint(model::deserialize_checkpoint(bytes)) == bytes;
    return {caef_ok && caem_ok, fmt("CAEF %zu rows (%zu bytes) %s; checkpoint %zu bytes %s", store.rows(),
                                    read_file(caef1).size(), caef_ok ? "identical" : "DIFFERS",
                                    read_file(m1).size(), caem_ok ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"harmonic mean", harmonic_mean_check},
        {"masking statistics", masking_statistics},
        {"gradient fidelity", gradient_fidelity},
        {"NCE correctness", nce_correctness},
        {"ablation invariance", ablation_invariance},
        {"overfit harness", overfit_harness},
        {"untrained MEM baseline", untrained_mem_baseline},
        {"split invariants", split_invariants},
        {"extraction rules", extraction_rules},
        {"generalization analysis", generalization_oracle},
        {"probe robustness", probe_robustness_oracle},
        {"bit-exact round-trips", round_trips},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
