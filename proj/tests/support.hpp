#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "cae/candidates.hpp"
#include "cae/corpus.hpp"
#include "cae/encoder.hpp"

namespace cae::test {

inline model::Vocab numbered_vocab(std::size_t size) {
    std::vector<std::string> tokens{"[PAD]", "[UNK]", "[MASK]"};
    for (std::size_t i = tokens.size(); i < size; ++i) tokens.push_back("w" + std::to_string(i));
    return model::Vocab::from_tokens(tokens);
}

/// Hidden 8, two heads, one cross and one temporal layer, 4-dim features.
inline model::ModelConfig tiny_config(std::uint64_t seed = 1) {
    model::ModelConfig c;
    c.vocab_size = 12;
    c.hidden_dim = 8;
    c.n_heads = 2;
    c.n_cross_layers = 1;
    c.n_temporal_layers = 1;
    c.mlp_ratio = 2;
    c.max_text_len = 4;
    c.max_video_len = 4;
    c.feature_dim = 4;
    c.init_std = 0.3;
    c.seed = seed;
    return c;
}

inline model::ModelState tiny_state(std::uint64_t seed = 1) {
    const auto cfg = tiny_config(seed);
    return model::ModelState::create(cfg, numbered_vocab(cfg.vocab_size));
}

inline model::Mat random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    model::Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

/// Four tokens (verb at 1), four frames segmented (1,1,2).
inline model::Example tiny_mam_example(std::uint64_t seed = 5) {
    Rng rng(seed);
    model::Example ex;
    ex.token_ids = {5, model::Vocab::kMask, 7, 9};
    ex.plan.targets = {{1, 6, model::Replacement::Mask, model::Vocab::kMask}};
    ex.frames = random_matrix(4, 4, rng);
    ex.segments = {features::Segment::Bef, features::Segment::Act, features::Segment::Aft, features::Segment::Aft};
    return ex;
}

/// The same input with both [AFT] rows zeroed and a 5-candidate set per masked frame.
inline model::Example tiny_mem_example(std::uint64_t seed = 6) {
    Rng rng(seed);
    model::Example ex = tiny_mam_example(seed);
    ex.plan = {};
    ex.token_ids = {5, 6, 7, 9};
    for (std::size_t f : {std::size_t{2}, std::size_t{3}}) {
        model::MemTarget t;
        t.frame = f;
        t.candidates.features = random_matrix(5, 4, rng);
        t.candidates.features.row(static_cast<Eigen::Index>(f)) = ex.frames.row(static_cast<Eigen::Index>(f));
        t.candidates.positive = f;
        t.candidates.provenance.resize(5);
        ex.mem_targets.push_back(std::move(t));
    }
    for (std::size_t f : {std::size_t{2}, std::size_t{3}}) ex.frames.row(static_cast<Eigen::Index>(f)).setZero();
    return ex;
}

inline corpus::Token tok(std::string surface, std::string lemma, std::string upos, std::string dep) {
    return {std::move(surface), std::move(lemma), std::move(upos), std::move(dep)};
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Fresh directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("cae_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace cae::test
