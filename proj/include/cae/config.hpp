#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace cae::model {

enum class MaskingStrategy { VerbOnly, VerbRandomJoint, VerbRandomAlter };
enum class NegSampling { Randomized, VideoBased, ObjectBased };
enum class TaskMode { Mam, Mem, Multi };
enum class Task { Mam, Mem };
enum class Ablation { None, TextOnly, VideoOnly };

std::string_view to_string(MaskingStrategy s) noexcept;
std::string_view to_string(NegSampling s) noexcept;
std::string_view to_string(TaskMode m) noexcept;
std::string_view to_string(Task t) noexcept;
std::string_view to_string(Ablation a) noexcept;

MaskingStrategy masking_strategy_from_string(std::string_view s);
NegSampling neg_sampling_from_string(std::string_view s);
TaskMode task_mode_from_string(std::string_view s);
Ablation ablation_from_string(std::string_view s);

struct OptimizerConfig {
    double lr = 3e-5;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t warmup_steps = 10000;
    std::uint64_t total_steps = 100000;
    std::uint32_t grad_accum = 2;
};

/// Architecture, objective and optimizer settings. Desk-scale defaults.
struct ModelConfig {
    std::size_t vocab_size = 64;
    std::size_t hidden_dim = 64;
    std::size_t n_cross_layers = 2;
    std::size_t n_temporal_layers = 1;
    std::size_t n_heads = 4;
    std::size_t mlp_ratio = 4;
    std::size_t max_text_len = 32;
    std::size_t max_video_len = 16;
    std::size_t feature_dim = 64;
    double nce_temperature = 1.0;
    double mask_prob = 0.15;
    std::array<double, 3> verb_replace_dist{0.80, 0.15, 0.05};  // [MASK], random token, unchanged
    MaskingStrategy masking_strategy = MaskingStrategy::VerbRandomJoint;
    NegSampling neg_sampling = NegSampling::VideoBased;
    std::size_t candidate_cap = 64;
    OptimizerConfig optimizer;
    TaskMode task_mode = TaskMode::Mam;
    Ablation ablation = Ablation::None;
    double ln_eps = 1e-5;
    double init_std = 0.02;
    std::uint64_t seed = 42;
    std::size_t batch_size = 16;
    std::size_t eval_interval = 500;

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace cae::model
