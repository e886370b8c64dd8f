#include "cae/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace cae::model {

using nlohmann::json;

std::string_view to_string(MaskingStrategy s) noexcept {
    switch (s) {
        case MaskingStrategy::VerbOnly: return "verb_only";
        case MaskingStrategy::VerbRandomJoint: return "verb_random_joint";
        case MaskingStrategy::VerbRandomAlter: return "verb_random_alter";
    }
    return "verb_only";
}

std::string_view to_string(NegSampling s) noexcept {
    switch (s) {
        case NegSampling::Randomized: return "randomized";
        case NegSampling::VideoBased: return "video_based";
        case NegSampling::ObjectBased: return "object_based";
    }
    return "video_based";
}

std::string_view to_string(TaskMode m) noexcept {
    switch (m) {
        case TaskMode::Mam: return "mam";
        case TaskMode::Mem: return "mem";
        case TaskMode::Multi: return "multi";
    }
    return "mam";
}

std::string_view to_string(Task t) noexcept { return t == Task::Mam ? "mam" : "mem"; }

std::string_view to_string(Ablation a) noexcept {
    switch (a) {
        case Ablation::None: return "none";
        case Ablation::TextOnly: return "text_only";
        case Ablation::VideoOnly: return "video_only";
    }
    return "none";
}

MaskingStrategy masking_strategy_from_string(std::string_view s) {
    if (s == "verb_only") return MaskingStrategy::VerbOnly;
    if (s == "verb_random_joint") return MaskingStrategy::VerbRandomJoint;
    if (s == "verb_random_alter") return MaskingStrategy::VerbRandomAlter;
    throw std::invalid_argument("unknown masking strategy: " + std::string(s));
}

NegSampling neg_sampling_from_string(std::string_view s) {
    if (s == "randomized") return NegSampling::Randomized;
    if (s == "video_based") return NegSampling::VideoBased;
    if (s == "object_based") return NegSampling::ObjectBased;
    throw std::invalid_argument("unknown negative sampling: " + std::string(s));
}

TaskMode task_mode_from_string(std::string_view s) {
    if (s == "mam") return TaskMode::Mam;
    if (s == "mem") return TaskMode::Mem;
    if (s == "multi") return TaskMode::Multi;
    throw std::invalid_argument("unknown task mode: " + std::string(s));
}

Ablation ablation_from_string(std::string_view s) {
    if (s == "none") return Ablation::None;
    if (s == "text_only") return Ablation::TextOnly;
    if (s == "video_only") return Ablation::VideoOnly;
    throw std::invalid_argument("unknown ablation: " + std::string(s));
}

void ModelConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(vocab_size, "vocab_size");
    positive(hidden_dim, "hidden_dim");
    positive(n_heads, "n_heads");
    positive(mlp_ratio, "mlp_ratio");
    positive(max_text_len, "max_text_len");
    positive(max_video_len, "max_video_len");
    positive(feature_dim, "feature_dim");
    positive(candidate_cap, "candidate_cap");
    positive(batch_size, "batch_size");
    if (hidden_dim % n_heads != 0) throw std::invalid_argument("hidden_dim must be divisible by n_heads");
    if (vocab_size <= 3) throw std::invalid_argument("vocab_size must exceed the reserved tokens");
    if (!(nce_temperature > 0.0)) throw std::invalid_argument("nce_temperature must be > 0");
    if (!(mask_prob >= 0.0 && mask_prob <= 1.0)) throw std::invalid_argument("mask_prob outside [0,1]");
    double sum = 0.0;
    for (double p : verb_replace_dist) {
        if (!(p >= 0.0)) throw std::invalid_argument("verb_replace_dist has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("verb_replace_dist must sum to 1");
    if (optimizer.grad_accum == 0) throw std::invalid_argument("grad_accum must be positive");
    if (!(optimizer.lr >= 0.0)) throw std::invalid_argument("lr must be non-negative");
}

void to_json(json& j, const ModelConfig& c) {
    j = json{{"vocab_size", c.vocab_size},
             {"hidden_dim", c.hidden_dim},
             {"n_cross_layers", c.n_cross_layers},
             {"n_temporal_layers", c.n_temporal_layers},
             {"n_heads", c.n_heads},
             {"mlp_ratio", c.mlp_ratio},
             {"max_text_len", c.max_text_len},
             {"max_video_len", c.max_video_len},
             {"feature_dim", c.feature_dim},
             {"nce_temperature", c.nce_temperature},
             {"mask_prob", c.mask_prob},
             {"verb_replace_dist", c.verb_replace_dist},
             {"masking_strategy", to_string(c.masking_strategy)},
             {"neg_sampling", to_string(c.neg_sampling)},
             {"candidate_cap", c.candidate_cap},
             {"optimizer",
              {{"lr", c.optimizer.lr},
               {"weight_decay", c.optimizer.weight_decay},
               {"beta1", c.optimizer.beta1},
               {"beta2", c.optimizer.beta2},
               {"eps", c.optimizer.eps},
               {"warmup_steps", c.optimizer.warmup_steps},
               {"total_steps", c.optimizer.total_steps},
               {"grad_accum", c.optimizer.grad_accum}}},
             {"task_mode", to_string(c.task_mode)},
             {"ablation", to_string(c.ablation)},
             {"ln_eps", c.ln_eps},
             {"init_std", c.init_std},
             {"seed", c.seed},
             {"batch_size", c.batch_size},
             {"eval_interval", c.eval_interval}};
}

void from_json(const json& j, ModelConfig& c) {
    static const std::set<std::string> known = {
        "vocab_size",   "hidden_dim",       "n_cross_layers",   "n_temporal_layers", "n_heads",
        "mlp_ratio",    "max_text_len",     "max_video_len",    "feature_dim",       "nce_temperature",
        "mask_prob",    "verb_replace_dist", "masking_strategy", "neg_sampling",      "candidate_cap",
        "optimizer",    "task_mode",        "ablation",         "ln_eps",            "init_std",
        "seed",         "batch_size",       "eval_interval"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("unknown model config key: " + key);
    }
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.n_cross_layers = j.value("n_cross_layers", c.n_cross_layers);
    c.n_temporal_layers = j.value("n_temporal_layers", c.n_temporal_layers);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
    c.max_text_len = j.value("max_text_len", c.max_text_len);
    c.max_video_len = j.value("max_video_len", c.max_video_len);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.nce_temperature = j.value("nce_temperature", c.nce_temperature);
    c.mask_prob = j.value("mask_prob", c.mask_prob);
    c.verb_replace_dist = j.value("verb_replace_dist", c.verb_replace_dist);
    if (j.contains("masking_strategy"))
        c.masking_strategy = masking_strategy_from_string(j.at("masking_strategy").get<std::string>());
    if (j.contains("neg_sampling")) c.neg_sampling = neg_sampling_from_string(j.at("neg_sampling").get<std::string>());
    c.candidate_cap = j.value("candidate_cap", c.candidate_cap);
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        c.optimizer.lr = o.value("lr", c.optimizer.lr);
        c.optimizer.weight_decay = o.value("weight_decay", c.optimizer.weight_decay);
        c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
        c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
        c.optimizer.eps = o.value("eps", c.optimizer.eps);
        c.optimizer.warmup_steps = o.value("warmup_steps", c.optimizer.warmup_steps);
        c.optimizer.total_steps = o.value("total_steps", c.optimizer.total_steps);
        c.optimizer.grad_accum = o.value("grad_accum", c.optimizer.grad_accum);
    }
    if (j.contains("task_mode")) c.task_mode = task_mode_from_string(j.at("task_mode").get<std::string>());
    if (j.contains("ablation")) c.ablation = ablation_from_string(j.at("ablation").get<std::string>());
    c.ln_eps = j.value("ln_eps", c.ln_eps);
    c.init_std = j.value("init_std", c.init_std);
    c.seed = j.value("seed", c.seed);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.eval_interval = j.value("eval_interval", c.eval_interval);
}

}  // namespace cae::model
