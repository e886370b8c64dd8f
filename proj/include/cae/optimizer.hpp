#pragma once

#include <cstdint>

#include "cae/config.hpp"
#include "cae/encoder.hpp"

namespace cae::model {

/// base_lr * min(1, step / warmup_steps), constant afterwards. Zero warmup means base_lr from
/// step 0.
double learning_rate(const OptimizerConfig& cfg, std::uint64_t step) noexcept;

/// One AdamW update of a single tensor. `t` is the 1-based update count used for bias
/// correction. Decoupled decay (p -= lr * wd * p) is applied first when `decays` is set.
void adamw_update(Mat& param, const Mat& grad, Mat& m, Mat& v, double lr, std::uint64_t t,
                  const OptimizerConfig& cfg, bool decays);

class AdamW {
public:
    AdamW(const OptimizerConfig& cfg, const Weights& like);

    /// Applies `grad` to `weights` with the learning rate of `step`.
    void step(Weights& weights, const Weights& grad, std::uint64_t step);
    std::uint64_t updates() const noexcept { return t_; }

private:
    OptimizerConfig cfg_;
    Weights m_;
    Weights v_;
    std::uint64_t t_ = 0;
};

}  // namespace cae::model
