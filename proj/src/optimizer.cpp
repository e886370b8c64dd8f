#include "cae/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace cae::model {

double learning_rate(const OptimizerConfig& cfg, std::uint64_t step) noexcept {
    if (cfg.warmup_steps == 0) return cfg.lr;
    const double frac = static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    return cfg.lr * std::min(1.0, frac);
}

void adamw_update(Mat& param, const Mat& grad, Mat& m, Mat& v, double lr, std::uint64_t t,
                  const OptimizerConfig& cfg, bool decays) {
    if (decays) param *= 1.0 - lr * cfg.weight_decay;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

AdamW::AdamW(const OptimizerConfig& cfg, const Weights& like)
    : cfg_(cfg), m_(like.zeros_like()), v_(like.zeros_like()) {}

void AdamW::step(Weights& weights, const Weights& grad, std::uint64_t step) {
    ++t_;
    const double lr = learning_rate(cfg_, step);
    std::vector<Mat*> ms, vs;
    visit_tensors(m_, [&](const std::string&, Mat& x, bool) { ms.push_back(&x); });
    visit_tensors(v_, [&](const std::string&, Mat& x, bool) { vs.push_back(&x); });
    std::size_t i = 0;
    visit_pairs(weights, grad, [&](const std::string&, Mat& p, const Mat& g, bool decays) {
        adamw_update(p, g, *ms[i], *vs[i], lr, t_, cfg_, decays);
        ++i;
    });
}

}  // namespace cae::model
