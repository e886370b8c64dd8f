#include "cae/masking.hpp"

#include <stdexcept>

namespace cae::model {

std::vector<TokenId> MaskingPlan::apply(std::span<const TokenId> ids) const {
    std::vector<TokenId> out(ids.begin(), ids.end());
    for (const auto& t : targets) out.at(t.position) = t.replacement;
    return out;
}

namespace {

MaskedPosition replace(std::size_t pos, TokenId original, Rng& rng, const MaskingParams& p) {
    MaskedPosition m{pos, original, Replacement::Mask, Vocab::kMask};
    const double u = rng.uniform();
    if (u < p.replace_dist[0]) return m;
    if (u < p.replace_dist[0] + p.replace_dist[1] && p.vocab_size > static_cast<std::size_t>(Vocab::kReserved)) {
        m.kind = Replacement::Random;
        m.replacement = static_cast<TokenId>(Vocab::kReserved +
                                             rng.below(p.vocab_size - static_cast<std::size_t>(Vocab::kReserved)));
        return m;
    }
    m.kind = Replacement::Unchanged;
    m.replacement = original;
    return m;
}

}  // namespace

MaskingPlan mam_mask(std::span<const TokenId> ids, std::size_t verb_index, MaskingStrategy strategy, Rng& rng,
                     const MaskingParams& params, std::size_t record_index) {
    if (verb_index >= ids.size()) throw std::out_of_range("verb index outside the token sequence");

    std::vector<bool> targeted(ids.size(), false);
    bool verb_targeted = true;
    bool random_targeted = true;
    if (strategy == MaskingStrategy::VerbOnly) random_targeted = false;
    if (strategy == MaskingStrategy::VerbRandomAlter) {
        verb_targeted = record_index % 2 == 0;
        random_targeted = !verb_targeted;
    }
    if (verb_targeted) targeted[verb_index] = true;
    if (random_targeted) {
        bool any = false;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i == verb_index) continue;
            if (rng.uniform() < params.mask_prob) {
                targeted[i] = true;
                any = true;
            }
        }
        if (!verb_targeted && !any) {
            // A random-only record still needs one reconstruction target.
            if (ids.size() > 1) {
                auto pick = static_cast<std::size_t>(rng.below(ids.size() - 1));
                if (pick >= verb_index) ++pick;
                targeted[pick] = true;
            } else {
                targeted[verb_index] = true;
            }
        }
    }

    MaskingPlan plan;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (targeted[i]) plan.targets.push_back(replace(i, ids[i], rng, params));
    }
    return plan;
}

MaskingPlan verb_inference_plan(std::span<const TokenId> ids, std::size_t verb_index) {
    if (verb_index >= ids.size()) throw std::out_of_range("verb index outside the token sequence");
    MaskingPlan plan;
    plan.targets.push_back({verb_index, ids[verb_index], Replacement::Mask, Vocab::kMask});
    return plan;
}

}  // namespace cae::model
