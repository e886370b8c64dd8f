#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cae/common.hpp"
#include "cae/config.hpp"
#include "cae/tokenizer.hpp"

namespace cae::model {

enum class Replacement : std::uint8_t { Mask, Random, Unchanged };

struct MaskedPosition {
    std::size_t position = 0;
    TokenId original = 0;
    Replacement kind = Replacement::Mask;
    TokenId replacement = 0;  // id fed to the model

    bool operator==(const MaskedPosition&) const = default;
};

/// Positions to reconstruct, in ascending order.
struct MaskingPlan {
    std::vector<MaskedPosition> targets;

    bool empty() const noexcept { return targets.empty(); }
    /// Copy of `ids` with every target replaced.
    std::vector<TokenId> apply(std::span<const TokenId> ids) const;
};

struct MaskingParams {
    double mask_prob = 0.15;
    std::array<double, 3> replace_dist{0.80, 0.15, 0.05};
    std::size_t vocab_size = 0;  // random replacements are drawn from [Vocab::kReserved, vocab_size)
};

/// Builds the MAM masking plan for one record.
///
/// verb_only targets the verb alone; verb_random_joint targets the verb plus each other token
/// with probability mask_prob; verb_random_alter targets the verb alone on even
/// `record_index` and only random tokens (at least one) on odd ones. Each target is replaced
/// by [MASK], a random non-reserved token, or left unchanged per replace_dist.
MaskingPlan mam_mask(std::span<const TokenId> ids, std::size_t verb_index, MaskingStrategy strategy, Rng& rng,
                     const MaskingParams& params, std::size_t record_index = 0);

/// Inference plan: the verb alone, always replaced by [MASK].
MaskingPlan verb_inference_plan(std::span<const TokenId> ids, std::size_t verb_index);

}  // namespace cae::model
