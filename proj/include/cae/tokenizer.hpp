#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cae/corpus.hpp"

namespace cae::model {

using TokenId = std::int32_t;

/// Word-level vocabulary with three reserved ids.
class Vocab {
public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kUnk = 1;
    static constexpr TokenId kMask = 2;
    static constexpr TokenId kReserved = 3;
    static constexpr std::string_view kMaskText = "[MASK]";

    Vocab();

    /// Builds from word counts: most frequent first, ties lexicographic, capped at max_size
    /// entries including the reserved ones.
    static Vocab build(const std::map<std::string, std::size_t>& counts, std::size_t max_size);
    static Vocab from_tokens(std::vector<std::string> tokens);

    std::size_t size() const noexcept { return tokens_.size(); }
    TokenId id(std::string_view word) const;
    bool contains(std::string_view word) const;
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::map<std::string, TokenId, std::less<>> ids_;
};

/// Lowercased words: runs of alphanumerics, '_' and inner apostrophes. The literal
/// "[MASK]" survives as one word.
std::vector<std::string> split_words(std::string_view text);

std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab);
std::string detokenize(const std::vector<TokenId>& ids, const Vocab& vocab);

/// Lowercased words joined by single spaces; what detokenize(tokenize(s)) returns for in-vocab s.
std::string normalize_text(std::string_view text);

struct EncodedText {
    std::vector<TokenId> ids;
    std::size_t verb_position = 0;
};

/// Encodes annotated clip tokens. The result verb is entered by its lemma so the MAM target
/// is the lemma itself; other tokens contribute their surface words.
EncodedText encode_clip_text(const corpus::ClipRecord& clip, const Vocab& vocab);

/// Word counts over clip texts (surface words plus verb lemmas).
void count_clip_words(const corpus::ClipRecord& clip, std::map<std::string, std::size_t>& counts);

}  // namespace cae::model
