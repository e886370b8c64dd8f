#include "cae/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "cae/common.hpp"

namespace cae::model {

Vocab::Vocab() : tokens_{"[PAD]", "[UNK]", std::string(kMaskText)} {
    for (std::size_t i = 0; i < tokens_.size(); ++i) ids_.emplace(tokens_[i], static_cast<TokenId>(i));
}

Vocab Vocab::build(const std::map<std::string, std::size_t>& counts, std::size_t max_size) {
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocab v;
    for (const auto& [word, _] : ranked) {
        if (v.size() >= max_size) break;
        if (v.ids_.contains(word)) continue;
        v.ids_.emplace(word, static_cast<TokenId>(v.tokens_.size()));
        v.tokens_.push_back(word);
    }
    return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < static_cast<std::size_t>(kReserved) || tokens[kPad] != "[PAD]" || tokens[kUnk] != "[UNK]" ||
        tokens[kMask] != kMaskText)
        throw std::invalid_argument("vocabulary must start with [PAD], [UNK], [MASK]");
    Vocab v;
    v.tokens_ = std::move(tokens);
    v.ids_.clear();
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
        if (!v.ids_.emplace(v.tokens_[i], static_cast<TokenId>(i)).second)
            throw std::invalid_argument("duplicate vocabulary entry " + v.tokens_[i]);
    }
    return v;
}

TokenId Vocab::id(std::string_view word) const {
    auto it = ids_.find(word);
    return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view word) const { return ids_.find(word) != ids_.end(); }

namespace {

bool word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
        while (!cur.empty() && cur.back() == '\'') cur.pop_back();
        if (!cur.empty()) words.push_back(std::move(cur));
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text.substr(i, Vocab::kMaskText.size()) == Vocab::kMaskText) {
            flush();
            words.emplace_back(Vocab::kMaskText);
            i += Vocab::kMaskText.size() - 1;
            continue;
        }
        const auto c = static_cast<unsigned char>(text[i]);
        if (word_char(c) || (c == '\'' && !cur.empty())) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return words;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab) {
    std::vector<TokenId> ids;
    for (const auto& w : split_words(text)) ids.push_back(vocab.id(w));
    return ids;
}

std::string detokenize(const std::vector<TokenId>& ids, const Vocab& vocab) {
    std::string out;
    for (auto id : ids) {
        if (!out.empty()) out.push_back(' ');
        out += vocab.token(id);
    }
    return out;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    for (const auto& w : split_words(text)) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

EncodedText encode_clip_text(const corpus::ClipRecord& clip, const Vocab& vocab) {
    if (clip.verb_token_index >= clip.tokens.size()) throw std::invalid_argument("verb index out of range: " + clip.id());
    EncodedText enc;
    for (std::size_t i = 0; i < clip.tokens.size(); ++i) {
        if (i == clip.verb_token_index) {
            enc.verb_position = enc.ids.size();
            enc.ids.push_back(vocab.id(to_lower_ascii(clip.result_verb)));
            continue;
        }
        for (const auto& w : split_words(clip.tokens[i].surface)) enc.ids.push_back(vocab.id(w));
    }
    return enc;
}

void count_clip_words(const corpus::ClipRecord& clip, std::map<std::string, std::size_t>& counts) {
    for (std::size_t i = 0; i < clip.tokens.size(); ++i) {
        if (i == clip.verb_token_index) {
            ++counts[to_lower_ascii(clip.result_verb)];
            continue;
        }
        for (const auto& w : split_words(clip.tokens[i].surface)) ++counts[w];
    }
}

}  // namespace cae::model
