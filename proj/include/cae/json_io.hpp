#pragma once

// nlohmann::json adapters for the record types that appear in more than one file format.

#include <json.hpp>

#include "cae/corpus.hpp"

namespace cae::corpus {

void to_json(nlohmann::json& j, const Token& t);
void from_json(const nlohmann::json& j, Token& t);
void to_json(nlohmann::json& j, const SubtitleRecord& r);
void from_json(const nlohmann::json& j, SubtitleRecord& r);
void to_json(nlohmann::json& j, const ClipRecord& c);
void from_json(const nlohmann::json& j, ClipRecord& c);

}  // namespace cae::corpus
