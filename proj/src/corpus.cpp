#include "cae/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cae/common.hpp"
#include "cae/json_io.hpp"

namespace cae::corpus {

using nlohmann::json;

void to_json(json& j, const Token& t) {
    j = json{{"surface", t.surface}, {"lemma", t.lemma}, {"upos", t.upos}, {"dep_label", t.dep_label}};
}

void from_json(const json& j, Token& t) {
    t.surface = j.at("surface").get<std::string>();
    t.lemma = j.at("lemma").get<std::string>();
    t.upos = j.at("upos").get<std::string>();
    t.dep_label = j.at("dep_label").get<std::string>();
}

void to_json(json& j, const SubtitleRecord& r) {
    j = json{{"video_id", r.video_id}, {"category", r.category}, {"task_id", r.task_id},
             {"view_count", r.view_count}, {"start_s", r.start_s}, {"end_s", r.end_s},
             {"text", r.text}, {"tokens", r.tokens}};
}

void from_json(const json& j, SubtitleRecord& r) {
    r.video_id = j.at("video_id").get<std::string>();
    r.category = j.value("category", "");
    r.task_id = j.value("task_id", "");
    r.view_count = j.value("view_count", std::int64_t{0});
    r.start_s = j.at("start_s").get<double>();
    r.end_s = j.at("end_s").get<double>();
    r.text = j.value("text", "");
    r.tokens = j.at("tokens").get<std::vector<Token>>();
}

void to_json(json& j, const ClipRecord& c) {
    j = json{{"video_id", c.video_id},       {"category", c.category},
             {"start_s", c.start_s},         {"end_s", c.end_s},
             {"result_verb", c.result_verb}, {"verb_token_index", c.verb_token_index},
             {"objects", c.objects},         {"tokens", c.tokens},
             {"text", c.text}};
}

void from_json(const json& j, ClipRecord& c) {
    c.video_id = j.at("video_id").get<std::string>();
    c.category = j.value("category", "");
    c.start_s = j.at("start_s").get<double>();
    c.end_s = j.at("end_s").get<double>();
    c.result_verb = j.at("result_verb").get<std::string>();
    c.verb_token_index = j.at("verb_token_index").get<std::size_t>();
    c.objects = j.value("objects", std::set<std::string>{});
    c.tokens = j.at("tokens").get<std::vector<Token>>();
    c.text = j.value("text", "");
}

std::string ClipRecord::id() const {
    return video_id + "@" + std::to_string(std::llround(start_s * 1000.0));
}

namespace {

bool is_result_verb_token(const Token& t, const std::set<std::string>& verbs) {
    return t.upos == "VERB" && verbs.contains(t.lemma);
}

std::set<std::string> non_phrasal(const std::set<std::string>& verbs) {
    std::set<std::string> out;
    for (const auto& v : verbs) {
        if (v.find('_') == std::string::npos) out.insert(v);
    }
    return out;
}

std::string validate_record(const SubtitleRecord& rec) {
    if (rec.video_id.empty()) return "empty video_id";
    if (!(rec.start_s >= 0.0)) return "negative start time";
    if (!(rec.end_s > rec.start_s)) return "end_s must exceed start_s";
    for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
        const auto& t = rec.tokens[i];
        if (t.surface.empty() || t.lemma.empty() || t.upos.empty() || t.dep_label.empty())
            return "token " + std::to_string(i) + " has an empty annotation field";
    }
    return {};
}

}  // namespace

std::set<std::string> filter_video_pool(const std::vector<SubtitleRecord>& records,
                                        const std::set<std::string>& result_verbs, const PoolFilter& opts) {
    struct VideoInfo {
        std::string category;
        std::string task_id;
        std::int64_t views = 0;
    };
    std::map<std::string, VideoInfo> videos;
    std::map<std::string, std::map<std::string, std::size_t>> verb_clips;  // category -> verb -> records

    for (const auto& rec : records) {
        videos.try_emplace(rec.video_id, VideoInfo{rec.category, rec.task_id, rec.view_count});
        std::set<std::string> present;
        for (const auto& t : rec.tokens) {
            if (is_result_verb_token(t, result_verbs)) present.insert(t.lemma);
        }
        for (const auto& v : present) ++verb_clips[rec.category][v];
    }

    std::set<std::string> dense_categories;
    for (const auto& [category, counts] : verb_clips) {
        const auto dense_types = std::count_if(counts.begin(), counts.end(), [&](const auto& kv) {
            return kv.second > opts.min_clips_per_verb;
        });
        if (static_cast<std::size_t>(dense_types) > opts.min_verb_types) dense_categories.insert(category);
    }

    std::map<std::string, std::vector<std::pair<std::int64_t, std::string>>> by_task;
    for (const auto& [id, info] : videos) {
        if (dense_categories.contains(info.category)) by_task[info.task_id].emplace_back(info.views, id);
    }

    std::set<std::string> kept;
    for (auto& [task, vids] : by_task) {
        std::sort(vids.begin(), vids.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        const std::size_t n = std::min(opts.top_k_per_task, vids.size());
        for (std::size_t i = 0; i < n; ++i) kept.insert(vids[i].second);
    }
    return kept;
}

ClipExtractor::ClipExtractor(std::set<std::string> result_verbs, const std::map<std::string, double>& concreteness,
                             ExtractOptions opts, Sink sink, DiagnosticSink diag)
    : verbs_(non_phrasal(result_verbs)),
      concreteness_(concreteness),
      opts_(std::move(opts)),
      sink_(std::move(sink)),
      diag_(std::move(diag)) {}

void ClipExtractor::push(const SubtitleRecord& rec) {
    if (auto problem = validate_record(rec); !problem.empty()) {
        if (diag_) diag_({rec.video_id, rec.start_s, problem});
        return;
    }

    std::size_t occurrences = 0;
    std::size_t verb_index = 0;
    for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
        if (is_result_verb_token(rec.tokens[i], verbs_)) {
            ++occurrences;
            verb_index = i;
        }
    }
    if (occurrences != 1) return;

    auto last = last_start_.find(rec.video_id);
    if (last != last_start_.end() && rec.start_s - last->second < opts_.min_gap_s) return;
    last_start_[rec.video_id] = rec.start_s;

    ClipRecord clip;
    clip.video_id = rec.video_id;
    clip.category = rec.category;
    clip.start_s = rec.start_s;
    clip.end_s = rec.end_s;
    clip.result_verb = rec.tokens[verb_index].lemma;
    clip.verb_token_index = verb_index;
    clip.tokens = rec.tokens;
    clip.text = rec.text;
    for (const auto& t : rec.tokens) {
        if (t.upos != "NOUN" || !opts_.object_deps.contains(t.dep_label)) continue;
        auto it = concreteness_.find(t.lemma);
        if (it != concreteness_.end() && it->second > opts_.object_min_concreteness) clip.objects.insert(t.lemma);
    }
    sink_(std::move(clip));
}

ExtractResult extract_cae_clips(std::vector<SubtitleRecord> records, const std::set<std::string>& result_verbs,
                                const std::map<std::string, double>& concreteness, const ExtractOptions& opts) {
    std::stable_sort(records.begin(), records.end(), [](const SubtitleRecord& a, const SubtitleRecord& b) {
        if (a.video_id != b.video_id) return a.video_id < b.video_id;
        return a.start_s < b.start_s;
    });
    ExtractResult result;
    ClipExtractor extractor(
        result_verbs, concreteness, opts, [&](ClipRecord c) { result.clips.push_back(std::move(c)); },
        [&](Diagnostic d) { result.diagnostics.push_back(std::move(d)); });
    for (const auto& rec : records) extractor.push(rec);
    return result;
}

SubtitleRecord as_record(const ClipRecord& clip) {
    SubtitleRecord r;
    r.video_id = clip.video_id;
    r.category = clip.category;
    r.start_s = clip.start_s;
    r.end_s = clip.end_s;
    r.text = clip.text;
    r.tokens = clip.tokens;
    return r;
}

std::map<std::string, CategoryStats> corpus_stats(const std::vector<ClipRecord>& clips, std::size_t top_n) {
    std::map<std::string, std::set<std::string>> videos;
    std::map<std::string, std::map<std::string, std::size_t>> verbs;
    std::map<std::string, CategoryStats> out;
    for (const auto& c : clips) {
        videos[c.category].insert(c.video_id);
        ++verbs[c.category][c.result_verb];
        ++out[c.category].n_clips;
    }
    for (auto& [category, stats] : out) {
        stats.n_videos = videos[category].size();
        std::vector<std::pair<std::string, std::size_t>> ranked(verbs[category].begin(), verbs[category].end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (std::size_t i = 0; i < std::min(top_n, ranked.size()); ++i) stats.top_verbs.push_back(ranked[i].first);
    }
    return out;
}

namespace {

template <class T>
std::vector<T> parse_jsonl(std::string_view jsonl) {
    std::vector<T> out;
    std::istringstream in{std::string(jsonl)};
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(text).get<T>());
        } catch (const json::exception& e) {
            throw SchemaError(line, "", e.what());
        }
    }
    return out;
}

template <class T>
std::string dump_jsonl(const std::vector<T>& items) {
    std::string out;
    for (const auto& item : items) {
        out += json(item).dump();
        out += '\n';
    }
    return out;
}

}  // namespace

std::vector<SubtitleRecord> parse_subtitles(std::string_view jsonl) { return parse_jsonl<SubtitleRecord>(jsonl); }
std::vector<ClipRecord> parse_clips(std::string_view jsonl) { return parse_jsonl<ClipRecord>(jsonl); }
std::string to_jsonl(const std::vector<ClipRecord>& clips) { return dump_jsonl(clips); }
std::string to_jsonl(const std::vector<SubtitleRecord>& records) { return dump_jsonl(records); }

}  // namespace cae::corpus
