#include "cae/split.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cae/common.hpp"
#include "cae/json_io.hpp"

namespace cae::split {

using nlohmann::json;

std::string_view to_string(VerbClass c) noexcept { return c == VerbClass::Seen ? "seen" : "unseen"; }

std::string_view to_string(Split s) noexcept {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

VerbClass verb_class_from_string(std::string_view s) {
    if (s == "seen") return VerbClass::Seen;
    if (s == "unseen") return VerbClass::Unseen;
    throw std::invalid_argument("unknown verb class: " + std::string(s));
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split: " + std::string(s));
}

void SplitConfig::validate() const {
    auto check = [](const std::array<double, 3>& r, const char* name) {
        for (double x : r) {
            if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(name) + ": ratio outside [0,1]");
        }
        if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9)
            throw std::invalid_argument(std::string(name) + ": ratios must sum to 1");
    };
    check(seen_clip_ratio, "seen_clip_ratio");
    check(unseen_clip_ratio, "unseen_clip_ratio");
    if (!(seen_fraction_per_frame >= 0.0 && seen_fraction_per_frame <= 1.0))
        throw std::invalid_argument("seen_fraction_per_frame outside [0,1]");
}

namespace {

// Counts derived from a fraction of n; the epsilon absorbs representation error in the ratios.
std::size_t floor_share(double frac, std::size_t n) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
}

std::size_t ceil_share(double frac, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9));
}

}  // namespace

VerbClassMap assign_verb_classes(const FrameIndex& frame_index, const SplitConfig& cfg) {
    cfg.validate();
    std::map<std::string, std::string> canonical_frame;
    for (const auto& [frame, lemmas] : frame_index) {
        for (const auto& lemma : lemmas) canonical_frame.try_emplace(lemma, frame);  // map order = smallest frame
    }
    std::map<std::string, std::vector<std::string>> members;
    for (const auto& [lemma, frame] : canonical_frame) members[frame].push_back(lemma);

    VerbClassMap out;
    for (auto& [frame, lemmas] : members) {
        Rng rng(mix_seed(cfg.seed, fnv1a(frame)));
        rng.shuffle(lemmas);
        const std::size_t n_seen = ceil_share(cfg.seen_fraction_per_frame, lemmas.size());
        for (std::size_t i = 0; i < lemmas.size(); ++i)
            out[lemmas[i]] = i < n_seen ? VerbClass::Seen : VerbClass::Unseen;
    }
    for (const auto& lemma : cfg.excluded_seen_lemmas) {
        if (auto it = out.find(lemma); it != out.end()) it->second = VerbClass::Unseen;
    }
    return out;
}

ZeroShotStats zero_shot_stats(const std::vector<const corpus::ClipRecord*>& train,
                              const std::vector<const corpus::ClipRecord*>& items) {
    std::set<std::string> videos, verbs, objects;
    for (const auto* c : train) {
        videos.insert(c->video_id);
        verbs.insert(c->result_verb);
        objects.insert(c->objects.begin(), c->objects.end());
    }
    ZeroShotStats s;
    if (items.empty()) return s;
    std::size_t zv = 0, za = 0, zo = 0;
    for (const auto* c : items) {
        if (!videos.contains(c->video_id)) ++zv;
        if (!verbs.contains(c->result_verb)) ++za;
        if (std::any_of(c->objects.begin(), c->objects.end(), [&](const auto& o) { return !objects.contains(o); }))
            ++zo;
    }
    const double n = static_cast<double>(items.size());
    s.pct_videos = 100.0 * static_cast<double>(zv) / n;
    s.pct_actions = 100.0 * static_cast<double>(za) / n;
    s.pct_objects = 100.0 * static_cast<double>(zo) / n;
    return s;
}

SplitManifest assign_clip_splits(const std::vector<corpus::ClipRecord>& clips, const VerbClassMap& verb_class,
                                 const SplitConfig& cfg) {
    cfg.validate();
    std::map<std::string, std::vector<const corpus::ClipRecord*>> by_verb;
    std::set<std::string> offenders;
    for (const auto& c : clips) {
        if (!verb_class.contains(c.result_verb)) offenders.insert(c.result_verb);
        by_verb[c.result_verb].push_back(&c);
    }
    if (!offenders.empty()) {
        std::string msg = "clips reference verbs without a class:";
        for (const auto& v : offenders) msg += " " + v;
        throw std::invalid_argument(msg);
    }

    SplitManifest m;
    m.verb_class = verb_class;
    for (auto& [lemma, group] : by_verb) {
        std::sort(group.begin(), group.end(), [](const auto* a, const auto* b) { return a->id() < b->id(); });
        Rng rng(mix_seed(cfg.seed, fnv1a(lemma)));
        rng.shuffle(group);

        const auto& ratio = verb_class.at(lemma) == VerbClass::Seen ? cfg.seen_clip_ratio : cfg.unseen_clip_ratio;
        const std::size_t n_train = floor_share(ratio[0], group.size());
        for (std::size_t i = 0; i < n_train; ++i) m.clip_assignment[group[i]->id()] = Split::Train;

        std::vector<const corpus::ClipRecord*> rest(group.begin() + static_cast<std::ptrdiff_t>(n_train), group.end());
        std::stable_sort(rest.begin(), rest.end(),
                         [](const auto* a, const auto* b) { return a->category < b->category; });
        const double held = ratio[1] + ratio[2];
        const double val_frac = held > 0.0 ? ratio[1] / held : 0.0;
        std::size_t n_val = 0;
        for (std::size_t k = 0; k < rest.size(); ++k) {
            const bool to_val = n_val < ceil_share(val_frac, k + 1);
            if (to_val) ++n_val;
            m.clip_assignment[rest[k]->id()] = to_val ? Split::Val : Split::Test;
        }
    }

    std::vector<const corpus::ClipRecord*> train, val, test;
    for (const auto& c : clips) {
        const Split s = m.clip_assignment.at(c.id());
        if (s == Split::Train && verb_class.at(c.result_verb) == VerbClass::Unseen)
            throw std::logic_error("unseen verb clip assigned to train: " + c.id());
        (s == Split::Train ? train : s == Split::Val ? val : test).push_back(&c);
    }
    m.stats.n_train = train.size();
    m.stats.n_val = val.size();
    m.stats.n_test = test.size();
    m.stats.val = zero_shot_stats(train, val);
    m.stats.test = zero_shot_stats(train, test);
    return m;
}

namespace {

json stats_json(const SplitStats& s) {
    auto zs = [](const ZeroShotStats& z) {
        return json{{"pct_zero_shot_videos", z.pct_videos},
                    {"pct_zero_shot_actions", z.pct_actions},
                    {"pct_zero_shot_objects", z.pct_objects}};
    };
    const double total = static_cast<double>(s.n_train + s.n_val + s.n_test);
    auto share = [&](std::size_t n) { return total > 0 ? 100.0 * static_cast<double>(n) / total : 0.0; };
    return json{{"n_train", s.n_train},
                {"n_val", s.n_val},
                {"n_test", s.n_test},
                {"global_ratio", {share(s.n_train), share(s.n_val), share(s.n_test)}},
                {"val", zs(s.val)},
                {"test", zs(s.test)}};
}

}  // namespace

std::string manifest_to_jsonl(const SplitManifest& manifest, const std::vector<corpus::ClipRecord>& clips) {
    std::string out;
    for (const auto& [verb, cls] : manifest.verb_class) {
        out += json{{"verb", verb}, {"class", to_string(cls)}}.dump();
        out += '\n';
    }
    std::vector<const corpus::ClipRecord*> ordered;
    for (const auto& c : clips) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) { return a->id() < b->id(); });
    for (const auto* c : ordered) {
        const auto id = c->id();
        out += json{{"clip_id", id}, {"split", to_string(manifest.clip_assignment.at(id))}, {"clip", *c}}.dump();
        out += '\n';
    }
    out += json{{"stats", stats_json(manifest.stats)}}.dump();
    out += '\n';
    return out;
}

std::vector<corpus::ClipRecord> LoadedManifest::clips_in(Split s) const {
    std::vector<corpus::ClipRecord> out;
    for (const auto& c : clips) {
        if (manifest.clip_assignment.at(c.id()) == s) out.push_back(c);
    }
    return out;
}

LoadedManifest parse_manifest(std::string_view jsonl) {
    LoadedManifest lm;
    std::istringstream in{std::string(jsonl)};
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json rec = json::parse(text);
            if (rec.contains("verb")) {
                lm.manifest.verb_class[rec.at("verb").get<std::string>()] =
                    verb_class_from_string(rec.at("class").get<std::string>());
            } else if (rec.contains("clip_id")) {
                auto clip = rec.at("clip").get<corpus::ClipRecord>();
                const auto id = rec.at("clip_id").get<std::string>();
                if (clip.id() != id) throw SchemaError(line, "clip_id", "does not match embedded clip");
                lm.manifest.clip_assignment[id] = split_from_string(rec.at("split").get<std::string>());
                lm.clips.push_back(std::move(clip));
            } else if (rec.contains("stats")) {
                const auto& s = rec.at("stats");
                lm.manifest.stats.n_train = s.value("n_train", std::size_t{0});
                lm.manifest.stats.n_val = s.value("n_val", std::size_t{0});
                lm.manifest.stats.n_test = s.value("n_test", std::size_t{0});
                auto zs = [](const json& z) {
                    return ZeroShotStats{z.value("pct_zero_shot_videos", 0.0), z.value("pct_zero_shot_actions", 0.0),
                                         z.value("pct_zero_shot_objects", 0.0)};
                };
                if (s.contains("val")) lm.manifest.stats.val = zs(s.at("val"));
                if (s.contains("test")) lm.manifest.stats.test = zs(s.at("test"));
            } else {
                throw SchemaError(line, "", "unrecognized manifest line");
            }
        } catch (const json::exception& e) {
            throw SchemaError(line, "", e.what());
        } catch (const std::invalid_argument& e) {
            throw SchemaError(line, "", e.what());
        }
    }
    return lm;
}

FrameIndex parse_frame_index(std::string_view json_text) {
    try {
        return json::parse(json_text).get<FrameIndex>();
    } catch (const json::exception& e) {
        throw SchemaError(0, "", std::string("frame index: ") + e.what());
    }
}

std::string frame_index_to_json(const FrameIndex& index) { return json(index).dump(2) + "\n"; }

}  // namespace cae::split
