#include "cae/synthetic.hpp"

#include <array>
#include <cmath>

#include <json.hpp>

#include "cae/common.hpp"

namespace cae::synthetic {

using corpus::SubtitleRecord;
using corpus::Token;
using nlohmann::json;

namespace {

json verbnet(const std::string& lemma, const std::string& sense, std::vector<std::string> roles,
             json restrictions = json::object()) {
    return {{"kind", "verbnet"},
            {"lemma", lemma},
            {"sense_id", sense},
            {"thematic_roles", std::move(roles)},
            {"selectional_restrictions", std::move(restrictions)}};
}

json imsitu(const std::string& lemma, std::vector<std::string> roles) {
    return {{"kind", "imsitu"}, {"lemma", lemma}, {"roles", std::move(roles)}};
}

json framenet(const std::string& lemma, std::vector<std::string> frames, json elements = json::object()) {
    return {{"kind", "framenet"}, {"lemma", lemma}, {"frames", std::move(frames)}, {"frame_elements", std::move(elements)}};
}

json wordnet(const std::string& lemma, std::vector<std::string> hypernyms) {
    return {{"kind", "wordnet"}, {"lemma", lemma}, {"hypernyms", std::move(hypernyms)}};
}

const std::vector<std::string> kSureVerbs = {"attach", "bend", "chop", "grill", "simmer", "split", "stretch", "tie"};

const std::vector<std::pair<std::string, double>> kNouns = {
    {"carrot", 4.9}, {"onion", 5.0}, {"rope", 4.9},  {"wire", 4.8},   {"board", 4.7},  {"pan", 4.9},
    {"potato", 4.9}, {"steak", 4.9}, {"branch", 4.6}, {"ribbon", 4.8}, {"piece", 4.2}, {"knife", 5.0},
    {"ball", 5.0},   {"egg", 5.0},   {"bottle", 5.0}, {"plate", 4.9},  {"book", 4.9},  {"ice", 4.8},
    {"rubber", 4.6}, {"glass", 4.8}, {"idea", 1.6},   {"way", 1.9},   {"bit", 2.4},    {"while", 1.5}};

}  // namespace

std::string demo_snapshot_jsonl() {
    const json apr = json::array({"Agent", "Patient", "Result"});
    const json solid = {{"Patient", {"solid"}}};
    const json concrete = {{"Patient", {"concrete"}}};
    std::vector<json> rows = {
        verbnet("attach", "attach-22.3-2-1", {"Agent", "Patient", "Result"}, solid),
        imsitu("attach", {"agent", "item", "connector"}),
        framenet("attach", {"Attaching"}, {{"Attaching", {"Agent", "Item", "Result"}}}),
        verbnet("bend", "bend-45.2", {"Agent", "Patient", "Result"}, solid),
        framenet("bend", {"Reshaping"}, {{"Reshaping", {"Deformer", "Undergoer", "Result"}}}),
        verbnet("chop", "chop-18.2", {"Agent", "Patient", "Result"}, concrete),
        verbnet("chop", "chop-21.2-2", {"Agent", "Patient", "Instrument"}),
        imsitu("chop", {"agent", "item", "tool"}),
        framenet("chop", {"Cutting"}, {{"Cutting", {"Agent", "Item", "Pieces", "Result"}}}),
        verbnet("stretch", "stretch-45.2", {"Agent", "Patient", "Result"}),
        imsitu("stretch", {"agent", "item", "place"}),
        framenet("stretch", {"Cause_expansion"}, {{"Cause_expansion", {"Agent", "Item", "Result"}}}),
        verbnet("tie", "tie-22.4", {"Agent", "Patient", "Result"}, solid),
        verbnet("tie", "tie-22.1-2", {"Agent", "Patient", "Co-Patient"}),
        imsitu("tie", {"agent", "item", "place"}),
        framenet("tie", {"Attaching"}, {{"Attaching", {"Agent", "Item", "Result"}}}),
        verbnet("split", "split-23.2", {"Agent", "Patient", "Result"}, solid),
        framenet("split", {"Cause_to_fragment"}, {{"Cause_to_fragment", {"Agent", "Whole_patient", "Result"}}}),
        verbnet("grill", "grill-45.3", {"Agent", "Patient", "Result"}, concrete),
        verbnet("grill", "grill-45.3-1", {"Agent", "Instrument"}),
        framenet("grill", {"Apply_heat"}, {{"Apply_heat", {"Cook", "Food", "Result"}}}),
        verbnet("simmer", "simmer-45.3", {"Agent", "Patient", "Result"}, concrete),
        framenet("simmer", {"Apply_heat"}, {{"Apply_heat", {"Cook", "Food", "Result"}}}),
        verbnet("activate", "activate-45.4", {"Agent", "Patient", "Result"}),
        framenet("activate", {"Cause_to_start"}, {{"Cause_to_start", {"Cause", "Effect"}}}),
        imsitu("block", {"agent", "blocked", "obstacle"}),
        verbnet("carve", "carve-23.3", {"Agent", "Patient", "Instrument"}, concrete),
        verbnet("carve", "carve-21.2-2", {"Agent", "Patient", "Instrument"}),
        imsitu("carve", {"agent", "item", "tool"}),
        imsitu("sniff", {"agent", "odor", "place"}),
        verbnet("warm", "warm-45.4", {"Agent", "Patient", "Result"}),
        framenet("warm", {"Cause_temperature_change"}, {{"Cause_temperature_change", {"Agent", "Item", "Result"}}}),
        verbnet("warm_up", "warm_up-45.4", {"Agent", "Patient", "Result"}, concrete),
        framenet("warm_up", {"Cause_temperature_change"}, {{"Cause_temperature_change", {"Agent", "Item", "Result"}}}),
        wordnet("grill", {"cook"}),
        wordnet("simmer", {"cook"}),
        wordnet("roast", {"cook"}),
        wordnet("fry", {"cook"}),
        wordnet("chop", {"cut"}),
        wordnet("carve", {"cut"}),
        wordnet("split", {"separate"}),
        wordnet("attach", {"connect"}),
        wordnet("tie", {"connect"}),
        wordnet("cook", {"create"}),
        wordnet("cut", {"separate"}),
        {{"kind", "kinetics"}, {"lemma", "stretch"}},
    };
    for (const auto& [noun, rating] : kNouns)
        rows.push_back({{"kind", "concreteness"}, {"lemma", noun}, {"rating", rating}});
    std::string out;
    for (const auto& r : rows) out += r.dump() + "\n";
    return out;
}

namespace {

Token tok(std::string surface, std::string lemma, std::string upos, std::string dep) {
    return {std::move(surface), std::move(lemma), std::move(upos), std::move(dep)};
}

std::string join_text(const std::vector<Token>& tokens) {
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) s += ' ';
        s += t.surface;
    }
    return s;
}

}  // namespace

std::vector<SubtitleRecord> demo_subtitles(const SubtitleOptions& opts) {
    Rng rng(opts.seed);
    std::vector<SubtitleRecord> out;
    const std::size_t n_concrete = 19;  // kNouns before the abstract tail
    for (std::size_t c = 0; c < opts.n_categories; ++c) {
        for (std::size_t t = 0; t < opts.tasks_per_category; ++t) {
            for (std::size_t v = 0; v < opts.videos_per_task; ++v) {
                const std::string video = "v" + std::to_string(c) + std::to_string(t) + std::to_string(v);
                double time = 2.0 + static_cast<double>(rng.below(4));
                for (std::size_t r = 0; r < opts.records_per_video; ++r) {
                    SubtitleRecord rec;
                    rec.video_id = video;
                    rec.category = "cat" + std::to_string(c);
                    rec.task_id = "task" + std::to_string(c) + std::to_string(t);
                    rec.view_count = static_cast<std::int64_t>(1000 + 37 * v + 11 * t);
                    rec.start_s = time;
                    rec.end_s = time + 3.0 + static_cast<double>(rng.below(3));
                    const auto& verb = kSureVerbs[rng.below(kSureVerbs.size())];
                    const auto& obj = kNouns[rng.below(n_concrete)].first;
                    const auto& abstract = kNouns[n_concrete + rng.below(kNouns.size() - n_concrete)].first;
                    const auto kind = rng.below(10);
                    if (kind < 5) {
                        rec.tokens = {tok(verb, verb, "VERB", "root"), tok("the", "the", "DET", "det"),
                                      tok(obj, obj, "NOUN", "dobj"), tok("into", "into", "ADP", "prep"),
                                      tok("pieces", "piece", "NOUN", "pobj")};
                    } else if (kind < 6) {
                        rec.tokens = {tok("now", "now", "ADV", "advmod"), tok(verb, verb, "VERB", "root"),
                                      tok("it", "it", "PRON", "dobj"), tok("for", "for", "ADP", "prep"),
                                      tok("a", "a", "DET", "det"), tok(abstract, abstract, "NOUN", "pobj")};
                    } else if (kind < 7) {
                        const auto& other = kSureVerbs[rng.below(kSureVerbs.size())];
                        rec.tokens = {tok(verb, verb, "VERB", "root"), tok("and", "and", "CCONJ", "cc"),
                                      tok(other, other, "VERB", "conj"), tok("the", "the", "DET", "det"),
                                      tok(obj, obj, "NOUN", "dobj")};
                    } else if (kind < 8) {
                        rec.tokens = {tok("stir", "stir", "VERB", "root"), tok("the", "the", "DET", "det"),
                                      tok(obj, obj, "NOUN", "dobj")};
                    } else if (kind < 9) {
                        rec.tokens = {tok("warm", "warm_up", "VERB", "root"), tok("up", "up", "ADP", "prt"),
                                      tok("the", "the", "DET", "det"), tok(obj, obj, "NOUN", "dobj")};
                    } else {
                        rec.tokens = {tok("then", "then", "ADV", "advmod"), tok(verb, verb, "VERB", "root"),
                                      tok("the", "the", "DET", "det"), tok(obj, obj, "NOUN", "dobj"),
                                      tok("with", "with", "ADP", "prep"), tok("the", "the", "DET", "det"),
                                      tok("knife", "knife", "NOUN", "pobj")};
                    }
                    rec.text = join_text(rec.tokens);
                    time = rec.end_s + (rng.below(4) == 0 ? 0.5 : 3.0 + static_cast<double>(rng.below(5)));
                    out.push_back(std::move(rec));
                }
            }
        }
    }
    return out;
}

ClipCorpus clip_corpus(const CorpusOptions& opts) {
    if (opts.n_verbs == 0 || opts.verbs_per_frame == 0 || opts.n_videos == 0 || opts.n_objects == 0 ||
        opts.n_categories == 0)
        throw std::invalid_argument("corpus options must be positive");
    Rng rng(opts.seed);
    ClipCorpus out;
    std::vector<std::string> verbs, objects;
    for (std::size_t i = 0; i < opts.n_verbs; ++i) {
        verbs.push_back("verb" + std::to_string(i));
        out.frames["Frame_" + std::to_string(i / opts.verbs_per_frame)].insert(verbs.back());
    }
    for (std::size_t i = 0; i < opts.n_objects; ++i) objects.push_back("obj" + std::to_string(i));
    static const std::array<std::string, 4> modifiers = {"slowly", "gently", "quickly", "carefully"};

    std::vector<double> next_start(opts.n_videos, 1.0);
    for (std::size_t i = 0; i < opts.n_clips; ++i) {
        corpus::ClipRecord clip;
        const std::size_t video = i % opts.n_videos;
        clip.video_id = "vid" + std::to_string(video);
        clip.category = "cat" + std::to_string(video % opts.n_categories);
        clip.start_s = next_start[video];
        clip.end_s = clip.start_s + opts.clip_len_s;
        next_start[video] += opts.clip_spacing_s;
        clip.result_verb = verbs[i % opts.n_verbs];
        const std::size_t combo = i / opts.n_verbs;
        const auto& obj = objects[(combo + i) % opts.n_objects];
        const auto& mod = modifiers[(combo / opts.n_objects + rng.below(modifiers.size())) % modifiers.size()];
        clip.tokens = {tok(clip.result_verb, clip.result_verb, "VERB", "root"), tok("the", "the", "DET", "det"),
                       tok(obj, obj, "NOUN", "dobj"), tok(mod, mod, "ADV", "advmod")};
        clip.verb_token_index = 0;
        clip.objects = {obj};
        clip.text = join_text(clip.tokens);
        out.clips.push_back(std::move(clip));
    }
    return out;
}

std::vector<eval::ProbeItem> demo_probe_items(std::size_t per_group_polarity, std::uint64_t seed) {
    struct Group {
        std::string name;
        std::vector<std::string> affords;
        std::vector<std::string> not_affords;
    };
    const std::vector<Group> groups = {
        {"stack", {"book", "block", "box", "coin", "plate"}, {"ball", "bottle", "egg", "flower", "lamp"}},
        {"roll", {"apple", "ball", "bottle", "egg", "can"}, {"book", "block", "box", "mirror", "microwave"}},
        {"grasp", {"ball", "block", "book", "bottle", "flower"}, {"flour", "rice", "salt", "snow", "sugar"}},
        {"break", {"bottle", "egg", "glass", "mirror", "plate"}, {"ball", "coin", "pen", "pillow", "shirt"}},
        {"slide", {"ice", "frost", "grease", "oil", "soap"}, {"carpet", "concrete", "grass", "gravel", "rubber"}},
        {"bounce", {"asphalt", "brick", "concrete", "rubber", "steel"}, {"carpet", "foam", "grass", "leave", "snow"}},
    };
    Rng rng(seed);
    std::vector<eval::ProbeItem> items;
    std::size_t position = 0;
    for (const auto& g : groups) {
        for (int pol = 0; pol < 2; ++pol) {
            const auto& answers = pol == 0 ? g.affords : g.not_affords;
            const auto& fillers = pol == 0 ? g.not_affords : g.affords;
            for (std::size_t k = 0; k < per_group_polarity; ++k) {
                eval::ProbeItem it;
                it.group = g.name;
                it.polarity = pol == 0 ? eval::Polarity::Original : eval::Polarity::Inverse;
                it.answer_index = position++ % 4;
                it.answer_position = it.answer_index + 1;
                std::vector<std::string> pool = fillers;
                rng.shuffle(pool);
                pool.resize(3);
                pool.insert(pool.begin() + static_cast<std::ptrdiff_t>(it.answer_index),
                            answers[rng.below(answers.size())]);
                it.candidates = pool;
                it.id = g.name + (pol == 0 ? "-ori-" : "-inv-") + std::to_string(k);
                it.template_text = std::string("a person wants to ") + g.name + " something . the object that " +
                                   (pol == 0 ? "is" : "is not") + " easiest to " + g.name + " is the [MASK] .";
                items.push_back(std::move(it));
            }
        }
    }
    return items;
}

}  // namespace cae::synthetic
