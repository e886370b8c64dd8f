#include "cae/lexicon.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cae::lexicon {

using nlohmann::json;

namespace {

const json& require(const json& rec, const char* field, std::size_t line) {
    auto it = rec.find(field);
    if (it == rec.end()) throw SchemaError(line, field, "missing field");
    return *it;
}

std::string require_string(const json& rec, const char* field, std::size_t line) {
    const auto& v = require(rec, field, line);
    if (!v.is_string()) throw SchemaError(line, field, "expected string");
    return v.get<std::string>();
}

std::vector<std::string> require_string_list(const json& rec, const char* field, std::size_t line) {
    const auto& v = require(rec, field, line);
    if (!v.is_array()) throw SchemaError(line, field, "expected array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw SchemaError(line, field, "expected array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::map<std::string, std::set<std::string>> string_set_map(const json& rec, const char* field,
                                                            std::size_t line) {
    std::map<std::string, std::set<std::string>> out;
    auto it = rec.find(field);
    if (it == rec.end()) return out;
    if (!it->is_object()) throw SchemaError(line, field, "expected object of string arrays");
    for (const auto& [key, arr] : it->items()) {
        if (!arr.is_array()) throw SchemaError(line, field, "expected object of string arrays");
        auto& dst = out[key];
        for (const auto& e : arr) {
            if (!e.is_string()) throw SchemaError(line, field, "expected object of string arrays");
            dst.insert(e.get<std::string>());
        }
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && to_lower_ascii(a) == to_lower_ascii(b);
}

}  // namespace

std::set<std::string> LexicalSnapshot::all_frames() const {
    std::set<std::string> out;
    for (const auto& e : framenet_entries) out.insert(e.frames.begin(), e.frames.end());
    return out;
}

LexicalSnapshot parse_snapshot(std::string_view jsonl) {
    LexicalSnapshot snap;
    std::set<std::pair<std::string, std::string>> seen_senses;
    std::istringstream in{std::string(jsonl)};
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(text);
        } catch (const json::parse_error& e) {
            throw SchemaError(line, "", std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object()) throw SchemaError(line, "", "record is not an object");
        const std::string kind = require_string(rec, "kind", line);
        const std::string lemma = normalize_lemma(require_string(rec, "lemma", line));
        if (lemma.empty()) throw SchemaError(line, "lemma", "empty lemma");

        if (kind == "verbnet") {
            VerbNetEntry e;
            e.lemma = lemma;
            e.sense_id = require_string(rec, "sense_id", line);
            e.thematic_roles = require_string_list(rec, "thematic_roles", line);
            if (e.thematic_roles.empty()) throw SchemaError(line, "thematic_roles", "empty role list");
            e.selectional_restrictions = string_set_map(rec, "selectional_restrictions", line);
            for (const auto& [role, tags] : e.selectional_restrictions) {
                const bool known = std::any_of(e.thematic_roles.begin(), e.thematic_roles.end(),
                                               [&](const std::string& r) { return iequals(r, role); });
                if (!known) throw SchemaError(line, "selectional_restrictions", "restriction on unknown role " + role);
            }
            if (!seen_senses.emplace(e.lemma, e.sense_id).second)
                throw SchemaError(line, "sense_id", "duplicate sense id " + e.sense_id + " for " + e.lemma);
            snap.verbnet_entries.push_back(std::move(e));
        } else if (kind == "imsitu") {
            ImSituEntry e;
            e.lemma = lemma;
            e.roles = require_string_list(rec, "roles", line);
            if (e.roles.empty()) throw SchemaError(line, "roles", "empty role list");
            snap.imsitu_entries.push_back(std::move(e));
        } else if (kind == "framenet") {
            FrameNetEntry e;
            e.lemma = lemma;
            for (auto& f : require_string_list(rec, "frames", line)) e.frames.insert(std::move(f));
            e.frame_elements = string_set_map(rec, "frame_elements", line);
            for (const auto& [frame, _] : e.frame_elements) {
                if (!e.frames.contains(frame))
                    throw SchemaError(line, "frame_elements", "elements given for unlisted frame " + frame);
            }
            snap.framenet_entries.push_back(std::move(e));
        } else if (kind == "wordnet") {
            auto& dst = snap.wordnet_entries[lemma];
            for (auto& h : require_string_list(rec, "hypernyms", line)) dst.insert(std::move(h));
        } else if (kind == "concreteness") {
            const auto& r = require(rec, "rating", line);
            if (!r.is_number()) throw SchemaError(line, "rating", "expected number");
            const double rating = r.get<double>();
            if (!(rating >= 1.0 && rating <= 5.0)) throw SchemaError(line, "rating", "rating out of range [1,5]");
            snap.concreteness[lemma] = rating;
        } else if (kind == "kinetics") {
            snap.kinetics_verbs.insert(lemma);
        } else {
            throw SchemaError(line, "kind", "unknown kind '" + kind + "'");
        }
    }
    return snap;
}

LexicalSnapshot load_snapshot(const std::string& path) { return parse_snapshot(read_file(path)); }

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Sure ? "sure" : "unsure"; }

std::set<std::string> MiningOptions::default_invalid_second_roles() {
    return {"place",        "tool",         "location",   "manner",        "instrument",  "listener",
            "container",    "model",        "suspect",    "victimpart",    "addressee",   "confronted",
            "start",        "message",      "skill",      "ailment",       "focus",       "resource",
            "experiencer",  "phenomenon",   "agentpart",  "coagent",       "end",         "recipient",
            "audience",     "blow",         "supported",  "interviewee",   "destination", "source",
            "carrier",      "entityhelped", "center",     "reciever",      "event",       "naggedperson",
            "obstacle",     "stake",        "coparticipant", "seller",     "performer",   "student",
            "giver",        "reference",    "adressee",   "competition",   "occasion",    "image",
            "coagentpart",  "bodypart",     "boringthing", "victim",       "follower",    "perceiver",
            "imitation",    "admired",      "chasee",     "undergoer",     "path",        "shelter",
            "restrained"};
}

namespace {

struct Evidence {
    std::vector<SenseRef> senses;
    bool has_verbnet = false;
    bool has_imsitu = false;
    bool has_framenet_frames = false;
    bool visual_positive = false;
    bool apr_sense = false;       // some VerbNet sense has roles exactly (Agent, Patient, Result)
    bool effect_element = false;  // some evoked frame carries a Result/Effect element
    std::set<std::string> frames;
};

bool is_agent_patient_result(const std::vector<std::string>& roles) {
    return roles.size() == 3 && iequals(roles[0], "Agent") && iequals(roles[1], "Patient") &&
           iequals(roles[2], "Result");
}

bool patient_is_visual(const VerbNetEntry& e, const std::set<std::string>& tags) {
    for (const auto& [role, restr] : e.selectional_restrictions) {
        if (!iequals(role, "Patient")) continue;
        for (const auto& tag : restr) {
            if (tags.contains(to_lower_ascii(tag))) return true;
        }
    }
    return false;
}

}  // namespace

std::vector<ResultVerb> identify_result_verbs(const LexicalSnapshot& snap, const MiningOptions& opts) {
    std::map<std::string, Evidence> by_lemma;

    for (const auto& e : snap.verbnet_entries) {
        auto& ev = by_lemma[e.lemma];
        ev.has_verbnet = true;
        ev.senses.push_back({e.sense_id, "verbnet"});
        if (patient_is_visual(e, opts.patient_visual_tags)) ev.visual_positive = true;
        if (is_agent_patient_result(e.thematic_roles)) ev.apr_sense = true;
    }
    for (const auto& e : snap.imsitu_entries) {
        auto& ev = by_lemma[e.lemma];
        ev.has_imsitu = true;
        ev.senses.push_back({e.lemma, "imsitu"});
        if (e.roles.size() >= 2 && !opts.invalid_second_roles.contains(to_lower_ascii(e.roles[1])))
            ev.visual_positive = true;
    }
    for (const auto& e : snap.framenet_entries) {
        auto& ev = by_lemma[e.lemma];
        if (!e.frames.empty()) ev.has_framenet_frames = true;
        ev.frames.insert(e.frames.begin(), e.frames.end());
        for (const auto& [frame, elements] : e.frame_elements) {
            for (const auto& el : elements) {
                if (opts.effect_elements.contains(el)) ev.effect_element = true;
            }
        }
    }

    std::vector<ResultVerb> out;
    out.reserve(by_lemma.size());
    for (auto& [lemma, ev] : by_lemma) {
        ResultVerb rv;
        rv.lemma = lemma;
        std::sort(ev.senses.begin(), ev.senses.end());
        ev.senses.erase(std::unique(ev.senses.begin(), ev.senses.end()), ev.senses.end());
        rv.senses = std::move(ev.senses);
        rv.frames = std::move(ev.frames);
        rv.phrasal = lemma.find('_') != std::string::npos;

        if (ev.visual_positive)
            rv.visualness = Ternary::True;
        else if (ev.has_imsitu && ev.has_verbnet)
            rv.visualness = Ternary::False;
        else
            rv.visualness = Ternary::Unknown;

        if (ev.apr_sense && ev.effect_element)
            rv.effect_causing = Ternary::True;
        else if (ev.has_verbnet && ev.has_framenet_frames && !ev.effect_element)
            rv.effect_causing = Ternary::False;
        else
            rv.effect_causing = Ternary::Unknown;

        rv.verdict = (rv.visualness == Ternary::True && rv.effect_causing == Ternary::True) ? Verdict::Sure
                                                                                            : Verdict::Unsure;
        out.push_back(std::move(rv));
    }
    return out;
}

std::map<std::string, std::set<std::string>> verb_frame_index(const std::vector<ResultVerb>& verbs) {
    std::map<std::string, std::set<std::string>> index;
    for (const auto& v : verbs) {
        for (const auto& f : v.frames) index[f].insert(v.lemma);
    }
    return index;
}

std::string to_jsonl(const std::vector<ResultVerb>& verbs) {
    std::string out;
    for (const auto& v : verbs) {
        json senses = json::array();
        for (const auto& s : v.senses) senses.push_back({{"id", s.id}, {"source", s.source}});
        json rec = {{"lemma", v.lemma},
                    {"senses", senses},
                    {"visualness", to_string(v.visualness)},
                    {"effect_causing", to_string(v.effect_causing)},
                    {"verdict", to_string(v.verdict)},
                    {"frames", v.frames},
                    {"phrasal", v.phrasal}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<ResultVerb> parse_result_verbs(std::string_view jsonl) {
    std::vector<ResultVerb> out;
    std::istringstream in{std::string(jsonl)};
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json rec = json::parse(text);
            ResultVerb v;
            v.lemma = rec.at("lemma").get<std::string>();
            for (const auto& s : rec.value("senses", json::array()))
                v.senses.push_back({s.at("id").get<std::string>(), s.at("source").get<std::string>()});
            v.visualness = ternary_from_string(rec.value("visualness", "unknown"));
            v.effect_causing = ternary_from_string(rec.value("effect_causing", "unknown"));
            v.verdict = rec.value("verdict", "unsure") == "sure" ? Verdict::Sure : Verdict::Unsure;
            v.frames = rec.value("frames", std::set<std::string>{});
            v.phrasal = rec.value("phrasal", v.lemma.find('_') != std::string::npos);
            out.push_back(std::move(v));
        } catch (const json::exception& e) {
            throw SchemaError(line, "", e.what());
        } catch (const std::invalid_argument& e) {
            throw SchemaError(line, "", e.what());
        }
    }
    return out;
}

}  // namespace cae::lexicon
