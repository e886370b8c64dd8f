#include "cae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "cae/common.hpp"

namespace cae::eval {

double harmonic_mean(double a, double b) noexcept {
    if (a + b == 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

MapMetrics map_metrics(const std::vector<MapPrediction>& preds, const split::VerbClassMap& verb_class) {
    if (preds.empty()) throw std::invalid_argument("no predictions to score");
    std::map<std::string, std::pair<std::size_t, std::size_t>> per;  // lemma -> (correct, total)
    std::size_t correct = 0;
    for (const auto& p : preds) {
        if (!verb_class.contains(p.reference))
            throw std::invalid_argument("reference verb without a class: " + p.reference);
        auto& [ok, n] = per[p.reference];
        ++n;
        if (p.reference == p.predicted) {
            ++ok;
            ++correct;
        }
    }
    MapMetrics m;
    double seen_sum = 0.0, unseen_sum = 0.0;
    for (const auto& [lemma, counts] : per) {
        const double acc = 100.0 * static_cast<double>(counts.first) / static_cast<double>(counts.second);
        m.per_class[lemma] = acc;
        if (verb_class.at(lemma) == split::VerbClass::Seen) {
            seen_sum += acc;
            ++m.n_seen_classes;
        } else {
            unseen_sum += acc;
            ++m.n_unseen_classes;
        }
    }
    if (m.n_seen_classes) m.macro_seen = seen_sum / static_cast<double>(m.n_seen_classes);
    if (m.n_unseen_classes) m.macro_unseen = unseen_sum / static_cast<double>(m.n_unseen_classes);
    m.harmonic_mean = harmonic_mean(m.macro_seen, m.macro_unseen);
    m.micro = 100.0 * static_cast<double>(correct) / static_cast<double>(preds.size());
    return m;
}

double mep_metrics(const std::vector<std::vector<bool>>& instances) {
    if (instances.empty()) throw std::invalid_argument("no MEP instances to score");
    std::size_t ok = 0;
    for (const auto& inst : instances) {
        if (inst.empty()) throw std::invalid_argument("MEP instance without masked frames");
        ok += std::all_of(inst.begin(), inst.end(), [](bool b) { return b; });
    }
    return 100.0 * static_cast<double>(ok) / static_cast<double>(instances.size());
}

namespace {

std::set<std::string> hypernym_closure(const std::string& lemma, const HypernymMap& h, std::size_t depth) {
    std::set<std::string> out;
    std::set<std::string> frontier{lemma};
    for (std::size_t d = 0; d < depth && !frontier.empty(); ++d) {
        std::set<std::string> next;
        for (const auto& f : frontier) {
            auto it = h.find(f);
            if (it == h.end()) continue;
            for (const auto& p : it->second)
                if (out.insert(p).second) next.insert(p);
        }
        frontier = std::move(next);
    }
    return out;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return true;
        if (*i < *j)
            ++i;
        else
            ++j;
    }
    return false;
}

}  // namespace

GeneralizationReport generalization_analysis(const std::vector<MapPrediction>& false_predictions,
                                             const LemmaFrames& frames, const HypernymMap& hypernyms,
                                             const GeneralizationOptions& opts) {
    GeneralizationReport r;
    std::size_t frame_hits = 0, cohypo_hits = 0;
    static const std::set<std::string> none;
    auto frames_of = [&](const std::string& l) -> const std::set<std::string>& {
        auto it = frames.find(l);
        return it == frames.end() ? none : it->second;
    };
    std::set<std::string> warned;
    for (const auto& p : false_predictions) {
        if (p.reference == p.predicted) continue;
        ++r.n_pairs;
        for (const auto* l : {&p.reference, &p.predicted}) {
            if (!frames.contains(*l) && !hypernyms.contains(*l) && warned.insert(*l).second)
                r.warnings.push_back("lemma '" + *l + "' missing from both frame and hypernym resources");
        }
        if (intersects(frames_of(p.reference), frames_of(p.predicted))) ++frame_hits;
        if (intersects(hypernym_closure(p.reference, hypernyms, opts.hypernym_depth),
                       hypernym_closure(p.predicted, hypernyms, opts.hypernym_depth)))
            ++cohypo_hits;
    }
    if (r.n_pairs == 0) {
        r.warnings.push_back("no false predictions to analyse");
        return r;
    }
    r.pct_false_sharing_frame = 100.0 * static_cast<double>(frame_hits) / static_cast<double>(r.n_pairs);
    r.pct_false_cohyponym = 100.0 * static_cast<double>(cohypo_hits) / static_cast<double>(r.n_pairs);
    return r;
}

std::string_view to_string(Polarity p) noexcept { return p == Polarity::Original ? "original" : "inverse"; }

Polarity polarity_from_string(std::string_view s) {
    if (s == "original") return Polarity::Original;
    if (s == "inverse") return Polarity::Inverse;
    throw std::invalid_argument("unknown polarity: " + std::string(s));
}

std::string validate_probe_item(const ProbeItem& item) {
    if (item.candidates.size() < 4) return "item has fewer than 4 candidates";
    if (item.candidates.size() > 4) return "item has more than 4 candidates";
    if (std::set<std::string>(item.candidates.begin(), item.candidates.end()).size() != 4)
        return "candidates are not distinct";
    if (item.answer_index >= 4) return "answer index outside 0..3";
    if (item.answer_position != item.answer_index + 1) return "answer position disagrees with answer index";
    const auto first = item.template_text.find(model::Vocab::kMaskText);
    if (first == std::string::npos) return "template has no [MASK] slot";
    if (item.template_text.find(model::Vocab::kMaskText, first + 1) != std::string::npos)
        return "template has more than one [MASK] slot";
    return {};
}

std::vector<ProbeItem> parse_probe_items(std::string_view jsonl) {
    std::vector<ProbeItem> items;
    std::size_t line_no = 0;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ProbeItem it;
            it.id = j.value("id", "item" + std::to_string(line_no));
            it.template_text = j.at("template").get<std::string>();
            it.candidates = j.at("candidates").get<std::vector<std::string>>();
            it.answer_index = j.at("answer_index").get<std::size_t>();
            it.group = j.at("group").get<std::string>();
            it.polarity = polarity_from_string(j.at("polarity").get<std::string>());
            it.answer_position = j.value("answer_position", it.answer_index + 1);
            items.push_back(std::move(it));
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(line_no, "probe item", e.what());
        } catch (const std::invalid_argument& e) {
            throw SchemaError(line_no, "polarity", e.what());
        }
    }
    return items;
}

std::string probe_items_to_jsonl(const std::vector<ProbeItem>& items) {
    std::string out;
    for (const auto& it : items) {
        nlohmann::json j;
        j["id"] = it.id;
        j["template"] = it.template_text;
        j["candidates"] = it.candidates;
        j["answer_index"] = it.answer_index;
        j["answer_position"] = it.answer_position;
        j["group"] = it.group;
        j["polarity"] = to_string(it.polarity);
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<double> ModelScorer::candidate_logits(const ProbeItem& item) const {
    using namespace model;
    const auto& cfg = state_.config;
    std::vector<TokenId> ids = tokenize(item.template_text, state_.vocab);
    auto it = std::find(ids.begin(), ids.end(), Vocab::kMask);
    if (it == ids.end()) throw std::invalid_argument("template has no [MASK] slot: " + item.id);
    std::size_t pos = static_cast<std::size_t>(it - ids.begin());
    if (ids.size() > cfg.max_text_len) {
        std::size_t start = pos > cfg.max_text_len / 2 ? pos - cfg.max_text_len / 2 : 0;
        start = std::min(start, ids.size() - cfg.max_text_len);
        ids = std::vector<TokenId>(ids.begin() + static_cast<std::ptrdiff_t>(start),
                                   ids.begin() + static_cast<std::ptrdiff_t>(start + cfg.max_text_len));
        pos -= start;
    }
    Example ex;
    ex.token_ids = ids;
    ex.frames = Mat(0, static_cast<Eigen::Index>(cfg.feature_dim));
    const auto out = encode(state_, ex);
    const Mat logits = mam_logits(state_, out.local_text, {pos});
    std::vector<double> result;
    for (const auto& c : item.candidates) {
        const auto words = split_words(c);
        if (words.size() != 1 || !state_.vocab.contains(words[0])) {
            result.push_back(-std::numeric_limits<double>::infinity());
            continue;
        }
        result.push_back(logits(0, state_.vocab.id(words[0])));
    }
    return result;
}

std::size_t choose_candidate(const std::vector<double>& logits, std::vector<double>* probabilities) {
    if (logits.empty()) throw std::invalid_argument("no candidate logits");
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = i;
    if (probabilities) {
        probabilities->assign(logits.size(), 0.0);
        const double mx = logits[best];
        if (std::isinf(mx) && mx < 0) {
            std::fill(probabilities->begin(), probabilities->end(), 1.0 / static_cast<double>(logits.size()));
        } else {
            double sum = 0.0;
            for (std::size_t i = 0; i < logits.size(); ++i) sum += (*probabilities)[i] = std::exp(logits[i] - mx);
            for (auto& p : *probabilities) p /= sum;
        }
    }
    return best;
}

ProbeResult probe_cloze(const std::vector<ProbeItem>& items, const CandidateScorer& scorer) {
    ProbeResult r;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        if (auto msg = validate_probe_item(item); !msg.empty()) {
            r.diagnostics.push_back({item.id, "rejected: " + msg});
            continue;
        }
        const auto logits = scorer.candidate_logits(item);
        if (logits.size() != item.candidates.size())
            throw std::logic_error("scorer returned the wrong number of logits for " + item.id);
        for (std::size_t k = 0; k < logits.size(); ++k)
            if (std::isinf(logits[k]) && logits[k] < 0)
                r.diagnostics.push_back({item.id, "candidate '" + item.candidates[k] + "' is not scorable"});
        ProbeChoice c;
        c.item = i;
        c.chosen = choose_candidate(logits, &c.probabilities);
        c.correct = c.chosen == item.answer_index;
        r.choices.push_back(std::move(c));
    }
    return r;
}

RobustnessReport probe_robustness(const std::vector<std::pair<ProbeItem, std::size_t>>& choices) {
    RobustnessReport r;
    std::array<std::size_t, 4> pos_ok{};
    struct Counts {
        std::size_t ok = 0, n = 0;
    };
    std::map<std::string, std::array<Counts, 2>> groups;
    std::size_t ok_total = 0;
    for (const auto& [item, chosen] : choices) {
        if (auto msg = validate_probe_item(item); !msg.empty())
            throw std::invalid_argument("malformed probe item " + item.id + ": " + msg);
        const bool ok = chosen == item.answer_index;
        const std::size_t p = item.answer_position - 1;
        ++r.position_count[p];
        pos_ok[p] += ok;
        auto& g = groups[item.group][item.polarity == Polarity::Original ? 0 : 1];
        ++g.n;
        g.ok += ok;
        ok_total += ok;
    }
    for (std::size_t p = 0; p < 4; ++p) {
        if (r.position_count[p] == 0)
            throw std::invalid_argument("answer position " + std::to_string(p + 1) + " is not represented");
        r.position_accuracy[p] =
            100.0 * static_cast<double>(pos_ok[p]) / static_cast<double>(r.position_count[p]);
    }
    r.accuracy = 100.0 * static_cast<double>(ok_total) / static_cast<double>(choices.size());

    double delta_sum = 0.0;
    std::size_t paired = 0;
    for (const auto& [name, pol] : groups) {
        GroupRobustness g;
        const std::size_t n = pol[0].n + pol[1].n;
        g.accuracy = 100.0 * static_cast<double>(pol[0].ok + pol[1].ok) / static_cast<double>(n);
        if (pol[0].n) g.original = 100.0 * static_cast<double>(pol[0].ok) / static_cast<double>(pol[0].n);
        if (pol[1].n) g.inverse = 100.0 * static_cast<double>(pol[1].ok) / static_cast<double>(pol[1].n);
        g.paired = pol[0].n > 0 && pol[1].n > 0;
        if (g.paired) {
            g.delta = std::abs(g.original - g.inverse);
            delta_sum += g.delta;
            ++paired;
        } else {
            r.warnings.push_back("group '" + name + "' lacks " + (pol[0].n ? "inverse" : "original") +
                                 " items; skipped in the polarity table");
        }
        r.groups[name] = g;
    }
    if (paired) r.macro_delta = delta_sum / static_cast<double>(paired);
    return r;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j = nlohmann::json::object();
    if (report.map) {
        const auto& m = *report.map;
        j["map_metrics"] = {{"macro_seen", m.macro_seen},
                            {"macro_unseen", m.macro_unseen},
                            {"harmonic_mean", m.harmonic_mean},
                            {"micro", m.micro},
                            {"per_class", m.per_class}};
    }
    if (report.mep_accuracy) j["mep_accuracy"] = *report.mep_accuracy;
    if (report.generalization) {
        const auto& g = *report.generalization;
        j["generalization"] = {{"pct_false_sharing_frame", g.pct_false_sharing_frame},
                               {"pct_false_cohyponym", g.pct_false_cohyponym},
                               {"n_pairs", g.n_pairs},
                               {"warnings", g.warnings}};
    }
    if (report.probe) {
        const auto& p = *report.probe;
        nlohmann::json groups = nlohmann::json::object();
        for (const auto& [name, g] : p.groups) {
            groups[name] = {{"accuracy", g.accuracy}, {"original", g.original}, {"inverse", g.inverse}};
            if (g.paired) groups[name]["delta"] = g.delta;
        }
        j["probe"] = {{"accuracy", p.accuracy},
                      {"position_accuracy", p.position_accuracy},
                      {"groups", groups},
                      {"macro_delta", p.macro_delta},
                      {"warnings", p.warnings}};
    }
    return j;
}

std::string to_table(const EvalReport& report) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    if (report.map) {
        const auto& m = *report.map;
        os << "MAP      seen " << std::setw(6) << m.macro_seen << "  unseen " << std::setw(6) << m.macro_unseen
           << "  HM " << std::setw(6) << m.harmonic_mean << "  micro " << std::setw(6) << m.micro << "\n";
    }
    if (report.mep_accuracy) os << "MEP      acc  " << std::setw(6) << *report.mep_accuracy << "\n";
    if (report.generalization) {
        const auto& g = *report.generalization;
        os << "GEN      frame " << std::setw(6) << g.pct_false_sharing_frame << "  co-hyponym " << std::setw(6)
           << g.pct_false_cohyponym << "  pairs " << g.n_pairs << "\n";
    }
    if (report.probe) {
        const auto& p = *report.probe;
        os << "PROBE    acc  " << std::setw(6) << p.accuracy << "\n";
        os << "position";
        for (std::size_t i = 0; i < 4; ++i) os << "  " << (i + 1) << ":" << std::setw(6) << p.position_accuracy[i];
        os << "\n";
        os << std::left << std::setw(12) << "group" << std::right << std::setw(8) << "ori" << std::setw(8) << "inv"
           << std::setw(8) << "delta" << "\n";
        for (const auto& [name, g] : p.groups) {
            os << std::left << std::setw(12) << name << std::right << std::setw(8) << g.original << std::setw(8)
               << g.inverse;
            if (g.paired)
                os << std::setw(8) << g.delta;
            else
                os << std::setw(8) << "-";
            os << "\n";
        }
        os << std::left << std::setw(12) << "macro" << std::right << std::setw(24) << p.macro_delta << "\n";
    }
    return os.str();
}

}  // namespace cae::eval
