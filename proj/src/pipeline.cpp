#include "cae/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cae/checkpoint.hpp"
#include "cae/common.hpp"
#include "cae/features.hpp"
#include "cae/lexicon.hpp"

namespace cae::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::pair<Stage, std::string_view>> kStageNames = {
    {Stage::Verbs, "verbs"},       {Stage::Extract, "extract"}, {Stage::Split, "split"}, {Stage::Features, "features"},
    {Stage::Pretrain, "pretrain"}, {Stage::Eval, "eval"},       {Stage::Probe, "probe"}};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.contains(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
    return (fs::path(base) / p).lexically_normal().string();
}

std::string file_hash(const std::string& path) { return hex64(fnv1a(read_file(path))); }

}  // namespace

std::string_view to_string(Stage s) noexcept {
    for (const auto& [st, name] : kStageNames)
        if (st == s) return name;
    return "?";
}

Stage stage_from_string(std::string_view s) {
    for (const auto& [st, name] : kStageNames)
        if (name == s) return st;
    throw std::invalid_argument("unknown stage '" + std::string(s) + "'");
}

std::vector<Stage> parse_stages(std::string_view csv) {
    std::vector<Stage> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const auto comma = csv.find(',', pos);
        const auto item = csv.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (!item.empty()) out.push_back(stage_from_string(item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

PipelineConfig parse_pipeline_config(const json& j, const std::string& base_dir) {
    reject_unknown(j, {"seed", "paths", "pool_filter", "extract", "split", "model", "train", "stages"}, "config");
    PipelineConfig c;
    c.seed = j.value("seed", c.seed);
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        reject_unknown(p, {"snapshot", "pool", "features", "probe", "out_dir"}, "paths");
        c.paths.snapshot = resolve(base_dir, p.value("snapshot", ""));
        c.paths.pool = resolve(base_dir, p.value("pool", ""));
        c.paths.features = resolve(base_dir, p.value("features", ""));
        c.paths.probe = resolve(base_dir, p.value("probe", ""));
        c.paths.out_dir = resolve(base_dir, p.value("out_dir", c.paths.out_dir));
    }
    if (j.contains("pool_filter")) {
        const auto& p = j.at("pool_filter");
        reject_unknown(p, {"min_verb_types", "min_clips_per_verb", "top_k_per_task"}, "pool_filter");
        c.pool_filter.min_verb_types = p.value("min_verb_types", c.pool_filter.min_verb_types);
        c.pool_filter.min_clips_per_verb = p.value("min_clips_per_verb", c.pool_filter.min_clips_per_verb);
        c.pool_filter.top_k_per_task = p.value("top_k_per_task", c.pool_filter.top_k_per_task);
    }
    if (j.contains("extract")) {
        const auto& e = j.at("extract");
        reject_unknown(e, {"min_gap_s", "object_min_concreteness", "object_deps"}, "extract");
        c.extract.min_gap_s = e.value("min_gap_s", c.extract.min_gap_s);
        c.extract.object_min_concreteness = e.value("object_min_concreteness", c.extract.object_min_concreteness);
        if (e.contains("object_deps")) c.extract.object_deps = e.at("object_deps").get<std::set<std::string>>();
    }
    c.split.seed = c.seed;
    if (j.contains("split")) {
        const auto& s = j.at("split");
        reject_unknown(s, {"seed", "seen_fraction_per_frame", "seen_clip_ratio", "unseen_clip_ratio",
                           "excluded_seen_lemmas"},
                       "split");
        c.split.seed = s.value("seed", c.split.seed);
        c.split.seen_fraction_per_frame = s.value("seen_fraction_per_frame", c.split.seen_fraction_per_frame);
        if (s.contains("seen_clip_ratio")) c.split.seen_clip_ratio = s.at("seen_clip_ratio").get<std::array<double, 3>>();
        if (s.contains("unseen_clip_ratio"))
            c.split.unseen_clip_ratio = s.at("unseen_clip_ratio").get<std::array<double, 3>>();
        if (s.contains("excluded_seen_lemmas"))
            c.split.excluded_seen_lemmas = s.at("excluded_seen_lemmas").get<std::set<std::string>>();
    }
    c.split.validate();
    c.model.seed = c.seed;
    if (j.contains("model")) {
        json m = j.at("model");
        if (!m.contains("seed")) m["seed"] = c.seed;
        c.model = m.get<model::ModelConfig>();
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        reject_unknown(t, {"steps", "eval_interval"}, "train");
        c.train.steps = t.value("steps", c.train.steps);
        c.train.eval_interval = t.value("eval_interval", c.train.eval_interval);
    }
    if (j.contains("stages")) {
        for (const auto& s : j.at("stages")) c.stages.push_back(stage_from_string(s.get<std::string>()));
    }
    return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_pipeline_config(j, fs::path(path).parent_path().string());
}

json provenance_record(Stage stage, std::uint64_t seed, const std::vector<std::string>& inputs,
                       const std::vector<std::string>& outputs) {
    json j;
    j["stage"] = to_string(stage);
    j["version"] = kVersion;
    j["seed"] = seed;
    j["inputs"] = json::object();
    for (const auto& p : inputs) j["inputs"][fs::path(p).filename().string()] = file_hash(p);
    j["outputs"] = json::object();
    for (const auto& p : outputs) j["outputs"][fs::path(p).filename().string()] = file_hash(p);
    return j;
}

// -------------------------------------------------------------------------------------------------
// Single-stage operations

namespace ops {

namespace {

std::set<std::string> verb_set(const std::vector<lexicon::ResultVerb>& verbs, bool include_unsure) {
    std::set<std::string> out;
    for (const auto& v : verbs)
        if (include_unsure || v.verdict == lexicon::Verdict::Sure) out.insert(v.lemma);
    return out;
}

eval::LemmaFrames frames_of(const std::vector<lexicon::ResultVerb>& verbs) {
    eval::LemmaFrames idx;
    for (const auto& v : verbs)
        if (!v.frames.empty()) idx[v.lemma] = v.frames;
    return idx;
}

struct Loaded {
    split::LoadedManifest manifest;
    features::FeatureStore store{1};
};

Loaded load_inputs(const std::string& manifest, const std::string& features_file) {
    Loaded l{split::parse_manifest(read_file(manifest)), features::FeatureStore::load(features_file)};
    return l;
}

split::VerbClassMap class_map(const split::LoadedManifest& m) { return m.manifest.verb_class; }

}  // namespace

std::vector<lexicon::ResultVerb> verbs(const std::string& snapshot, const std::string& out) {
    const auto verbs = lexicon::identify_result_verbs(lexicon::load_snapshot(snapshot));
    write_file(out, lexicon::to_jsonl(verbs));
    return verbs;
}

corpus::ExtractResult extract(const std::string& pool, const std::string& verbs_file, const std::string& concreteness,
                              const corpus::PoolFilter& filter, const corpus::ExtractOptions& opts,
                              const std::string& out, bool include_unsure) {
    const auto verbs = verb_set(lexicon::parse_result_verbs(read_file(verbs_file)), include_unsure);
    const auto ratings = lexicon::load_snapshot(concreteness).concreteness;
    auto records = corpus::parse_subtitles(read_file(pool));
    const auto kept = corpus::filter_video_pool(records, verbs, filter);
    std::erase_if(records, [&](const corpus::SubtitleRecord& r) { return !kept.contains(r.video_id); });
    auto result = corpus::extract_cae_clips(std::move(records), verbs, ratings, opts);
    write_file(out, corpus::to_jsonl(result.clips));
    return result;
}

split::SplitManifest split(const std::string& clips, const std::string& verbs_file, const std::string& snapshot,
                           split::SplitConfig cfg, const std::string& out) {
    const auto records = corpus::parse_clips(read_file(clips));
    const auto verbs = lexicon::parse_result_verbs(read_file(verbs_file));
    if (!snapshot.empty()) {
        const auto snap = lexicon::load_snapshot(snapshot);
        cfg.excluded_seen_lemmas.insert(snap.kinetics_verbs.begin(), snap.kinetics_verbs.end());
    }
    std::set<std::string> used;
    for (const auto& c : records) used.insert(c.result_verb);
    std::vector<lexicon::ResultVerb> present;
    for (const auto& v : verbs)
        if (used.contains(v.lemma)) present.push_back(v);
    const auto classes = split::assign_verb_classes(lexicon::verb_frame_index(present), cfg);
    auto manifest = split::assign_clip_splits(records, classes, cfg);
    write_file(out, split::manifest_to_jsonl(manifest, records));
    return manifest;
}

void features(const std::string& manifest, std::size_t dim, const std::string& source, const std::string& out) {
    const auto m = split::parse_manifest(read_file(manifest));
    std::optional<features::FeatureStore> input;
    if (!source.empty()) input = features::FeatureStore::load(source);
    features::SyntheticFeatures synth(dim);
    const features::FeatureProvider& provider = input ? static_cast<const features::FeatureProvider&>(*input)
                                                      : static_cast<const features::FeatureProvider&>(synth);
    if (provider.dim() != dim) throw std::invalid_argument("source feature dimension does not match feature_dim");
    features::FeatureStore store(dim);
    for (const auto& c : m.clips) {
        for (double t : features::sample_frame_times(c.start_s, c.end_s)) {
            if (store.contains(c.video_id, t)) continue;
            store.add(c.video_id, t, provider.frame(c.video_id, t));
        }
    }
    store.save(out);
}

model::PretrainResult pretrain(const std::string& manifest, const std::string& features_file, model::ModelConfig cfg,
                               const TrainSettings& train, const std::string& out, std::ostream& log) {
    const auto in = load_inputs(manifest, features_file);
    auto vocab = model::build_vocab(in.manifest.clips, cfg.vocab_size);
    cfg.vocab_size = vocab.size();
    cfg.feature_dim = in.store.dim();
    cfg.validate();
    const auto train_set =
        model::Dataset::build(in.manifest.clips_in(split::Split::Train), vocab, in.store, cfg);
    const auto val_set = model::Dataset::build(in.manifest.clips_in(split::Split::Val), vocab, in.store, cfg);
    log << "pretrain: task " << model::to_string(cfg.task_mode) << ", " << train_set.size() << " train / "
        << val_set.size() << " val clips, vocab " << vocab.size() << "\n";
    model::PretrainOptions opts;
    opts.steps = train.steps;
    opts.eval_interval = train.eval_interval;
    opts.checkpoint_path = out;
    const std::uint64_t report_every = std::max<std::uint64_t>(1, train.steps / 10);
    opts.on_step = [&](const model::StepRecord& r) {
        if ((r.step + 1) % report_every == 0)
            log << "  step " << (r.step + 1) << " " << model::to_string(r.task) << " loss " << r.loss << "\n";
    };
    opts.on_eval = [&](std::uint64_t step, double score) {
        log << "  validation at step " << step << ": " << score << "\n";
    };
    return model::pretrain(model::ModelState::create(cfg, std::move(vocab)), train_set, val_set, opts);
}

namespace {

model::Dataset dataset_for(const model::ModelState& state, const Loaded& in, split::Split which) {
    return model::Dataset::build(in.manifest.clips_in(which), state.vocab, in.store, state.config);
}

}  // namespace

std::vector<model::MamPrediction> predict_mam(const std::string& checkpoint, const std::string& manifest,
                                              const std::string& features_file, split::Split which,
                                              const std::string& out) {
    const auto state = model::load_checkpoint(checkpoint);
    const auto in = load_inputs(manifest, features_file);
    const auto preds = model::predict_mam(state, dataset_for(state, in, which));
    std::string text;
    for (const auto& p : preds)
        text += json{{"clip_id", p.clip_id}, {"reference", p.reference}, {"predicted", p.predicted}}.dump() + "\n";
    if (!out.empty()) write_file(out, text);
    return preds;
}

std::vector<model::MemPrediction> predict_mem(const std::string& checkpoint, const std::string& manifest,
                                              const std::string& features_file, split::Split which,
                                              const std::string& out) {
    const auto state = model::load_checkpoint(checkpoint);
    const auto in = load_inputs(manifest, features_file);
    const auto preds = model::predict_mem(state, dataset_for(state, in, which), state.config.seed);
    std::string text;
    for (const auto& p : preds) text += json{{"clip_id", p.clip_id}, {"frames_correct", p.frames_correct}}.dump() + "\n";
    if (!out.empty()) write_file(out, text);
    return preds;
}

std::vector<eval::MapPrediction> read_map_predictions(const std::string& path) {
    std::vector<eval::MapPrediction> out;
    std::size_t n = 0;
    for (const auto& line : read_lines(path)) {
        ++n;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            out.push_back({j.at("reference").get<std::string>(), j.at("predicted").get<std::string>()});
        } catch (const json::exception& e) {
            throw SchemaError(n, "prediction", e.what());
        }
    }
    return out;
}

std::vector<std::vector<bool>> read_mep_predictions(const std::string& path) {
    std::vector<std::vector<bool>> out;
    std::size_t n = 0;
    for (const auto& line : read_lines(path)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line).at("frames_correct").get<std::vector<bool>>());
        } catch (const json::exception& e) {
            throw SchemaError(n, "frames_correct", e.what());
        }
    }
    return out;
}

void write_report(const eval::EvalReport& report, const std::string& out) {
    write_file(out, eval::to_json(report).dump(2) + "\n");
    write_file(out + ".txt", eval::to_table(report));
}

eval::EvalReport evaluate(const std::string& checkpoint, const std::string& manifest,
                          const std::string& features_file, const std::string& verbs_file,
                          const std::string& snapshot, split::Split which, const std::string& out) {
    const auto state = model::load_checkpoint(checkpoint);
    const auto in = load_inputs(manifest, features_file);
    const auto data = dataset_for(state, in, which);
    eval::EvalReport report;

    std::vector<eval::MapPrediction> map_preds;
    for (const auto& p : model::predict_mam(state, data)) map_preds.push_back({p.reference, p.predicted});
    const auto classes = class_map(in.manifest);
    report.map = eval::map_metrics(map_preds, classes);

    std::vector<eval::MapPrediction> unseen_errors;
    for (const auto& p : map_preds)
        if (p.reference != p.predicted && classes.at(p.reference) == split::VerbClass::Unseen) unseen_errors.push_back(p);
    eval::LemmaFrames frames;
    if (!verbs_file.empty()) frames = frames_of(lexicon::parse_result_verbs(read_file(verbs_file)));
    eval::HypernymMap hypernyms;
    if (!snapshot.empty()) hypernyms = lexicon::load_snapshot(snapshot).wordnet_entries;
    report.generalization = eval::generalization_analysis(unseen_errors, frames, hypernyms);

    std::vector<std::vector<bool>> mep;
    for (const auto& p : model::predict_mem(state, data, state.config.seed)) mep.push_back(p.frames_correct);
    report.mep_accuracy = eval::mep_metrics(mep);
    write_report(report, out);
    return report;
}

eval::EvalReport probe(const std::string& checkpoint, const std::string& items_file, const std::string& out) {
    const auto state = model::load_checkpoint(checkpoint);
    const auto items = eval::parse_probe_items(read_file(items_file));
    const eval::ModelScorer scorer(state);
    const auto result = eval::probe_cloze(items, scorer);
    std::vector<std::pair<eval::ProbeItem, std::size_t>> choices;
    for (const auto& c : result.choices) choices.emplace_back(items[c.item], c.chosen);
    eval::EvalReport report;
    report.probe = eval::probe_robustness(choices);
    for (const auto& d : result.diagnostics) report.probe->warnings.push_back(d.item_id + ": " + d.message);
    write_report(report, out);
    return report;
}

}  // namespace ops

// -------------------------------------------------------------------------------------------------
// Orchestration

namespace {

struct StageSpec {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, Stage>> produced_by;  // input -> stage that makes it
};

std::string out_path(const PipelineConfig& c, const char* name) { return (fs::path(c.paths.out_dir) / name).string(); }

StageSpec spec_for(const PipelineConfig& c, Stage s) {
    using namespace artifact;
    const auto verbs = out_path(c, kVerbs), clips = out_path(c, kClips), manifest = out_path(c, kManifest),
               feats = out_path(c, kFeatures), model = out_path(c, kModel);
    switch (s) {
        case Stage::Verbs: return {{c.paths.snapshot}, {verbs}, {}};
        case Stage::Extract:
            return {{c.paths.pool, verbs, c.paths.snapshot}, {clips}, {{verbs, Stage::Verbs}}};
        case Stage::Split:
            return {{clips, verbs, c.paths.snapshot}, {manifest}, {{clips, Stage::Extract}, {verbs, Stage::Verbs}}};
        case Stage::Features: {
            StageSpec spec{{manifest}, {feats}, {{manifest, Stage::Split}}};
            if (!c.paths.features.empty()) spec.inputs.push_back(c.paths.features);
            return spec;
        }
        case Stage::Pretrain:
            return {{manifest, feats}, {model, model + ".json"}, {{manifest, Stage::Split}, {feats, Stage::Features}}};
        case Stage::Eval:
            return {{model, manifest, feats, verbs, c.paths.snapshot},
                    {out_path(c, kEval), out_path(c, kEval) + std::string(".txt")},
                    {{model, Stage::Pretrain}, {manifest, Stage::Split}, {feats, Stage::Features}, {verbs, Stage::Verbs}}};
        case Stage::Probe:
            return {{model, c.paths.probe},
                    {out_path(c, kProbe), out_path(c, kProbe) + std::string(".txt")},
                    {{model, Stage::Pretrain}}};
    }
    return {};
}

void execute(const PipelineConfig& c, Stage s, std::ostream& log) {
    using namespace artifact;
    switch (s) {
        case Stage::Verbs: {
            const auto v = ops::verbs(c.paths.snapshot, out_path(c, kVerbs));
            const auto sure = std::count_if(v.begin(), v.end(),
                                            [](const auto& r) { return r.verdict == lexicon::Verdict::Sure; });
            log << "verbs: " << v.size() << " result verbs, " << sure << " sure\n";
            break;
        }
        case Stage::Extract: {
            const auto r = ops::extract(c.paths.pool, out_path(c, kVerbs), c.paths.snapshot, c.pool_filter, c.extract,
                                        out_path(c, kClips));
            log << "extract: " << r.clips.size() << " clips, " << r.diagnostics.size() << " diagnostics\n";
            break;
        }
        case Stage::Split: {
            const auto m = ops::split(out_path(c, kClips), out_path(c, kVerbs), c.paths.snapshot, c.split,
                                      out_path(c, kManifest));
            log << "split: " << m.stats.n_train << " train / " << m.stats.n_val << " val / " << m.stats.n_test
                << " test\n";
            break;
        }
        case Stage::Features:
            ops::features(out_path(c, kManifest), c.model.feature_dim, c.paths.features, out_path(c, kFeatures));
            log << "features: written\n";
            break;
        case Stage::Pretrain: {
            const auto r = ops::pretrain(out_path(c, kManifest), out_path(c, kFeatures), c.model, c.train,
                                         out_path(c, kModel), log);
            log << "pretrain: best validation " << r.best_score << " at step " << r.best_step << "\n";
            break;
        }
        case Stage::Eval: {
            const auto r = ops::evaluate(out_path(c, kModel), out_path(c, kManifest), out_path(c, kFeatures),
                                         out_path(c, kVerbs), c.paths.snapshot, split::Split::Test, out_path(c, kEval));
            log << eval::to_table(r);
            break;
        }
        case Stage::Probe: {
            const auto r = ops::probe(out_path(c, kModel), c.paths.probe, out_path(c, kProbe));
            log << eval::to_table(r);
            break;
        }
    }
}

void quarantine(const std::vector<std::string>& outputs, std::ostream& log) {
    for (const auto& p : outputs) {
        std::error_code ec;
        if (!fs::exists(p, ec)) continue;
        const auto q = p + kQuarantineSuffix;
        fs::rename(p, q, ec);
        if (!ec) log << "  partial output kept as " << q << "\n";
    }
}

}  // namespace

int run(const PipelineConfig& cfg, const std::vector<Stage>& requested, std::ostream& log) {
    std::vector<Stage> stages = requested;
    std::sort(stages.begin(), stages.end());
    stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
    if (stages.empty()) {
        log << "error: no stages selected\n";
        return kUsageError;
    }

    std::set<std::string> will_exist;
    for (Stage s : stages) {
        const auto spec = spec_for(cfg, s);
        for (const auto& in : spec.inputs) {
            if (in.empty()) {
                log << "error: stage '" << to_string(s) << "' needs a path that the config leaves empty\n";
                return kUsageError;
            }
            if (will_exist.contains(in) || fs::exists(in)) continue;
            std::string hint;
            for (const auto& [file, producer] : spec.produced_by)
                if (file == in) hint = "; run the '" + std::string(to_string(producer)) + "' stage first";
            log << "error: stage '" << to_string(s) << "' needs " << in << ", which does not exist" << hint << "\n";
            return kUsageError;
        }
        will_exist.insert(spec.outputs.begin(), spec.outputs.end());
    }

    fs::create_directories(cfg.paths.out_dir);
    for (Stage s : stages) {
        const auto spec = spec_for(cfg, s);
        try {
            execute(cfg, s, log);
            const auto prov = provenance_record(s, cfg.seed, spec.inputs, spec.outputs);
            write_file(out_path(cfg, "") + std::string(to_string(s)) + ".prov.json", prov.dump(2) + "\n");
        } catch (const std::exception& e) {
            log << "error: stage '" << to_string(s) << "' failed: " << e.what() << "\n";
            quarantine(spec.outputs, log);
            return kStageFailure;
        }
    }
    return kOk;
}

}  // namespace cae::pipeline
