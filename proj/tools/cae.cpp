#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cae/checkpoint.hpp"
#include "cae/common.hpp"
#include "cae/eval.hpp"
#include "cae/pipeline.hpp"
#include "cae/synthetic.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cae;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw UsageError(what + " not found: " + path);
}

split::Split parse_split(const std::string& s) {
    try {
        return split::split_from_string(s);
    } catch (const std::exception&) {
        throw UsageError("unknown split '" + s + "' (train, val, test)");
    }
}

// Model settings from either a bare model config or a pipeline config.
std::pair<model::ModelConfig, pipeline::TrainSettings> model_settings(const std::string& path) {
    pipeline::TrainSettings train;
    if (path.empty()) return {model::ModelConfig{}, train};
    require_file(path, "config");
    const auto j = json::parse(read_file(path));
    if (j.contains("model") || j.contains("paths") || j.contains("stages")) {
        const auto cfg = pipeline::parse_pipeline_config(j, fs::path(path).parent_path().string());
        return {cfg.model, cfg.train};
    }
    return {j.get<model::ModelConfig>(), train};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal action-effect corpus construction, pretraining and evaluation"};
    app.require_subcommand(1);

    // verbs
    std::string snapshot, out;
    auto* verbs = app.add_subcommand("verbs", "Identify result verbs in a lexical snapshot");
    verbs->add_option("--snapshot", snapshot, "Snapshot JSON-lines")->required();
    verbs->add_option("--out", out, "Result-verb JSON-lines")->required();

    // extract
    std::string pool, verbs_file, concreteness;
    corpus::ExtractOptions extract_opts;
    corpus::PoolFilter filter;
    bool include_unsure = false;
    auto* extract = app.add_subcommand("extract", "Filter the video pool and extract clip-subtitle pairs");
    extract->add_option("--pool", pool, "Subtitle records JSON-lines")->required();
    extract->add_option("--verbs", verbs_file, "Result-verb JSON-lines")->required();
    extract->add_option("--concreteness", concreteness, "Snapshot file with concreteness ratings")->required();
    extract->add_option("--min-gap", extract_opts.min_gap_s, "Minimum start-time gap between clips (s)");
    extract->add_option("--min-verb-types", filter.min_verb_types, "Pool filter: verb types per category");
    extract->add_option("--min-clips-per-verb", filter.min_clips_per_verb, "Pool filter: clips per verb type");
    extract->add_option("--top-k", filter.top_k_per_task, "Pool filter: most-viewed videos kept per task");
    extract->add_flag("--include-unsure", include_unsure, "Also use unsure result verbs");
    extract->add_option("--out", out, "Clip JSON-lines")->required();

    // split
    std::string clips;
    split::SplitConfig split_cfg;
    auto* split_cmd = app.add_subcommand("split", "Assign verb classes and clip splits");
    split_cmd->add_option("--clips", clips, "Clip JSON-lines")->required();
    split_cmd->add_option("--verbs", verbs_file, "Result-verb JSON-lines (frames)")->required();
    split_cmd->add_option("--snapshot", snapshot, "Snapshot with Kinetics verbs to keep unseen");
    split_cmd->add_option("--seed", split_cfg.seed, "Split seed");
    split_cmd->add_option("--out", out, "Manifest JSON-lines")->required();

    // features
    std::string manifest, source;
    std::size_t dim = 64;
    auto* feats = app.add_subcommand("features", "Write a CAEF feature file for every manifest frame");
    feats->add_option("--manifest", manifest, "Manifest JSON-lines")->required();
    feats->add_option("--dim", dim, "Feature dimension");
    feats->add_option("--source", source, "CAEF file to copy rows from (synthetic when omitted)");
    feats->add_option("--out", out, "CAEF output")->required();

    // pretrain
    std::string task = "mam", config, features_file;
    std::uint64_t steps = 0, seed = 0;
    auto* pre = app.add_subcommand("pretrain", "Train a model");
    pre->add_option("--task", task, "mam, mem or multi");
    pre->add_option("--config", config, "Model or pipeline config JSON");
    pre->add_option("--data", manifest, "Manifest JSON-lines")->required();
    pre->add_option("--features", features_file, "CAEF feature file")->required();
    pre->add_option("--steps", steps, "Optimizer updates (overrides the config)");
    pre->add_option("--seed", seed, "Model seed (overrides the config)");
    pre->add_option("--out", out, "Checkpoint path")->required();

    // predict
    std::string checkpoint, which = "test";
    auto* predict = app.add_subcommand("predict", "Write MAP or MEP predictions");
    predict->add_option("--task", task, "mam or mem")->required();
    predict->add_option("--checkpoint", checkpoint, "Checkpoint")->required();
    predict->add_option("--manifest", manifest, "Manifest JSON-lines")->required();
    predict->add_option("--features", features_file, "CAEF feature file")->required();
    predict->add_option("--split", which, "train, val or test");
    predict->add_option("--out", out, "Prediction JSON-lines")->required();

    // eval
    std::string pred, items;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions");
    eval_cmd->require_subcommand(1);
    auto* eval_map = eval_cmd->add_subcommand("map", "Masked action prediction metrics");
    eval_map->add_option("--pred", pred, "MAP prediction JSON-lines")->required();
    eval_map->add_option("--manifest", manifest, "Manifest JSON-lines (verb classes)")->required();
    eval_map->add_option("--verbs", verbs_file, "Result-verb JSON-lines for the frame analysis");
    eval_map->add_option("--snapshot", snapshot, "Snapshot with hypernyms for the co-hyponymy analysis");
    eval_map->add_option("--out", out, "Report JSON")->required();
    auto* eval_mep = eval_cmd->add_subcommand("mep", "Masked effect prediction accuracy");
    eval_mep->add_option("--pred", pred, "MEP prediction JSON-lines")->required();
    eval_mep->add_option("--manifest", manifest, "Manifest JSON-lines");
    eval_mep->add_option("--out", out, "Report JSON")->required();
    auto* eval_probe = eval_cmd->add_subcommand("probe", "Cloze probe robustness");
    eval_probe->add_option("--items", items, "Probe item JSON-lines")->required();
    eval_probe->add_option("--pred", pred, "Choice JSON-lines {\"id\",\"chosen\"}");
    eval_probe->add_option("--checkpoint", checkpoint, "Checkpoint to score the items with");
    eval_probe->add_option("--out", out, "Report JSON")->required();

    // run
    std::string stages;
    std::optional<std::uint64_t> run_seed;
    auto* run = app.add_subcommand("run", "Run pipeline stages from a config file");
    run->add_option("--config", config, "Pipeline config JSON")->required();
    run->add_option("--stages", stages, "Comma-separated stages (default: the config's list)");
    run->add_option("--seed", run_seed, "Seed override");

    // synth
    std::string out_dir;
    auto* synth = app.add_subcommand("synth", "Write the synthetic demo fixtures");
    synth->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pipeline::kUsageError;
    }

    try {
        if (*verbs) {
            require_file(snapshot, "snapshot");
            const auto v = pipeline::ops::verbs(snapshot, out);
            std::cout << v.size() << " result verbs written to " << out << "\n";
        } else if (*extract) {
            require_file(pool, "pool");
            require_file(verbs_file, "verbs file");
            require_file(concreteness, "concreteness file");
            const auto r = pipeline::ops::extract(pool, verbs_file, concreteness, filter, extract_opts, out,
                                                  include_unsure);
            for (const auto& d : r.diagnostics)
                std::cerr << "warning: " << d.video_id << " @" << d.start_s << ": " << d.message << "\n";
            std::cout << r.clips.size() << " clips written to " << out << "\n";
        } else if (*split_cmd) {
            require_file(clips, "clips file");
            require_file(verbs_file, "verbs file");
            const auto m = pipeline::ops::split(clips, verbs_file, snapshot, split_cfg, out);
            std::cout << m.stats.n_train << " train / " << m.stats.n_val << " val / " << m.stats.n_test << " test\n";
        } else if (*feats) {
            require_file(manifest, "manifest");
            pipeline::ops::features(manifest, dim, source, out);
        } else if (*pre) {
            require_file(manifest, "manifest");
            require_file(features_file, "feature file");
            auto [cfg, train] = model_settings(config);
            try {
                cfg.task_mode = model::task_mode_from_string(task);
            } catch (const std::exception&) {
                throw UsageError("unknown task '" + task + "' (mam, mem, multi)");
            }
            if (steps) train.steps = steps;
            if (seed) cfg.seed = seed;
            const auto r = pipeline::ops::pretrain(manifest, features_file, cfg, train, out, std::cout);
            std::cout << "best validation " << r.best_score << " at step " << r.best_step << "; checkpoint " << out
                      << "\n";
        } else if (*predict) {
            require_file(checkpoint, "checkpoint");
            require_file(manifest, "manifest");
            require_file(features_file, "feature file");
            if (task == "mam") {
                const auto p = pipeline::ops::predict_mam(checkpoint, manifest, features_file, parse_split(which), out);
                std::cout << "MAP accuracy " << model::mam_accuracy(p) << " over " << p.size() << " clips\n";
            } else if (task == "mem") {
                const auto p = pipeline::ops::predict_mem(checkpoint, manifest, features_file, parse_split(which), out);
                std::cout << "MEP accuracy " << model::mem_accuracy(p) << " over " << p.size() << " clips\n";
            } else {
                throw UsageError("unknown task '" + task + "' (mam, mem)");
            }
        } else if (*eval_map) {
            require_file(pred, "prediction file");
            require_file(manifest, "manifest");
            const auto preds = pipeline::ops::read_map_predictions(pred);
            const auto classes = split::parse_manifest(read_file(manifest)).manifest.verb_class;
            eval::EvalReport report;
            report.map = eval::map_metrics(preds, classes);
            if (!verbs_file.empty() || !snapshot.empty()) {
                std::vector<eval::MapPrediction> unseen_errors;
                for (const auto& p : preds)
                    if (p.reference != p.predicted && classes.at(p.reference) == split::VerbClass::Unseen)
                        unseen_errors.push_back(p);
                eval::LemmaFrames frames;
                if (!verbs_file.empty())
                    for (const auto& v : lexicon::parse_result_verbs(read_file(verbs_file)))
                        if (!v.frames.empty()) frames[v.lemma] = v.frames;
                eval::HypernymMap hyper;
                if (!snapshot.empty()) hyper = lexicon::load_snapshot(snapshot).wordnet_entries;
                report.generalization = eval::generalization_analysis(unseen_errors, frames, hyper);
            }
            pipeline::ops::write_report(report, out);
            std::cout << eval::to_table(report);
        } else if (*eval_mep) {
            require_file(pred, "prediction file");
            eval::EvalReport report;
            report.mep_accuracy = eval::mep_metrics(pipeline::ops::read_mep_predictions(pred));
            pipeline::ops::write_report(report, out);
            std::cout << eval::to_table(report);
        } else if (*eval_probe) {
            require_file(items, "probe items");
            if (!checkpoint.empty()) {
                require_file(checkpoint, "checkpoint");
                std::cout << eval::to_table(pipeline::ops::probe(checkpoint, items, out));
            } else {
                if (pred.empty()) throw UsageError("eval probe needs --pred or --checkpoint");
                require_file(pred, "prediction file");
                const auto parsed = eval::parse_probe_items(read_file(items));
                std::map<std::string, const eval::ProbeItem*> by_id;
                for (const auto& it : parsed) by_id[it.id] = &it;
                std::vector<std::pair<eval::ProbeItem, std::size_t>> choices;
                for (const auto& line : read_lines(pred)) {
                    if (line.empty()) continue;
                    const auto j = json::parse(line);
                    const auto id = j.at("id").get<std::string>();
                    if (!by_id.contains(id)) throw std::runtime_error("choice for unknown probe item " + id);
                    choices.emplace_back(*by_id.at(id), j.at("chosen").get<std::size_t>());
                }
                eval::EvalReport report;
                report.probe = eval::probe_robustness(choices);
                pipeline::ops::write_report(report, out);
                std::cout << eval::to_table(report);
            }
        } else if (*run) {
            require_file(config, "config");
            pipeline::PipelineConfig cfg;
            std::vector<pipeline::Stage> selected;
            try {
                cfg = pipeline::load_pipeline_config(config);
                if (run_seed) {
                    cfg.seed = *run_seed;
                    cfg.split.seed = *run_seed;
                    cfg.model.seed = *run_seed;
                }
                selected = stages.empty() ? cfg.stages : pipeline::parse_stages(stages);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            return pipeline::run(cfg, selected, std::cout);
        } else if (*synth) {
            fs::create_directories(out_dir);
            write_file((fs::path(out_dir) / "snapshot.jsonl").string(), synthetic::demo_snapshot_jsonl());
            write_file((fs::path(out_dir) / "subtitles.jsonl").string(),
                       corpus::to_jsonl(synthetic::demo_subtitles()));
            write_file((fs::path(out_dir) / "probe.jsonl").string(),
                       eval::probe_items_to_jsonl(synthetic::demo_probe_items()));
            std::cout << "demo fixtures written to " << out_dir << "\n";
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kStageFailure;
    }
    return 0;
}
