// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rewod/autoencoder.hpp"
#include "rewod/coco_io.hpp"
#include "rewod/error.hpp"
#include "rewod/feature_map.hpp"
#include "rewod/json_util.hpp"
#include "rewod/owod_eval.hpp"
#include "rewod/pipeline.hpp"
#include "rewod/pseudo_label.hpp"
#include "rewod/run_config.hpp"
#include "rewod/scenario.hpp"
#include "rewod/scorer.hpp"
#include "rewod/self_train.hpp"
#include "rewod/soft_label.hpp"
#include "rewod/weibull_fit.hpp"

namespace rewod::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct Paths {
    std::string data;
    std::string model;
    std::string labels;
    std::string proposals;
    std::string scored;
    std::string scorer;
    std::string detections;
};

RunConfig effective_config(const Common& c) {
    RunConfig cfg = load_run_config(c.config);
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    return cfg;
}

fs::path prepare_out(const Common& c, const RunConfig& cfg) {
    const fs::path out(c.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        throw Error(ErrorCode::Io, "cannot create " + out.string() + ": " + ec.message());
    }
    write_json_file((out / "effective_config.json").string(), to_json(cfg));
    return out;
}

void require_file(const std::string& path, const char* what) {
    if (path.empty() || !fs::is_regular_file(path)) {
        throw Error(ErrorCode::Io, std::string(what) + " not found: " + path);
    }
}

std::string feature_file_name(std::int64_t image_id, Level level) {
    return std::to_string(image_id) + "_" + std::string(level_name(level)) + ".rfm";
}

// A generated data directory: annotations.json (known classes only) plus
// one feature file per image and level.
struct Dataset {
    fs::path dir;
    std::vector<CocoImage> images;
    std::map<std::int64_t, std::vector<Box>> known;

    std::vector<FeatureMap> features(std::int64_t image_id, std::span<const Level> levels) const {
        std::vector<FeatureMap> out;
        for (Level l : levels) {
            const fs::path p = dir / "features" / feature_file_name(image_id, l);
            if (!fs::is_regular_file(p)) {
                throw Error(ErrorCode::MissingData, "missing " + std::string(level_name(l)) +
                                                        " feature map for image " + std::to_string(image_id) +
                                                        " (" + p.string() + ")");
            }
            out.push_back(read_feature_map(p));
            if (out.back().level() != l) {
                throw Error(ErrorCode::BadHeader, p.string() + " holds level " +
                                                      std::string(level_name(out.back().level())));
            }
        }
        return out;
    }

    const CocoImage& image(std::int64_t id) const {
        const auto it = std::find_if(images.begin(), images.end(), [&](const CocoImage& i) { return i.id == id; });
        if (it == images.end()) {
            throw Error(ErrorCode::MissingData, "image " + std::to_string(id) + " is not in the dataset");
        }
        return *it;
    }
};

Dataset load_dataset(const std::string& dir) {
    if (dir.empty() || !fs::is_directory(dir)) {
        throw Error(ErrorCode::Io, "data directory not found: " + dir);
    }
    Dataset d;
    d.dir = dir;
    const auto path = (d.dir / "annotations.json").string();
    require_file(path, "annotations");
    auto coco = coco_from_json(read_json_file(path));
    d.images = std::move(coco.images);
    for (const auto& im : d.images) {
        d.known[im.id];
    }
    for (const auto& a : coco.annotations) {
        d.known[a.image_id].push_back(a.box);
    }
    return d;
}

std::vector<Level> model_levels(const RewModel& model) {
    std::vector<Level> out;
    for (const auto& m : model.levels) {
        out.push_back(m.level);
    }
    return out;
}

RewModel load_model(const std::string& path) {
    require_file(path, "model");
    return rew_model_from_json(read_json_file(path));
}

// Generator proposals: JSON lines {"image_id", "box", "score"}.
std::map<std::int64_t, std::vector<ScoredBox>> read_proposals(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path);
    }
    std::map<std::int64_t, std::vector<ScoredBox>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            const double score = j.at("score").get<double>();
            if (!std::isfinite(score)) {
                throw Error(ErrorCode::Parse, "score must be finite");
            }
            out[j.at("image_id").get<std::int64_t>()].push_back({box_from_json(j.at("box")), score});
        } catch (const std::exception& e) {
            throw Error(ErrorCode::Parse, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_lines(const fs::path& path, const std::vector<nlohmann::json>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    }
    for (const auto& r : records) {
        out << r.dump() << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

int cmd_synth_gen(const Common& c, std::ostream& log) {
    const RunConfig cfg = effective_config(c);
    const fs::path out = prepare_out(c, cfg);
    const auto scenario = generate_scenario(cfg.seed, cfg.scenario);

    fs::create_directories(out / "features");
    CocoDataset known;
    CocoDataset all;
    std::vector<nlohmann::json> proposals;
    std::vector<Detection> detections;
    for (const auto& img : scenario.images) {
        const CocoImage ci{img.image_id, img.width, img.height, "synthetic_" + std::to_string(img.image_id)};
        known.images.push_back(ci);
        all.images.push_back(ci);
        for (const auto& f : img.feature_maps) {
            write_feature_map(f, out / "features" / feature_file_name(img.image_id, f.level()));
        }
        for (const auto& k : img.known) {
            known.annotations.push_back({img.image_id, k.box, k.label, false});
            all.annotations.push_back({img.image_id, k.box, k.label, false});
        }
        for (const auto& u : img.unknown) {
            all.annotations.push_back({img.image_id, u.box, u.label, true});
        }
        for (const auto& p : img.proposals) {
            proposals.push_back({{"image_id", img.image_id}, {"box", box_to_json(p.box)}, {"score", p.score}});
        }
        detections.insert(detections.end(), img.known_detections.begin(), img.known_detections.end());
    }
    TaskSplit split;
    split.task_id = 1;
    split.current_known = {cfg.scenario.known_classes.begin(), cfg.scenario.known_classes.end()};
    split.unknown = {cfg.scenario.unknown_classes.begin(), cfg.scenario.unknown_classes.end()};

    write_json_file((out / "annotations.json").string(), to_coco_json(known));
    write_json_file((out / "ground_truth.json").string(), to_coco_json(all));
    write_json_file((out / "split.json").string(), to_json(split));
    write_lines(out / "proposals.jsonl", proposals);
    write_json_file((out / "known_detections.json").string(), detections_to_json(detections));
    log << "synth-gen: " << scenario.images.size() << " images, " << proposals.size() << " proposals -> "
        << out.string() << '\n';
    return kOk;
}

std::vector<TrainingImage> training_images(const Dataset& data, std::span<const Level> levels) {
    std::vector<TrainingImage> out;
    for (const auto& im : data.images) {
        out.push_back({im.id, data.features(im.id, levels), data.known.at(im.id)});
    }
    return out;
}

int cmd_train_rew(const Common& c, const Paths& p, std::ostream& log) {
    const RunConfig cfg = effective_config(c);
    const Dataset data = load_dataset(p.data);
    if (data.images.empty()) {
        throw Error(ErrorCode::MissingData, "dataset has no images");
    }
    const auto images = training_images(data, cfg.scenario.levels);
    const fs::path out = prepare_out(c, cfg);

    std::vector<LevelTrainReport> reports;
    const RewModel model = train_rew_model(images, cfg, &reports);
    nlohmann::json report = nlohmann::json::array();
    for (const auto& r : reports) {
        report.push_back({{"level", level_name(r.level)},
                          {"initial_loss", r.autoencoder.initial_loss},
                          {"final_loss", r.autoencoder.final_loss},
                          {"best_epoch", r.autoencoder.best_epoch},
                          {"epoch_loss", r.autoencoder.epoch_loss}});
    }
    write_json_file((out / "model.json").string(), to_json(model));
    write_json_file((out / "train_report.json").string(), report);
    log << "train-rew: " << model.levels.size() << " levels -> " << (out / "model.json").string() << '\n';
    return kOk;
}

int cmd_fit_weibull(const Common& c, const Paths& p, std::ostream& log) {
    const RunConfig cfg = effective_config(c);
    const Dataset data = load_dataset(p.data);
    RewModel model = load_model(p.model);
    std::optional<PseudoLabelSet> labels;
    if (!p.labels.empty()) {
        require_file(p.labels, "pseudo labels");
        labels = read_pseudo_labels(p.labels);
    }
    const fs::path out = prepare_out(c, cfg);
    model.gamma = cfg.gamma;
    refit_weibull(model, training_images(data, model_levels(model)), cfg, labels ? &*labels : nullptr);
    write_json_file((out / "model.json").string(), to_json(model));
    log << "fit-weibull: " << model.levels.size() << " levels -> " << (out / "model.json").string() << '\n';
    return kOk;
}

int cmd_score(const Common& c, const Paths& p, std::ostream& log) {
    const RunConfig cfg = effective_config(c);
    const Dataset data = load_dataset(p.data);
    const RewModel model = load_model(p.model);
    const std::string proposals_path = p.proposals.empty() ? (data.dir / "proposals.jsonl").string() : p.proposals;
    require_file(proposals_path, "proposals");
    const auto proposals = read_proposals(proposals_path);
    const fs::path out = prepare_out(c, cfg);

    const auto levels = model_levels(model);
    std::vector<nlohmann::json> records;
    for (const auto& [image_id, boxes] : proposals) {
        data.image(image_id);
        const auto maps = compute_error_maps(model, data.features(image_id, levels));
        std::vector<Box> plain;
        for (const auto& b : boxes) {
            plain.push_back(b.box);
        }
        const auto labeled = label_proposals(model, maps, plain, cfg.self_train.roi);
        for (std::size_t i = 0; i < labeled.size(); ++i) {
            records.push_back(to_json_record(image_id, labeled[i], boxes[i].score));
        }
    }
    write_lines(out / "scored.jsonl", records);
    log << "score: " << records.size() << " proposals -> " << (out / "scored.jsonl").string() << '\n';
    return kOk;
}

int cmd_filter(const Common& c, const Paths& p, std::ostream& log) {
    const RunConfig cfg = effective_config(c);
    const Dataset data = load_dataset(p.data);
    require_file(p.scored, "scored proposals");
    const auto scored = read_pseudo_labels(p.scored);
    const fs::path out = prepare_out(c, cfg);

    PseudoLabelSet accepted;
    std::size_t in_count = 0;
    std::size_t flagged = 0;
    for (const auto& [image_id, entries] : scored) {
        data.image(image_id);
        std::vector<ScoredBox> raw;
        std::vector<const PseudoLabel*> source;
        for (const auto& e : entries) {
            ++in_count;
            if (e.proposal.flag != LabelFlag::Ok) {
                ++flagged;
                continue;
            }
            raw.push_back({e.proposal.box, e.score});
            source.push_back(&e);
        }
        const auto kept = filter_proposals(raw, data.known.at(image_id), cfg.filter);
        for (const auto& k : kept) {
            const auto it = std::find_if(source.begin(), source.end(), [&](const PseudoLabel* s) {
                return s->proposal.box == k.box && s->score == k.score;
            });
            PseudoLabel label = **it;
            label.round = 0;
            accepted[image_id].push_back(label);
        }
    }
    write_pseudo_labels((out / "pseudo_labels.jsonl").string(), accepted);
    std::size_t out_count = 0;
    for (const auto& [id, v] : accepted) {
        out_count += v.size();
    }
    write_json_file((out / "filter_report.json").string(),
                    {{"input", in_count}, {"flagged", flagged}, {"accepted", out_count}});
    log << "filter: " << out_count << " of " << in_count << " proposals accepted -> "
        << (out / "pseudo_labels.jsonl").string() << '\n';
    return kOk;
}

int cmd_self_train(const Common& c, const Paths& p, std::ostream& log) {
    const RunConfig cfg = effective_config(c);
    const Dataset data = load_dataset(p.data);
    const RewModel model = load_model(p.model);
    require_file(p.labels, "pseudo labels");
    const auto initial = read_pseudo_labels(p.labels);
    ProposalScorer scorer = ProposalScorer::zeros();
    if (!p.scorer.empty()) {
        require_file(p.scorer, "scorer");
        scorer = proposal_scorer_from_json(read_json_file(p.scorer));
    }
    const std::string proposals_path = (data.dir / "proposals.jsonl").string();
    std::map<std::int64_t, std::vector<ScoredBox>> proposals;
    if (fs::is_regular_file(proposals_path)) {
        proposals = read_proposals(proposals_path);
    }
    const fs::path out = prepare_out(c, cfg);

    const auto levels = model_levels(model);
    std::vector<SelfTrainImage> images;
    for (const auto& im : data.images) {
        SelfTrainImage st;
        st.image_id = im.id;
        st.width = im.width;
        st.height = im.height;
        st.error_maps = compute_error_maps(model, data.features(im.id, levels));
        st.known = data.known.at(im.id);
        const auto labels = initial.find(im.id);
        if (const auto it = proposals.find(im.id); it != proposals.end()) {
            for (const auto& pr : it->second) {
                const bool accepted = labels != initial.end() &&
                                      std::any_of(labels->second.begin(), labels->second.end(),
                                                  [&](const PseudoLabel& l) { return l.proposal.box == pr.box; });
                if (!accepted) {
                    st.extra_candidates.push_back(pr.box);
                }
            }
        }
        images.push_back(std::move(st));
    }
    const auto result = self_train(initial, scorer, model, images, cfg.self_train);

    write_pseudo_labels((out / "pseudo_labels.jsonl").string(), result.labels);
    write_json_file((out / "scorer.json").string(), to_json(result.scorer));
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : result.rounds) {
        rounds.push_back(to_json(r));
    }
    write_json_file((out / "self_train_report.json").string(), {{"rounds", rounds}, {"diagnostic", result.diagnostic}});

    std::vector<Detection> detections;
    const auto known_path = data.dir / "known_detections.json";
    if (fs::is_regular_file(known_path)) {
        detections = detections_from_json(read_json_file(known_path.string()));
    }
    for (const auto& [image_id, labels] : result.labels) {
        for (const auto& l : labels) {
            detections.push_back({image_id, l.proposal.box, kUnknownLabel, l.proposal.soft_label});
        }
    }
    write_json_file((out / "detections.json").string(), detections_to_json(detections));
    if (!result.diagnostic.empty()) {
        log << "self-train: stopped early: " << result.diagnostic << '\n';
    }
    log << "self-train: " << result.rounds.size() << " rounds -> " << (out / "pseudo_labels.jsonl").string() << '\n';
    return kOk;
}

int cmd_evaluate(const Common& c, const Paths& p, std::ostream& log) {
    const RunConfig cfg = effective_config(c);
    if (p.data.empty() || !fs::is_directory(p.data)) {
        throw Error(ErrorCode::Io, "data directory not found: " + p.data);
    }
    const fs::path dir(p.data);
    require_file((dir / "ground_truth.json").string(), "ground truth");
    require_file((dir / "split.json").string(), "task split");
    require_file(p.detections, "detections");
    auto truth = coco_from_json(read_json_file((dir / "ground_truth.json").string()));
    const auto split = task_split_from_json(read_json_file((dir / "split.json").string()));
    mark_unknowns(truth.annotations, split);
    const auto dets = detections_from_json(read_json_file(p.detections), truth.categories);
    const fs::path out = prepare_out(c, cfg);

    const auto report = evaluate_task(dets, truth.annotations, split, cfg.evaluate);
    write_json_file((out / "report.json").string(), to_json(report));
    log << "evaluate: mAP " << report.map_both << ", U-Recall " << report.u_recall << " -> "
        << (out / "report.json").string() << '\n';
    return kOk;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON run config (defaults when omitted)")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Override the config seed");
    sub->add_option("--out", c.out, "Output directory")->required();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unknown-object pseudo labelling from reconstruction errors", "rewod"};
    app.require_subcommand(1);
    Common common;
    Paths paths;

    auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic scenario");
    add_common(synth, common);

    auto* train_rew = app.add_subcommand("train-rew", "Train per-level autoencoders and fit error distributions");
    add_common(train_rew, common);
    train_rew->add_option("--data", paths.data, "Data directory from synth-gen")->required();

    auto* fit = app.add_subcommand("fit-weibull", "Refit the error distributions of a model");
    add_common(fit, common);
    fit->add_option("--data", paths.data, "Data directory")->required();
    fit->add_option("--model", paths.model, "Model JSON")->required();
    fit->add_option("--labels", paths.labels, "Pseudo labels kept out of the background sample");

    auto* score = app.add_subcommand("score", "Soft-label generator proposals");
    add_common(score, common);
    score->add_option("--data", paths.data, "Data directory")->required();
    score->add_option("--model", paths.model, "Model JSON")->required();
    score->add_option("--proposals", paths.proposals, "Proposals JSON lines (default: DATA/proposals.jsonl)");

    auto* filter = app.add_subcommand("filter", "Apply NMS and the pseudo-label rules");
    add_common(filter, common);
    filter->add_option("--data", paths.data, "Data directory")->required();
    filter->add_option("--scored", paths.scored, "Scored proposals from `score`")->required();

    auto* st = app.add_subcommand("self-train", "Extend pseudo labels by self-training");
    add_common(st, common);
    st->add_option("--data", paths.data, "Data directory")->required();
    st->add_option("--model", paths.model, "Model JSON")->required();
    st->add_option("--labels", paths.labels, "Pseudo labels from `filter`")->required();
    st->add_option("--scorer", paths.scorer, "Initial scorer JSON (zeros when omitted)");

    auto* evaluate = app.add_subcommand("evaluate", "Compute open-world detection metrics");
    add_common(evaluate, common);
    evaluate->add_option("--data", paths.data, "Data directory with ground_truth.json and split.json")->required();
    evaluate->add_option("--detections", paths.detections, "Detections JSON")->required();

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    if (storage.empty()) {
        storage.emplace_back("rewod");
    }
    for (auto& s : storage) {
        argv.push_back(s.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth_gen(common, out);
        }
        if (train_rew->parsed()) {
            return cmd_train_rew(common, paths, out);
        }
        if (fit->parsed()) {
            return cmd_fit_weibull(common, paths, out);
        }
        if (score->parsed()) {
            return cmd_score(common, paths, out);
        }
        if (filter->parsed()) {
            return cmd_filter(common, paths, out);
        }
        if (st->parsed()) {
            return cmd_self_train(common, paths, out);
        }
        return cmd_evaluate(common, paths, out);
    } catch (const Error& e) {
        err << "rewod: " << e.what() << '\n';
        switch (category(e.code())) {
            case ErrorCategory::Usage:
                return kUsage;
            case ErrorCategory::Numerical:
                return kNumericalError;
            case ErrorCategory::Data:
                return kDataError;
        }
        return kDataError;
    } catch (const std::exception& e) {
        err << "rewod: " << e.what() << '\n';
        return kDataError;
    }
}

}  // namespace rewod::cli
