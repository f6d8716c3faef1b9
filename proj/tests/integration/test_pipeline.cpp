// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

// End-to-end checks on the reference synthetic scenario (seed 0, default
// configuration). The model is trained once and shared by every test.

#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rewod/pipeline.hpp"
#include "rewod/self_train.hpp"

namespace rewod {
namespace {

struct Reference {
    RunConfig cfg;
    SyntheticScenario scenario;
    std::vector<LevelTrainReport> reports;
    RewModel model;
    std::vector<SelfTrainImage> images;
    PseudoLabelSet initial;
    std::map<std::int64_t, std::vector<Box>> unknown_truth;
    std::map<std::int64_t, std::vector<Box>> known;
};

const Reference& reference() {
    static const std::unique_ptr<Reference> ref = [] {
        auto r = std::make_unique<Reference>();
        r->scenario = generate_scenario(r->cfg.seed, r->cfg.scenario);
        r->model = train_rew_model(training_images(r->scenario), r->cfg, &r->reports);
        for (const auto& img : r->scenario.images) {
            SelfTrainImage st{img.image_id, img.width, img.height, compute_error_maps(r->model, img.feature_maps),
                              img.known_boxes(), {}};
            const auto kept = filter_proposals(img.proposals, st.known, r->cfg.filter);
            std::vector<Box> boxes;
            for (const auto& k : kept) boxes.push_back(k.box);
            const auto labeled = label_proposals(r->model, st.error_maps, boxes);
            for (std::size_t i = 0; i < kept.size(); ++i) {
                if (labeled[i].flag == LabelFlag::Ok) r->initial[img.image_id].push_back({labeled[i], kept[i].score, 0});
            }
            for (const auto& p : img.proposals) {
                if (std::none_of(kept.begin(), kept.end(), [&](const ScoredBox& k) { return k.box == p.box; })) {
                    st.extra_candidates.push_back(p.box);
                }
            }
            r->images.push_back(std::move(st));
            r->unknown_truth[img.image_id] = img.unknown_boxes();
            r->known[img.image_id] = img.known_boxes();
        }
        return r;
    }();
    return *ref;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double model_mean(const ExpWeibull& m) {
    const auto f = [&](double x) { return x * pdf(m, x); };
    boost::math::quadrature::tanh_sinh<double> head;
    boost::math::quadrature::exp_sinh<double> tail;
    return head.integrate(f, 0.0, m.lambda) + tail.integrate(f, m.lambda, std::numeric_limits<double>::infinity());
}

std::size_t count(const PseudoLabelSet& s) {
    std::size_t n = 0;
    for (const auto& [id, v] : s) n += v.size();
    return n;
}

TEST(Reconstructor, EpochLossNeverIncreasesAtDefaultRate) {
    const auto& ref = reference();
    ASSERT_EQ(ref.reports.size(), 4u);
    for (const auto& r : ref.reports) {
        double prev = r.autoencoder.initial_loss;
        for (double l : r.autoencoder.epoch_loss) {
            EXPECT_LE(l, prev) << level_name(r.level);
            prev = l;
        }
        EXPECT_LE(r.autoencoder.final_loss, r.autoencoder.initial_loss);
    }
}

TEST(Reconstructor, BackgroundReconstructsBetterThanForeground) {
    const auto& ref = reference();
    for (const auto& lm : ref.model.levels) {
        std::vector<double> fg;
        std::vector<double> bg;
        for (std::size_t i = 0; i < ref.images.size(); ++i) {
            const auto& img = ref.scenario.images[i];
            const auto it = std::find_if(ref.images[i].error_maps.begin(), ref.images[i].error_maps.end(),
                                         [&](const ErrorMap& e) { return e.level() == lm.level; });
            ASSERT_NE(it, ref.images[i].error_maps.end());
            std::vector<Box> objects = img.known_boxes();
            const auto u = img.unknown_boxes();
            objects.insert(objects.end(), u.begin(), u.end());
            for (int r = 0; r < it->height(); ++r) {
                for (int c = 0; c < it->width(); ++c) {
                    const double px = (c + 0.5) * it->stride();
                    const double py = (r + 0.5) * it->stride();
                    const bool inside = std::any_of(objects.begin(), objects.end(),
                                                    [&](const Box& b) { return b.contains(px, py); });
                    (inside ? fg : bg).push_back(it->at(r, c));
                }
            }
        }
        EXPECT_LT(mean(bg), mean(fg)) << level_name(lm.level);
    }
}

TEST(WeibullModel, ForegroundModelHasLargerMeanAtEveryLevel) {
    const auto& ref = reference();
    ASSERT_EQ(ref.model.levels.size(), 4u);
    for (const auto& lm : ref.model.levels) {
        const double fg = model_mean(lm.weibull.fg);
        const double bg = model_mean(lm.weibull.bg);
        EXPECT_GT(fg, bg) << level_name(lm.level);
        EXPECT_GE(lm.weibull.fg_sample_count, 100u);
        EXPECT_GE(lm.weibull.bg_sample_count, 100u);
    }
}

TEST(SoftLabeler, UnknownObjectsOutscoreBackground) {
    const auto& ref = reference();
    std::vector<double> unknown;
    std::vector<double> background;
    for (std::size_t i = 0; i < ref.images.size(); ++i) {
        const auto& img = ref.scenario.images[i];
        const auto u = img.unknown_boxes();
        for (const auto& p : label_proposals(ref.model, ref.images[i].error_maps, u)) unknown.push_back(p.soft_label);
        const auto bg_boxes =
            sample_background_boxes(img, ref.cfg.scenario, static_cast<int>(4 * u.size()), 1000 + img.image_id);
        for (const auto& p : label_proposals(ref.model, ref.images[i].error_maps, bg_boxes)) {
            background.push_back(p.soft_label);
        }
    }
    EXPECT_GT(mean(unknown), mean(background));
    EXPECT_GE(oracle::auc_pairs(unknown, background), 0.9);
}

TEST(SelfTraining, ZeroIterationsIsIdentity) {
    const auto& ref = reference();
    SelfTrainConfig cfg = ref.cfg.self_train;
    cfg.iterations = 0;
    auto scorer = ProposalScorer::zeros();
    scorer.localization.bias = 0.25;
    const auto r = self_train(ref.initial, scorer, ref.model, ref.images, cfg);
    EXPECT_TRUE(r.rounds.empty());
    EXPECT_EQ(r.scorer.localization.bias, 0.25);
    ASSERT_EQ(r.labels.size(), ref.initial.size());
    for (const auto& [id, labels] : ref.initial) {
        ASSERT_EQ(r.labels.at(id).size(), labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            EXPECT_EQ(to_json_record(id, r.labels.at(id)[i]), to_json_record(id, labels[i]));
        }
    }
}

TEST(SelfTraining, RoundsOnlyAddLabelsThatPassTheAudit) {
    const auto& ref = reference();
    ASSERT_FALSE(audit_pseudo_labels(ref.initial, ref.known, ref.cfg.filter).has_value());
    SelfTrainConfig cfg = ref.cfg.self_train;
    cfg.iterations = 2;
    const auto r = self_train(ref.initial, ProposalScorer::zeros(), ref.model, ref.images, cfg);
    ASSERT_EQ(r.rounds.size(), 2u) << r.diagnostic;
    EXPECT_TRUE(r.diagnostic.empty());

    const auto audit = audit_pseudo_labels(r.labels, ref.known, cfg.filter);
    EXPECT_FALSE(audit.has_value()) << *audit;

    // Every initial label survives, in place, and later rounds only append.
    std::size_t added = 0;
    for (const auto& rr : r.rounds) {
        EXPECT_LE(rr.final_loss, rr.initial_loss);
        added += rr.added;
    }
    EXPECT_EQ(count(r.labels), count(ref.initial) + added);
    for (const auto& [id, labels] : ref.initial) {
        const auto& out = r.labels.at(id);
        ASSERT_GE(out.size(), labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(out[i].proposal.box, labels[i].proposal.box);
        int prev_round = 0;
        for (const auto& l : out) {
            EXPECT_GE(l.round, prev_round);
            prev_round = l.round;
            EXPECT_GE(l.proposal.soft_label, 0.0);
            EXPECT_LE(l.proposal.soft_label, 1.0);
        }
    }

    cfg.iterations = 1;
    const auto one = self_train(ref.initial, ProposalScorer::zeros(), ref.model, ref.images, cfg);
    EXPECT_LE(count(one.labels), count(r.labels));
    EXPECT_GT(label_recall(one.labels, ref.unknown_truth), label_recall(ref.initial, ref.unknown_truth));
}

TEST(SelfTraining, EmptyCandidatesStopWithDiagnostic) {
    const auto& ref = reference();
    std::vector<SelfTrainImage> images = ref.images;
    for (auto& im : images) {
        im.width = 16;  // too small for any grid box
        im.height = 16;
        im.extra_candidates.clear();
    }
    SelfTrainConfig cfg = ref.cfg.self_train;
    const auto r = self_train(ref.initial, ProposalScorer::zeros(), ref.model, images, cfg);
    EXPECT_FALSE(r.diagnostic.empty());
    EXPECT_EQ(count(r.labels), count(ref.initial));
}

}  // namespace
}  // namespace rewod
