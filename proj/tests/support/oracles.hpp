// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

// Slow, direct reference implementations used to check the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "rewod/geometry.hpp"
#include "rewod/owod_eval.hpp"
#include "rewod/rng.hpp"

namespace rewod::oracle {

// Pixel-count IoU; only valid for integer-aligned boxes.
inline double raster_iou(const Box& a, const Box& b) {
    const auto x0 = static_cast<int>(std::min(a.x(), b.x()));
    const auto y0 = static_cast<int>(std::min(a.y(), b.y()));
    const auto x1 = static_cast<int>(std::max(a.right(), b.right()));
    const auto y1 = static_cast<int>(std::max(a.bottom(), b.bottom()));
    long inter = 0;
    long uni = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double px = x + 0.5;
            const double py = y + 0.5;
            const bool in_a = a.contains(px, py);
            const bool in_b = b.contains(px, py);
            inter += (in_a && in_b) ? 1 : 0;
            uni += (in_a || in_b) ? 1 : 0;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Random integer box inside [0, extent)^2.
inline Box random_int_box(Rng& rng, int extent, int max_side) {
    const int w = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_side)));
    const int h = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_side)));
    const int x = static_cast<int>(rng.index(static_cast<std::uint64_t>(extent - w + 1)));
    const int y = static_cast<int>(rng.index(static_cast<std::uint64_t>(extent - h + 1)));
    return {static_cast<double>(x), static_cast<double>(y), static_cast<double>(w), static_cast<double>(h)};
}

// Scores on a coarse grid so that ties occur.
inline double random_score(Rng& rng) { return std::round(rng.uniform() * 10.0) / 10.0; }

// Indices sorted by score descending, ties by index, via pairwise ranking.
inline std::vector<std::size_t> ranked(const std::vector<double>& scores) {
    std::vector<std::size_t> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::size_t rank = 0;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) {
                ++rank;
            }
        }
        out[rank] = i;
    }
    return out;
}

// Repeatedly take the best remaining box and delete everything overlapping it.
inline std::vector<ScoredBox> nms(const std::vector<ScoredBox>& boxes, double thr) {
    std::vector<bool> alive(boxes.size(), true);
    std::vector<ScoredBox> kept;
    for (;;) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (alive[i] && (!best || boxes[i].score > boxes[*best].score)) {
                best = i;
            }
        }
        if (!best) {
            return kept;
        }
        kept.push_back(boxes[*best]);
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (alive[i] && raster_iou(boxes[i].box, boxes[*best].box) > thr) {
                alive[i] = false;
            }
        }
        alive[*best] = false;
    }
}

struct OracleMatch {
    std::vector<std::optional<std::size_t>> match;
    std::size_t matched = 0;
};

inline OracleMatch greedy(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double thr) {
    std::vector<double> scores;
    for (const auto& d : dets) {
        scores.push_back(d.score);
    }
    OracleMatch m;
    m.match.assign(dets.size(), std::nullopt);
    std::vector<bool> used(gts.size(), false);
    for (std::size_t d : ranked(scores)) {
        double best = -1.0;
        std::optional<std::size_t> pick;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g] || gts[g].image_id != dets[d].image_id) {
                continue;
            }
            const double v = raster_iou(dets[d].box, gts[g].box);
            if (v >= thr && v > best) {
                best = v;
                pick = g;
            }
        }
        if (pick) {
            used[*pick] = true;
            m.match[d] = pick;
            ++m.matched;
        }
    }
    return m;
}

// All-point interpolated AP: at every achieved recall level take the best
// precision reached at that recall or beyond.
inline double average_precision(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double thr) {
    if (gts.empty()) {
        return 0.0;
    }
    const auto m = greedy(dets, gts, thr);
    std::vector<double> scores;
    for (const auto& d : dets) {
        scores.push_back(d.score);
    }
    std::vector<double> prec;
    std::vector<double> rec;
    double tp = 0;
    double n = 0;
    for (std::size_t d : ranked(scores)) {
        n += 1;
        tp += m.match[d] ? 1 : 0;
        prec.push_back(tp / n);
        rec.push_back(tp / static_cast<double>(gts.size()));
    }
    double ap = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec[i] <= prev) {
            continue;
        }
        double p = 0.0;
        for (std::size_t j = 0; j < rec.size(); ++j) {
            if (rec[j] >= rec[i]) {
                p = std::max(p, prec[j]);
            }
        }
        ap += (rec[i] - prev) * p;
        prev = rec[i];
    }
    return ap;
}

inline std::vector<GroundTruth> unknown_truth(const std::vector<GroundTruth>& gts) {
    std::vector<GroundTruth> out;
    for (const auto& g : gts) {
        if (g.is_unknown) {
            out.push_back(g);
        }
    }
    return out;
}

inline double u_recall(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double score_thr,
                       double thr) {
    std::vector<Detection> ud;
    for (const auto& d : dets) {
        if (d.class_label == kUnknownLabel && d.score > score_thr) {
            ud.push_back(d);
        }
    }
    const auto ug = unknown_truth(gts);
    return ug.empty() ? 0.0 : static_cast<double>(greedy(ud, ug, thr).matched) / static_cast<double>(ug.size());
}

inline double recall_at_k(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, int k,
                          double thr) {
    std::vector<Detection> ud;
    for (const auto& d : dets) {
        if (d.class_label == kUnknownLabel) {
            ud.push_back(d);
        }
    }
    std::vector<double> scores;
    for (const auto& d : ud) {
        scores.push_back(d.score);
    }
    std::vector<Detection> top;
    for (std::size_t i : ranked(scores)) {
        const auto before = std::count_if(top.begin(), top.end(),
                                          [&](const Detection& t) { return t.image_id == ud[i].image_id; });
        if (before < k) {
            top.push_back(ud[i]);
        }
    }
    const auto ug = unknown_truth(gts);
    return ug.empty() ? 0.0 : static_cast<double>(greedy(top, ug, thr).matched) / static_cast<double>(ug.size());
}

// Known-class detections whose best-overlapping ground truth (over every
// class) is an unknown object at IoU >= thr; each unknown object counts once.
inline std::int64_t a_ose(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double thr) {
    std::vector<double> scores;
    for (const auto& d : dets) {
        scores.push_back(d.score);
    }
    std::vector<bool> counted(gts.size(), false);
    std::int64_t total = 0;
    for (std::size_t d : ranked(scores)) {
        if (dets[d].class_label == kUnknownLabel) {
            continue;
        }
        double best = -1.0;
        std::optional<std::size_t> arg;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gts[g].image_id != dets[d].image_id) {
                continue;
            }
            const double v = raster_iou(dets[d].box, gts[g].box);
            if (v > best) {
                best = v;
                arg = g;
            }
        }
        if (arg && best >= thr && gts[*arg].is_unknown && !counted[*arg]) {
            counted[*arg] = true;
            ++total;
        }
    }
    return total;
}

// Mann-Whitney AUC by direct pair counting (ties count one half).
inline double auc_pairs(const std::vector<double>& pos, const std::vector<double>& neg) {
    double wins = 0.0;
    for (double p : pos) {
        for (double n : neg) {
            wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
        }
    }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Same statistic through ranks; for large samples.
inline double auc_ranks(const std::vector<double>& pos, const std::vector<double>& neg) {
    std::vector<std::pair<double, int>> all;
    for (double p : pos) {
        all.emplace_back(p, 1);
    }
    for (double n : neg) {
        all.emplace_back(n, 0);
    }
    std::sort(all.begin(), all.end());
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) {
            ++j;
        }
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].second == 1) {
                rank_sum += mid;
            }
        }
        i = j;
    }
    const auto np = static_cast<double>(pos.size());
    const auto nn = static_cast<double>(neg.size());
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace rewod::oracle
