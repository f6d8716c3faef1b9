// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rewod/error.hpp"

namespace rewod {

Box::Box(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h) || !(w > 0.0) ||
        !(h > 0.0)) {
        std::ostringstream msg;
        msg << "box [" << x << ", " << y << ", " << w << ", " << h << "] must be finite with w > 0 and h > 0";
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
}

Box Box::from_corners(double x1, double y1, double x2, double y2) { return Box(x1, y1, x2 - x1, y2 - y1); }

double area(const Box& b) { return b.width() * b.height(); }

double aspect_ratio(const Box& b) { return b.width() / b.height(); }

double intersection_area(const Box& a, const Box& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    return iw * ih;
}

double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    if (inter == 0.0) {
        return 0.0;
    }
    const double uni = area(a) + area(b) - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::size_t> score_order(std::span<const ScoredBox> boxes) {
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return boxes[l].score > boxes[r].score; });
    return order;
}

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold) {
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "nms threshold must lie in [0, 1]");
    }
    std::vector<ScoredBox> kept;
    for (auto i : score_order(boxes)) {
        const Box& candidate = boxes[i].box;
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const ScoredBox& k) {
            return iou(k.box, candidate) > iou_threshold;
        });
        if (!suppressed) {
            kept.push_back(boxes[i]);
        }
    }
    return kept;
}

}  // namespace rewod
