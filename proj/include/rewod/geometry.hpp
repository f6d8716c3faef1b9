// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <span>
#include <vector>

namespace rewod {

// Axis-aligned box in input pixels, stored as (x, y, w, h) with (x, y) the
// top-left corner. Construction rejects non-finite coordinates and
// non-positive extents.
class Box {
public:
    Box(double x, double y, double w, double h);

    static Box from_corners(double x1, double y1, double x2, double y2);

    double x() const { return x_; }
    double y() const { return y_; }
    double width() const { return w_; }
    double height() const { return h_; }
    double right() const { return x_ + w_; }
    double bottom() const { return y_ + h_; }
    double center_x() const { return x_ + 0.5 * w_; }
    double center_y() const { return y_ + 0.5 * h_; }

    // Half-open containment: x <= px < x + w, y <= py < y + h.
    bool contains(double px, double py) const {
        return px >= x_ && px < x_ + w_ && py >= y_ && py < y_ + h_;
    }

    std::array<double, 4> xywh() const { return {x_, y_, w_, h_}; }

    friend bool operator==(const Box&, const Box&) = default;

private:
    double x_;
    double y_;
    double w_;
    double h_;
};

struct ScoredBox {
    Box box;
    double score;
};

double area(const Box& b);
double aspect_ratio(const Box& b);

// Intersection over union. Touching boxes have zero intersection.
double iou(const Box& a, const Box& b);
double intersection_area(const Box& a, const Box& b);

// Greedy non-maximum suppression. Candidates are visited by descending score
// (equal scores: lower input index first); a candidate is dropped when its
// IoU with an already kept box exceeds `iou_threshold`.
std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold);

// Indices into `boxes` sorted by descending score, ties by ascending index.
std::vector<std::size_t> score_order(std::span<const ScoredBox> boxes);

}  // namespace rewod
