// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <functional>
#include <vector>

namespace rewod {

struct NelderMeadOptions {
    int max_iterations = 500;
    // Stop when (f_worst - f_best) <= tolerance * (|f_best| + tolerance).
    double tolerance = 1e-8;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimizes `f` with the standard coefficients (reflection 1, expansion 2,
// contraction 0.5, shrink 0.5). The start simplex is x0 plus `initial_step`
// along each axis. Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options = {});

}  // namespace rewod
