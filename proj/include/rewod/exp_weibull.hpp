// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

#include <json.hpp>

namespace rewod {

// Exponentiated Weibull with shapes a, c and scale lambda:
//   F(x) = (1 - exp(-(x/lambda)^c))^a
//   f(x) = (a c / lambda) [1 - exp(-t^c)]^(a-1) exp(-t^c) t^(c-1),  t = x / lambda
// lambda = 1 gives the two-shape form.
struct ExpWeibull {
    double a = 1.0;
    double c = 1.0;
    double lambda = 1.0;

    void validate() const;
};

// Density at re >= 0. At re = 0 the analytic limit is returned: 0 when
// a*c > 1, a*c/lambda when a*c == 1, +infinity when a*c < 1.
double pdf(const ExpWeibull& m, double re);
double log_pdf(const ExpWeibull& m, double re);
double cdf(const ExpWeibull& m, double x);
double quantile(const ExpWeibull& m, double u);  // inverse of cdf on [0, 1)

double log_likelihood(const ExpWeibull& m, std::span<const double> samples);

struct MleOptions {
    std::size_t min_samples = 100;
    double sample_floor = 1e-12;
    int max_iterations = 500;
    double tolerance = 1e-8;
};

struct MleFit {
    ExpWeibull model;
    double log_likelihood = 0.0;
    std::vector<ExpWeibull> starts;
    std::vector<double> start_log_likelihoods;
};

// Multi-start points derived from the floored samples. With m and s the
// mean and standard deviation of log(x), the plain-Weibull log-moment
// estimates are c0 = pi / (s sqrt 6) and lambda0 = exp(m + euler_gamma / c0);
// the starts are (a, c, lambda) =
//   (1, c0, l0), (0.5, 1.5 c0, l0), (2, c0 / 1.5, l0), (4, c0 / 2, l0), (1, 2 c0, l0).
std::vector<ExpWeibull> mle_start_points(std::span<const double> floored_samples);

// Maximum likelihood via Nelder-Mead on (log a, log c, log lambda): one run
// per start point, then one restart from the best optimum. Samples are
// floored at options.sample_floor first. Throws FitFailed on degenerate
// (zero-spread) samples or when no run reaches a finite likelihood.
MleFit fit_mle_detailed(std::span<const double> samples, const MleOptions& options = {});
ExpWeibull fit_mle(std::span<const double> samples, const MleOptions& options = {});

nlohmann::json to_json(const ExpWeibull& m);
ExpWeibull exp_weibull_from_json(const nlohmann::json& j);

}  // namespace rewod
