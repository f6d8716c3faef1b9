// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/exp_weibull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "rewod/error.hpp"
#include "rewod/nelder_mead.hpp"

namespace rewod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 - exp(-y)) for y >= 0.
double log1mexp(double y) {
    if (y <= 0.0) {
        return -kInf;
    }
    return y < std::numbers::ln2 ? std::log(-std::expm1(-y)) : std::log1p(-std::exp(-y));
}

// log(1 - exp(-t^c)) from c * log(t). For tiny t^c this is log(t^c) - t^c / 2
// to double precision, which stays finite after t^c itself underflows.
double log_cdf_base(double c_log_t) {
    if (c_log_t < -20.0) {
        return c_log_t - 0.5 * std::exp(c_log_t);
    }
    return log1mexp(std::exp(c_log_t));
}

// Mean log-likelihood over precomputed log-samples.
double mean_log_likelihood(double log_a, double log_c, double log_lambda, std::span<const double> log_x) {
    const double a = std::exp(log_a);
    const double c = std::exp(log_c);
    double sum = 0.0;
    for (double lx : log_x) {
        const double lt = lx - log_lambda;
        const double tc = std::exp(c * lt);
        sum += (a - 1.0) * log_cdf_base(c * lt) - tc + (c - 1.0) * lt;
    }
    return log_a + log_c - log_lambda + sum / static_cast<double>(log_x.size());
}

}  // namespace

void ExpWeibull::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(a) || !ok(c) || !ok(lambda)) {
        throw Error(ErrorCode::InvalidArgument, "exponentiated Weibull parameters must be finite and > 0");
    }
}

double log_pdf(const ExpWeibull& m, double re) {
    if (!(re >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "density argument must be >= 0");
    }
    if (re == kInf) {
        return -kInf;
    }
    if (re == 0.0) {
        const double ac = m.a * m.c;
        if (ac > 1.0) {
            return -kInf;
        }
        if (ac < 1.0) {
            return kInf;
        }
        return std::log(ac / m.lambda);
    }
    const double lt = std::log(re) - std::log(m.lambda);
    const double tc = std::exp(m.c * lt);
    return std::log(m.a) + std::log(m.c) - std::log(m.lambda) + (m.a - 1.0) * log_cdf_base(m.c * lt) - tc +
           (m.c - 1.0) * lt;
}

double pdf(const ExpWeibull& m, double re) { return std::exp(log_pdf(m, re)); }

double cdf(const ExpWeibull& m, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    return std::exp(m.a * log_cdf_base(m.c * (std::log(x) - std::log(m.lambda))));
}

double quantile(const ExpWeibull& m, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "quantile level must lie in [0, 1)");
    }
    if (u == 0.0) {
        return 0.0;
    }
    // u^(1/a) = 1 - exp(-t^c)  =>  t^c = -log(1 - u^(1/a))
    const double root = std::exp(std::log(u) / m.a);
    const double tc = -std::log1p(-root);
    return m.lambda * std::pow(tc, 1.0 / m.c);
}

double log_likelihood(const ExpWeibull& m, std::span<const double> samples) {
    double sum = 0.0;
    for (double x : samples) {
        sum += log_pdf(m, x);
    }
    return sum;
}

std::vector<ExpWeibull> mle_start_points(std::span<const double> floored_samples) {
    const auto n = static_cast<double>(floored_samples.size());
    double mean = 0.0;
    for (double x : floored_samples) {
        mean += std::log(x);
    }
    mean /= n;
    double var = 0.0;
    for (double x : floored_samples) {
        const double d = std::log(x) - mean;
        var += d * d;
    }
    var /= n;
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12)) {
        throw Error(ErrorCode::FitFailed, "degenerate samples: zero spread");
    }
    const double c0 = std::numbers::pi / (sd * std::sqrt(6.0));
    const double l0 = std::exp(mean + std::numbers::egamma / c0);
    return {{1.0, c0, l0}, {0.5, 1.5 * c0, l0}, {2.0, c0 / 1.5, l0}, {4.0, c0 / 2.0, l0}, {1.0, 2.0 * c0, l0}};
}

MleFit fit_mle_detailed(std::span<const double> samples, const MleOptions& options) {
    if (samples.size() < options.min_samples) {
        throw Error(ErrorCode::EmptySamples, "need at least " + std::to_string(options.min_samples) +
                                                 " samples, got " + std::to_string(samples.size()));
    }
    std::vector<double> floored(samples.begin(), samples.end());
    for (double& x : floored) {
        if (!std::isfinite(x) || x < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "samples must be finite and >= 0");
        }
        x = std::max(x, options.sample_floor);
    }
    std::vector<double> log_x(floored.size());
    std::transform(floored.begin(), floored.end(), log_x.begin(), [](double x) { return std::log(x); });

    MleFit fit;
    fit.starts = mle_start_points(floored);
    const auto objective = [&](const std::vector<double>& theta) {
        return -mean_log_likelihood(theta[0], theta[1], theta[2], log_x);
    };
    NelderMeadOptions nm;
    nm.max_iterations = options.max_iterations;
    nm.tolerance = options.tolerance;

    const auto n = static_cast<double>(floored.size());
    NelderMeadResult best;
    best.value = kInf;
    for (const auto& start : fit.starts) {
        const std::vector<double> theta0 = {std::log(start.a), std::log(start.c), std::log(start.lambda)};
        fit.start_log_likelihoods.push_back(-objective(theta0) * n);
        auto run = nelder_mead(objective, theta0, nm);
        if (run.value < best.value) {
            best = std::move(run);
        }
    }
    if (!std::isfinite(best.value)) {
        throw Error(ErrorCode::FitFailed, "no start reached a finite likelihood");
    }
    nm.initial_step = 0.1;
    auto polished = nelder_mead(objective, best.x, nm);
    if (polished.value < best.value) {
        best = std::move(polished);
    }
    fit.model = {std::exp(best.x[0]), std::exp(best.x[1]), std::exp(best.x[2])};
    try {
        fit.model.validate();
    } catch (const Error&) {
        throw Error(ErrorCode::FitFailed, "optimizer produced non-finite parameters");
    }
    fit.log_likelihood = -best.value * n;
    return fit;
}

ExpWeibull fit_mle(std::span<const double> samples, const MleOptions& options) {
    return fit_mle_detailed(samples, options).model;
}

nlohmann::json to_json(const ExpWeibull& m) { return {{"a", m.a}, {"c", m.c}, {"lambda", m.lambda}}; }

ExpWeibull exp_weibull_from_json(const nlohmann::json& j) {
    try {
        ExpWeibull m{j.at("a").get<double>(), j.at("c").get<double>(), j.at("lambda").get<double>()};
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("weibull model: ") + e.what());
    }
}

}  // namespace rewod
