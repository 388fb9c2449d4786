#pragma once

// Oracle best-of-k sweeps and log-log power-law fitting.
//
// Per tuple, candidates are drawn once and prefix-scanned over a
// powers-of-two k grid, so curves are non-increasing by construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bok/action.hpp"
#include "bok/common.hpp"
#include "bok/dataset.hpp"
#include "bok/policy.hpp"
#include "bok/sampling.hpp"

namespace bok {

struct ScalingCurve {
    std::vector<int> k;               // sorted ascending
    std::vector<double> mean_rmse;    // mean best-of-k error per k
    std::vector<double> stderr_rmse;  // standard error over tuples
    std::string sampler;
};

struct PowerLawFit {
    double a = 0.0;          // e(k) ~ a * k^b
    double b = 0.0;
    double r_squared = 0.0;
};

using Sampler =
    std::function<std::vector<ActionVector>(const Observation& obs, int count, std::uint64_t seed)>;

inline Sampler make_random_sampler() {
    return [](const Observation&, int count, std::uint64_t seed) {
        return sample_random(count, seed).actions;
    };
}

inline Sampler make_policy_sampler(const StochasticPolicy& policy, double temperature) {
    return [&policy, temperature](const Observation& obs, int count, std::uint64_t seed) {
        return policy.sample(obs, temperature, count, seed);
    };
}

// Fit a proposal from a handful of policy samples, then draw every candidate
// from it. fit_samples defaults to 4, the scaling-experiment setting.
inline Sampler make_gaussian_sampler(const StochasticPolicy& policy, double temperature,
                                     int fit_samples = 4) {
    if (fit_samples < 2) throw Error(Errc::invalid_argument, "fit_samples must be >= 2");
    return [&policy, temperature, fit_samples](const Observation& obs, int count,
                                               std::uint64_t seed) {
        CandidateSet initial;
        initial.provenance = Provenance::policy;
        initial.actions = policy.sample(obs, temperature, fit_samples, derive_seed(seed, 0));
        const ProposalDistribution prop = fit_proposal(initial);
        return sample_gaussian(prop, count, derive_seed(seed, 1)).actions;
    };
}

inline std::vector<int> powers_of_two_grid(int k_max) {
    if (k_max < 1) throw Error(Errc::invalid_argument, "k_max must be >= 1");
    std::vector<int> grid;
    for (long k = 1; k <= k_max; k *= 2) grid.push_back(static_cast<int>(k));
    return grid;
}

// Oracle selection: min RMSE-to-ground-truth over the first k of k_max
// candidates, averaged over tuples. Tuple i draws with derive_seed(seed, i),
// so results are independent of evaluation order.
inline ScalingCurve oracle_best_of_k(const std::vector<DemoRecord>& tuples, const Sampler& sampler,
                                     int k_max, std::uint64_t seed,
                                     const std::string& sampler_tag = "") {
    if (tuples.empty()) throw Error(Errc::invalid_argument, "tuples must be nonempty");
    const std::vector<int> grid = powers_of_two_grid(k_max);

    ScalingCurve curve;
    curve.k = grid;
    curve.sampler = sampler_tag;
    std::vector<double> sum(grid.size(), 0.0);
    std::vector<double> sum_sq(grid.size(), 0.0);

    for (std::size_t i = 0; i < tuples.size(); ++i) {
        std::vector<ActionVector> candidates;
        try {
            candidates = sampler(tuples[i].obs, k_max, derive_seed(seed, i));
        } catch (const std::exception& e) {
            throw Error(Errc::invalid_argument,
                        "sampler failed on tuple " + std::to_string(i) + ": " + e.what());
        }
        if (static_cast<int>(candidates.size()) < k_max) {
            throw Error(Errc::invalid_argument,
                        "sampler returned too few candidates on tuple " + std::to_string(i));
        }
        double best = std::numeric_limits<double>::infinity();
        std::size_t g = 0;
        for (int j = 0; j < k_max; ++j) {
            const double e = rmse(candidates[static_cast<std::size_t>(j)], tuples[i].action);
            if (e < best) best = e;
            if (g < grid.size() && j + 1 == grid[g]) {
                sum[g] += best;
                sum_sq[g] += best * best;
                ++g;
            }
        }
    }

    const double n = static_cast<double>(tuples.size());
    curve.mean_rmse.resize(grid.size());
    curve.stderr_rmse.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double mean = sum[g] / n;
        curve.mean_rmse[g] = mean;
        const double var = n > 1.0 ? std::max(0.0, (sum_sq[g] - n * mean * mean) / (n - 1.0)) : 0.0;
        curve.stderr_rmse[g] = std::sqrt(var / n);
    }
    return curve;
}

// OLS of log(e) on log(k). Callers must drop zero-error points first.
inline PowerLawFit fit_power_law(const ScalingCurve& curve) {
    if (curve.k.size() < 3) {
        throw Error(Errc::invalid_argument, "power-law fit needs at least 3 points");
    }
    for (double e : curve.mean_rmse) {
        if (!(e > 0.0)) {
            throw Error(Errc::invalid_argument,
                        "power-law fit undefined for zero error; exclude exact-hit points "
                        "before fitting");
        }
    }
    const std::size_t n = curve.k.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(static_cast<double>(curve.k[i]));
        const double y = std::log(curve.mean_rmse[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    if (denom == 0.0) throw Error(Errc::invalid_argument, "degenerate k grid");
    PowerLawFit fit;
    fit.b = (dn * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.b * sx) / dn;
    fit.a = std::exp(intercept);

    double ss_res = 0.0, ss_tot = 0.0;
    const double y_mean = sy / dn;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(static_cast<double>(curve.k[i]));
        const double y = std::log(curve.mean_rmse[i]);
        const double r = y - (intercept + fit.b * x);
        ss_res += r * r;
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

// (e(1) - e(k_max)) / e(1).
inline double relative_reduction(const ScalingCurve& curve) {
    if (curve.k.empty() || curve.k.front() != 1) {
        throw Error(Errc::invalid_argument, "curve has no k=1 entry");
    }
    const double e1 = curve.mean_rmse.front();
    if (e1 == 0.0) {
        throw Error(Errc::numeric_error, "relative reduction undefined: e(1) is zero");
    }
    return (e1 - curve.mean_rmse.back()) / e1;
}

inline std::string curve_to_csv(const ScalingCurve& curve) {
    std::string out = "k,mean_rmse,stderr\n";
    for (std::size_t i = 0; i < curve.k.size(); ++i) {
        out += std::to_string(curve.k[i]) + "," + detail::fmt17(curve.mean_rmse[i]) + "," +
               detail::fmt17(curve.stderr_rmse[i]) + "\n";
    }
    return out;
}

inline nlohmann::json curve_to_json(const ScalingCurve& curve) {
    return nlohmann::json{{"sampler", curve.sampler},
                          {"k", curve.k},
                          {"mean_rmse", curve.mean_rmse},
                          {"stderr", curve.stderr_rmse}};
}

inline nlohmann::json fit_to_json(const PowerLawFit& fit) {
    return nlohmann::json{{"a", fit.a}, {"b", fit.b}, {"r_squared", fit.r_squared}};
}

}  // namespace bok
