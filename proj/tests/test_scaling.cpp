#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "bok/env.hpp"
#include "bok/policy.hpp"
#include "bok/scaling.hpp"

using Catch::Approx;
using namespace bok;

namespace {

// Direct re-implementation of the best-of-k protocol: redraw the candidates
// with the same per-tuple seeds and take prefix minima with a plain loop.
ScalingCurve brute_force_curve(const std::vector<DemoRecord>& tuples, const Sampler& sampler,
                               int k_max, std::uint64_t seed) {
    ScalingCurve curve;
    for (long k = 1; k <= k_max; k *= 2) curve.k.push_back(static_cast<int>(k));
    std::vector<std::vector<double>> best_per_tuple;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        const auto candidates = sampler(tuples[i].obs, k_max, derive_seed(seed, i));
        std::vector<double> mins;
        for (int k : curve.k) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                best = std::min(best, rmse(candidates[static_cast<std::size_t>(j)],
                                           tuples[i].action));
            }
            mins.push_back(best);
        }
        best_per_tuple.push_back(mins);
    }
    for (std::size_t g = 0; g < curve.k.size(); ++g) {
        double sum = 0.0;
        for (const auto& row : best_per_tuple) sum += row[g];
        curve.mean_rmse.push_back(sum / static_cast<double>(tuples.size()));
        curve.stderr_rmse.push_back(0.0);
    }
    return curve;
}

}  // namespace

TEST_CASE("oracle curve is identically zero for an expert sampler") {
    const DemoDataset ds = generate_demos({}, 10, 8);
    const NoisyPolicy expert = noisy_policy(ds, 0.0, {}, 0.0);
    const ScalingCurve curve =
        oracle_best_of_k(ds.records, make_policy_sampler(expert, 1.0), 4, 3, "expert");
    REQUIRE(curve.k == std::vector<int>{1, 2, 4});
    for (double e : curve.mean_rmse) CHECK(e == 0.0);
}

TEST_CASE("oracle curves are non-increasing for any sampler") {
    const DemoDataset ds = generate_demos({}, 20, 12);
    const NoisyPolicy policy = noisy_policy(ds, 0.3);
    for (const Sampler& sampler :
         {make_random_sampler(), make_policy_sampler(policy, 1.0),
          make_gaussian_sampler(policy, 1.0, 4)}) {
        const ScalingCurve curve = oracle_best_of_k(ds.records, sampler, 128, 5);
        for (std::size_t i = 1; i < curve.k.size(); ++i) {
            CHECK(curve.mean_rmse[i] <= curve.mean_rmse[i - 1]);
        }
    }
}

TEST_CASE("oracle curve matches an independent brute-force re-implementation") {
    const DemoDataset full = generate_demos({}, 200, 14);
    const DemoDataset ds = subsample(full, 1000, 1);
    const NoisyPolicy policy = noisy_policy(full, 0.2);
    const Sampler sampler = make_policy_sampler(policy, 1.0);
    const ScalingCurve fast = oracle_best_of_k(ds.records, sampler, 1024, 21);
    const ScalingCurve slow = brute_force_curve(ds.records, sampler, 1024, 21);
    REQUIRE(fast.k == slow.k);
    for (std::size_t i = 0; i < fast.k.size(); ++i) {
        CHECK(fast.mean_rmse[i] == Approx(slow.mean_rmse[i]).margin(1e-12));
    }
}

TEST_CASE("identical seeds give bit-identical curves") {
    const DemoDataset ds = generate_demos({}, 10, 2);
    const NoisyPolicy policy = noisy_policy(ds, 0.25);
    const ScalingCurve a = oracle_best_of_k(ds.records, make_policy_sampler(policy, 1.0), 32, 9);
    const ScalingCurve b = oracle_best_of_k(ds.records, make_policy_sampler(policy, 1.0), 32, 9);
    CHECK(a.mean_rmse == b.mean_rmse);
    CHECK(a.stderr_rmse == b.stderr_rmse);
}

TEST_CASE("fit_power_law recovers a planted law exactly") {
    ScalingCurve curve;
    for (long k = 1; k <= 1024; k *= 2) {
        curve.k.push_back(static_cast<int>(k));
        curve.mean_rmse.push_back(0.5 * std::pow(static_cast<double>(k), -0.3));
        curve.stderr_rmse.push_back(0.0);
    }
    const PowerLawFit fit = fit_power_law(curve);
    CHECK(fit.a == Approx(0.5).margin(1e-9));
    CHECK(fit.b == Approx(-0.3).margin(1e-9));
    CHECK(fit.r_squared == Approx(1.0).margin(1e-12));
}

TEST_CASE("fit_power_law on a constant curve gives b=0, a=c") {
    ScalingCurve curve;
    for (long k = 1; k <= 64; k *= 2) {
        curve.k.push_back(static_cast<int>(k));
        curve.mean_rmse.push_back(0.37);
        curve.stderr_rmse.push_back(0.0);
    }
    const PowerLawFit fit = fit_power_law(curve);
    CHECK(fit.b == Approx(0.0).margin(1e-12));
    CHECK(fit.a == Approx(0.37).margin(1e-12));
}

TEST_CASE("fit_power_law rejects zero errors and short curves") {
    ScalingCurve curve;
    curve.k = {1, 2, 4};
    curve.mean_rmse = {0.5, 0.0, 0.1};
    curve.stderr_rmse = {0, 0, 0};
    CHECK_THROWS_WITH(fit_power_law(curve), Catch::Matchers::ContainsSubstring("exclude"));

    curve.k = {1, 2};
    curve.mean_rmse = {0.5, 0.4};
    curve.stderr_rmse = {0, 0};
    CHECK_THROWS_AS(fit_power_law(curve), Error);
}

TEST_CASE("fitted slope matches an independent OLS oracle on a noisy curve") {
    const DemoDataset full = generate_demos({}, 30, 6);
    const DemoDataset ds = subsample(full, 100, 2);
    const NoisyPolicy policy = noisy_policy(full, 0.2);
    const ScalingCurve curve =
        oracle_best_of_k(ds.records, make_policy_sampler(policy, 1.0), 256, 17);

    // Spreadsheet-style regression, written independently of fit_power_law.
    const std::size_t n = curve.k.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(static_cast<double>(curve.k[i])) / static_cast<double>(n);
        my += std::log(curve.mean_rmse[i]) / static_cast<double>(n);
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(static_cast<double>(curve.k[i])) - mx;
        sxy += dx * (std::log(curve.mean_rmse[i]) - my);
        sxx += dx * dx;
    }
    const double slope_oracle = sxy / sxx;
    const double intercept_oracle = my - slope_oracle * mx;

    const PowerLawFit fit = fit_power_law(curve);
    CHECK(fit.b == Approx(slope_oracle).epsilon(0.05));
    CHECK(fit.b == Approx(slope_oracle).margin(1e-12));  // same OLS, different algebra
    CHECK(fit.a == Approx(std::exp(intercept_oracle)).margin(1e-12));
    CHECK(fit.b < 0.0);
}

TEST_CASE("relative_reduction") {
    ScalingCurve curve;
    curve.k = {1, 2, 4};
    curve.mean_rmse = {1.0, 0.7, 0.407};
    curve.stderr_rmse = {0, 0, 0};
    CHECK(relative_reduction(curve) == Approx(0.593).margin(1e-12));

    curve.mean_rmse = {0.4, 0.4, 0.4};
    CHECK(relative_reduction(curve) == 0.0);

    curve.mean_rmse = {0.0, 0.0, 0.0};  // expert sampler
    CHECK_THROWS_AS(relative_reduction(curve), Error);

    curve.k = {2, 4};
    curve.mean_rmse = {0.5, 0.4};
    CHECK_THROWS_AS(relative_reduction(curve), Error);
}

TEST_CASE("curve CSV has the documented header") {
    ScalingCurve curve;
    curve.k = {1, 2};
    curve.mean_rmse = {0.5, 0.25};
    curve.stderr_rmse = {0.01, 0.005};
    const std::string csv = curve_to_csv(curve);
    CHECK(csv.rfind("k,mean_rmse,stderr\n", 0) == 0);
    CHECK(csv.find("\n1,0.5") != std::string::npos);
}
