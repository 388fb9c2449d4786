#pragma once

// Analytical latency model for the two candidate-generation strategies:
//   gaussian:         policy(n_hat) + k_hat * proposal_cost + verifier(k_hat)
//   policy_sampling:  policy(k_hat) + verifier(k_hat)
// Latency tables are measured on powers-of-two batch sizes; queries between
// grid points interpolate log-linearly and queries outside the grid are an
// error rather than an extrapolation.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bok/common.hpp"
#include "bok/dataset.hpp"
#include "bok/scaling.hpp"

namespace bok {

struct LatencyTable {
    std::vector<int> batch;      // powers of two, strictly increasing
    std::vector<double> seconds;  // positive, non-decreasing

    void validate() const {
        if (batch.empty() || batch.size() != seconds.size()) {
            throw Error(Errc::invalid_argument, "latency table must be nonempty and aligned");
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const int b = batch[i];
            if (b < 1 || (b & (b - 1)) != 0) {
                throw Error(Errc::invalid_argument, "batch sizes must be powers of two");
            }
            if (i > 0 && batch[i] <= batch[i - 1]) {
                throw Error(Errc::invalid_argument, "batch sizes must be strictly increasing");
            }
            if (!(seconds[i] > 0.0)) {
                throw Error(Errc::invalid_argument, "latencies must be positive");
            }
            if (i > 0 && seconds[i] < seconds[i - 1]) {
                throw Error(Errc::invalid_argument, "latencies must be non-decreasing");
            }
        }
    }

    // Exact on grid points, log-linear in between.
    double lookup(int n) const {
        if (n < batch.front() || n > batch.back()) {
            throw Error(Errc::out_of_domain,
                        "batch size " + std::to_string(n) + " outside table domain [" +
                            std::to_string(batch.front()) + ", " + std::to_string(batch.back()) +
                            "]");
        }
        std::size_t i = 0;
        while (batch[i + 1] < n) ++i;
        if (batch[i] == n) return seconds[i];
        if (batch[i + 1] == n) return seconds[i + 1];
        const double t = (std::log(static_cast<double>(n)) - std::log(batch[i])) /
                         (std::log(batch[i + 1]) - std::log(batch[i]));
        return std::exp((1.0 - t) * std::log(seconds[i]) + t * std::log(seconds[i + 1]));
    }
};

struct CostProfile {
    LatencyTable policy;        // serving-engine policy inference
    LatencyTable policy_naive;  // unbatched reference implementation
    LatencyTable verifier;
    double proposal_cost_per_sample = 1e-5;  // drawing from the fitted Gaussian

    void validate() const {
        policy.validate();
        policy_naive.validate();
        verifier.validate();
        if (!(proposal_cost_per_sample >= 0.0)) {
            throw Error(Errc::invalid_argument, "proposal cost must be >= 0");
        }
    }
};

// Measured H100 latencies across batch sizes for the reference policy (with
// and without the batching serving engine) and the 7B action verifier.
inline CostProfile default_profile() {
    CostProfile p;
    p.policy.batch = {1, 2, 4, 8, 16, 32, 64, 128};
    p.policy.seconds = {0.13, 0.21, 0.28, 0.42, 0.72, 1.3, 2.4, 4.6};
    p.policy_naive.batch = p.policy.batch;
    p.policy_naive.seconds = {0.15, 0.31, 0.61, 1.2, 2.4, 4.9, 9.8, 20.0};
    p.verifier.batch = p.policy.batch;
    p.verifier.seconds = {0.092, 0.099, 0.13, 0.20, 0.35, 0.65, 1.3, 2.5};
    p.proposal_cost_per_sample = 1e-5;
    return p;
}

enum class Strategy { gaussian, policy_sampling };

inline const char* strategy_name(Strategy s) {
    return s == Strategy::gaussian ? "gaussian" : "policy_sampling";
}

inline Strategy strategy_from_name(const std::string& name) {
    if (name == "gaussian") return Strategy::gaussian;
    if (name == "policy_sampling") return Strategy::policy_sampling;
    throw Error(Errc::invalid_argument, "unknown strategy: " + name);
}

inline double latency(const CostProfile& profile, Strategy strategy, int n_hat, int k_hat) {
    if (k_hat < 1) throw Error(Errc::invalid_argument, "k_hat must be >= 1");
    if (strategy == Strategy::gaussian) {
        if (n_hat < 1) throw Error(Errc::invalid_argument, "n_hat must be >= 1");
        return profile.policy.lookup(n_hat) + k_hat * profile.proposal_cost_per_sample +
               profile.verifier.lookup(k_hat);
    }
    return profile.policy.lookup(k_hat) + profile.verifier.lookup(k_hat);
}

struct BudgetPoint {
    int k = 0;
    double latency_seconds = 0.0;
    double mean_rmse = 0.0;
};

struct BudgetCurve {
    std::vector<BudgetPoint> points;
    Strategy strategy = Strategy::gaussian;
};

// Joins an oracle error curve with the latency model: each k maps to
// (latency at k candidates, error at k). Every curve k must lie inside the
// latency-table domain.
inline BudgetCurve error_vs_budget(const CostProfile& profile, const ScalingCurve& curve,
                                   Strategy strategy, int n_hat = 5) {
    if (curve.k.empty()) throw Error(Errc::out_of_domain, "empty scaling curve");
    BudgetCurve out;
    out.strategy = strategy;
    for (std::size_t i = 0; i < curve.k.size(); ++i) {
        const int k = curve.k[i];
        if (k < profile.verifier.batch.front() || k > profile.verifier.batch.back()) {
            throw Error(Errc::out_of_domain,
                        "curve k=" + std::to_string(k) + " outside latency-table domain");
        }
        out.points.push_back({k, latency(profile, strategy, n_hat, k), curve.mean_rmse[i]});
    }
    return out;
}

inline std::string budget_to_csv(const BudgetCurve& curve) {
    std::string out = "k,latency_seconds,mean_rmse,strategy\n";
    for (const auto& p : curve.points) {
        out += std::to_string(p.k) + "," + detail::fmt17(p.latency_seconds) + "," +
               detail::fmt17(p.mean_rmse) + "," + strategy_name(curve.strategy) + "\n";
    }
    return out;
}

inline nlohmann::json table_to_json(const LatencyTable& t) {
    return nlohmann::json{{"batch", t.batch}, {"seconds", t.seconds}};
}

inline LatencyTable table_from_json(const nlohmann::json& j) {
    LatencyTable t;
    t.batch = j.at("batch").get<std::vector<int>>();
    t.seconds = j.at("seconds").get<std::vector<double>>();
    t.validate();
    return t;
}

inline nlohmann::json profile_to_json(const CostProfile& p) {
    return nlohmann::json{{"policy", table_to_json(p.policy)},
                          {"policy_naive", table_to_json(p.policy_naive)},
                          {"verifier", table_to_json(p.verifier)},
                          {"proposal_cost_per_sample", p.proposal_cost_per_sample}};
}

inline CostProfile profile_from_json(const nlohmann::json& j) {
    CostProfile p;
    p.policy = table_from_json(j.at("policy"));
    p.policy_naive = j.contains("policy_naive") ? table_from_json(j.at("policy_naive")) : p.policy;
    p.verifier = table_from_json(j.at("verifier"));
    p.proposal_cost_per_sample = j.value("proposal_cost_per_sample", 1e-5);
    p.validate();
    return p;
}

}  // namespace bok
