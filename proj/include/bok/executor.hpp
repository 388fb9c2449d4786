#pragma once

// Closed-loop execution: per step, sample a handful of policy actions, fit
// the Gaussian proposal (gripper by majority vote), draw cheap candidates,
// and select one according to the configured mode. Candidate construction
// derives its seeds from (episode seed, step index) only, so all selection
// modes see byte-identical candidates until their trajectories diverge.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bok/common.hpp"
#include "bok/env.hpp"
#include "bok/policy.hpp"
#include "bok/sampling.hpp"
#include "bok/verifier.hpp"

namespace bok {

enum class SelectionMode { verifier, oracle, greedy, random_select, majority_mean };

inline const char* selection_mode_name(SelectionMode m) {
    switch (m) {
        case SelectionMode::verifier: return "verifier";
        case SelectionMode::oracle: return "oracle";
        case SelectionMode::greedy: return "greedy";
        case SelectionMode::random_select: return "random_select";
        case SelectionMode::majority_mean: return "majority_mean";
    }
    return "?";
}

inline SelectionMode selection_mode_from_name(const std::string& name) {
    for (SelectionMode m : {SelectionMode::verifier, SelectionMode::oracle, SelectionMode::greedy,
                            SelectionMode::random_select, SelectionMode::majority_mean}) {
        if (name == selection_mode_name(m)) return m;
    }
    throw Error(Errc::invalid_argument, "unknown selection mode: " + name);
}

struct RolloutConfig {
    int n_hat = 5;          // initial policy samples
    int k_hat = 16;         // proposal samples
    double temperature = 1.0;
    int horizon = 60;
    SelectionMode mode = SelectionMode::verifier;
    bool record_candidates = false;

    void validate(bool has_model) const {
        if (horizon < 1) throw Error(Errc::invalid_argument, "horizon must be >= 1");
        if (k_hat < 1) throw Error(Errc::invalid_argument, "k_hat must be >= 1");
        if (mode != SelectionMode::greedy && n_hat < 2) {
            throw Error(Errc::invalid_argument, "n_hat must be >= 2 for proposal fitting");
        }
        if (mode == SelectionMode::verifier && !has_model) {
            throw Error(Errc::invalid_argument, "verifier mode requires a model");
        }
    }
};

struct RolloutResult {
    bool success = false;
    int steps = 0;
    std::vector<ActionVector> selected;       // one per executed step
    std::vector<double> chosen_rmse;          // RMSE of selected vs expert, per step
    std::vector<CandidateSet> candidates;     // filled when record_candidates is set
};

inline RolloutResult run_episode(ToyEnv& env, const NoisyPolicy& policy,
                                 const VerifierModel* model, const RolloutConfig& cfg,
                                 std::uint64_t seed) {
    cfg.validate(model != nullptr);
    const NormalizationStats& stats = policy.header().stats;

    RolloutResult result;
    for (int t = 0; t < cfg.horizon; ++t) {
        const Observation obs = env.observe();
        const ActionVector expert = policy.expert(obs);
        const std::uint64_t step_seed = derive_seed(seed, static_cast<std::uint64_t>(t));

        ActionVector chosen;
        if (cfg.mode == SelectionMode::greedy) {
            chosen = policy.mode_action(obs);
        } else {
            CandidateSet initial = sample_policy(policy, obs, cfg.temperature, cfg.n_hat,
                                                 derive_seed(step_seed, 0));
            const ProposalDistribution prop = fit_proposal(initial);
            CandidateSet cands = sample_gaussian(prop, cfg.k_hat, derive_seed(step_seed, 1));
            switch (cfg.mode) {
                case SelectionMode::verifier:
                    chosen = select_best(*model, cands, obs);
                    break;
                case SelectionMode::oracle: {
                    std::size_t best = 0;
                    double best_e = rmse(cands.actions[0], expert);
                    for (std::size_t i = 1; i < cands.actions.size(); ++i) {
                        const double e = rmse(cands.actions[i], expert);
                        if (e < best_e) {
                            best_e = e;
                            best = i;
                        }
                    }
                    chosen = cands.actions[best];
                    break;
                }
                case SelectionMode::random_select: {
                    Rng rng(derive_seed(step_seed, 2));
                    chosen = cands.actions[rng.next_below(cands.actions.size())];
                    break;
                }
                case SelectionMode::majority_mean: {
                    for (std::size_t d = 0; d < kContinuousDims; ++d) {
                        chosen.delta[d] = clamp_unit(prop.mean(static_cast<Eigen::Index>(d)));
                    }
                    chosen.gripper = prop.gripper;
                    break;
                }
                case SelectionMode::greedy:
                    break;  // unreachable
            }
            if (cfg.record_candidates) result.candidates.push_back(std::move(cands));
        }

        result.selected.push_back(chosen);
        result.chosen_rmse.push_back(rmse(chosen, expert));
        env.step(denormalize(chosen, stats));
        ++result.steps;
        if (env.success()) {
            result.success = true;
            break;
        }
    }
    return result;
}

struct EvalSummary {
    double success_rate = 0.0;
    double success_stderr = 0.0;
    double mean_step_rmse = 0.0;
    int episodes = 0;
    std::vector<bool> successes;  // per episode, for paired comparisons
};

// Episode e resets to task e % num_tasks with a seed derived from (seed, e);
// running two modes with the same seed therefore pairs their episodes.
inline EvalSummary evaluate(ToyEnv& env, const NoisyPolicy& policy, const VerifierModel* model,
                            const RolloutConfig& cfg, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw Error(Errc::invalid_argument, "episodes must be >= 1");
    EvalSummary summary;
    summary.episodes = episodes;
    double rmse_sum = 0.0;
    std::size_t rmse_count = 0;
    int successes = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        const std::uint64_t ep_seed = derive_seed(seed, static_cast<std::uint64_t>(ep));
        env.reset(ep % env.config().num_tasks, derive_seed(ep_seed, 0xA));
        const RolloutResult r = run_episode(env, policy, model, cfg, derive_seed(ep_seed, 0xB));
        summary.successes.push_back(r.success);
        successes += r.success ? 1 : 0;
        for (double e : r.chosen_rmse) {
            rmse_sum += e;
            ++rmse_count;
        }
    }
    const double n = static_cast<double>(episodes);
    const double p = static_cast<double>(successes) / n;
    summary.success_rate = p;
    summary.success_stderr = episodes > 1 ? std::sqrt(p * (1.0 - p) / (n - 1.0)) : 0.0;
    summary.mean_step_rmse = rmse_count > 0 ? rmse_sum / static_cast<double>(rmse_count) : 0.0;
    return summary;
}

// One-sided exact sign test for "A beats B" on paired binary outcomes:
// among discordant pairs, p = P[Binomial(n_d, 1/2) >= wins_A].
inline double paired_sign_test(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(Errc::invalid_argument, "paired outcomes must have equal nonzero length");
    }
    int discordant = 0;
    int a_wins = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            ++discordant;
            if (a[i]) ++a_wins;
        }
    }
    if (discordant == 0) return 1.0;
    double p = 0.0;
    for (int i = a_wins; i <= discordant; ++i) {
        const double log_term = std::lgamma(discordant + 1.0) - std::lgamma(i + 1.0) -
                                std::lgamma(discordant - i + 1.0) -
                                discordant * std::log(2.0);
        p += std::exp(log_term);
    }
    return p < 1.0 ? p : 1.0;
}

inline std::string rollout_to_jsonl(const RolloutResult& r) {
    std::string out;
    for (std::size_t t = 0; t < r.selected.size(); ++t) {
        out += "{\"t\":" + std::to_string(t) + ",\"action\":";
        detail::append_action17(out, r.selected[t]);
        out += ",\"rmse_to_expert\":" + detail::fmt17(r.chosen_rmse[t]);
        const bool last = t + 1 == r.selected.size();
        out += ",\"success\":";
        out += (last && r.success) ? "true" : "false";
        out += "}\n";
    }
    return out;
}

}  // namespace bok
