#pragma once

// Toy manipulation environment with an analytic expert.
//
// The end effector is a 3-D position plus three independent rotation angles
// and a binary gripper. Each task fixes a goal pose; the expert is a
// proportional controller toward it that closes the gripper inside the grasp
// radius. Ground-truth actions are therefore available at every state, which
// the preference-labeling pipeline requires.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bok/common.hpp"
#include "bok/dataset.hpp"

namespace bok {

inline constexpr int kFeatureLen = 16;

struct ToyEnvConfig {
    int num_tasks = 4;
    std::uint64_t goal_seed = 0;  // goal poses are a pure function of this
    ExpertParams expert;
    double success_radius = 0.05;
    int step_limit = 60;
    double start_pos_range = 0.8;
    double start_ori_range = 0.8;
};

// Expert controller, written against observation features so a policy holding
// only a dataset header can reproduce it. Feature layout (see ToyEnv::observe):
//   [0:3) goal_pos - pos, [3:6) goal_ori - ori, [6] gripper,
//   [7] distance to goal, [8:11) pos, [11:14) ori, [14] target gripper, [15] pad
inline ActionVector expert_raw_action(const std::vector<double>& features,
                                      const ExpertParams& p) {
    auto clamp_mag = [](double v, double m) { return v < -m ? -m : (v > m ? m : v); };
    ActionVector a;
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        a.delta[i] = clamp_mag(p.kp * features[i], p.max_step);
        a.delta[i + 3] = clamp_mag(p.kr * features[i + 3], p.max_rot);
        dist_sq += features[i] * features[i];
    }
    a.gripper = std::sqrt(dist_sq) <= p.grasp_radius ? 0 : 1;
    return a;
}

class ToyEnv {
public:
    explicit ToyEnv(ToyEnvConfig cfg = {}) : cfg_(cfg) {
        if (cfg_.num_tasks < 1) throw Error(Errc::invalid_argument, "num_tasks must be >= 1");
        goal_pos_.resize(static_cast<std::size_t>(cfg_.num_tasks));
        goal_ori_.resize(static_cast<std::size_t>(cfg_.num_tasks));
        for (int t = 0; t < cfg_.num_tasks; ++t) {
            Rng rng(derive_seed(cfg_.goal_seed, 0x60A1u + static_cast<std::uint64_t>(t)));
            for (auto& c : goal_pos_[static_cast<std::size_t>(t)]) c = rng.uniform(-0.6, 0.6);
            for (auto& c : goal_ori_[static_cast<std::size_t>(t)]) c = rng.uniform(-0.5, 0.5);
        }
        reset(0, 0);
    }

    void reset(int task, std::uint64_t seed) {
        check_task(task);
        task_ = task;
        Rng rng(derive_seed(seed, 0x5EED));
        for (auto& c : pos_) c = rng.uniform(-cfg_.start_pos_range, cfg_.start_pos_range);
        for (auto& c : ori_) c = rng.uniform(-cfg_.start_ori_range, cfg_.start_ori_range);
        gripper_ = 1;
        steps_ = 0;
    }

    void reset_to(int task, const std::array<double, 3>& pos, const std::array<double, 3>& ori,
                  int gripper) {
        check_task(task);
        task_ = task;
        pos_ = pos;
        ori_ = ori;
        gripper_ = gripper;
        steps_ = 0;
    }

    Observation observe() const {
        Observation obs;
        obs.features.assign(kFeatureLen, 0.0);
        const auto& gp = goal_pos_[static_cast<std::size_t>(task_)];
        const auto& go = goal_ori_[static_cast<std::size_t>(task_)];
        for (std::size_t i = 0; i < 3; ++i) {
            obs.features[i] = gp[i] - pos_[i];
            obs.features[i + 3] = go[i] - ori_[i];
            obs.features[i + 8] = pos_[i];
            obs.features[i + 11] = ori_[i];
        }
        obs.features[6] = static_cast<double>(gripper_);
        obs.features[7] = distance_to_goal();
        obs.features[14] = 0.0;  // target gripper: grasp at goal
        obs.instruction_id = task_;
        return obs;
    }

    ActionVector expert_raw() const { return expert_raw_action(observe().features, cfg_.expert); }

    void step(const ActionVector& raw) {
        for (std::size_t i = 0; i < 3; ++i) {
            pos_[i] += raw.delta[i];
            ori_[i] += raw.delta[i + 3];
        }
        gripper_ = raw.gripper;
        ++steps_;
    }

    bool success() const { return distance_to_goal() <= cfg_.success_radius && gripper_ == 0; }

    double distance_to_goal() const {
        const auto& gp = goal_pos_[static_cast<std::size_t>(task_)];
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double d = gp[i] - pos_[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

    int steps() const { return steps_; }
    int task() const { return task_; }
    const ToyEnvConfig& config() const { return cfg_; }
    const std::array<double, 3>& goal_pos(int task) const {
        return goal_pos_[static_cast<std::size_t>(task)];
    }
    const std::array<double, 3>& position() const { return pos_; }
    const std::array<double, 3>& orientation() const { return ori_; }
    int gripper() const { return gripper_; }

private:
    void check_task(int task) const {
        if (task < 0 || task >= cfg_.num_tasks) {
            throw Error(Errc::invalid_argument, "task index out of range");
        }
    }

    ToyEnvConfig cfg_;
    std::vector<std::array<double, 3>> goal_pos_;
    std::vector<std::array<double, 3>> goal_ori_;
    std::array<double, 3> pos_{};
    std::array<double, 3> ori_{};
    int gripper_ = 1;
    int task_ = 0;
    int steps_ = 0;
};

namespace detail {

// Linearly interpolated quantile, q in [0, 1]; values need not be sorted.
inline double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

}  // namespace detail

// Per-dimension 1st/99th percentile bounds over raw actions; degenerate
// dimensions get widened so low < high always holds.
inline NormalizationStats compute_stats(const std::vector<ActionVector>& raw_actions) {
    if (raw_actions.empty()) throw Error(Errc::invalid_argument, "no actions for stats");
    NormalizationStats stats;
    std::vector<double> column(raw_actions.size());
    for (std::size_t d = 0; d < kContinuousDims; ++d) {
        for (std::size_t i = 0; i < raw_actions.size(); ++i) column[i] = raw_actions[i].delta[d];
        stats.low[d] = detail::quantile(column, 0.01);
        stats.high[d] = detail::quantile(column, 0.99);
        if (stats.high[d] - stats.low[d] < 1e-9) {
            const double mid = 0.5 * (stats.low[d] + stats.high[d]);
            stats.low[d] = mid - 5e-4;
            stats.high[d] = mid + 5e-4;
        }
    }
    return stats;
}

struct ExpertStep {
    Observation obs;
    ActionVector raw_action;
};

// Rolls the scripted expert from the env's current state until success.
// Fails if the step limit is exceeded, which signals a broken config.
inline std::vector<ExpertStep> expert_rollout(ToyEnv& env) {
    std::vector<ExpertStep> steps;
    for (int t = 0;; ++t) {
        if (t > env.config().step_limit) {
            throw Error(Errc::invalid_argument,
                        "expert exceeded step limit; environment config is inconsistent");
        }
        const ActionVector a = env.expert_raw();
        steps.push_back({env.observe(), a});
        env.step(a);
        if (env.success()) break;
    }
    return steps;
}

// Scripted-expert rollouts; actions are recorded raw, then normalized under
// stats computed from the full collection.
inline DemoDataset generate_demos(const ToyEnvConfig& cfg, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw Error(Errc::invalid_argument, "episodes must be >= 1");
    ToyEnv env(cfg);
    std::vector<Observation> observations;
    std::vector<ActionVector> raw_actions;

    for (int ep = 0; ep < episodes; ++ep) {
        env.reset(ep % cfg.num_tasks, derive_seed(seed, static_cast<std::uint64_t>(ep)));
        for (ExpertStep& s : expert_rollout(env)) {
            observations.push_back(std::move(s.obs));
            raw_actions.push_back(s.raw_action);
        }
    }

    DemoDataset ds;
    ds.header.feature_len = kFeatureLen;
    for (int t = 0; t < cfg.num_tasks; ++t) ds.header.tasks.push_back("task-" + std::to_string(t));
    ds.header.stats = compute_stats(raw_actions);
    ds.header.expert = cfg.expert;
    ds.records.reserve(raw_actions.size());
    for (std::size_t i = 0; i < raw_actions.size(); ++i) {
        ds.records.push_back({std::move(observations[i]), normalize(raw_actions[i], ds.header.stats)});
    }
    return ds;
}

}  // namespace bok
