#pragma once

// Stochastic policies standing in for an imperfect learned controller.
//
// NoisyPolicy's mode is the expert action plus a fixed bias; sampling adds
// zero-mean Gaussian noise scaled by noise_scale * temperature on the
// continuous dims and flips the gripper with probability
// gripper_flip_prob * temperature. Everything happens in normalized action
// space. Deterministic given (seed, obs, temperature, count); callers wanting
// independent streams must pass independent seeds.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "bok/common.hpp"
#include "bok/dataset.hpp"
#include "bok/env.hpp"

namespace bok {

class StochasticPolicy {
public:
    virtual ~StochasticPolicy() = default;

    // Prefix-stable: sample(obs, T, 4, s) equals the first 4 of
    // sample(obs, T, 8, s). Temperature 0 returns `count` copies of the mode.
    virtual std::vector<ActionVector> sample(const Observation& obs, double temperature,
                                             int count, std::uint64_t seed) const = 0;

    ActionVector mode(const Observation& obs) const { return sample(obs, 0.0, 1, 0)[0]; }
};

struct NoisyPolicyConfig {
    double noise_scale = 0.2;                       // sigma on continuous dims at temperature 1
    std::array<double, kContinuousDims> bias{};     // offset of the mode from the expert
    double gripper_flip_prob = 0.05;                // at temperature 1, capped at 0.5
};

class NoisyPolicy : public StochasticPolicy {
public:
    NoisyPolicy(DatasetHeader header, NoisyPolicyConfig cfg)
        : header_(std::move(header)), cfg_(cfg) {
        if (cfg_.noise_scale < 0.0) {
            throw Error(Errc::invalid_argument, "noise_scale must be >= 0");
        }
        header_.stats.validate();
    }

    // Expert action for this observation, normalized. Exposed because oracle
    // selection and per-step error reporting measure against it.
    ActionVector expert(const Observation& obs) const {
        return normalize(expert_raw_action(obs.features, header_.expert), header_.stats);
    }

    ActionVector mode_action(const Observation& obs) const {
        ActionVector m = expert(obs);
        for (std::size_t i = 0; i < kContinuousDims; ++i) {
            m.delta[i] = clamp_unit(m.delta[i] + cfg_.bias[i]);
        }
        return m;
    }

    std::vector<ActionVector> sample(const Observation& obs, double temperature, int count,
                                     std::uint64_t seed) const override {
        if (count < 1) throw Error(Errc::invalid_argument, "count must be >= 1");
        if (temperature < 0.0) throw Error(Errc::invalid_argument, "temperature must be >= 0");
        const ActionVector m = mode_action(obs);
        std::vector<ActionVector> out(static_cast<std::size_t>(count), m);
        if (temperature == 0.0) return out;

        const double sigma = cfg_.noise_scale * temperature;
        const double p_flip = std::min(0.5, cfg_.gripper_flip_prob * temperature);
        Rng rng(seed);
        for (auto& a : out) {
            for (std::size_t i = 0; i < kContinuousDims; ++i) {
                a.delta[i] = clamp_unit(m.delta[i] + sigma * rng.gaussian());
            }
            if (rng.uniform() < p_flip) a.gripper = 1 - a.gripper;
        }
        return out;
    }

    const DatasetHeader& header() const { return header_; }
    const NoisyPolicyConfig& config() const { return cfg_; }

private:
    DatasetHeader header_;
    NoisyPolicyConfig cfg_;
};

inline NoisyPolicy noisy_policy(const DemoDataset& dataset, double noise_scale,
                                const std::array<double, kContinuousDims>& bias = {},
                                double gripper_flip_prob = 0.05) {
    NoisyPolicyConfig cfg;
    cfg.noise_scale = noise_scale;
    cfg.bias = bias;
    cfg.gripper_flip_prob = gripper_flip_prob;
    return NoisyPolicy(dataset.header, cfg);
}

}  // namespace bok
