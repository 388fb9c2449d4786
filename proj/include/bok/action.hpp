#pragma once

// Action representation: 6 continuous pose deltas + binary gripper, with
// per-dimension affine normalization to [-1, 1], 256-bin uniform
// tokenization, and the RMSE metric used by every comparison in the toolkit.

#include <array>
#include <cmath>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "bok/common.hpp"

namespace bok {

inline constexpr int kContinuousDims = 6;
inline constexpr int kActionDims = 7;
inline constexpr int kTokenBins = 256;

struct ActionVector {
    // dx, dy, dz, du, dv, dw
    std::array<double, kContinuousDims> delta{};
    int gripper = 0;  // 0 = closed, 1 = open

    double dx() const { return delta[0]; }
    double dy() const { return delta[1]; }
    double dz() const { return delta[2]; }

    // Unified 7-dim view; index 6 is the gripper as a 0/1 coordinate.
    double component(int i) const {
        return i < kContinuousDims ? delta[static_cast<std::size_t>(i)]
                                   : static_cast<double>(gripper);
    }

    bool operator==(const ActionVector& o) const {
        return delta == o.delta && gripper == o.gripper;
    }
};

struct NormalizationStats {
    std::array<double, kContinuousDims> low{};
    std::array<double, kContinuousDims> high{};

    void validate() const {
        for (int i = 0; i < kContinuousDims; ++i) {
            if (!(low[static_cast<std::size_t>(i)] < high[static_cast<std::size_t>(i)])) {
                throw Error(Errc::malformed_header,
                            "normalization stats: low[" + std::to_string(i) +
                                "] must be < high[" + std::to_string(i) + "]");
            }
        }
    }
};

struct TokenizedAction {
    std::array<int, kActionDims> tokens{};  // each in [0, 255]; gripper token in {0, 255}
};

inline ActionVector normalize(const ActionVector& raw, const NormalizationStats& stats) {
    ActionVector out;
    for (std::size_t i = 0; i < kContinuousDims; ++i) {
        const double lo = stats.low[i];
        const double hi = stats.high[i];
        out.delta[i] = clamp_unit(2.0 * (raw.delta[i] - lo) / (hi - lo) - 1.0);
    }
    out.gripper = raw.gripper;
    return out;
}

// Inverse of normalize on [-1, 1]; needed to hand selected actions back to an
// environment operating in raw units.
inline ActionVector denormalize(const ActionVector& a, const NormalizationStats& stats) {
    ActionVector out;
    for (std::size_t i = 0; i < kContinuousDims; ++i) {
        const double lo = stats.low[i];
        const double hi = stats.high[i];
        out.delta[i] = lo + (clamp_unit(a.delta[i]) + 1.0) * 0.5 * (hi - lo);
    }
    out.gripper = a.gripper;
    return out;
}

// Root mean squared difference over all 7 dims, gripper included as 0/1.
// Inputs are expected to be normalized.
inline double rmse(const ActionVector& a, const ActionVector& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < kContinuousDims; ++i) {
        const double d = a.delta[i] - b.delta[i];
        sum += d * d;
    }
    const double dg = static_cast<double>(a.gripper - b.gripper);
    sum += dg * dg;
    return std::sqrt(sum / kActionDims);
}

// Token i covers [-1 + 2i/256, -1 + 2(i+1)/256); +1.0 lands in the top bin.
inline int value_to_token(double x) {
    const int t = static_cast<int>(std::floor((clamp_unit(x) + 1.0) * (kTokenBins / 2.0)));
    return t < 0 ? 0 : (t > kTokenBins - 1 ? kTokenBins - 1 : t);
}

inline double token_to_value(int token) {
    return -1.0 + (2.0 * token + 1.0) / kTokenBins;  // bin midpoint
}

inline TokenizedAction tokenize(const ActionVector& a) {
    TokenizedAction t;
    for (std::size_t i = 0; i < kContinuousDims; ++i) {
        t.tokens[i] = value_to_token(a.delta[i]);
    }
    t.tokens[kContinuousDims] = a.gripper == 1 ? kTokenBins - 1 : 0;
    return t;
}

inline ActionVector detokenize(const TokenizedAction& t) {
    ActionVector a;
    for (std::size_t i = 0; i < kContinuousDims; ++i) {
        a.delta[i] = token_to_value(t.tokens[i]);
    }
    a.gripper = t.tokens[kContinuousDims] >= kTokenBins / 2 ? 1 : 0;
    return a;
}

inline nlohmann::json stats_to_json(const NormalizationStats& stats) {
    return nlohmann::json{{"low", stats.low}, {"high", stats.high}};
}

inline NormalizationStats stats_from_json(const nlohmann::json& j) {
    NormalizationStats stats;
    if (!j.is_object() || !j.contains("low") || !j.contains("high") ||
        !j["low"].is_array() || !j["high"].is_array() ||
        j["low"].size() != kContinuousDims || j["high"].size() != kContinuousDims) {
        throw Error(Errc::malformed_header, "stats: expected {\"low\":[6],\"high\":[6]}");
    }
    for (std::size_t i = 0; i < kContinuousDims; ++i) {
        stats.low[i] = j["low"][i].get<double>();
        stats.high[i] = j["high"][i].get<double>();
    }
    stats.validate();
    return stats;
}

}  // namespace bok
