#pragma once

// Synthetic action-comparison pipeline: sample N candidates per tuple,
// cluster them to K representatives (k-means++ seeded k-means with a medoid
// snap so every representative is a genuinely sampled action), then label all
// C(K,2) pairs by RMSE against the ground-truth action.
//
// Preference file format, one ComparisonBatch per line:
//   {"obs":[...],"instruction":int,"gt":[7],"pairs":[{"w":[7],"l":[7],"delta":f},...]}

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
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

struct PreferencePair {
    ActionVector winner;
    ActionVector loser;
    ActionVector ground_truth;
    Observation obs;
    double delta_star = 0.0;  // |rmse(winner, gt) - rmse(loser, gt)|
};

struct ComparisonBatch {
    Observation obs;
    ActionVector ground_truth;
    struct Pair {
        ActionVector winner;
        ActionVector loser;
        double delta_star = 0.0;
    };
    std::vector<Pair> pairs;  // C(K,2) for K representatives
};

namespace detail {

inline double dist_sq7(const ActionVector& a, const std::array<double, 7>& c) {
    double s = 0.0;
    for (int i = 0; i < kActionDims; ++i) {
        const double d = a.component(i) - c[static_cast<std::size_t>(i)];
        s += d * d;
    }
    return s;
}

// Cumulative-weight draw; weights must be nonnegative with positive total.
inline std::size_t weighted_pick(const std::vector<double>& weights, double total, Rng& rng) {
    const double r = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (r < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace detail

// k-means over the 7-dim action vectors (gripper as a 0/1 coordinate),
// k-means++ seeding, at most 50 Lloyd iterations. Each centroid is snapped to
// the nearest candidate and duplicates are removed, so the result is a subset
// of the input of size <= k.
inline std::vector<ActionVector> cluster_candidates(const CandidateSet& candidates, int k,
                                                    std::uint64_t seed) {
    const std::size_t n = candidates.actions.size();
    if (k < 2) throw Error(Errc::invalid_argument, "k must be >= 2");
    if (n < static_cast<std::size_t>(k)) {
        throw Error(Errc::invalid_argument, "need at least k candidates to cluster");
    }
    const auto& pts = candidates.actions;
    Rng rng(seed);

    // k-means++ seeding
    std::vector<std::array<double, 7>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    auto as_array = [](const ActionVector& a) {
        std::array<double, 7> c;
        for (int i = 0; i < kActionDims; ++i) c[static_cast<std::size_t>(i)] = a.component(i);
        return c;
    };
    centroids.push_back(as_array(pts[rng.next_below(n)]));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = detail::dist_sq7(pts[i], centroids.back());
            if (d < min_dist[i]) min_dist[i] = d;
            total += min_dist[i];
        }
        std::size_t pick;
        if (total > 0.0) {
            pick = detail::weighted_pick(min_dist, total, rng);
        } else {
            pick = rng.next_below(n);  // all points identical
        }
        centroids.push_back(as_array(pts[pick]));
    }

    // Lloyd iterations
    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 50; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = detail::dist_sq7(pts[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = detail::dist_sq7(pts[i], centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<std::array<double, 7>> sums(static_cast<std::size_t>(k),
                                                std::array<double, 7>{});
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(assign[i]);
            for (int d = 0; d < kActionDims; ++d) {
                sums[idx][static_cast<std::size_t>(d)] += pts[i].component(d);
            }
            ++counts[idx];
        }
        for (int c = 0; c < k; ++c) {
            const auto idx = static_cast<std::size_t>(c);
            if (counts[idx] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t d = 0; d < kActionDims; ++d) {
                centroids[idx][d] = sums[idx][d] / counts[idx];
            }
        }
    }

    // Medoid snap + dedup, preserving centroid order.
    std::vector<std::size_t> medoid_idx;
    for (int c = 0; c < k; ++c) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = detail::dist_sq7(pts[i], centroids[static_cast<std::size_t>(c)]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        bool dup = false;
        for (std::size_t seen : medoid_idx) {
            if (seen == best || pts[seen] == pts[best]) {
                dup = true;
                break;
            }
        }
        if (!dup) medoid_idx.push_back(best);
    }
    std::vector<ActionVector> out;
    out.reserve(medoid_idx.size());
    for (std::size_t i : medoid_idx) out.push_back(pts[i]);
    return out;
}

// Labels every unordered pair by the RMSE rule; ties go to the
// smaller-indexed representative so output is deterministic.
inline ComparisonBatch build_pairs(const std::vector<ActionVector>& representatives,
                                   const ActionVector& ground_truth, const Observation& obs) {
    if (representatives.size() < 2) {
        throw Error(Errc::invalid_argument, "need at least 2 representatives to build pairs");
    }
    ComparisonBatch batch;
    batch.obs = obs;
    batch.ground_truth = ground_truth;
    std::vector<double> err(representatives.size());
    for (std::size_t i = 0; i < representatives.size(); ++i) {
        err[i] = rmse(representatives[i], ground_truth);
    }
    for (std::size_t i = 0; i < representatives.size(); ++i) {
        for (std::size_t j = i + 1; j < representatives.size(); ++j) {
            ComparisonBatch::Pair p;
            if (err[i] <= err[j]) {
                p.winner = representatives[i];
                p.loser = representatives[j];
            } else {
                p.winner = representatives[j];
                p.loser = representatives[i];
            }
            p.delta_star = std::abs(err[i] - err[j]);
            batch.pairs.push_back(p);
        }
    }
    return batch;
}

namespace detail {

inline void append_action17(std::string& out, const ActionVector& a) {
    out += '[';
    for (int i = 0; i < kActionDims; ++i) {
        if (i) out += ',';
        out += fmt17(a.component(i));
    }
    out += ']';
}

inline ActionVector action_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != kActionDims) {
        throw Error(Errc::parse_error, "action must be a 7-element array");
    }
    ActionVector a;
    for (std::size_t i = 0; i < kContinuousDims; ++i) a.delta[i] = j[i].get<double>();
    const double g = j[kContinuousDims].get<double>();
    if (g != 0.0 && g != 1.0) throw Error(Errc::action_not_normalized, "gripper must be 0 or 1");
    a.gripper = static_cast<int>(g);
    return a;
}

}  // namespace detail

inline std::string batch_to_line(const ComparisonBatch& b) {
    std::string line = "{\"obs\":";
    detail::append_array17(line, b.obs.features.data(), b.obs.features.size());
    line += ",\"instruction\":" + std::to_string(b.obs.instruction_id) + ",\"gt\":";
    detail::append_action17(line, b.ground_truth);
    line += ",\"pairs\":[";
    for (std::size_t i = 0; i < b.pairs.size(); ++i) {
        if (i) line += ',';
        line += "{\"w\":";
        detail::append_action17(line, b.pairs[i].winner);
        line += ",\"l\":";
        detail::append_action17(line, b.pairs[i].loser);
        line += ",\"delta\":" + detail::fmt17(b.pairs[i].delta_star) + "}";
    }
    line += "]}";
    return line;
}

inline ComparisonBatch batch_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("obs") || !j.contains("instruction") ||
        !j.contains("gt") || !j.contains("pairs")) {
        throw Error(Errc::parse_error, "comparison batch missing required fields");
    }
    ComparisonBatch b;
    b.obs.features = j["obs"].get<std::vector<double>>();
    b.obs.instruction_id = j["instruction"].get<int>();
    b.ground_truth = detail::action_from_json(j["gt"]);
    for (const auto& jp : j["pairs"]) {
        ComparisonBatch::Pair p;
        p.winner = detail::action_from_json(jp.at("w"));
        p.loser = detail::action_from_json(jp.at("l"));
        p.delta_star = jp.at("delta").get<double>();
        b.pairs.push_back(p);
    }
    return b;
}

inline std::vector<ComparisonBatch> load_preferences(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open: " + path);
    std::vector<ComparisonBatch> batches;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            try {
                batches.push_back(batch_from_json(nlohmann::json::parse(line)));
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::parse_error, "parse error at byte offset " +
                                                   std::to_string(offset) + ": " + e.what());
            }
        }
        offset += line.size() + 1;
    }
    if (batches.empty()) throw Error(Errc::parse_error, "preference file has no batches");
    return batches;
}

struct PreferenceSummary {
    std::size_t tuples_processed = 0;
    std::size_t tuples_skipped = 0;  // fewer than 2 representatives after dedup
    std::size_t batches_written = 0;
    std::size_t pairs_written = 0;
};

// Streams one ComparisonBatch per tuple to out_path. On any I/O failure the
// partial file is removed before the error propagates.
inline PreferenceSummary generate_preference_dataset(const std::vector<DemoRecord>& tuples,
                                                     const StochasticPolicy& policy, int n, int k,
                                                     double temperature, std::uint64_t seed,
                                                     const std::string& out_path) {
    if (n < k || k < 2) throw Error(Errc::invalid_argument, "need n >= k >= 2");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot open for writing: " + out_path);

    PreferenceSummary summary;
    try {
        for (std::size_t i = 0; i < tuples.size(); ++i) {
            const std::uint64_t tuple_seed = derive_seed(seed, i);
            CandidateSet cands =
                sample_policy(policy, tuples[i].obs, temperature, n, derive_seed(tuple_seed, 0));
            const std::vector<ActionVector> reps =
                cluster_candidates(cands, k, derive_seed(tuple_seed, 1));
            ++summary.tuples_processed;
            if (reps.size() < 2) {
                ++summary.tuples_skipped;
                continue;
            }
            const ComparisonBatch batch = build_pairs(reps, tuples[i].action, tuples[i].obs);
            out << batch_to_line(batch) << '\n';
            if (!out) throw Error(Errc::io_error, "write failed: " + out_path);
            ++summary.batches_written;
            summary.pairs_written += batch.pairs.size();
        }
        out.flush();
        if (!out) throw Error(Errc::io_error, "flush failed: " + out_path);
    } catch (...) {
        out.close();
        std::remove(out_path.c_str());
        throw;
    }
    return summary;
}

}  // namespace bok
