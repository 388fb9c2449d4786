#pragma once

// Trainable action verifier: a two-layer tanh MLP scoring
// concat(observation features, instruction one-hot, 7-dim action).
//
// Two objectives share the model:
//  - bt_margin: -log sigmoid(R(w) - R(l) - alpha * (delta* - delta_hat)^2)
//    with delta_hat = |R(w) - R(l)|; higher score = better action.
//  - rmse_regression: (R(a) - rmse(a, gt))^2; LOWER score = better action.
// The selection direction is carried by the model config so select_best
// cannot be pointed the wrong way.
//
// Parameters live in one flat vector (w1 row blocks, b1, w2, b2) so gradient
// checking and SGD updates are plain vector arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bok/common.hpp"
#include "bok/preference.hpp"
#include "bok/sampling.hpp"

namespace bok {

enum class Objective { bt_margin, rmse_regression };

inline const char* objective_name(Objective o) {
    return o == Objective::bt_margin ? "bt_margin" : "rmse_regression";
}

inline Objective objective_from_name(const std::string& name) {
    if (name == "bt_margin") return Objective::bt_margin;
    if (name == "rmse_regression") return Objective::rmse_regression;
    throw Error(Errc::invalid_argument, "unknown objective: " + name);
}

struct VerifierConfig {
    int feature_len = 16;
    int num_instructions = 4;
    int hidden = 64;
    Objective objective = Objective::bt_margin;
};

struct TrainConfig {
    double alpha = 0.1;            // margin weight
    double learning_rate = 1e-2;
    int batches_per_update = 1;    // comparison batches per SGD step
    int epochs = 1;
    std::uint64_t seed = 0;
};

class VerifierModel {
public:
    VerifierModel(VerifierConfig cfg, std::uint64_t seed) : cfg_(cfg) {
        check_config(cfg_);
        params_ = Eigen::VectorXd(num_params());
        Rng rng(derive_seed(seed, 0xF1E1D));
        const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim()));
        const double s2 = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden));
        const int hd = cfg_.hidden * input_dim();
        for (int i = 0; i < hd; ++i) params_(i) = s1 * rng.gaussian();
        for (int i = hd; i < hd + cfg_.hidden; ++i) params_(i) = 0.0;  // b1
        for (int i = hd + cfg_.hidden; i < hd + 2 * cfg_.hidden; ++i) {
            params_(i) = s2 * rng.gaussian();  // w2
        }
        params_(num_params() - 1) = 0.0;  // b2
    }

    static VerifierModel zeros(VerifierConfig cfg) {
        VerifierModel m(cfg, 0);
        m.params_.setZero();
        return m;
    }

    int input_dim() const { return cfg_.feature_len + cfg_.num_instructions + kActionDims; }
    int num_params() const { return cfg_.hidden * input_dim() + 2 * cfg_.hidden + 1; }

    const Eigen::VectorXd& weights() const { return params_; }
    void set_weights(const Eigen::VectorXd& w) {
        if (w.size() != params_.size()) {
            throw Error(Errc::invalid_argument, "weight vector size mismatch");
        }
        params_ = w;
    }

    Eigen::VectorXd encode(const Observation& obs, const ActionVector& action) const {
        if (static_cast<int>(obs.features.size()) != cfg_.feature_len) {
            throw Error(Errc::invalid_argument, "observation feature length mismatch");
        }
        if (obs.instruction_id < 0 || obs.instruction_id >= cfg_.num_instructions) {
            throw Error(Errc::invalid_argument, "instruction id out of range for model");
        }
        Eigen::VectorXd x = Eigen::VectorXd::Zero(input_dim());
        for (int i = 0; i < cfg_.feature_len; ++i) x(i) = obs.features[static_cast<std::size_t>(i)];
        x(cfg_.feature_len + obs.instruction_id) = 1.0;
        for (int i = 0; i < kActionDims; ++i) {
            x(cfg_.feature_len + cfg_.num_instructions + i) = action.component(i);
        }
        return x;
    }

    double score_encoded(const Eigen::VectorXd& x) const {
        const auto [w1, b1, w2, b2] = views();
        return w2.dot(((w1 * x) + b1).array().tanh().matrix()) + b2;
    }

    double score(const Observation& obs, const ActionVector& action) const {
        return score_encoded(encode(obs, action));
    }

    // Accumulates g * d(score)/d(params) at input x into grad.
    void add_score_gradient(const Eigen::VectorXd& x, double g, Eigen::VectorXd& grad) const {
        const auto [w1, b1, w2, b2] = views();
        const Eigen::VectorXd h = ((w1 * x) + b1).array().tanh().matrix();
        const Eigen::VectorXd pre = (g * w2.array() * (1.0 - h.array().square())).matrix();

        const int hd = cfg_.hidden * input_dim();
        Eigen::Map<Eigen::MatrixXd> g_w1(grad.data(), cfg_.hidden, input_dim());
        g_w1.noalias() += pre * x.transpose();
        grad.segment(hd, cfg_.hidden) += pre;
        grad.segment(hd + cfg_.hidden, cfg_.hidden) += g * h;
        grad(num_params() - 1) += g;
    }

    const VerifierConfig& config() const { return cfg_; }

    nlohmann::json to_json() const {
        std::vector<double> w(params_.data(), params_.data() + params_.size());
        return nlohmann::json{{"config",
                               {{"feature_len", cfg_.feature_len},
                                {"num_instructions", cfg_.num_instructions},
                                {"hidden", cfg_.hidden},
                                {"objective", objective_name(cfg_.objective)}}},
                              {"weights", w}};
    }

    static VerifierModel from_json(const nlohmann::json& j) {
        VerifierConfig cfg;
        const auto& jc = j.at("config");
        cfg.feature_len = jc.at("feature_len").get<int>();
        cfg.num_instructions = jc.at("num_instructions").get<int>();
        cfg.hidden = jc.at("hidden").get<int>();
        cfg.objective = objective_from_name(jc.at("objective").get<std::string>());
        VerifierModel m = zeros(cfg);
        const auto w = j.at("weights").get<std::vector<double>>();
        if (static_cast<int>(w.size()) != m.num_params()) {
            throw Error(Errc::parse_error, "checkpoint weight count mismatch");
        }
        m.params_ = Eigen::Map<const Eigen::VectorXd>(w.data(), m.num_params());
        return m;
    }

private:
    struct Views {
        Eigen::Map<const Eigen::MatrixXd> w1;
        Eigen::Map<const Eigen::VectorXd> b1;
        Eigen::Map<const Eigen::VectorXd> w2;
        double b2;
    };
    Views views() const {
        const int hd = cfg_.hidden * input_dim();
        return Views{Eigen::Map<const Eigen::MatrixXd>(params_.data(), cfg_.hidden, input_dim()),
                     Eigen::Map<const Eigen::VectorXd>(params_.data() + hd, cfg_.hidden),
                     Eigen::Map<const Eigen::VectorXd>(params_.data() + hd + cfg_.hidden,
                                                       cfg_.hidden),
                     params_(num_params() - 1)};
    }

    static void check_config(const VerifierConfig& cfg) {
        if (cfg.feature_len < 1 || cfg.num_instructions < 1 || cfg.hidden < 1) {
            throw Error(Errc::invalid_argument, "verifier config dims must be positive");
        }
    }

    VerifierConfig cfg_;
    Eigen::VectorXd params_;
};

struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd grad;
};

namespace detail {

inline double softplus(double t) {  // log(1 + e^t), overflow-safe
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

inline double sigmoid(double t) {
    return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace detail

// Margin-augmented Bradley-Terry loss for one comparison.
// Subgradient at the |R(w)-R(l)| kink is taken as 0.
inline LossResult bt_margin_loss(const VerifierModel& model, const Observation& obs,
                                 const ComparisonBatch::Pair& pair, double alpha) {
    const Eigen::VectorXd x_w = model.encode(obs, pair.winner);
    const Eigen::VectorXd x_l = model.encode(obs, pair.loser);
    const double d = model.score_encoded(x_w) - model.score_encoded(x_l);
    const double delta_hat = std::abs(d);
    const double margin = pair.delta_star - delta_hat;
    const double z = d - alpha * margin * margin;

    LossResult res;
    res.loss = detail::softplus(-z);
    res.grad = Eigen::VectorXd::Zero(model.num_params());
    const double dl_dz = -detail::sigmoid(-z);
    const double sign_d = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    const double dl_dd = dl_dz * (1.0 + 2.0 * alpha * margin * sign_d);
    model.add_score_gradient(x_w, dl_dd, res.grad);
    model.add_score_gradient(x_l, -dl_dd, res.grad);
    return res;
}

inline LossResult bt_margin_loss(const VerifierModel& model, const PreferencePair& pair,
                                 double alpha) {
    ComparisonBatch::Pair p{pair.winner, pair.loser, pair.delta_star};
    return bt_margin_loss(model, pair.obs, p, alpha);
}

// L2 regression of the score onto rmse(action, ground_truth).
inline LossResult rmse_regression_loss(const VerifierModel& model, const Observation& obs,
                                       const ActionVector& action,
                                       const ActionVector& ground_truth) {
    const Eigen::VectorXd x = model.encode(obs, action);
    const double s = model.score_encoded(x);
    const double target = rmse(action, ground_truth);
    LossResult res;
    res.loss = (s - target) * (s - target);
    res.grad = Eigen::VectorXd::Zero(model.num_params());
    model.add_score_gradient(x, 2.0 * (s - target), res.grad);
    return res;
}

// Mean loss and gradient over one comparison batch. Under rmse_regression,
// each pair contributes its winner and loser as two regression samples.
inline LossResult batch_loss(const VerifierModel& model, const ComparisonBatch& batch,
                             double alpha) {
    LossResult total;
    total.grad = Eigen::VectorXd::Zero(model.num_params());
    if (batch.pairs.empty()) return total;
    std::size_t samples = 0;
    for (const auto& p : batch.pairs) {
        if (model.config().objective == Objective::bt_margin) {
            LossResult r = bt_margin_loss(model, batch.obs, p, alpha);
            total.loss += r.loss;
            total.grad += r.grad;
            ++samples;
        } else {
            for (const ActionVector* a : {&p.winner, &p.loser}) {
                LossResult r = rmse_regression_loss(model, batch.obs, *a, batch.ground_truth);
                total.loss += r.loss;
                total.grad += r.grad;
                ++samples;
            }
        }
    }
    total.loss /= static_cast<double>(samples);
    total.grad /= static_cast<double>(samples);
    return total;
}

struct PairMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::size_t pairs = 0;
};

using ScoreFn = std::function<double(const Observation& obs, const ActionVector& action)>;

// Pairwise classification. Pairs are presented in alternating orientation
// (even global index: (winner, loser) = positive label; odd: flipped =
// negative label) so both classes occur and a random scorer sits at 0.5.
// The scorer predicts positive when it ranks the first element above the
// second, i.e. when it picks the true winner on a positive-label pair.
inline PairMetrics evaluate_pairs_fn(const ScoreFn& score, bool higher_is_better,
                                     const std::vector<ComparisonBatch>& batches) {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t index = 0;
    for (const auto& batch : batches) {
        for (const auto& p : batch.pairs) {
            const bool positive_label = index % 2 == 0;
            const ActionVector& first = positive_label ? p.winner : p.loser;
            const ActionVector& second = positive_label ? p.loser : p.winner;
            const double s_first = score(batch.obs, first);
            const double s_second = score(batch.obs, second);
            const bool first_ranked_above =
                higher_is_better ? s_first > s_second : s_first < s_second;
            if (first_ranked_above) {
                positive_label ? ++tp : ++fp;
            } else {
                positive_label ? ++fn : ++tn;
            }
            ++index;
        }
    }
    if (index == 0) throw Error(Errc::invalid_argument, "no pairs to evaluate");
    PairMetrics m;
    m.pairs = index;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(index);
    return m;
}

inline PairMetrics evaluate_pairs(const VerifierModel& model,
                                  const std::vector<ComparisonBatch>& batches) {
    return evaluate_pairs_fn(
        [&model](const Observation& obs, const ActionVector& a) { return model.score(obs, a); },
        model.config().objective == Objective::bt_margin, batches);
}

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double eval_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    VerifierModel model;
    std::vector<EpochLog> log;
};

// Plain SGD over comparison batches in seed-shuffled order; deterministic
// weight trajectory per (config, seed).
inline TrainResult train(const std::vector<ComparisonBatch>& batches, const VerifierConfig& vcfg,
                         const TrainConfig& tcfg,
                         const std::vector<ComparisonBatch>* eval_batches = nullptr) {
    if (batches.empty()) throw Error(Errc::invalid_argument, "no training batches");
    if (tcfg.learning_rate <= 0.0) throw Error(Errc::invalid_argument, "learning rate must be > 0");
    if (tcfg.alpha < 0.0) throw Error(Errc::invalid_argument, "alpha must be >= 0");
    if (tcfg.batches_per_update < 1) {
        throw Error(Errc::invalid_argument, "batches_per_update must be >= 1");
    }

    TrainResult result{VerifierModel(vcfg, derive_seed(tcfg.seed, 0)), {}};
    VerifierModel& model = result.model;

    std::vector<std::size_t> order(batches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        Rng rng(derive_seed(tcfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.next_below(i)]);
        }
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(tcfg.batches_per_update)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(tcfg.batches_per_update));
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.num_params());
            double group_loss = 0.0;
            for (std::size_t j = start; j < stop; ++j) {
                LossResult r = batch_loss(model, batches[order[j]], tcfg.alpha);
                group_loss += r.loss;
                grad += r.grad;
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            group_loss *= scale;
            if (!std::isfinite(group_loss)) {
                throw Error(Errc::numeric_error,
                            "non-finite loss at epoch " + std::to_string(epoch) + ", update " +
                                std::to_string(start / tcfg.batches_per_update) +
                                "; lower the learning rate");
            }
            model.set_weights(model.weights() - tcfg.learning_rate * scale * grad);
            loss_sum += group_loss;
            ++loss_count;
        }
        EpochLog log;
        log.epoch = epoch;
        log.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        if (eval_batches != nullptr) {
            log.eval_accuracy = evaluate_pairs(model, *eval_batches).accuracy;
        }
        result.log.push_back(log);
    }
    return result;
}

// Argmax of the score (argmin when lower is better); ties keep the lowest
// candidate index. Invariant under any strictly increasing score transform.
inline std::size_t select_best_index_fn(const ScoreFn& score, bool higher_is_better,
                                        const CandidateSet& candidates, const Observation& obs) {
    if (candidates.actions.empty()) throw Error(Errc::invalid_argument, "no candidates");
    std::size_t best = 0;
    double best_score = score(obs, candidates.actions[0]);
    for (std::size_t i = 1; i < candidates.actions.size(); ++i) {
        const double s = score(obs, candidates.actions[i]);
        if (higher_is_better ? s > best_score : s < best_score) {
            best_score = s;
            best = i;
        }
    }
    return best;
}

// The selection direction comes from the model's objective: argmax under
// bt_margin, argmin under rmse_regression.
inline const ActionVector& select_best(const VerifierModel& model, const CandidateSet& candidates,
                                       const Observation& obs) {
    const std::size_t i = select_best_index_fn(
        [&model](const Observation& o, const ActionVector& a) { return model.score(o, a); },
        model.config().objective == Objective::bt_margin, candidates, obs);
    return candidates.actions[i];
}

}  // namespace bok
