// Acceptance suite: runs every criterion end-to-end and prints one
// PASS/FAIL line each. Exit code is the number of failed criteria.
//
// All expected values are either exact properties, independent-oracle
// recomputations, or targets pinned from the first calibration run of this
// code base (noted inline where that is the case).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bok/env.hpp"
#include "bok/executor.hpp"
#include "bok/policy.hpp"
#include "bok/preference.hpp"
#include "bok/sampling.hpp"
#include "bok/scaling.hpp"
#include "bok/serving.hpp"
#include "bok/verifier.hpp"

namespace fs = std::filesystem;
using namespace bok;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// Shared experiment setup. Policy imperfection (bias) plus sampling noise
// mirror an imperfect imitation policy; constants here are the pinned
// acceptance configuration.
struct Setup {
    DemoDataset dataset = generate_demos({}, 1500, 11);
    std::vector<DemoRecord> train_tuples;
    std::vector<DemoRecord> held_tuples;

    Setup() {
        const DemoDataset pool = subsample(dataset, 6000, 21);
        train_tuples.assign(pool.records.begin(), pool.records.end() - 1000);
        held_tuples.assign(pool.records.end() - 1000, pool.records.end());
    }

    NoisyPolicy eval_policy() const {  // sigma fixed by criteria 7 and 8
        NoisyPolicyConfig pc;
        pc.noise_scale = 0.25;
        pc.bias = {0.18, -0.18, 0.144, -0.144, 0.18, -0.144};
        return NoisyPolicy(dataset.header, pc);
    }

    NoisyPolicy gaussian_policy() const {  // bias-dominated regime for criterion 3
        NoisyPolicyConfig pc;
        pc.noise_scale = 0.05;
        pc.gripper_flip_prob = 0.0;
        pc.bias = {0.3, -0.3, 0.24, -0.24, 0.3, -0.24};
        return NoisyPolicy(dataset.header, pc);
    }
};

// --------------------------------------------------------------------------
// criterion 1: oracle monotonicity, exact, all samplers
// --------------------------------------------------------------------------
void criterion_1(const Setup& setup) {
    const auto t0 = Clock::now();
    const DemoDataset tuples = subsample(setup.dataset, 1000, 3);
    const NoisyPolicy policy = setup.eval_policy();

    std::size_t violations = 0;
    std::size_t points = 0;
    const std::vector<std::pair<std::string, Sampler>> samplers = {
        {"random", make_random_sampler()},
        {"policy", make_policy_sampler(policy, 1.0)},
        {"gaussian", make_gaussian_sampler(policy, 1.0, 4)},
    };
    for (const auto& [tag, sampler] : samplers) {
        const ScalingCurve curve = oracle_best_of_k(tuples.records, sampler, 1024, 13, tag);
        for (std::size_t i = 1; i < curve.k.size(); ++i) {
            ++points;
            if (!(curve.mean_rmse[i] <= curve.mean_rmse[i - 1])) ++violations;
        }
    }
    const double secs = seconds_since(t0);
    report(1, "oracle best-of-k monotonicity", violations == 0 && secs < 60.0,
           "3 samplers x 1000 tuples x k_max 1024, " + std::to_string(points) +
               " adjacent pairs, " + std::to_string(violations) + " violations, " + fmt(secs) +
               "s");
}

// --------------------------------------------------------------------------
// criterion 2: power-law recovery, planted + independent OLS oracle
// --------------------------------------------------------------------------
void criterion_2(const Setup& setup) {
    ScalingCurve planted;
    for (long k = 1; k <= 1024; k *= 2) {
        planted.k.push_back(static_cast<int>(k));
        planted.mean_rmse.push_back(0.5 * std::pow(static_cast<double>(k), -0.3));
        planted.stderr_rmse.push_back(0.0);
    }
    const DemoDataset tuples = subsample(setup.dataset, 300, 5);
    const NoisyPolicy policy = setup.eval_policy();
    const ScalingCurve noisy =
        oracle_best_of_k(tuples.records, make_policy_sampler(policy, 1.0), 256, 17, "policy");

    const auto t0 = Clock::now();
    const PowerLawFit exact = fit_power_law(planted);
    const PowerLawFit fit = fit_power_law(noisy);
    const double fit_secs = seconds_since(t0);

    // independent OLS oracle, mean-centered formulation
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(noisy.k.size());
    for (std::size_t i = 0; i < noisy.k.size(); ++i) {
        mx += std::log(static_cast<double>(noisy.k[i])) / n;
        my += std::log(noisy.mean_rmse[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < noisy.k.size(); ++i) {
        const double dx = std::log(static_cast<double>(noisy.k[i])) - mx;
        sxy += dx * (std::log(noisy.mean_rmse[i]) - my);
        sxx += dx * dx;
    }
    const double b_oracle = sxy / sxx;

    const bool planted_ok = std::abs(exact.a - 0.5) < 1e-9 && std::abs(exact.b + 0.3) < 1e-9 &&
                            std::abs(exact.r_squared - 1.0) < 1e-9;
    const bool oracle_ok = std::abs(fit.b - b_oracle) <= 0.05 * std::abs(b_oracle);
    report(2, "power-law recovery", planted_ok && oracle_ok && fit_secs < 1.0,
           "planted (a,b) error " +
               fmt(std::max(std::abs(exact.a - 0.5), std::abs(exact.b + 0.3))) +
               ", noisy-curve b=" + fmt(fit.b) + " vs OLS oracle " + fmt(b_oracle) + ", " +
               fmt(fit_secs) + "s");
}

// --------------------------------------------------------------------------
// criterion 3: sampler equivalence at k=1024 with an N=4 Gaussian fit
// --------------------------------------------------------------------------
void criterion_3(const Setup& setup) {
    const auto t0 = Clock::now();
    const DemoDataset tuples = subsample(setup.dataset, 1000, 3);
    const NoisyPolicy policy = setup.gaussian_policy();
    const ScalingCurve cp =
        oracle_best_of_k(tuples.records, make_policy_sampler(policy, 1.0), 1024, 13, "policy");
    const ScalingCurve cg = oracle_best_of_k(
        tuples.records, make_gaussian_sampler(policy, 1.0, 4), 1024, 13, "gaussian");
    const double gap = std::abs(cg.mean_rmse.back() - cp.mean_rmse.back()) / cp.mean_rmse.back();
    report(3, "gaussian-perturbation equivalence", gap < 0.10,
           "policy e(1024)=" + fmt(cp.mean_rmse.back()) + ", gaussian e(1024)=" +
               fmt(cg.mean_rmse.back()) + ", rel gap " + fmt(100 * gap) + "% < 10%, " +
               fmt(seconds_since(t0)) + "s");
}

// --------------------------------------------------------------------------
// criterion 4: preference pipeline soundness on >= 100k pairs
// --------------------------------------------------------------------------
void criterion_4(const Setup& setup, const fs::path& dir) {
    const auto t0 = Clock::now();
    const DemoDataset tuples = subsample(setup.dataset, 7500, 9);
    const NoisyPolicy policy = setup.eval_policy();
    const std::string path = (dir / "audit_prefs.jsonl").string();
    const PreferenceSummary summary =
        generate_preference_dataset(tuples.records, policy, 32, 6, 1.0, 5, path);

    // independent audit pass: recompute both RMSEs from the raw stored actions
    std::size_t violations = 0;
    std::size_t audited = 0;
    for (const ComparisonBatch& b : load_preferences(path)) {
        for (const auto& p : b.pairs) {
            const double ew = rmse(p.winner, b.ground_truth);
            const double el = rmse(p.loser, b.ground_truth);
            if (!(ew <= el)) ++violations;
            if (std::abs(p.delta_star - std::abs(ew - el)) > 1e-12) ++violations;
            ++audited;
        }
    }
    const double secs = seconds_since(t0);
    report(4, "preference-pipeline soundness",
           audited >= 100000 && audited == summary.pairs_written && violations == 0 &&
               secs < 60.0,
           std::to_string(audited) + " pairs audited, " + std::to_string(violations) +
               " violations, " + fmt(secs) + "s");
}

// --------------------------------------------------------------------------
// criterion 5: gradient correctness vs central finite differences
// --------------------------------------------------------------------------
void criterion_5() {
    const auto t0 = Clock::now();
    const VerifierConfig cfg{5, 2, 8, Objective::bt_margin};
    Rng rng(2027);
    const double h = 1e-4;
    int checked = 0;
    double worst = 0.0;

    while (checked < 100) {
        VerifierModel m = VerifierModel::zeros(cfg);
        Eigen::VectorXd w(m.num_params());
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = 0.5 * rng.gaussian();
        m.set_weights(w);

        Observation obs;
        obs.features.resize(5);
        for (auto& f : obs.features) f = rng.uniform(-1.0, 1.0);
        obs.instruction_id = static_cast<int>(rng.next_below(2));
        ComparisonBatch::Pair pair;
        for (auto& d : pair.winner.delta) d = rng.uniform(-1.0, 1.0);
        for (auto& d : pair.loser.delta) d = rng.uniform(-1.0, 1.0);
        pair.winner.gripper = static_cast<int>(rng.next_below(2));
        pair.loser.gripper = static_cast<int>(rng.next_below(2));
        pair.delta_star = rng.uniform(0.0, 0.5);
        const double alpha = rng.uniform(0.0, 1.0);
        const bool use_bt = checked % 2 == 0;

        if (use_bt) {
            const double gap = m.score(obs, pair.winner) - m.score(obs, pair.loser);
            if (std::abs(gap) < 1e-6) continue;  // |delta_hat| kink neighborhood
        }
        auto loss_at = [&](const Eigen::VectorXd& wv) {
            VerifierModel probe = m;
            probe.set_weights(wv);
            return use_bt ? bt_margin_loss(probe, obs, pair, alpha).loss
                          : rmse_regression_loss(probe, obs, pair.winner, pair.loser).loss;
        };
        const Eigen::VectorXd analytic =
            use_bt ? bt_margin_loss(m, obs, pair, alpha).grad
                   : rmse_regression_loss(m, obs, pair.winner, pair.loser).grad;
        Eigen::VectorXd fd(m.num_params());
        for (int i = 0; i < m.num_params(); ++i) {
            Eigen::VectorXd wp = w, wm = w;
            wp(i) += h;
            wm(i) -= h;
            fd(i) = (loss_at(wp) - loss_at(wm)) / (2.0 * h);
        }
        worst = std::max(worst,
                         (analytic - fd).norm() / std::max(1e-10, analytic.norm() + fd.norm()));
        ++checked;
    }
    const double secs = seconds_since(t0);
    report(5, "gradient correctness (both objectives)", worst < 1e-5 && secs < 10.0,
           "100 draws, worst rel err " + fmt(worst) + " < 1e-5, " + fmt(secs) + "s");
}

// --------------------------------------------------------------------------
// criterion 6: alpha=0 reduction to plain Bradley-Terry
// --------------------------------------------------------------------------
void criterion_6() {
    const VerifierConfig cfg{4, 3, 6, Objective::bt_margin};
    Rng rng(555);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        VerifierModel m = VerifierModel::zeros(cfg);
        Eigen::VectorXd w(m.num_params());
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = 0.5 * rng.gaussian();
        m.set_weights(w);
        Observation obs;
        obs.features.resize(4);
        for (auto& f : obs.features) f = rng.uniform(-1.0, 1.0);
        obs.instruction_id = static_cast<int>(rng.next_below(3));
        ComparisonBatch::Pair pair;
        for (auto& d : pair.winner.delta) d = rng.uniform(-1.0, 1.0);
        for (auto& d : pair.loser.delta) d = rng.uniform(-1.0, 1.0);
        pair.delta_star = rng.uniform(0.0, 0.5);

        const double sw = m.score(obs, pair.winner);
        const double sl = m.score(obs, pair.loser);
        const double reference = -std::log(1.0 / (1.0 + std::exp(-(sw - sl))));
        worst = std::max(worst, std::abs(bt_margin_loss(m, obs, pair, 0.0).loss - reference));
    }
    report(6, "Bradley-Terry reduction at alpha=0", worst <= 1e-12,
           "1000 inputs vs independent implementation, worst |diff| " + fmt(worst));
}

// --------------------------------------------------------------------------
// criteria 7-9 share one trained verifier
// --------------------------------------------------------------------------
struct VerifierRun {
    VerifierModel model;
    std::string train_path;
    std::string held_path;
};

VerifierRun train_acceptance_verifier(const Setup& setup, const fs::path& dir) {
    const NoisyPolicy policy = setup.eval_policy();
    const std::string train_path = (dir / "train_prefs.jsonl").string();
    const std::string held_path = (dir / "held_prefs.jsonl").string();
    generate_preference_dataset(setup.train_tuples, policy, 32, 6, 1.0, 5, train_path);
    generate_preference_dataset(setup.held_tuples, policy, 32, 6, 1.0, 6, held_path);

    VerifierConfig vc;
    vc.feature_len = setup.dataset.header.feature_len;
    vc.num_instructions = static_cast<int>(setup.dataset.header.tasks.size());
    TrainConfig tc;
    tc.seed = 9;
    tc.epochs = 30;
    tc.learning_rate = 5e-2;
    TrainResult result = train(load_preferences(train_path), vc, tc);
    return VerifierRun{std::move(result.model), train_path, held_path};
}

void criterion_7(const Setup& setup, const VerifierRun& run) {
    const auto t0 = Clock::now();
    const NoisyPolicy policy = setup.eval_policy();
    double greedy_sum = 0.0, verifier_sum = 0.0;
    for (std::size_t i = 0; i < setup.held_tuples.size(); ++i) {
        const Observation& obs = setup.held_tuples[i].obs;
        const ActionVector expert = policy.expert(obs);
        greedy_sum += rmse(policy.mode_action(obs), expert);
        const CandidateSet cands = sample_policy(policy, obs, 1.0, 64, derive_seed(77, i));
        verifier_sum += rmse(select_best(run.model, cands, obs), expert);
    }
    const double n = static_cast<double>(setup.held_tuples.size());
    const double lift = 1.0 - verifier_sum / greedy_sum;
    // Pinned from the first calibration run of this setup: lift 0.261.
    // Enforced with the +-3% slack the criterion grants; 0.10 is its floor.
    const bool pass = lift >= 0.261 - 0.03 && lift >= 0.10;
    report(7, "verifier lift over greedy (best-of-64)", pass,
           "greedy RMSE " + fmt(greedy_sum / n) + ", verifier RMSE " + fmt(verifier_sum / n) +
               ", lift " + fmt(100 * lift) + "% (pinned 26.1% +- 3%), 1000 held-out states, " +
               fmt(seconds_since(t0)) + "s");
}

void criterion_8(const Setup& setup, const VerifierRun& run) {
    const auto t0 = Clock::now();
    const NoisyPolicy policy = setup.eval_policy();
    ToyEnv env;
    RolloutConfig rc;
    rc.horizon = 60;

    rc.mode = SelectionMode::greedy;
    const EvalSummary greedy = evaluate(env, policy, nullptr, rc, 100, 31);
    rc.mode = SelectionMode::verifier;
    const EvalSummary verifier = evaluate(env, policy, &run.model, rc, 100, 31);
    const double p = paired_sign_test(verifier.successes, greedy.successes);
    const bool pass = verifier.success_rate >= greedy.success_rate && p < 0.05;
    report(8, "closed-loop lift (paired episodes)", pass,
           "verifier " + fmt(verifier.success_rate) + " vs greedy " + fmt(greedy.success_rate) +
               " over 100 paired episodes, sign-test p=" + fmt(p) + " < 0.05, " +
               fmt(seconds_since(t0)) + "s");
}

void criterion_9(const Setup& setup, const VerifierRun& run, const fs::path& dir) {
    const auto t0 = Clock::now();
    const auto train_batches = load_preferences(run.train_path);
    const auto held_batches = load_preferences(run.held_path);

    // deterministic uniform scorer as the chance baseline
    const ScoreFn random_scorer = [](const Observation& obs, const ActionVector& a) {
        std::uint64_t h = 0x5EEDFACE;
        for (double f : obs.features) {
            std::uint64_t bits;
            std::memcpy(&bits, &f, sizeof(bits));
            h = derive_seed(h, bits);
        }
        for (int i = 0; i < kActionDims; ++i) {
            const double c = a.component(i);
            std::uint64_t bits;
            std::memcpy(&bits, &c, sizeof(bits));
            h = derive_seed(h, bits);
        }
        return Rng(h).uniform();
    };
    const double random_acc = evaluate_pairs_fn(random_scorer, true, held_batches).accuracy;

    VerifierConfig vc;
    vc.feature_len = setup.dataset.header.feature_len;
    vc.num_instructions = static_cast<int>(setup.dataset.header.tasks.size());

    std::string table = "alpha,precision,recall,f1,accuracy\n";
    bool pass = true;
    std::string accs;
    for (double alpha : {0.0, 0.1, 1.0}) {
        TrainConfig tc;
        tc.seed = 9;
        tc.epochs = 10;
        tc.learning_rate = 5e-2;
        tc.alpha = alpha;
        const TrainResult result = train(train_batches, vc, tc);
        const PairMetrics m = evaluate_pairs(result.model, held_batches);
        table += fmt(alpha) + "," + fmt(m.precision) + "," + fmt(m.recall) + "," + fmt(m.f1) +
                 "," + fmt(m.accuracy) + "\n";
        for (double v : {m.precision, m.recall, m.f1, m.accuracy}) {
            pass = pass && v >= 0.0 && v <= 1.0;
        }
        pass = pass && m.accuracy >= random_acc + 0.1;
        accs += (accs.empty() ? "" : "/") + fmt(m.accuracy);
    }
    std::ofstream(dir / "margin_ablation.csv") << table;
    std::printf("%s", table.c_str());
    report(9, "margin ablation harness", pass,
           "alpha {0, 0.1, 1.0} accuracies " + accs + " vs random baseline " + fmt(random_acc) +
               " (+0.1 required), " + fmt(seconds_since(t0)) + "s");
}

// --------------------------------------------------------------------------
// criterion 10: latency model fidelity
// --------------------------------------------------------------------------
void criterion_10() {
    const CostProfile profile = default_profile();
    const double t_deploy = latency(profile, Strategy::gaussian, 5, 16);
    const bool band_ok = t_deploy >= 0.55 && t_deploy <= 0.80;

    // Strict dominance across the table domain in the amplification regime
    // k_hat > n_hat. At k_hat <= n_hat the gaussian strategy's fixed
    // policy(n_hat) term meets or exceeds policy(k_hat) by table
    // monotonicity, so dominance cannot hold there for any profile.
    std::size_t checked = 0, violations = 0;
    for (int n_hat = 1; n_hat <= 9; ++n_hat) {
        for (int k_hat = 2; k_hat <= 128; ++k_hat) {
            if (k_hat <= n_hat) continue;
            ++checked;
            if (!(latency(profile, Strategy::gaussian, n_hat, k_hat) <
                  latency(profile, Strategy::policy_sampling, n_hat, k_hat))) {
                ++violations;
            }
        }
    }
    report(10, "latency model fidelity", band_ok && violations == 0,
           "latency(gaussian,5,16)=" + fmt(t_deploy) + "s in [0.55,0.80]; dominance holds on " +
               std::to_string(checked) + " (n_hat<=9, n_hat<k_hat<=128) points with " +
               std::to_string(violations) + " violations");
}

// --------------------------------------------------------------------------
// criterion 11: CLI byte-level determinism
// --------------------------------------------------------------------------
std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[fs::relative(entry.path(), dir).string()] = ss.str();
    }
    return out;
}

void criterion_11(const fs::path& dir) {
    const auto t0 = Clock::now();
    const std::string cli = BOK_CLI_PATH;
    const fs::path work = dir / "cli";
    fs::create_directories(work);
    const std::string null_sink = " > /dev/null 2>&1";

    // build shared inputs once
    bool setup_ok = true;
    const std::string prefs_dir = (work / "prefs_in").string();
    setup_ok = setup_ok && std::system((cli + " gen-prefs --out-dir " + prefs_dir +
                                        " --seed 5 --episodes 8 --tuples 15 --n 12 --k 4" +
                                        null_sink)
                                           .c_str()) == 0;
    const std::string sweep_dir = (work / "sweep_in").string();
    setup_ok = setup_ok &&
               std::system((cli + " scaling-sweep --out-dir " + sweep_dir +
                            " --seed 5 --episodes 8 --tuples 10 --k-max 64 --samplers policy" +
                            null_sink)
                               .c_str()) == 0;
    const std::string ckpt_dir = (work / "ckpt_in").string();
    setup_ok = setup_ok && std::system((cli + " train-verifier --out-dir " + ckpt_dir +
                                        " --seed 5 --prefs " + prefs_dir +
                                        "/prefs.jsonl --epochs 1" + null_sink)
                                           .c_str()) == 0;
    if (!setup_ok) {
        report(11, "CLI determinism", false, "input-building commands failed");
        return;
    }

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"scaling-sweep", " --seed 7 --episodes 8 --tuples 12 --k-max 8 --sigma 0.25"},
        {"gen-prefs", " --seed 7 --episodes 8 --tuples 12 --n 12 --k 4"},
        {"train-verifier",
         " --seed 7 --prefs " + prefs_dir + "/prefs.jsonl --epochs 2 --alpha 0 0.1 1.0"},
        {"eval-verifier",
         " --seed 7 --prefs " + prefs_dir + "/prefs.jsonl --checkpoint " + ckpt_dir +
             "/checkpoint.json"},
        {"eval-closed-loop",
         " --seed 7 --episodes 8 --eval-episodes 4 --horizon 15 --modes greedy oracle"
         " --log-rollouts"},
        {"latency-model", " --seed 7 --k-max 64 --curve " + sweep_dir + "/curve_policy.csv"},
    };

    bool pass = true;
    std::string detail;
    for (const auto& [name, args] : commands) {
        const fs::path out_dir = work / name;
        const std::string cmd = cli + " " + name + " --out-dir " + out_dir.string() + args;
        const int rc1 = std::system((cmd + null_sink).c_str());
        const auto first = dir_contents(out_dir);
        const int rc2 = std::system((cmd + null_sink).c_str());
        const auto second = dir_contents(out_dir);
        const bool same = WEXITSTATUS(rc1) == 0 && WEXITSTATUS(rc2) == 0 && first == second &&
                          !first.empty();
        if (!same) {
            pass = false;
            detail += name + " differs; ";
        }
    }
    if (detail.empty()) {
        detail = "all 6 subcommands byte-identical on rerun, " + fmt(seconds_since(t0)) + "s";
    }
    report(11, "CLI determinism", pass, detail);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    const auto t0 = Clock::now();

    std::random_device rd;
    const fs::path dir = fs::temp_directory_path() / ("bok_acceptance_" + std::to_string(rd()));
    fs::create_directories(dir);

    try {
        const Setup setup;
        criterion_1(setup);
        criterion_2(setup);
        criterion_3(setup);
        criterion_4(setup, dir);
        criterion_5();
        criterion_6();
        const VerifierRun run = train_acceptance_verifier(setup, dir);
        criterion_7(setup, run);
        criterion_8(setup, run);
        criterion_9(setup, run, dir);
        criterion_10();
        criterion_11(dir);
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance suite aborted: %s\n", e.what());
        ++g_failures;
    }

    std::error_code ec;
    fs::remove_all(dir, ec);

    std::printf("%d/11 criteria passed in %.1fs\n", 11 - g_failures, seconds_since(t0));
    return g_failures;
}
