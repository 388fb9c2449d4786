// bok: best-of-k action sampling and verification experiments.
//
// Every subcommand reads an optional JSON config file, lets explicit CLI
// flags override file fields, writes the merged config next to its outputs
// as resolved_config.json, and is byte-deterministic per (config, seed).
//
// Exit codes: 0 success, 1 runtime failure, 2 config/validation failure.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bok/common.hpp"
#include "bok/dataset.hpp"
#include "bok/env.hpp"
#include "bok/executor.hpp"
#include "bok/policy.hpp"
#include "bok/preference.hpp"
#include "bok/sampling.hpp"
#include "bok/scaling.hpp"
#include "bok/serving.hpp"
#include "bok/verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int classify_exit(const bok::Error& e) {
    switch (e.code()) {
        case bok::Errc::invalid_argument:
        case bok::Errc::malformed_header:
        case bok::Errc::feature_length_mismatch:
        case bok::Errc::action_not_normalized:
        case bok::Errc::parse_error:
        case bok::Errc::out_of_domain:
            return 2;
        default:
            return 1;
    }
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw bok::Error(bok::Errc::invalid_argument, "config file not found: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw bok::Error(bok::Errc::parse_error, "config: " + std::string(e.what()));
    }
}

void require_input_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw bok::Error(bok::Errc::invalid_argument, what + " not found: " + path);
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bok::Error(bok::Errc::io_error, "cannot write " + path.string());
    out << content;
    if (!out) throw bok::Error(bok::Errc::io_error, "write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

// Field resolution order: CLI flag > config file > default already in `value`.
template <typename T>
void resolve(const CLI::App& app, const std::string& flag, const json& cfg,
             const std::string& key, T& value) {
    if (app.count(flag) > 0) return;  // CLI11 already stored the flag value
    if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its fields");
        cmd->add_option("--out-dir", out_dir, "output directory")->required();
        cmd->add_option("--seed", seed, "master seed");
    }

    json resolve_common(const CLI::App& app) {
        json cfg = load_config_file(config_path);
        resolve(app, "--seed", cfg, "seed", seed);
        resolve(app, "--out-dir", cfg, "out_dir", out_dir);
        fs::create_directories(out_dir);
        return cfg;
    }
};

struct SimOpts {
    std::string demos_path;  // load instead of generating when set
    int episodes = 200;
    int env_tasks = 4;
    std::uint64_t env_goal_seed = 0;
    double sigma = 0.2;
    std::vector<double> bias = {0, 0, 0, 0, 0, 0};
    double gripper_flip_prob = 0.05;

    void attach(CLI::App* cmd) {
        cmd->add_option("--demos", demos_path, "existing demo dataset (JSONL)");
        cmd->add_option("--episodes", episodes, "expert episodes when generating demos");
        cmd->add_option("--env-tasks", env_tasks, "number of toy tasks");
        cmd->add_option("--env-goal-seed", env_goal_seed, "seed defining the goal poses");
        cmd->add_option("--sigma", sigma, "policy noise scale");
        cmd->add_option("--bias", bias, "policy bias, 6 values in normalized units")
            ->expected(6);
        cmd->add_option("--gripper-flip-prob", gripper_flip_prob,
                        "gripper flip probability at temperature 1");
    }

    void resolve_all(const CLI::App& app, const json& cfg) {
        resolve(app, "--demos", cfg, "demos", demos_path);
        resolve(app, "--episodes", cfg, "episodes", episodes);
        resolve(app, "--env-tasks", cfg, "env_tasks", env_tasks);
        resolve(app, "--env-goal-seed", cfg, "env_goal_seed", env_goal_seed);
        resolve(app, "--sigma", cfg, "sigma", sigma);
        resolve(app, "--bias", cfg, "bias", bias);
        resolve(app, "--gripper-flip-prob", cfg, "gripper_flip_prob", gripper_flip_prob);
        if (bias.size() != 6) {
            throw bok::Error(bok::Errc::invalid_argument, "bias must have exactly 6 values");
        }
    }

    json to_json() const {
        return json{{"demos", demos_path},
                    {"episodes", episodes},
                    {"env_tasks", env_tasks},
                    {"env_goal_seed", env_goal_seed},
                    {"sigma", sigma},
                    {"bias", bias},
                    {"gripper_flip_prob", gripper_flip_prob}};
    }

    bok::ToyEnvConfig env_config() const {
        bok::ToyEnvConfig env;
        env.num_tasks = env_tasks;
        env.goal_seed = env_goal_seed;
        return env;
    }

    bok::DemoDataset dataset(std::uint64_t seed) const {
        if (!demos_path.empty()) {
            require_input_file(demos_path, "demo dataset");
            return bok::load_demos(demos_path);
        }
        return bok::generate_demos(env_config(), episodes, bok::derive_seed(seed, 1));
    }

    bok::NoisyPolicy policy(const bok::DemoDataset& ds) const {
        bok::NoisyPolicyConfig pc;
        pc.noise_scale = sigma;
        for (std::size_t i = 0; i < 6; ++i) pc.bias[i] = bias[i];
        pc.gripper_flip_prob = gripper_flip_prob;
        return bok::NoisyPolicy(ds.header, pc);
    }
};

// ---------------------------------------------------------------------------
// scaling-sweep
// ---------------------------------------------------------------------------

int run_scaling_sweep(const CLI::App& app, CommonOpts& common, SimOpts& sim, int& tuples,
                      int& k_max, double& temperature, int& fit_samples,
                      std::vector<std::string>& samplers, int& dump_candidates) {
    json cfg = common.resolve_common(app);
    sim.resolve_all(app, cfg);
    resolve(app, "--tuples", cfg, "tuples", tuples);
    resolve(app, "--k-max", cfg, "k_max", k_max);
    resolve(app, "--temperature", cfg, "temperature", temperature);
    resolve(app, "--fit-samples", cfg, "fit_samples", fit_samples);
    resolve(app, "--samplers", cfg, "samplers", samplers);
    resolve(app, "--dump-candidates", cfg, "dump_candidates", dump_candidates);

    const bok::DemoDataset full = sim.dataset(common.seed);
    const bok::DemoDataset ds =
        bok::subsample(full, static_cast<std::size_t>(tuples), bok::derive_seed(common.seed, 2));
    const bok::NoisyPolicy policy = sim.policy(ds);

    json resolved = sim.to_json();
    resolved["seed"] = common.seed;
    resolved["out_dir"] = common.out_dir;
    resolved["tuples"] = tuples;
    resolved["k_max"] = k_max;
    resolved["temperature"] = temperature;
    resolved["fit_samples"] = fit_samples;
    resolved["samplers"] = samplers;
    resolved["dump_candidates"] = dump_candidates;
    write_json(fs::path(common.out_dir) / "resolved_config.json", resolved);

    json fits = json::object();
    for (const std::string& tag : samplers) {
        bok::Sampler sampler;
        if (tag == "random") {
            sampler = bok::make_random_sampler();
        } else if (tag == "policy") {
            sampler = bok::make_policy_sampler(policy, temperature);
        } else if (tag == "gaussian") {
            sampler = bok::make_gaussian_sampler(policy, temperature, fit_samples);
        } else {
            throw bok::Error(bok::Errc::invalid_argument, "unknown sampler: " + tag);
        }
        if (dump_candidates > 0) {  // debugging aid: candidates for the first tuple
            const auto actions = sampler(ds.records[0].obs, std::min(dump_candidates, k_max),
                                         bok::derive_seed(common.seed, 3));
            std::string lines;
            for (const auto& a : actions) {
                lines += "{\"action\":";
                bok::detail::append_action17(lines, a);
                lines += "}\n";
            }
            write_file(fs::path(common.out_dir) / ("candidates_" + tag + ".jsonl"), lines);
        }
        const bok::ScalingCurve curve = bok::oracle_best_of_k(
            ds.records, sampler, k_max, bok::derive_seed(common.seed, 3), tag);
        write_file(fs::path(common.out_dir) / ("curve_" + tag + ".csv"),
                   bok::curve_to_csv(curve));
        write_json(fs::path(common.out_dir) / ("curve_" + tag + ".json"),
                   bok::curve_to_json(curve));

        bok::ScalingCurve positive = curve;
        for (std::size_t i = positive.k.size(); i-- > 0;) {
            if (positive.mean_rmse[i] <= 0.0) {
                std::cerr << "warning: dropping zero-error point k=" << positive.k[i]
                          << " from " << tag << " fit\n";
                positive.k.erase(positive.k.begin() + static_cast<std::ptrdiff_t>(i));
                positive.mean_rmse.erase(positive.mean_rmse.begin() +
                                         static_cast<std::ptrdiff_t>(i));
                positive.stderr_rmse.erase(positive.stderr_rmse.begin() +
                                           static_cast<std::ptrdiff_t>(i));
            }
        }
        const bok::PowerLawFit fit = bok::fit_power_law(positive);
        json jf = bok::fit_to_json(fit);
        if (curve.mean_rmse.front() > 0.0) {
            jf["relative_reduction"] = bok::relative_reduction(curve);
        }
        fits[tag] = jf;
        write_json(fs::path(common.out_dir) / ("fit_" + tag + ".json"), jf);
    }
    write_json(fs::path(common.out_dir) / "fits.json", fits);
    return 0;
}

// ---------------------------------------------------------------------------
// gen-prefs
// ---------------------------------------------------------------------------

int run_gen_prefs(const CLI::App& app, CommonOpts& common, SimOpts& sim, int& tuples, int& n,
                  int& k, double& temperature) {
    json cfg = common.resolve_common(app);
    sim.resolve_all(app, cfg);
    resolve(app, "--tuples", cfg, "tuples", tuples);
    resolve(app, "--n", cfg, "n", n);
    resolve(app, "--k", cfg, "k", k);
    resolve(app, "--temperature", cfg, "temperature", temperature);

    const bok::DemoDataset full = sim.dataset(common.seed);
    const bok::DemoDataset ds =
        bok::subsample(full, static_cast<std::size_t>(tuples), bok::derive_seed(common.seed, 2));
    const bok::NoisyPolicy policy = sim.policy(ds);

    json resolved = sim.to_json();
    resolved["seed"] = common.seed;
    resolved["out_dir"] = common.out_dir;
    resolved["tuples"] = tuples;
    resolved["n"] = n;
    resolved["k"] = k;
    resolved["temperature"] = temperature;
    write_json(fs::path(common.out_dir) / "resolved_config.json", resolved);

    const fs::path out_path = fs::path(common.out_dir) / "prefs.jsonl";
    const bok::PreferenceSummary summary = bok::generate_preference_dataset(
        ds.records, policy, n, k, temperature, bok::derive_seed(common.seed, 3),
        out_path.string());

    write_json(fs::path(common.out_dir) / "summary.json",
               json{{"tuples_processed", summary.tuples_processed},
                    {"tuples_skipped", summary.tuples_skipped},
                    {"batches_written", summary.batches_written},
                    {"pairs_written", summary.pairs_written},
                    {"num_instructions", ds.header.tasks.size()},
                    {"feature_len", ds.header.feature_len}});
    return 0;
}

// ---------------------------------------------------------------------------
// train-verifier / eval-verifier
// ---------------------------------------------------------------------------

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

bok::VerifierConfig infer_verifier_config(const std::vector<bok::ComparisonBatch>& batches,
                                          int hidden, bok::Objective objective) {
    bok::VerifierConfig vc;
    vc.feature_len = static_cast<int>(batches.front().obs.features.size());
    int max_instr = 0;
    for (const auto& b : batches) max_instr = std::max(max_instr, b.obs.instruction_id);
    vc.num_instructions = max_instr + 1;
    vc.hidden = hidden;
    vc.objective = objective;
    return vc;
}

std::string metrics_csv_row(double alpha, const bok::PairMetrics& m) {
    return fmt_g(alpha) + "," + bok::detail::fmt17(m.precision) + "," +
           bok::detail::fmt17(m.recall) + "," + bok::detail::fmt17(m.f1) + "," +
           bok::detail::fmt17(m.accuracy) + "\n";
}

int run_train_verifier(const CLI::App& app, CommonOpts& common, std::string& prefs_path,
                       std::string& eval_prefs_path, std::vector<double>& alphas, double& lr,
                       int& epochs, int& hidden, int& batches_per_update,
                       std::string& objective_name_str) {
    json cfg = common.resolve_common(app);
    resolve(app, "--prefs", cfg, "prefs", prefs_path);
    resolve(app, "--eval-prefs", cfg, "eval_prefs", eval_prefs_path);
    resolve(app, "--alpha", cfg, "alpha", alphas);
    resolve(app, "--learning-rate", cfg, "learning_rate", lr);
    resolve(app, "--epochs", cfg, "epochs", epochs);
    resolve(app, "--hidden", cfg, "hidden", hidden);
    resolve(app, "--batches-per-update", cfg, "batches_per_update", batches_per_update);
    resolve(app, "--objective", cfg, "objective", objective_name_str);

    if (prefs_path.empty()) {
        throw bok::Error(bok::Errc::invalid_argument, "--prefs is required");
    }
    require_input_file(prefs_path, "preference file");
    const bok::Objective objective = bok::objective_from_name(objective_name_str);
    const std::vector<bok::ComparisonBatch> batches = bok::load_preferences(prefs_path);
    std::vector<bok::ComparisonBatch> eval_batches;
    if (!eval_prefs_path.empty()) {
        require_input_file(eval_prefs_path, "eval preference file");
        eval_batches = bok::load_preferences(eval_prefs_path);
    }
    const std::vector<bok::ComparisonBatch>& metric_batches =
        eval_batches.empty() ? batches : eval_batches;

    json resolved{{"seed", common.seed},       {"out_dir", common.out_dir},
                  {"prefs", prefs_path},       {"eval_prefs", eval_prefs_path},
                  {"alpha", alphas},           {"learning_rate", lr},
                  {"epochs", epochs},          {"hidden", hidden},
                  {"batches_per_update", batches_per_update},
                  {"objective", objective_name_str}};
    write_json(fs::path(common.out_dir) / "resolved_config.json", resolved);

    const bok::VerifierConfig vc = infer_verifier_config(batches, hidden, objective);
    std::string metrics_csv = "alpha,precision,recall,f1,accuracy\n";
    std::string log_csv = "alpha,epoch,mean_loss,eval_accuracy\n";
    for (double alpha : alphas) {
        bok::TrainConfig tc;
        tc.alpha = alpha;
        tc.learning_rate = lr;
        tc.epochs = epochs;
        tc.batches_per_update = batches_per_update;
        tc.seed = common.seed;
        const bok::TrainResult result =
            bok::train(batches, vc, tc, eval_batches.empty() ? nullptr : &eval_batches);

        const std::string suffix = alphas.size() == 1 ? "" : "_alpha" + fmt_g(alpha);
        write_json(fs::path(common.out_dir) / ("checkpoint" + suffix + ".json"),
                   result.model.to_json());
        for (const auto& e : result.log) {
            log_csv += fmt_g(alpha) + "," + std::to_string(e.epoch) + "," +
                       bok::detail::fmt17(e.mean_loss) + "," +
                       (std::isnan(e.eval_accuracy) ? "" : bok::detail::fmt17(e.eval_accuracy)) +
                       "\n";
        }
        metrics_csv += metrics_csv_row(alpha, bok::evaluate_pairs(result.model, metric_batches));
    }
    write_file(fs::path(common.out_dir) / "training_log.csv", log_csv);
    write_file(fs::path(common.out_dir) / "metrics.csv", metrics_csv);
    return 0;
}

int run_eval_verifier(const CLI::App& app, CommonOpts& common, std::string& prefs_path,
                      std::string& checkpoint_path) {
    json cfg = common.resolve_common(app);
    resolve(app, "--prefs", cfg, "prefs", prefs_path);
    resolve(app, "--checkpoint", cfg, "checkpoint", checkpoint_path);
    if (prefs_path.empty() || checkpoint_path.empty()) {
        throw bok::Error(bok::Errc::invalid_argument, "--prefs and --checkpoint are required");
    }
    require_input_file(prefs_path, "preference file");
    require_input_file(checkpoint_path, "checkpoint");

    json resolved{{"seed", common.seed},
                  {"out_dir", common.out_dir},
                  {"prefs", prefs_path},
                  {"checkpoint", checkpoint_path}};
    write_json(fs::path(common.out_dir) / "resolved_config.json", resolved);

    std::ifstream in(checkpoint_path);
    json jc;
    try {
        jc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw bok::Error(bok::Errc::parse_error, "checkpoint: " + std::string(e.what()));
    }
    const bok::VerifierModel model = bok::VerifierModel::from_json(jc);
    const bok::PairMetrics m = bok::evaluate_pairs(model, bok::load_preferences(prefs_path));
    write_json(fs::path(common.out_dir) / "metrics.json",
               json{{"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1},
                    {"accuracy", m.accuracy},
                    {"pairs", m.pairs}});
    return 0;
}

// ---------------------------------------------------------------------------
// eval-closed-loop
// ---------------------------------------------------------------------------

int run_eval_closed_loop(const CLI::App& app, CommonOpts& common, SimOpts& sim, int& episodes,
                         int& n_hat, int& k_hat, double& temperature, int& horizon,
                         std::vector<std::string>& modes, std::string& checkpoint_path,
                         bool& log_rollouts) {
    json cfg = common.resolve_common(app);
    sim.resolve_all(app, cfg);
    resolve(app, "--eval-episodes", cfg, "eval_episodes", episodes);
    resolve(app, "--n-hat", cfg, "n_hat", n_hat);
    resolve(app, "--k-hat", cfg, "k_hat", k_hat);
    resolve(app, "--temperature", cfg, "temperature", temperature);
    resolve(app, "--horizon", cfg, "horizon", horizon);
    resolve(app, "--modes", cfg, "modes", modes);
    resolve(app, "--checkpoint", cfg, "checkpoint", checkpoint_path);
    if (app.count("--log-rollouts") == 0 && cfg.contains("log_rollouts")) {
        log_rollouts = cfg.at("log_rollouts").get<bool>();
    }

    const bok::DemoDataset ds = sim.dataset(common.seed);
    const bok::NoisyPolicy policy = sim.policy(ds);
    bok::ToyEnv env(sim.env_config());

    std::optional<bok::VerifierModel> model;
    for (const std::string& m : modes) {
        if (m == "verifier") {
            if (checkpoint_path.empty()) {
                throw bok::Error(bok::Errc::invalid_argument,
                                 "--checkpoint is required for verifier mode");
            }
            require_input_file(checkpoint_path, "checkpoint");
            std::ifstream in(checkpoint_path);
            model = bok::VerifierModel::from_json(json::parse(in));
        }
    }

    json resolved = sim.to_json();
    resolved["seed"] = common.seed;
    resolved["out_dir"] = common.out_dir;
    resolved["eval_episodes"] = episodes;
    resolved["n_hat"] = n_hat;
    resolved["k_hat"] = k_hat;
    resolved["temperature"] = temperature;
    resolved["horizon"] = horizon;
    resolved["modes"] = modes;
    resolved["checkpoint"] = checkpoint_path;
    resolved["log_rollouts"] = log_rollouts;
    write_json(fs::path(common.out_dir) / "resolved_config.json", resolved);

    json summary = json::object();
    std::vector<std::pair<std::string, bok::EvalSummary>> results;
    for (const std::string& mode_name : modes) {
        bok::RolloutConfig rc;
        rc.mode = bok::selection_mode_from_name(mode_name);
        rc.n_hat = n_hat;
        rc.k_hat = k_hat;
        rc.temperature = temperature;
        rc.horizon = horizon;
        const bok::VerifierModel* mp =
            rc.mode == bok::SelectionMode::verifier ? &model.value() : nullptr;

        if (log_rollouts) {
            std::string log;
            for (int ep = 0; ep < episodes; ++ep) {
                const std::uint64_t ep_seed =
                    bok::derive_seed(common.seed, static_cast<std::uint64_t>(ep));
                env.reset(ep % env.config().num_tasks, bok::derive_seed(ep_seed, 0xA));
                const bok::RolloutResult r =
                    bok::run_episode(env, policy, mp, rc, bok::derive_seed(ep_seed, 0xB));
                for (std::size_t t = 0; t < r.selected.size(); ++t) {
                    log += "{\"episode\":" + std::to_string(ep) + ",\"t\":" + std::to_string(t) +
                           ",\"action\":";
                    bok::detail::append_action17(log, r.selected[t]);
                    log += ",\"rmse_to_expert\":" + bok::detail::fmt17(r.chosen_rmse[t]) +
                           ",\"success\":";
                    log += (t + 1 == r.selected.size() && r.success) ? "true" : "false";
                    log += "}\n";
                }
            }
            write_file(fs::path(common.out_dir) / ("rollouts_" + mode_name + ".jsonl"), log);
        }
        const bok::EvalSummary s = bok::evaluate(env, policy, mp, rc, episodes, common.seed);
        results.emplace_back(mode_name, s);
        summary[mode_name] = json{{"success_rate", s.success_rate},
                                  {"success_stderr", s.success_stderr},
                                  {"mean_step_rmse", s.mean_step_rmse},
                                  {"episodes", s.episodes}};
    }

    // Paired one-sided sign tests between every ordered mode pair.
    json tests = json::object();
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (std::size_t j = 0; j < results.size(); ++j) {
            if (i == j) continue;
            tests[results[i].first + "_beats_" + results[j].first] =
                bok::paired_sign_test(results[i].second.successes, results[j].second.successes);
        }
    }
    if (!tests.empty()) summary["paired_sign_test_p"] = tests;
    write_json(fs::path(common.out_dir) / "summary.json", summary);
    return 0;
}

// ---------------------------------------------------------------------------
// latency-model
// ---------------------------------------------------------------------------

bok::ScalingCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bok::Error(bok::Errc::io_error, "cannot open: " + path);
    bok::ScalingCurve curve;
    std::string line;
    if (!std::getline(in, line) || line.rfind("k,", 0) != 0) {
        throw bok::Error(bok::Errc::parse_error, "curve CSV missing header: " + path);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw bok::Error(bok::Errc::parse_error, "bad curve row: " + line);
        }
        curve.k.push_back(std::stoi(line.substr(0, c1)));
        curve.mean_rmse.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
        curve.stderr_rmse.push_back(std::stod(line.substr(c2 + 1)));
    }
    return curve;
}

int run_latency_model(const CLI::App& app, CommonOpts& common, std::string& profile_path,
                      std::string& curve_path, int& n_hat, int& k_max) {
    json cfg = common.resolve_common(app);
    resolve(app, "--profile", cfg, "profile", profile_path);
    resolve(app, "--curve", cfg, "curve", curve_path);
    resolve(app, "--n-hat", cfg, "n_hat", n_hat);
    resolve(app, "--k-max", cfg, "k_max", k_max);

    bok::CostProfile profile;
    if (profile_path.empty()) {
        profile = bok::default_profile();
    } else {
        require_input_file(profile_path, "cost profile");
        std::ifstream in(profile_path);
        profile = bok::profile_from_json(json::parse(in));
    }

    json resolved{{"seed", common.seed}, {"out_dir", common.out_dir},
                  {"profile", profile_path}, {"curve", curve_path},
                  {"n_hat", n_hat},       {"k_max", k_max}};
    write_json(fs::path(common.out_dir) / "resolved_config.json", resolved);
    write_json(fs::path(common.out_dir) / "profile.json", bok::profile_to_json(profile));

    const std::vector<int> grid = bok::powers_of_two_grid(k_max);
    for (bok::Strategy strategy : {bok::Strategy::gaussian, bok::Strategy::policy_sampling}) {
        std::string csv = "k,latency_seconds,strategy\n";
        for (int k : grid) {
            csv += std::to_string(k) + "," +
                   bok::detail::fmt17(bok::latency(profile, strategy, n_hat, k)) + "," +
                   bok::strategy_name(strategy) + "\n";
        }
        write_file(fs::path(common.out_dir) /
                       ("latency_" + std::string(bok::strategy_name(strategy)) + ".csv"),
                   csv);
    }

    if (!curve_path.empty()) {
        require_input_file(curve_path, "error curve CSV");
        const bok::ScalingCurve curve = load_curve_csv(curve_path);
        for (bok::Strategy strategy : {bok::Strategy::gaussian, bok::Strategy::policy_sampling}) {
            const bok::BudgetCurve budget = bok::error_vs_budget(profile, curve, strategy, n_hat);
            write_file(fs::path(common.out_dir) /
                           ("budget_" + std::string(bok::strategy_name(strategy)) + ".csv"),
                       bok::budget_to_csv(budget));
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"best-of-k action sampling and verification toolkit"};
    app.require_subcommand(1);

    // scaling-sweep
    auto* sweep = app.add_subcommand("scaling-sweep",
                                     "oracle best-of-k curves and power-law fits");
    CommonOpts sweep_common;
    SimOpts sweep_sim;
    int sweep_tuples = 1000, sweep_kmax = 1024, sweep_fit_samples = 4, sweep_dump = 0;
    double sweep_temp = 1.0;
    std::vector<std::string> sweep_samplers = {"random", "policy", "gaussian"};
    sweep_common.attach(sweep);
    sweep_sim.attach(sweep);
    sweep->add_option("--tuples", sweep_tuples, "tuples drawn from the demo dataset");
    sweep->add_option("--k-max", sweep_kmax, "largest candidate count");
    sweep->add_option("--temperature", sweep_temp, "policy sampling temperature");
    sweep->add_option("--fit-samples", sweep_fit_samples, "policy samples per Gaussian fit");
    sweep->add_option("--samplers", sweep_samplers, "subset of {random, policy, gaussian}");
    sweep->add_option("--dump-candidates", sweep_dump,
                      "also dump this many first-tuple candidates per sampler (JSONL)");

    // gen-prefs
    auto* prefs = app.add_subcommand("gen-prefs", "synthetic action preference dataset");
    CommonOpts prefs_common;
    SimOpts prefs_sim;
    int prefs_tuples = 2000, prefs_n = 32, prefs_k = 6;
    double prefs_temp = 1.0;
    prefs_common.attach(prefs);
    prefs_sim.attach(prefs);
    prefs->add_option("--tuples", prefs_tuples, "tuples drawn from the demo dataset");
    prefs->add_option("--n", prefs_n, "candidates sampled per tuple");
    prefs->add_option("--k", prefs_k, "representatives after clustering");
    prefs->add_option("--temperature", prefs_temp, "policy sampling temperature");

    // train-verifier
    auto* trainv = app.add_subcommand("train-verifier", "train the action verifier");
    CommonOpts train_common;
    std::string train_prefs, train_eval_prefs;
    std::vector<double> train_alphas = {0.1};
    double train_lr = 1e-2;
    int train_epochs = 1, train_hidden = 64, train_bpu = 1;
    std::string train_objective = "bt_margin";
    train_common.attach(trainv);
    trainv->add_option("--prefs", train_prefs, "training preference file");
    trainv->add_option("--eval-prefs", train_eval_prefs, "held-out preference file");
    trainv->add_option("--alpha", train_alphas, "margin weight(s); several values run a sweep");
    trainv->add_option("--learning-rate", train_lr, "SGD learning rate");
    trainv->add_option("--epochs", train_epochs, "training epochs");
    trainv->add_option("--hidden", train_hidden, "hidden units");
    trainv->add_option("--batches-per-update", train_bpu, "comparison batches per SGD step");
    trainv->add_option("--objective", train_objective, "bt_margin or rmse_regression");

    // eval-verifier
    auto* evalv = app.add_subcommand("eval-verifier", "pairwise classification metrics");
    CommonOpts evalv_common;
    std::string evalv_prefs, evalv_checkpoint;
    evalv_common.attach(evalv);
    evalv->add_option("--prefs", evalv_prefs, "preference file");
    evalv->add_option("--checkpoint", evalv_checkpoint, "verifier checkpoint");

    // eval-closed-loop
    auto* loop = app.add_subcommand("eval-closed-loop", "closed-loop success-rate evaluation");
    CommonOpts loop_common;
    SimOpts loop_sim;
    int loop_episodes = 100, loop_nhat = 5, loop_khat = 16, loop_horizon = 60;
    double loop_temp = 1.0;
    std::vector<std::string> loop_modes = {"verifier", "greedy"};
    std::string loop_checkpoint;
    bool loop_log = false;
    loop_common.attach(loop);
    loop_sim.attach(loop);
    loop->add_option("--eval-episodes", loop_episodes, "episodes per mode");
    loop->add_option("--n-hat", loop_nhat, "initial policy samples per step");
    loop->add_option("--k-hat", loop_khat, "proposal samples per step");
    loop->add_option("--temperature", loop_temp, "policy sampling temperature");
    loop->add_option("--horizon", loop_horizon, "max steps per episode");
    loop->add_option("--modes", loop_modes,
                     "selection modes: verifier oracle greedy random_select majority_mean");
    loop->add_option("--checkpoint", loop_checkpoint, "verifier checkpoint");
    loop->add_flag("--log-rollouts", loop_log, "write per-step JSONL rollout logs");

    // latency-model
    auto* lat = app.add_subcommand("latency-model", "serving-cost budget curves");
    CommonOpts lat_common;
    std::string lat_profile, lat_curve;
    int lat_nhat = 5, lat_kmax = 128;
    lat_common.attach(lat);
    lat->add_option("--profile", lat_profile, "cost profile JSON (default: built-in table)");
    lat->add_option("--curve", lat_curve, "error curve CSV to join (k,mean_rmse,stderr)");
    lat->add_option("--n-hat", lat_nhat, "initial policy samples for the gaussian strategy");
    lat->add_option("--k-max", lat_kmax, "largest candidate count (within table domain)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            return run_scaling_sweep(*sweep, sweep_common, sweep_sim, sweep_tuples, sweep_kmax,
                                     sweep_temp, sweep_fit_samples, sweep_samplers, sweep_dump);
        }
        if (prefs->parsed()) {
            return run_gen_prefs(*prefs, prefs_common, prefs_sim, prefs_tuples, prefs_n, prefs_k,
                                 prefs_temp);
        }
        if (trainv->parsed()) {
            return run_train_verifier(*trainv, train_common, train_prefs, train_eval_prefs,
                                      train_alphas, train_lr, train_epochs, train_hidden,
                                      train_bpu, train_objective);
        }
        if (evalv->parsed()) {
            return run_eval_verifier(*evalv, evalv_common, evalv_prefs, evalv_checkpoint);
        }
        if (loop->parsed()) {
            return run_eval_closed_loop(*loop, loop_common, loop_sim, loop_episodes, loop_nhat,
                                        loop_khat, loop_temp, loop_horizon, loop_modes,
                                        loop_checkpoint, loop_log);
        }
        if (lat->parsed()) {
            return run_latency_model(*lat, lat_common, lat_profile, lat_curve, lat_nhat,
                                     lat_kmax);
        }
    } catch (const bok::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_exit(e);
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
