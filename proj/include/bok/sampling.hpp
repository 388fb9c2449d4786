#pragma once

// Candidate generation: uniform random token sampling, policy sampling, and
// the Gaussian proposal construction (joint 6-dim fit over the continuous
// dims plus gripper majority vote) that makes large candidate sets cheap.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "bok/action.hpp"
#include "bok/common.hpp"
#include "bok/policy.hpp"

namespace bok {

enum class Provenance { random, policy, gaussian };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::random: return "random";
        case Provenance::policy: return "policy";
        case Provenance::gaussian: return "gaussian";
    }
    return "?";
}

struct CandidateSet {
    std::vector<ActionVector> actions;
    Provenance provenance = Provenance::policy;
};

struct ProposalDistribution {
    Eigen::Matrix<double, 6, 1> mean = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Identity();
    int gripper = 1;
};

// Regularization floor added to the covariance diagonal; a handful of policy
// samples routinely yields a rank-deficient sample covariance.
inline constexpr double kCovarianceFloor = 1e-6;

// Each of the 7 tokens drawn uniformly (gripper from its two extreme bins),
// then detokenized to bin centers.
inline CandidateSet sample_random(int count, std::uint64_t seed) {
    if (count < 1) throw Error(Errc::invalid_argument, "count must be >= 1");
    Rng rng(seed);
    CandidateSet set;
    set.provenance = Provenance::random;
    set.actions.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        TokenizedAction t;
        for (std::size_t i = 0; i < kContinuousDims; ++i) {
            t.tokens[i] = static_cast<int>(rng.next_below(kTokenBins));
        }
        t.tokens[kContinuousDims] = rng.next_below(2) == 0 ? 0 : kTokenBins - 1;
        set.actions.push_back(detokenize(t));
    }
    return set;
}

inline CandidateSet sample_policy(const StochasticPolicy& policy, const Observation& obs,
                                  double temperature, int count, std::uint64_t seed) {
    if (count < 1) throw Error(Errc::invalid_argument, "count must be >= 1");
    if (temperature <= 0.0) throw Error(Errc::invalid_argument, "temperature must be > 0");
    CandidateSet set;
    set.provenance = Provenance::policy;
    set.actions = policy.sample(obs, temperature, count, seed);
    return set;
}

// Sample mean over the 6 continuous dims; sample covariance fitted to the
// translational and rotational components as two independent 3-dim blocks
// (cross-block covariances are not estimated: a joint 6-dim sample covariance
// from as few as 4-5 samples is rank-deficient, which pins every candidate to
// a low-dimensional slice and breaks best-of-k scaling). The floor is added
// to the diagonal. Gripper by majority vote, ties broken toward open (1).
inline ProposalDistribution fit_proposal(const CandidateSet& candidates) {
    const std::size_t n = candidates.actions.size();
    if (n < 2) {
        throw Error(Errc::invalid_argument,
                    "fit_proposal needs at least 2 candidates; raise the initial sample count");
    }
    ProposalDistribution prop;
    Eigen::MatrixXd x(n, 6);
    int open_votes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < kContinuousDims; ++d) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                candidates.actions[i].delta[d];
        }
        open_votes += candidates.actions[i].gripper;
    }
    prop.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - prop.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    prop.covariance.setZero();
    prop.covariance.block<3, 3>(0, 0) = cov.block<3, 3>(0, 0);
    prop.covariance.block<3, 3>(3, 3) = cov.block<3, 3>(3, 3);
    prop.covariance = 0.5 * (prop.covariance + prop.covariance.transpose());
    prop.covariance.diagonal().array() += kCovarianceFloor;
    prop.gripper = 2 * open_votes >= static_cast<int>(n) ? 1 : 0;
    return prop;
}

// Draws via the Cholesky factor, clamps to [-1, 1] and appends the proposal's
// fixed gripper state.
inline CandidateSet sample_gaussian(const ProposalDistribution& proposal, int count,
                                    std::uint64_t seed) {
    if (count < 1) throw Error(Errc::invalid_argument, "count must be >= 1");
    const Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(proposal.covariance);
    if (llt.info() != Eigen::Success) {
        throw Error(Errc::numeric_error, "proposal covariance is not positive definite");
    }
    const Eigen::Matrix<double, 6, 6> chol = llt.matrixL();
    Rng rng(seed);
    CandidateSet set;
    set.provenance = Provenance::gaussian;
    set.actions.reserve(static_cast<std::size_t>(count));
    Eigen::Matrix<double, 6, 1> z;
    for (int n = 0; n < count; ++n) {
        for (int d = 0; d < 6; ++d) z(d) = rng.gaussian();
        const Eigen::Matrix<double, 6, 1> v = proposal.mean + chol * z;
        ActionVector a;
        for (std::size_t d = 0; d < kContinuousDims; ++d) {
            a.delta[d] = clamp_unit(v(static_cast<Eigen::Index>(d)));
        }
        a.gripper = proposal.gripper;
        set.actions.push_back(a);
    }
    return set;
}

}  // namespace bok
