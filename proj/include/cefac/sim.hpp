#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>

#include "cefac/adversary.hpp"
#include "cefac/credibility.hpp"
#include "cefac/scenario.hpp"

namespace cefac::sim {

struct NodeOutcome {
    std::size_t node = 0;
    bool normal = true;
    std::vector<double> final_state;
    std::optional<WavccmeMatrix> wavccme;
    std::optional<FusionResult> fusion;
    std::string assembly_error;  // attacker states may fail to assemble
    std::set<std::size_t> identified_dos;
    std::set<std::size_t> identified_deception;
};

struct PrivacyRow {
    bool external = true;
    std::size_t eavesdropper = static_cast<std::size_t>(-1);
    std::size_t target = 0;
    bool determined = false;
    bool estimate_matches = false;  // when determined: estimate equals the true x(0)
};

struct SimulationResult {
    bool converged = false;
    std::size_t rounds = 0;
    std::size_t normal_count = 0;
    std::set<std::size_t> true_attackers;
    std::vector<std::vector<std::vector<double>>> snapshots;  // [round][node] -> x
    std::vector<NodeOutcome> outcomes;
    std::optional<WavccmeMatrix> centralized_wavccme_ref;
    std::optional<FusionResult> centralized_fusion_ref;
    std::vector<PrivacyRow> privacy;

    // Populated for honest runs: the private assignment behind the run and
    // the accumulated eavesdropper views, for privacy analysis and witnesses.
    std::shared_ptr<adversary::PrivateWorld> ground_truth;
    std::vector<std::pair<EavesdropperSpec, adversary::EavesdropperView>> views;

    const NodeOutcome& outcome_of(std::size_t node) const;
};

struct RunOptions {
    std::size_t max_rounds_override = 0;
    /// Called after every round with the per-node states (round, states).
    std::function<void(std::size_t, const std::vector<std::vector<double>>&)> on_round;
};

/// Synchronous round engine: outboxes collected each round are delivered the
/// next. Runs until every normal node's state machine converges or the round
/// budget runs out; then every node derives its WAVCCME and fusion locally.
/// Deterministic given the scenario seed.
SimulationResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// The benchmark: the credibility-weighted fusion evaluated centrally over
/// the given evidence (normal nodes only in attack scenarios).
FusionResult centralized_reference(const std::vector<MassFunction>& evidence, double tau, double delta);

struct HighConflictConfig {
    std::vector<std::string> frame_labels{"A1", "A2", "A3", "A4", "A5"};
    std::vector<double> class_means{-2.0, -1.0, 0.0, 1.0, 2.0};
    double sigma = 1.0;
    std::size_t inliers = 15;
    std::size_t outliers = 5;
    double inlier_mean = -2.0;
    double outlier_mean = 2.0;
    // A small ignorance discount keeps the outliers' near-zero class masses
    // intact, which is what lets plain Dempster go counterintuitive.
    std::size_t n_samples = 3;
    double discount = 0.005;
    double tau = 1.0;
    double delta = 1e-6;
};

struct TrialRecord {
    bool accepted = false;
    std::size_t oracle_decision = 0;
    std::size_t dempster_decision = 0;
    std::size_t cefac_decision = 0;
    std::vector<double> cefac_probs;
};

/// One high-conflict classification trial: generates mixed evidence, filters
/// on "credible oracle says class 1, plain Dempster disagrees", and records
/// the decision reached through the summed-state route on accepted trials.
TrialRecord high_conflict_trial(const HighConflictConfig& cfg, std::mt19937_64& rng);

}  // namespace cefac::sim
