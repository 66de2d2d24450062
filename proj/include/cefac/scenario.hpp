#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cefac/adversary.hpp"
#include "cefac/digraph.hpp"
#include "cefac/evidence.hpp"

namespace cefac::sim {

struct EavesdropperSpec {
    bool external = true;
    std::size_t node = 0;  // internal eavesdroppers only
};

struct ProtocolParams {
    double tau = 1.0;
    double delta = 1e-6;
    double f = 0.0;
    std::vector<double> epsilon;       // per node; empty -> 0.5 everywhere
    std::size_t stability_rounds = 0;  // N_s; 0 -> 2N
    unsigned key_bits = 32;
    std::size_t max_rounds = 1000;
    bool encrypt_weights = true;
    FLocalSemantics f_semantics = FLocalSemantics::Neighborhood;
    protocol::ThresholdSemantics threshold_semantics = protocol::ThresholdSemantics::Algorithm;
    bool waive_robustness_check = false;
};

/// Fully resolved experiment description: graph, per-node evidence, attacker
/// and eavesdropper scripts, protocol parameters and the master seed.
struct ScenarioConfig {
    FrameOfDiscernment frame;
    DirectedGraph graph;
    std::vector<MassFunction> evidence;  // one per node
    std::vector<adversary::AttackerSpec> attackers;
    std::vector<EavesdropperSpec> eavesdroppers;
    ProtocolParams params;
    std::uint64_t seed = 0;

    std::set<std::size_t> attacker_ids() const;
    std::set<std::size_t> normal_ids() const;

    /// Structural checks: id ranges, attacker/eavesdropper disjointness, the
    /// f-fraction attack model and honest-subgraph strong robustness (the
    /// latter two can be waived with a logged warning).
    void validate() const;
};

/// Scenario file parsing ("schema": 1). Unknown fields are rejected. Graph and
/// evidence entries may be explicit or generator specs resolved from the seed.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

/// Seeded Erdos-Renyi style digraph: each ordered pair carries an edge with
/// probability density. Optionally retries until strongly connected.
DirectedGraph random_digraph(std::size_t n, double density, std::uint64_t seed,
                             bool require_strongly_connected = false);

/// Likelihood-based BBA: average Gaussian likelihoods of the drawn samples
/// against each class mean, normalized over the singletons, with `discount`
/// mass on the full frame for ignorance.
MassFunction generate_gaussian_evidence(const FrameOfDiscernment& frame, double true_mean,
                                        const std::vector<double>& frame_means, double sigma,
                                        std::size_t n_samples, std::mt19937_64& rng,
                                        double discount = 0.1);

/// Built-in scenario kinds for the CLI.
ScenarioConfig make_gaussian5_scenario(std::uint64_t seed);
ScenarioConfig make_recon20_scenario(std::uint64_t seed);
ScenarioConfig make_random_scenario(std::size_t n, double density, std::uint64_t seed);

}  // namespace cefac::sim
