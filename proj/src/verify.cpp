#include "cefac/verify.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "cefac/oracles.hpp"
#include "cefac/sim.hpp"
#include "cefac/util.hpp"

namespace cefac::verify {

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
    Clock::time_point start = Clock::now();
    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

FrameOfDiscernment small_frame(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < n; ++k) labels.push_back("e" + std::to_string(k));
    return FrameOfDiscernment(labels);
}

sim::ScenarioConfig honest_scenario(std::size_t n, double density, std::uint64_t seed,
                                    bool strongly_connected, bool encrypt) {
    FrameOfDiscernment frame({"A1", "A2", "A3"});
    DirectedGraph graph = sim::random_digraph(n, density, seed, strongly_connected);
    std::vector<MassFunction> evidence;
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 erng(derive_seed(seed, 0xE, i));
        std::uniform_int_distribution<int> cls(0, 2);
        const double mean = std::vector<double>{-2.0, 0.0, 2.0}[cls(erng)];
        evidence.push_back(sim::generate_gaussian_evidence(frame, mean, {-2.0, 0.0, 2.0}, 1.0, 1, erng));
    }
    sim::ProtocolParams params;
    params.encrypt_weights = encrypt;
    params.max_rounds = 800;
    return sim::ScenarioConfig{std::move(frame), std::move(graph), std::move(evidence),
                               {},               {},               params,
                               seed};
}

CheckResult finish(CheckResult r, const Timer& t, double budget_s, std::size_t failures,
                   const std::string& detail) {
    r.seconds = t.elapsed();
    std::ostringstream os;
    os << detail;
    if (failures > 0) os << "; " << failures << " failure(s)";
    if (r.seconds >= budget_s) os << "; over the " << budget_s << "s budget";
    r.details = os.str();
    r.passed = failures == 0 && r.seconds < budget_s;
    return r;
}

}  // namespace

std::string format_result(const CheckResult& r) {
    std::ostringstream os;
    os << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " (" << r.details << "; "
       << r.seconds << "s)";
    return os.str();
}

CheckResult c1_dempster_oracle() {
    Timer t;
    CheckResult r{"C1", "dempster-combination-vs-brute-force-oracle"};
    std::mt19937_64 rng(1001);
    std::size_t failures = 0;
    const std::size_t trials = 1000;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t n = 2 + trial % 3;  // frames up to n = 4
        const auto frame = small_frame(n == 4 ? 4 : n);
        auto m1 = oracles::random_mass(frame, rng);
        auto m2 = oracles::random_mass(frame, rng);
        double k_oracle = 0.0;
        const auto expected = oracles::dempster_oracle(m1, m2, &k_oracle);
        if (k_oracle >= 1.0 - 1e-12) continue;
        const auto got = dempster_combine(m1, m2);
        for (std::uint32_t a = 1; a < frame.subset_count(); ++a) {
            oracles::LabelSet s;
            for (std::size_t k = 0; k < frame.size(); ++k) {
                if (a & (1u << k)) s.insert(frame.events()[k]);
            }
            if (std::abs(got.masses()[a] - oracles::oracle_mass_of(expected, s)) > 1e-10) {
                ++failures;
            }
        }
        if (std::abs(conflict_degree(m1, m2) - k_oracle) > 1e-12) ++failures;
    }
    return finish(std::move(r), t, 5.0, failures, std::to_string(trials) + " random pairs, n <= 4, tol 1e-10");
}

CheckResult c2_summed_state_identity() {
    Timer t;
    CheckResult r{"C2", "summed-states-equal-direct-wavccme"};
    std::mt19937_64 rng(2002);
    std::size_t failures = 0;
    const std::size_t trials = 200;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t n = 2 + trial % 3;
        const std::size_t n_nodes = 1 + trial % 10;
        const auto frame = small_frame(n);
        const double tau = 0.5 + 0.1 * static_cast<double>(trial % 20);
        std::vector<MassFunction> evidence;
        for (std::size_t i = 0; i < n_nodes; ++i) evidence.push_back(oracles::random_mass(frame, rng));

        std::vector<double> flat_sum(NodeInitialState::flat_length(n), 0.0);
        for (const auto& m : evidence) {
            const auto flat = build_initial_state(m, tau).flatten();
            for (std::size_t k = 0; k < flat.size(); ++k) flat_sum[k] += flat[k];
        }
        const auto assembled = assemble_wavccme(frame, flat_sum);
        const auto direct = centralized_wavccme(evidence, tau);
        for (std::size_t idx = 0; idx < assembled.values().data.size(); ++idx) {
            if (std::abs(assembled.values().data[idx] - direct.values().data[idx]) > 1e-12) {
                ++failures;
            }
        }
    }
    return finish(std::move(r), t, 10.0, failures,
                  std::to_string(trials) + " random evidence sets, N <= 10, n <= 4, tol 1e-12");
}

CheckResult c3_sum_preservation() {
    Timer t;
    CheckResult r{"C3", "reconstruction-preserves-the-network-sum"};
    std::size_t failures = 0;
    const std::size_t runs = 100;
    for (std::size_t run = 0; run < runs; ++run) {
        const std::size_t n = 3 + run % 18;  // up to 20 nodes
        auto cfg = honest_scenario(n, 0.3 + 0.02 * static_cast<double>(run % 15), 30000 + run, false,
                                   run % 4 == 0);  // exercise the encrypted path on a quarter of runs
        sim::RunOptions opts;
        opts.max_rounds_override = 3;
        const auto result = sim::run_scenario(cfg, opts);

        std::vector<double> sum0(NodeInitialState::flat_length(cfg.frame.size()), 0.0);
        for (const auto& m : cfg.evidence) {
            const auto flat = build_initial_state(m, cfg.params.tau).flatten();
            for (std::size_t k = 0; k < flat.size(); ++k) sum0[k] += flat[k];
        }
        std::vector<double> sum1(sum0.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x1 = result.snapshots.at(1)[i];
            for (std::size_t k = 0; k < sum1.size(); ++k) sum1[k] += x1[k];
        }
        if (max_abs_diff(sum0, sum1) > 1e-9) ++failures;
    }
    return finish(std::move(r), t, 30.0, failures,
                  std::to_string(runs) + " honest runs, N <= 20, tol 1e-9");
}

CheckResult c4_honest_convergence() {
    Timer t;
    CheckResult r{"C4", "honest-consensus-hits-the-mean-and-the-centralized-fusion"};
    std::size_t failures = 0;
    const std::size_t runs = 50;
    for (std::size_t run = 0; run < runs; ++run) {
        const std::size_t n = 4 + run % 9;  // 4..12 nodes
        auto cfg = honest_scenario(n, 0.5, 40000 + run, true, false);
        const auto result = sim::run_scenario(cfg);
        if (!result.converged) {
            ++failures;
            continue;
        }
        std::vector<double> mean(NodeInitialState::flat_length(cfg.frame.size()), 0.0);
        for (const auto& m : cfg.evidence) {
            const auto flat = build_initial_state(m, cfg.params.tau).flatten();
            for (std::size_t k = 0; k < flat.size(); ++k) mean[k] += flat[k];
        }
        for (double& v : mean) v /= static_cast<double>(n);

        const auto central =
            sim::centralized_reference(cfg.evidence, cfg.params.tau, cfg.params.delta);
        for (const auto& out : result.outcomes) {
            if (max_abs_diff(out.final_state, mean) > 1e-6) ++failures;
            if (!out.fusion) {
                ++failures;
                continue;
            }
            for (std::size_t e = 0; e < central.event_probs.size(); ++e) {
                if (std::abs(out.fusion->event_probs[e] - central.event_probs[e]) > 1e-6) ++failures;
            }
        }
    }
    return finish(std::move(r), t, 120.0, failures,
                  std::to_string(runs) + " strongly connected digraphs, tol 1e-6");
}

namespace {

struct Recon20Outcome {
    sim::ScenarioConfig cfg;
    sim::SimulationResult result;
};

const Recon20Outcome& recon20_run() {
    static const Recon20Outcome outcome = [] {
        auto cfg = sim::make_recon20_scenario(7);
        auto result = sim::run_scenario(cfg);
        return Recon20Outcome{std::move(cfg), std::move(result)};
    }();
    return outcome;
}

}  // namespace

CheckResult c5_attack_convergence() {
    Timer t;
    CheckResult r{"C5", "recon20-under-attack-matches-the-centralized-benchmark"};
    std::size_t failures = 0;
    std::ostringstream detail;
    const auto& [cfg, result] = recon20_run();
    if (!result.converged) {
        return finish(std::move(r), t, 60.0, 1, "run did not converge");
    }
    const auto attackers = cfg.attacker_ids();
    std::vector<double> target(NodeInitialState::flat_length(cfg.frame.size()), 0.0);
    for (std::size_t i = 0; i < cfg.graph.size(); ++i) {
        if (attackers.count(i)) continue;
        const auto flat = build_initial_state(cfg.evidence[i], cfg.params.tau).flatten();
        for (std::size_t k = 0; k < flat.size(); ++k) target[k] += flat[k];
    }
    for (double& v : target) v /= static_cast<double>(result.normal_count);

    const auto& central = *result.centralized_fusion_ref;
    for (const auto& out : result.outcomes) {
        if (!out.normal) continue;
        if (max_abs_diff(out.final_state, target) > 1e-6) ++failures;
        if (!out.fusion) {
            ++failures;
            continue;
        }
        for (std::size_t e = 0; e < central.event_probs.size(); ++e) {
            if (std::abs(out.fusion->event_probs[e] - central.event_probs[e]) > 1e-6) ++failures;
        }
        for (std::size_t k = 0; k < central.m_fused.masses().size(); ++k) {
            if (std::abs(out.fusion->m_fused.masses()[k] - central.m_fused.masses()[k]) > 1e-6) {
                ++failures;
            }
        }
    }

    // Deceivers agree with each other but not with the normal nodes; DoS nodes
    // sit elsewhere entirely.
    std::vector<std::size_t> deceivers, dos;
    for (const auto& a : cfg.attackers) {
        if (a.kind == adversary::AttackKind::Deception) deceivers.push_back(a.node);
        else dos.push_back(a.node);
    }
    const auto& d0 = result.outcome_of(deceivers[0]).final_state;
    const auto& d1 = result.outcome_of(deceivers[1]).final_state;
    if (max_abs_diff(d0, d1) > 1e-6) ++failures;
    for (std::size_t d : deceivers) {
        if (max_abs_diff(result.outcome_of(d).final_state, target) <= 1e-3) ++failures;
    }
    for (std::size_t d : dos) {
        if (max_abs_diff(result.outcome_of(d).final_state, target) <= 1e-3) ++failures;
    }
    detail << "16 normal nodes vs centralized oracle, tol 1e-6; attacker states split off (rounds="
           << result.rounds << ")";
    return finish(std::move(r), t, 60.0, failures, detail.str());
}

CheckResult c6_attacker_identification() {
    Timer t;
    CheckResult r{"C6", "recon20-attacker-identification-is-exact"};
    std::size_t failures = 0;
    const auto& [cfg, result] = recon20_run();
    std::set<std::size_t> true_dos, true_deception;
    for (const auto& a : cfg.attackers) {
        if (a.kind == adversary::AttackKind::DoS) true_dos.insert(a.node);
        else true_deception.insert(a.node);
    }
    for (const auto& out : result.outcomes) {
        if (!out.normal) continue;
        std::set<std::size_t> hood;
        for (std::size_t j : cfg.graph.in_neighbors(out.node)) hood.insert(j);
        for (std::size_t j : cfg.graph.out_neighbors(out.node)) hood.insert(j);
        std::set<std::size_t> expect_dos, expect_dec;
        for (std::size_t j : hood) {
            if (true_dos.count(j)) expect_dos.insert(j);
            if (true_deception.count(j)) expect_dec.insert(j);
        }
        if (out.identified_dos != expect_dos) ++failures;
        if (out.identified_deception != expect_dec) ++failures;
    }
    return finish(std::move(r), t, 60.0, failures,
                  "per-node neighborhood sets, zero false positives/negatives required");
}

CheckResult c7_privacy() {
    Timer t;
    CheckResult r{"C7", "eavesdropper-reconstruction-underdetermined-and-ablation-flip"};
    std::size_t failures = 0;
    const std::size_t runs = 100;
    for (std::size_t run = 0; run < runs; ++run) {
        const std::size_t n = 4 + run % 5;
        auto cfg = honest_scenario(n, 0.45, 70000 + run, true, true);
        cfg.eavesdroppers.push_back({false, run % n});
        cfg.eavesdroppers.push_back({true, 0});
        const auto result = sim::run_scenario(cfg);
        if (!result.converged) {
            ++failures;
            continue;
        }
        const std::size_t h = run % n;
        for (const auto& row : result.privacy) {
            if (!row.external) {
                bool has_other_out = false;
                for (std::size_t j : cfg.graph.out_neighbors(row.target)) {
                    has_other_out = has_other_out || j != h;
                }
                if (has_other_out && row.determined) ++failures;
            } else if (row.determined) {
                ++failures;  // weights are encrypted; nothing should pin
            }
        }

        // Ablation: plaintext weights flip the external verdict.
        auto ablated = honest_scenario(n, 0.45, 70000 + run, true, false);
        ablated.eavesdroppers.push_back({true, 0});
        const auto flipped = sim::run_scenario(ablated);
        for (const auto& row : flipped.privacy) {
            if (row.external && (!row.determined || !row.estimate_matches)) ++failures;
        }
    }
    return finish(std::move(r), t, 60.0, failures,
                  std::to_string(runs) + " seeded runs, internal+external views, ablation flip");
}

CheckResult c8_paillier() {
    Timer t;
    CheckResult r{"C8", "paillier-round-trip-and-additive-homomorphism"};
    std::size_t failures = 0;
    paillier::Rng krng(808);
    const auto kp = paillier::keygen(32, krng);
    paillier::Rng erng(809);
    for (long m = 0; m <= 10000; ++m) {
        const auto c = paillier::encrypt(kp.pub, mpz_class(m), erng);
        if (paillier::decrypt(kp, c) != m) ++failures;
    }
    std::mt19937_64 rng(810);
    std::uniform_int_distribution<long> dist(0, 10000);
    for (int i = 0; i < 500; ++i) {
        const long a = dist(rng), b = dist(rng);
        const auto ca = paillier::encrypt(kp.pub, mpz_class(a), erng);
        const auto cb = paillier::encrypt(kp.pub, mpz_class(b), erng);
        const auto sum = paillier::homomorphic_add(kp.pub, ca, cb);
        if (paillier::decrypt(kp, sum) != a + b) ++failures;
    }
    return finish(std::move(r), t, 30.0, failures,
                  "exhaustive m in [0,10^4] plus 500 homomorphic sums, exact");
}

CheckResult c9_high_conflict() {
    Timer t;
    CheckResult r{"C9", "high-conflict-trials-decided-correctly"};
    std::mt19937_64 rng(909);
    sim::HighConflictConfig cfg;
    std::size_t accepted = 0, correct = 0, dempster_wrong = 0, raw = 0;
    const std::size_t want = 100;
    while (accepted < want && raw < 5000) {
        ++raw;
        const auto trial = sim::high_conflict_trial(cfg, rng);
        if (!trial.accepted) continue;
        ++accepted;
        if (trial.cefac_decision == 0) ++correct;
        if (trial.dempster_decision != 0) ++dempster_wrong;
    }
    std::size_t failures = 0;
    if (accepted < want) ++failures;
    if (correct * 10 < accepted * 9) ++failures;  // >= 90 %
    if (dempster_wrong != accepted) ++failures;
    std::ostringstream detail;
    detail << accepted << " accepted of " << raw << " raw trials; credible decision correct in "
           << correct << ", plain Dempster wrong in " << dempster_wrong;
    return finish(std::move(r), t, 300.0, failures, detail.str());
}

CheckResult c10_robustness_checkers() {
    Timer t;
    CheckResult r{"C10", "robustness-predicates-vs-naive-re-implementations"};
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t failures = 0;
    const std::size_t graphs = 200;
    for (std::size_t trial = 0; trial < graphs; ++trial) {
        const std::size_t n = 2 + trial % 5;  // up to 6 nodes
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && unit(rng) < 0.45) edges.emplace_back(i, j);
            }
        }
        DirectedGraph g(n, edges);
        const double p = unit(rng);
        if (is_p_fraction_robust(g, p) != oracles::robust_naive(g, p)) ++failures;
        if (is_strongly_p_fraction_robust(g, p) != oracles::strongly_robust_naive(g, p)) ++failures;
    }
    return finish(std::move(r), t, 30.0, failures, std::to_string(graphs) + " graphs, N <= 6, exact");
}

std::vector<CheckResult> run_suite(const std::string& suite) {
    std::vector<CheckResult> out;
    const bool all = suite == "all";
    if (all || suite == "evidence") {
        out.push_back(c1_dempster_oracle());
        out.push_back(c2_summed_state_identity());
    }
    if (all || suite == "consensus") {
        out.push_back(c3_sum_preservation());
        out.push_back(c4_honest_convergence());
        out.push_back(c5_attack_convergence());
        out.push_back(c6_attacker_identification());
    }
    if (all || suite == "privacy") {
        out.push_back(c7_privacy());
        out.push_back(c8_paillier());
    }
    if (all || suite == "evidence") {
        out.push_back(c9_high_conflict());
    }
    if (all || suite == "robustness") {
        out.push_back(c10_robustness_checkers());
    }
    if (out.empty()) {
        throw BadParams("unknown suite '" + suite +
                        "' (expected evidence|consensus|privacy|robustness|all)");
    }
    return out;
}

}  // namespace cefac::verify
