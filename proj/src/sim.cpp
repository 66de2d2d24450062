#include "cefac/sim.hpp"

#include <algorithm>
#include <cmath>

#include "cefac/util.hpp"

namespace cefac::sim {

using adversary::AttackKind;
using adversary::EavesdropperView;
using adversary::PrivateWorld;
using protocol::KeyDirectory;
using protocol::Message;
using protocol::MessageKind;
using protocol::NodeConfig;
using protocol::NodeRunner;

namespace {

int kind_rank(MessageKind k) {
    switch (k) {
        case MessageKind::SubState: return 0;
        case MessageKind::Weight: return 1;
        case MessageKind::Storage: return 2;
        case MessageKind::Correction: return 3;
    }
    return 4;
}

// External observers see every edge; the weight plaintext is visible only
// when the encryption ablation is active.
void feed_external_view(EavesdropperView& view, const Message& msg) {
    if (msg.kind == MessageKind::SubState) {
        view.shares[{msg.from, msg.to}] = std::get<protocol::SubStatePayload>(msg.payload).share;
    } else if (msg.kind == MessageKind::Weight) {
        const auto& wp = std::get<protocol::WeightPayload>(msg.payload);
        if (wp.plain) {
            view.weights[{msg.from, msg.to}] = paillier::decode_weight(*wp.plain);
        }
    } else if (msg.kind == MessageKind::Storage) {
        const auto& vec = std::get<protocol::StoragePayload>(msg.payload).vec;
        if (msg.from < vec.slots.size() && vec.slots[msg.from] && !view.x1_claims.count(msg.from)) {
            view.x1_claims[msg.from] = *vec.slots[msg.from];
        }
    }
}

// Internal observers record only their own inbox; decodable weights and their
// own outbox are filled in from the node's records after the run.
void feed_internal_view(EavesdropperView& view, const Message& msg) {
    if (msg.to != view.node) return;
    if (msg.kind == MessageKind::SubState) {
        view.shares[{msg.from, msg.to}] = std::get<protocol::SubStatePayload>(msg.payload).share;
    } else if (msg.kind == MessageKind::Storage) {
        const auto& vec = std::get<protocol::StoragePayload>(msg.payload).vec;
        for (std::size_t k = 0; k < vec.slots.size(); ++k) {
            if (vec.slots[k] && !view.x1_claims.count(k)) view.x1_claims[k] = *vec.slots[k];
        }
    }
}

void enrich_internal_view(EavesdropperView& view, const NodeRunner& runner) {
    for (const auto& [recipient, entry] : runner.sent_records()) {
        view.shares[{view.node, recipient}] = entry.first;
        view.weights[{view.node, recipient}] = entry.second;
    }
    for (const auto& [sender, entry] : runner.received_records()) {
        view.shares[{sender, view.node}] = entry.first;
        view.weights[{sender, view.node}] = entry.second;
    }
    for (std::size_t k = 0; k < runner.storage().slots.size(); ++k) {
        if (runner.storage().slots[k] && !view.x1_claims.count(k)) {
            view.x1_claims[k] = *runner.storage().slots[k];
        }
    }
}

}  // namespace

const NodeOutcome& SimulationResult::outcome_of(std::size_t node) const {
    for (const auto& o : outcomes) {
        if (o.node == node) return o;
    }
    throw InvalidNode("no outcome for node " + std::to_string(node));
}

SimulationResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
    cfg.validate();
    const std::size_t n = cfg.graph.size();
    const std::size_t n_s = cfg.params.stability_rounds ? cfg.params.stability_rounds : 2 * n;
    const std::size_t max_rounds =
        options.max_rounds_override ? options.max_rounds_override : cfg.params.max_rounds;

    KeyDirectory keys;
    if (cfg.params.encrypt_weights) {
        keys.keys.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            paillier::Rng krng(derive_seed(cfg.seed, 0x4B, i));
            keys.keys.push_back(paillier::keygen(cfg.params.key_bits, krng));
        }
    }

    auto epsilon_of = [&](std::size_t i) {
        if (cfg.params.epsilon.empty()) return 0.5;
        if (cfg.params.epsilon.size() == 1) return cfg.params.epsilon[0];
        return cfg.params.epsilon[i];
    };

    std::map<std::size_t, const adversary::AttackerSpec*> attacker_of;
    for (const auto& a : cfg.attackers) attacker_of[a.node] = &a;

    std::vector<std::unique_ptr<adversary::NodeActor>> actors(n);
    std::set<std::size_t> normal;
    for (std::size_t i = 0; i < n; ++i) {
        NodeConfig ncfg;
        ncfg.f = cfg.params.f;
        ncfg.threshold_semantics = cfg.params.threshold_semantics;
        ncfg.stability_rounds = n_s;
        ncfg.epsilon = epsilon_of(i);
        ncfg.encrypt_weights = cfg.params.encrypt_weights;

        const auto x0 = build_initial_state(cfg.evidence[i], cfg.params.tau).flatten();
        auto it = attacker_of.find(i);
        if (it == attacker_of.end()) {
            normal.insert(i);
            actors[i] = std::make_unique<adversary::HonestNode>(std::make_unique<NodeRunner>(
                i, cfg.graph, x0, ncfg, cfg.params.encrypt_weights ? &keys : nullptr,
                derive_seed(cfg.seed, 0x17, i)));
        } else if (it->second->kind == AttackKind::DoS) {
            actors[i] = std::make_unique<adversary::DoSNode>(x0);
        } else {
            ncfg.apply_corrections = false;
            auto runner = std::make_unique<NodeRunner>(i, cfg.graph, x0, ncfg,
                                                       cfg.params.encrypt_weights ? &keys : nullptr,
                                                       derive_seed(cfg.seed, 0x17, i));
            actors[i] = std::make_unique<adversary::DeceptionNode>(
                std::move(runner), *it->second, cfg.params.encrypt_weights ? &keys : nullptr,
                cfg.params.encrypt_weights);
        }
    }

    std::vector<std::pair<EavesdropperSpec, EavesdropperView>> views;
    for (const auto& spec : cfg.eavesdroppers) {
        EavesdropperView v;
        v.external = spec.external;
        v.node = spec.external ? static_cast<std::size_t>(-1) : spec.node;
        views.emplace_back(spec, std::move(v));
    }

    SimulationResult result;
    result.true_attackers = cfg.attacker_ids();
    result.normal_count = normal.size();

    std::vector<Message> in_flight;
    std::size_t round = 0;
    for (; round < max_rounds; ++round) {
        // Deliver what was sent last round, in canonical order.
        std::vector<std::vector<Message>> inboxes(n);
        std::sort(in_flight.begin(), in_flight.end(), [](const Message& a, const Message& b) {
            if (a.to != b.to) return a.to < b.to;
            if (a.from != b.from) return a.from < b.from;
            return kind_rank(a.kind) < kind_rank(b.kind);
        });
        for (auto& msg : in_flight) inboxes[msg.to].push_back(std::move(msg));
        in_flight.clear();

        for (std::size_t i = 0; i < n; ++i) {
            auto outbox = actors[i]->step(round, inboxes[i]);
            for (auto& msg : outbox) {
                for (auto& [spec, view] : views) {
                    if (spec.external) feed_external_view(view, msg);
                    else feed_internal_view(view, msg);
                }
                in_flight.push_back(std::move(msg));
            }
        }

        std::vector<std::vector<double>> states(n);
        for (std::size_t i = 0; i < n; ++i) states[i] = actors[i]->state();
        if (options.on_round) options.on_round(round, states);
        result.snapshots.push_back(std::move(states));

        bool all_converged = round >= 3;
        for (std::size_t i : normal) {
            all_converged = all_converged && actors[i]->converged();
        }
        if (all_converged) {
            result.converged = true;
            ++round;
            break;
        }
    }
    result.rounds = round;
    if (!result.converged) {
        log_line(LogLevel::Warn, "round budget exhausted before consensus");
    }

    // Local fusion at every node from its converged state.
    for (std::size_t i = 0; i < n; ++i) {
        NodeOutcome out;
        out.node = i;
        out.normal = normal.count(i) > 0;
        out.final_state = actors[i]->state();
        const NodeRunner* runner = actors[i]->runner();
        std::size_t count = n;
        if (runner) {
            if (out.normal) {
                count = runner->normal_view().size();
                // Reporting sets: the network-wide record union restricted to
                // this node's neighborhood. Deception evidence is conclusive;
                // unresponsiveness reports are overridden by it.
                std::set<std::size_t> dos_union, dec_union;
                for (const auto& slot : runner->corrections().slots) {
                    if (!slot) continue;
                    dos_union.insert(slot->dos.begin(), slot->dos.end());
                    dec_union.insert(slot->deception.begin(), slot->deception.end());
                }
                std::set<std::size_t> hood;
                for (std::size_t j : cfg.graph.in_neighbors(i)) hood.insert(j);
                for (std::size_t j : cfg.graph.out_neighbors(i)) hood.insert(j);
                for (std::size_t j : hood) {
                    if (dec_union.count(j)) out.identified_deception.insert(j);
                    else if (dos_union.count(j)) out.identified_dos.insert(j);
                }
            }
        }
        try {
            std::vector<double> scaled = out.final_state;
            for (double& v : scaled) v *= static_cast<double>(count);
            out.wavccme = assemble_wavccme(cfg.frame, scaled);
            out.fusion = iterative_fusion(*out.wavccme, count, cfg.params.delta);
        } catch (const Error& e) {
            out.assembly_error = e.what();
            // A converged normal node must always assemble; transient states
            // on an exhausted round budget legitimately may not.
            if (out.normal && result.converged) throw;
        }
        result.outcomes.push_back(std::move(out));
    }

    // Centralized benchmark over the true normal set.
    std::vector<MassFunction> normal_evidence;
    for (std::size_t i : normal) normal_evidence.push_back(cfg.evidence[i]);
    if (normal_evidence.size() >= 1) {
        result.centralized_wavccme_ref = centralized_wavccme(normal_evidence, cfg.params.tau);
        result.centralized_fusion_ref =
            iterative_fusion(*result.centralized_wavccme_ref, normal_evidence.size(), cfg.params.delta);
    }

    // Privacy analysis: ground truth and eavesdropper verdicts (honest runs).
    if (cfg.attackers.empty()) {
        auto truth = std::make_shared<PrivateWorld>();
        for (std::size_t i = 0; i < n; ++i) {
            const NodeRunner* runner = actors[i]->runner();
            truth->shares[{i, i}] = runner->own_share();
            for (const auto& [to, entry] : runner->sent_records()) {
                truth->shares[{i, to}] = entry.first;
                truth->weights[{i, to}] = entry.second;
            }
        }
        result.ground_truth = truth;

        for (auto& [spec, view] : views) {
            if (!spec.external) {
                enrich_internal_view(view, *actors[spec.node]->runner());
            }
            for (std::size_t target = 0; target < n; ++target) {
                if (!spec.external && target == spec.node) continue;
                auto verdict = adversary::eavesdrop_reconstruct(view, cfg.graph, target);
                PrivacyRow row;
                row.external = spec.external;
                row.eavesdropper = spec.external ? static_cast<std::size_t>(-1) : spec.node;
                row.target = target;
                row.determined = verdict.determined;
                if (verdict.determined) {
                    const auto x0 = truth->x0_of(cfg.graph, target);
                    double err = 0.0;
                    for (std::size_t k = 0; k < x0.size(); ++k) {
                        err = std::max(err, std::abs(x0[k] - verdict.estimate[k]));
                    }
                    row.estimate_matches = err <= 1e-6;
                }
                result.privacy.push_back(row);
            }
        }
    }
    result.views = std::move(views);
    return result;
}

FusionResult centralized_reference(const std::vector<MassFunction>& evidence, double tau,
                                   double delta) {
    if (evidence.size() < 1) throw EmptyInput("need evidence to fuse");
    const WavccmeMatrix w = centralized_wavccme(evidence, tau);
    return iterative_fusion(w, evidence.size(), delta);
}

TrialRecord high_conflict_trial(const HighConflictConfig& cfg, std::mt19937_64& rng) {
    FrameOfDiscernment frame(cfg.frame_labels);
    std::vector<MassFunction> evidence;
    for (std::size_t i = 0; i < cfg.inliers; ++i) {
        evidence.push_back(generate_gaussian_evidence(frame, cfg.inlier_mean, cfg.class_means,
                                                      cfg.sigma, cfg.n_samples, rng, cfg.discount));
    }
    for (std::size_t i = 0; i < cfg.outliers; ++i) {
        evidence.push_back(generate_gaussian_evidence(frame, cfg.outlier_mean, cfg.class_means,
                                                      cfg.sigma, cfg.n_samples, rng, cfg.discount));
    }

    TrialRecord rec;
    const FusionResult oracle = centralized_reference(evidence, cfg.tau, cfg.delta);
    rec.oracle_decision = betp_decision(oracle.m_fused);

    MassFunction dempster = evidence[0];
    for (std::size_t i = 1; i < evidence.size(); ++i) {
        dempster = dempster_combine(dempster, evidence[i]);
    }
    rec.dempster_decision = betp_decision(dempster);

    rec.accepted = (rec.oracle_decision == 0) && (rec.dempster_decision != 0);
    if (rec.accepted) {
        // The summed-state route every node uses after consensus.
        std::vector<double> flat_sum(NodeInitialState::flat_length(frame.size()), 0.0);
        for (const auto& m : evidence) {
            const auto flat = build_initial_state(m, cfg.tau).flatten();
            for (std::size_t k = 0; k < flat.size(); ++k) flat_sum[k] += flat[k];
        }
        const WavccmeMatrix w = assemble_wavccme(frame, flat_sum);
        const FusionResult fused = iterative_fusion(w, evidence.size(), cfg.delta);
        rec.cefac_decision = betp_decision(fused.m_fused);
        rec.cefac_probs = fused.event_probs;
    }
    return rec;
}

}  // namespace cefac::sim
