#include "cefac/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "cefac/util.hpp"

namespace cefac::protocol {

namespace {

void add_scaled(std::vector<double>& acc, const std::vector<double>& v, double scale) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += scale * v[k];
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

// Agreement count of identical candidate values for one slot.
template <typename T>
std::optional<T> best_agreeing(const std::vector<const T*>& candidates, double needed) {
    std::vector<std::pair<const T*, std::size_t>> groups;
    for (const T* c : candidates) {
        bool found = false;
        for (auto& [rep, count] : groups) {
            if (*rep == *c) {
                ++count;
                found = true;
                break;
            }
        }
        if (!found) groups.emplace_back(c, 1);
    }
    const T* best = nullptr;
    std::size_t best_count = 0;
    for (auto& [rep, count] : groups) {
        if (count > best_count) {
            best = rep;
            best_count = count;
        }
    }
    if (best && static_cast<double>(best_count) > needed) return *best;
    return std::nullopt;
}

}  // namespace

std::size_t StorageVector::filled() const {
    std::size_t c = 0;
    for (const auto& s : slots) {
        if (s) ++c;
    }
    return c;
}

std::vector<double> CorrectionRecord::total(std::size_t dim) const {
    std::vector<double> out(dim, 0.0);
    for (const auto& [attacker, vec] : corrections) {
        add_scaled(out, vec, 1.0);
    }
    return out;
}

std::map<std::size_t, std::vector<double>> decompose_state(const std::vector<double>& x0,
                                                           std::size_t self,
                                                           const std::vector<std::size_t>& out_neighbors,
                                                           std::mt19937_64& rng) {
    double max_abs = 0.0;
    for (double v : x0) max_abs = std::max(max_abs, std::abs(v));
    const double radius = std::max(1.0, 2.0 * max_abs);
    std::uniform_real_distribution<double> dist(-radius, radius);

    std::map<std::size_t, std::vector<double>> shares;
    std::vector<double> remainder = x0;
    for (std::size_t j : out_neighbors) {
        std::vector<double> share(x0.size());
        for (double& v : share) v = dist(rng);
        add_scaled(remainder, share, -1.0);
        shares.emplace(j, std::move(share));
    }
    shares.emplace(self, std::move(remainder));
    return shares;
}

std::vector<double> reconstruct_state(
    const std::vector<double>& own_share,
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& received,
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& sent) {
    std::vector<double> x1 = own_share;
    for (const auto& [sender, entry] : received) {
        const auto& [share, w] = entry;
        if (!(w >= 0.0) || !(w <= 1.0)) {
            throw WeightDecodeFailure("received weight outside [0,1]");
        }
        add_scaled(x1, share, w);
    }
    for (const auto& [recipient, entry] : sent) {
        const auto& [share, w] = entry;
        if (!(w >= 0.0) || !(w <= 1.0)) {
            throw WeightDecodeFailure("sent weight outside [0,1]");
        }
        add_scaled(x1, share, 1.0 - w);
    }
    return x1;
}

StorageVector storage_update(const StorageVector& current, std::size_t own_id,
                             const std::vector<std::pair<std::size_t, StorageVector>>& received,
                             std::size_t in_degree, double f, std::size_t round,
                             ThresholdSemantics semantics) {
    if (round < 2) {
        throw ProtocolViolation("storage updates start at round 2");
    }
    StorageVector next = current;
    const std::size_t n = next.slots.size();

    if (round == 2) {
        // Nothing to compare against yet: trust each incoming neighbor about
        // its own state.
        for (const auto& [sender, vec] : received) {
            if (sender >= n || sender == own_id) continue;
            if (vec.slots.size() != n) continue;
            if (vec.slots[sender] && !next.slots[sender]) {
                next.slots[sender] = vec.slots[sender];
            }
        }
        return next;
    }

    const std::size_t m = received.size();
    double needed;
    if (m < in_degree) {
        // A vector is missing: DoS in the neighborhood. Majority of what
        // actually arrived; ties adopt nothing.
        needed = static_cast<double>(m) / 2.0;
    } else {
        needed = f * static_cast<double>(in_degree);
        if (semantics == ThresholdSemantics::Prose) needed += 1.0;
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (k == own_id || next.slots[k]) continue;
        std::vector<const std::vector<double>*> candidates;
        for (const auto& [sender, vec] : received) {
            if (vec.slots.size() != n) continue;
            if (vec.slots[k]) candidates.push_back(&*vec.slots[k]);
        }
        if (candidates.empty()) continue;
        if (auto adopted = best_agreeing(candidates, needed)) {
            next.slots[k] = std::move(*adopted);
        }
    }
    return next;
}

std::pair<std::set<std::size_t>, std::set<std::size_t>> detect_attackers(
    const std::vector<std::vector<std::pair<std::size_t, StorageVector>>>& history,
    const StorageVector& converged, const std::vector<std::size_t>& in_neighbors) {
    std::set<std::size_t> delivered;
    std::set<std::size_t> deceivers;
    const std::size_t n = converged.slots.size();
    for (const auto& round_msgs : history) {
        for (const auto& [sender, vec] : round_msgs) {
            delivered.insert(sender);
            if (vec.slots.size() != n) {
                deceivers.insert(sender);
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (vec.slots[k] && converged.slots[k] && !(*vec.slots[k] == *converged.slots[k])) {
                    deceivers.insert(sender);
                    break;
                }
            }
        }
    }
    std::set<std::size_t> dos;
    for (std::size_t j : in_neighbors) {
        if (!delivered.count(j)) dos.insert(j);
    }
    return {std::move(dos), std::move(deceivers)};
}

std::map<std::size_t, std::vector<double>> compute_correction(
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& sent,
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& received_mixed,
    const std::set<std::size_t>& attackers_out, const std::set<std::size_t>& deceivers_in) {
    std::map<std::size_t, std::vector<double>> components;
    for (std::size_t k : attackers_out) {
        auto it = sent.find(k);
        if (it == sent.end()) {
            throw MissingLocalRecord("no retained sub-state for out-neighbor " + std::to_string(k));
        }
        const auto& [share, w] = it->second;
        std::vector<double> comp(share.size(), 0.0);
        add_scaled(comp, share, w);
        components[k] = std::move(comp);
    }
    for (std::size_t k : deceivers_in) {
        auto it = received_mixed.find(k);
        if (it == received_mixed.end()) continue;  // nothing was mixed in; nothing to delete
        const auto& [share, w] = it->second;
        auto& comp = components[k];
        if (comp.empty()) comp.assign(share.size(), 0.0);
        add_scaled(comp, share, -w);
    }
    return components;
}

std::vector<double> consensus_update(const std::vector<double>& x_prev, const StorageVector& storage,
                                     const CorrectionVector& corrections,
                                     const std::set<std::size_t>& normal_view, double epsilon) {
    if (normal_view.empty()) {
        throw EmptyNormalSet("no nodes left in the normal view");
    }
    std::vector<double> target(x_prev.size(), 0.0);
    for (std::size_t j : normal_view) {
        if (j < storage.slots.size() && storage.slots[j]) {
            add_scaled(target, *storage.slots[j], 1.0);
        }
    }
    for (const auto& slot : corrections.slots) {
        if (!slot) continue;
        for (const auto& [attacker, comp] : slot->corrections) {
            add_scaled(target, comp, 1.0);
        }
    }
    const double inv = 1.0 / static_cast<double>(normal_view.size());
    std::vector<double> x(x_prev.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = epsilon * x_prev[k] + (1.0 - epsilon) * target[k] * inv;
    }
    return x;
}

// ---------------------------------------------------------------------------

NodeRunner::NodeRunner(std::size_t id, const DirectedGraph& graph, std::vector<double> x0,
                       NodeConfig cfg, const KeyDirectory* keys, std::uint64_t seed)
    : id_(id),
      n_(graph.size()),
      in_nbrs_(graph.in_neighbors(id)),
      out_nbrs_(graph.out_neighbors(id)),
      cfg_(cfg),
      keys_(keys),
      rng_(seed),
      enc_rng_(splitmix64(seed ^ 0x5eedc1f7e9u)),
      x0_(std::move(x0)),
      x_(x0_),
      storage_(graph.size()),
      corrections_(graph.size()) {
    if (cfg_.encrypt_weights && (!keys_ || keys_->keys.size() != n_)) {
        throw ConfigInvalid("key directory must hold one keypair per node");
    }
}

double NodeRunner::weight_sent_to(std::size_t j) const {
    auto it = sent_.find(j);
    if (it == sent_.end()) {
        throw MissingLocalRecord("no weight recorded for out-neighbor " + std::to_string(j));
    }
    return it->second.second;
}

void NodeRunner::force_own_slot(std::vector<double> value) {
    storage_.slots[id_] = std::move(value);
}

std::set<std::size_t> NodeRunner::attacker_view() const {
    std::set<std::size_t> out = detected_dos_;
    out.insert(detected_deception_.begin(), detected_deception_.end());
    out.insert(inferred_silent_.begin(), inferred_silent_.end());
    for (const auto& slot : corrections_.slots) {
        if (!slot) continue;
        out.insert(slot->dos.begin(), slot->dos.end());
        out.insert(slot->deception.begin(), slot->deception.end());
    }
    return out;
}

std::set<std::size_t> NodeRunner::normal_view() const {
    std::set<std::size_t> attackers = cfg_.apply_corrections ? attacker_view() : std::set<std::size_t>{};
    std::set<std::size_t> out;
    for (std::size_t j = 0; j < n_; ++j) {
        if (attackers.count(j)) continue;
        // A node whose state never reached the ledger has contributed nothing;
        // honest states always spread under the robustness assumption, so an
        // empty slot marks an attacker nobody could observe directly.
        if (j != id_ && !storage_.slots[j]) continue;
        out.insert(j);
    }
    return out;
}

std::vector<Message> NodeRunner::step(std::size_t round, const std::vector<Message>& inbox) {
    switch (round) {
        case 0:
            return step_decompose();
        case 1:
            return step_reconstruct(inbox);
        default:
            return step_disseminate(round, inbox);
    }
}

std::vector<Message> NodeRunner::step_decompose() {
    auto shares = decompose_state(x0_, id_, out_nbrs_, rng_);
    own_share_ = shares.at(id_);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Message> outbox;
    for (std::size_t j : out_nbrs_) {
        // Quantize at generation so sender and receiver apply the identical
        // weight; the sum identity then holds exactly.
        const long encoded = paillier::encode_weight(unit(rng_));
        const double w = paillier::decode_weight(encoded);
        sent_[j] = {shares.at(j), w};

        outbox.push_back(Message{0, id_, j, MessageKind::SubState, SubStatePayload{shares.at(j)}});
        WeightPayload wp;
        if (cfg_.encrypt_weights) {
            auto c = paillier::encrypt(keys_->keys[j].pub, mpz_class(encoded), enc_rng_);
            c.key_id = static_cast<std::uint32_t>(j);
            wp.cipher = std::move(c);
        } else {
            wp.plain = encoded;
        }
        outbox.push_back(Message{0, id_, j, MessageKind::Weight, std::move(wp)});
    }
    phase_ = Phase::Decompose;
    return outbox;
}

std::vector<Message> NodeRunner::step_reconstruct(const std::vector<Message>& inbox) {
    for (const auto& msg : inbox) {
        if (msg.kind == MessageKind::SubState) {
            const auto& p = std::get<SubStatePayload>(msg.payload);
            if (p.share.size() == x0_.size()) {
                pending_shares_[msg.from] = p.share;
            } else {
                log_line(LogLevel::Warn, "node " + std::to_string(id_) + ": malformed sub-state from " +
                                             std::to_string(msg.from) + " dropped");
            }
        } else if (msg.kind == MessageKind::Weight) {
            pending_weights_[msg.from] = std::get<WeightPayload>(msg.payload);
        } else {
            log_line(LogLevel::Warn, "node " + std::to_string(id_) + ": out-of-phase message dropped");
        }
    }

    for (const auto& [sender, share] : pending_shares_) {
        auto wit = pending_weights_.find(sender);
        if (wit == pending_weights_.end()) continue;
        long encoded = -1;
        try {
            if (wit->second.cipher) {
                mpz_class m = paillier::decrypt(keys_->keys[id_], *wit->second.cipher);
                if (!m.fits_slong_p()) throw WeightDecodeFailure("weight overflow");
                encoded = m.get_si();
            } else if (wit->second.plain) {
                encoded = *wit->second.plain;
            } else {
                continue;
            }
            const double w = paillier::decode_weight(encoded);
            received_[sender] = {share, w};
        } catch (const Error& e) {
            log_line(LogLevel::Warn, "node " + std::to_string(id_) + ": undecodable weight from " +
                                         std::to_string(sender) + " (" + e.what() + "); contribution dropped");
        }
    }

    x1_ = reconstruct_state(own_share_, received_, sent_);
    x_ = x1_;
    storage_.slots[id_] = x1_;
    phase_ = Phase::Reconstruct;

    std::vector<Message> outbox;
    for (std::size_t j : out_nbrs_) {
        outbox.push_back(Message{1, id_, j, MessageKind::Storage, StoragePayload{storage_}});
    }
    return outbox;
}

void NodeRunner::process_storage(std::size_t round,
                                 const std::vector<std::pair<std::size_t, StorageVector>>& received) {
    for (const auto& [sender, vec] : received) delivered_ever_.insert(sender);

    StorageVector next = storage_update(storage_, id_, received, in_nbrs_.size(), cfg_.f, round,
                                        cfg_.threshold_semantics);

    // Deception scan: an in-neighbor asserting a value that contradicts an
    // accepted slot has tampered with it (honest nodes relay verbatim).
    for (const auto& [sender, vec] : received) {
        if (vec.slots.size() != n_) {
            mismatch_.insert(sender);
            continue;
        }
        for (std::size_t k = 0; k < n_; ++k) {
            if (vec.slots[k] && next.slots[k] && !(*vec.slots[k] == *next.slots[k])) {
                mismatch_.insert(sender);
                break;
            }
        }
    }

    const bool changed = !(next == storage_);
    storage_ = std::move(next);
    s_stable_rounds_ = changed ? 0 : s_stable_rounds_ + 1;
}

void NodeRunner::process_corrections(
    const std::vector<std::pair<std::size_t, CorrectionVector>>& received) {
    std::vector<std::pair<std::size_t, CorrectionVector>> trusted;
    for (const auto& entry : received) {
        if (mismatch_.count(entry.first) || detected_deception_.count(entry.first)) continue;
        if (entry.second.slots.size() != n_) continue;
        trusted.push_back(entry);
    }

    bool changed = false;
    // As with the storage vectors, a sender is trusted about its own record;
    // only endorsement of third-party records goes through the agreement
    // rules. Attacker senders were already filtered out above.
    for (const auto& [sender, vec] : trusted) {
        if (sender == id_ || !vec.slots[sender] || vec.slots[sender]->owner != sender) continue;
        const auto& rec = *vec.slots[sender];
        if (!corrections_.slots[sender] || rec.version > corrections_.slots[sender]->version) {
            corrections_.slots[sender] = rec;
            changed = true;
        }
    }

    const std::size_t m = trusted.size();
    const double needed = (m < in_nbrs_.size())
                              ? static_cast<double>(m) / 2.0
                              : cfg_.f * static_cast<double>(in_nbrs_.size()) +
                                    (cfg_.threshold_semantics == ThresholdSemantics::Prose ? 1.0 : 0.0);

    for (std::size_t k = 0; k < n_; ++k) {
        if (k == id_) continue;
        std::vector<const CorrectionRecord*> candidates;
        for (const auto& [sender, vec] : trusted) {
            if (sender == k) continue;
            if (vec.slots[k] && vec.slots[k]->owner == k) candidates.push_back(&*vec.slots[k]);
        }
        if (candidates.empty()) continue;
        auto adopted = best_agreeing(candidates, needed);
        if (!adopted) continue;
        if (!corrections_.slots[k] || adopted->version > corrections_.slots[k]->version) {
            corrections_.slots[k] = std::move(*adopted);
            changed = true;
        }
    }
    if (detection_done_) {
        e_stable_rounds_ = changed ? 0 : e_stable_rounds_ + 1;
    }
}

void NodeRunner::publish_detection() {
    detected_dos_.clear();
    for (std::size_t j : in_nbrs_) {
        if (!delivered_ever_.count(j)) detected_dos_.insert(j);
    }
    detected_deception_ = mismatch_;

    // Out-neighbors whose state never made it into the ledger are attackers
    // as well (honest states spread under the robustness assumption). They
    // are reported as unresponsive; observers of a deceiver override the
    // type when the records are merged.
    std::set<std::size_t> dos_broadcast = detected_dos_;
    for (std::size_t k : out_nbrs_) {
        if (k != id_ && !storage_.slots[k] && !detected_deception_.count(k)) {
            dos_broadcast.insert(k);
        }
    }

    CorrectionRecord rec;
    rec.owner = id_;
    rec.version = 1;
    rec.dos = std::move(dos_broadcast);
    rec.deception = detected_deception_;
    corrections_.slots[id_] = std::move(rec);
    detection_done_ = true;
    phase_ = Phase::Correct;
}

void NodeRunner::maybe_finalize_corrections() {
    // The compensation term needs the network-wide attacker view: wait until
    // every node still presumed normal has reported its detections. Nodes
    // whose state never filled a ledger slot cannot be normal and are not
    // waited for. A node that stays silent long past the spreading time is an
    // attacker whose claims never contradicted anything; treat its evidence
    // like a deceiver's.
    std::set<std::size_t> attackers = attacker_view();
    std::set<std::size_t> pending;
    for (std::size_t j = 0; j < n_; ++j) {
        if (j == id_ || attackers.count(j) || !storage_.slots[j]) continue;
        if (!corrections_.slots[j]) pending.insert(j);
    }
    if (!pending.empty()) {
        if (rounds_since_detection_ < 2 * cfg_.stability_rounds) return;
        inferred_silent_ = pending;
        attackers.insert(pending.begin(), pending.end());
    }

    std::set<std::size_t> attackers_out;
    for (std::size_t k : out_nbrs_) {
        if (attackers.count(k)) attackers_out.insert(k);
    }
    std::set<std::size_t> deceivers_in;
    for (std::size_t k : in_nbrs_) {
        if (detected_deception_.count(k) || inferred_silent_.count(k)) deceivers_in.insert(k);
    }

    auto rec = *corrections_.slots[id_];
    rec.version = 2;
    rec.deception.insert(inferred_silent_.begin(), inferred_silent_.end());
    rec.corrections = compute_correction(sent_, received_, attackers_out, deceivers_in);
    corrections_.slots[id_] = std::move(rec);
    corrections_final_ = true;
}

void NodeRunner::update_state() {
    const auto view = normal_view();
    std::vector<double> next = consensus_update(
        x_, storage_, cfg_.apply_corrections ? corrections_ : CorrectionVector(n_), view, cfg_.epsilon);
    const double delta = max_abs_diff(next, x_);
    x_ = std::move(next);
    x_stable_rounds_ = (delta <= cfg_.x_stability_tol) ? x_stable_rounds_ + 1 : 0;
}

std::vector<Message> NodeRunner::step_disseminate(std::size_t round, const std::vector<Message>& inbox) {
    std::vector<std::pair<std::size_t, StorageVector>> storage_msgs;
    std::vector<std::pair<std::size_t, CorrectionVector>> correction_msgs;
    for (const auto& msg : inbox) {
        if (msg.kind == MessageKind::Storage) {
            storage_msgs.emplace_back(msg.from, std::get<StoragePayload>(msg.payload).vec);
        } else if (msg.kind == MessageKind::Correction) {
            correction_msgs.emplace_back(msg.from, std::get<CorrectionPayload>(msg.payload).vec);
        } else {
            log_line(LogLevel::Debug, "node " + std::to_string(id_) + ": out-of-phase message from " +
                                          std::to_string(msg.from) + " dropped");
        }
    }

    process_storage(round, storage_msgs);
    if (cfg_.apply_corrections) {
        process_corrections(correction_msgs);
        if (!detection_done_ && s_stable_rounds_ >= cfg_.stability_rounds) {
            publish_detection();
        }
        if (detection_done_ && !corrections_final_) {
            ++rounds_since_detection_;
            maybe_finalize_corrections();
        }
    }
    if (round >= 3) {
        update_state();
    }
    if (phase_ != Phase::Converged) {
        const bool base_stable = s_stable_rounds_ >= cfg_.stability_rounds &&
                                 x_stable_rounds_ >= cfg_.stability_rounds;
        const bool corr_stable = !cfg_.apply_corrections ||
                                 (corrections_final_ && e_stable_rounds_ >= cfg_.stability_rounds);
        if (base_stable && corr_stable) phase_ = Phase::Converged;
        else if (phase_ != Phase::Correct) phase_ = Phase::Disseminate;
    }

    std::vector<Message> outbox;
    const auto attackers = cfg_.apply_corrections ? attacker_view() : std::set<std::size_t>{};
    for (std::size_t j : out_nbrs_) {
        outbox.push_back(Message{round, id_, j, MessageKind::Storage, StoragePayload{storage_}});
        if (detection_done_ && !attackers.count(j)) {
            outbox.push_back(Message{round, id_, j, MessageKind::Correction, CorrectionPayload{corrections_}});
        }
    }
    return outbox;
}

}  // namespace cefac::protocol
