#include "cefac/adversary.hpp"

#include <algorithm>
#include <cmath>

#include "cefac/util.hpp"

namespace cefac::adversary {

using protocol::CorrectionPayload;
using protocol::Message;
using protocol::MessageKind;
using protocol::StoragePayload;
using protocol::StorageVector;
using protocol::SubStatePayload;
using protocol::WeightPayload;

DeceptionNode::DeceptionNode(std::unique_ptr<protocol::NodeRunner> runner, const AttackerSpec& spec,
                             const protocol::KeyDirectory* keys, bool encrypt_weights)
    : runner_(std::move(runner)),
      spec_(spec),
      keys_(keys),
      encrypt_(encrypt_weights),
      rng_(spec.seed),
      enc_rng_(splitmix64(spec.seed ^ 0xdecebedecebeULL)) {}

std::vector<double> DeceptionNode::perturb(const std::vector<double>& base) {
    if (spec_.script == "constant-lie") {
        if (!lie_share_ || lie_share_->size() != base.size()) {
            std::uniform_real_distribution<double> dist(0.1, 1.0);
            std::vector<double> lie(base.size());
            for (double& v : lie) v = dist(rng_);
            lie_share_ = std::move(lie);
        }
        return *lie_share_;
    }
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    std::vector<double> out(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
        out[k] = base[k] * (1.0 + noise(rng_)) + 0.05 * noise(rng_);
    }
    return out;
}

std::vector<Message> DeceptionNode::step(std::size_t round, const std::vector<Message>& inbox) {
    std::vector<Message> outbox = runner_->step(round, inbox);

    if (round == 0) {
        // One fabricated sub-state and one fabricated weight, broadcast to
        // every out-neighbor (consistent-output assumption). The weight is
        // protocol-valid so receivers mix it in; it is deleted once the node
        // is identified.
        std::vector<double> base = runner_->x0();
        const double scale = 1.0 / static_cast<double>(outbox.size() / 2 + 1);
        for (double& v : base) v *= scale;
        const std::vector<double> junk_share = perturb(base);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const long junk_w = paillier::encode_weight(unit(rng_));

        for (auto& msg : outbox) {
            if (msg.kind == MessageKind::SubState) {
                msg.payload = SubStatePayload{junk_share};
            } else if (msg.kind == MessageKind::Weight) {
                WeightPayload wp;
                if (encrypt_) {
                    auto c = paillier::encrypt(keys_->keys[msg.to].pub, mpz_class(junk_w), enc_rng_);
                    c.key_id = static_cast<std::uint32_t>(msg.to);
                    wp.cipher = std::move(c);
                } else {
                    wp.plain = junk_w;
                }
                msg.payload = std::move(wp);
            }
        }
        return outbox;
    }

    if (round == 1) {
        // The broadcast claim about its own state is fabricated once;
        // the local ledger keeps the same claim so deceivers that gossip
        // with each other stay mutually consistent.
        runner_->force_own_slot(perturb(runner_->x1()));
    }

    StorageVector junk = runner_->storage();
    if (spec_.script == "replay") {
        if (!replay_storage_) replay_storage_ = junk;
        junk = *replay_storage_;
    } else if (round >= 2) {
        for (auto& slot : junk.slots) {
            if (slot) slot = perturb(*slot);
        }
    }

    for (auto& msg : outbox) {
        if (msg.kind == MessageKind::Storage) {
            msg.payload = StoragePayload{junk};
        }
    }
    return outbox;
}

// ---------------------------------------------------------------------------

std::vector<double> PrivateWorld::x0_of(const DirectedGraph& g, std::size_t i) const {
    std::vector<double> x = shares.at({i, i});
    for (std::size_t j : g.out_neighbors(i)) {
        const auto& s = shares.at({i, j});
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += s[k];
    }
    return x;
}

std::vector<double> PrivateWorld::x1_of(const DirectedGraph& g, std::size_t i) const {
    std::vector<double> x = shares.at({i, i});
    for (std::size_t j : g.in_neighbors(i)) {
        const auto& s = shares.at({j, i});
        const double w = weights.at({j, i});
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += w * s[k];
    }
    for (std::size_t j : g.out_neighbors(i)) {
        const auto& s = shares.at({i, j});
        const double w = weights.at({i, j});
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += (1.0 - w) * s[k];
    }
    return x;
}

ReconstructionVerdict eavesdrop_reconstruct(const EavesdropperView& view, const DirectedGraph& graph,
                                            std::size_t target) {
    // x(0) = x(1) + sum_{j in N+} w_ij s_ij - sum_{j in N-} w_ji s_ji.
    auto x1 = view.x1_claims.find(target);
    if (x1 == view.x1_claims.end()) return {};

    std::vector<double> estimate = x1->second;
    for (std::size_t j : graph.out_neighbors(target)) {
        if (!view.share_known(target, j) || !view.weight_known(target, j)) return {};
        const auto& s = view.shares.at({target, j});
        const double w = view.weights.at({target, j});
        for (std::size_t k = 0; k < estimate.size(); ++k) estimate[k] += w * s[k];
    }
    for (std::size_t j : graph.in_neighbors(target)) {
        if (!view.share_known(j, target) || !view.weight_known(j, target)) return {};
        const auto& s = view.shares.at({j, target});
        const double w = view.weights.at({j, target});
        for (std::size_t k = 0; k < estimate.size(); ++k) estimate[k] -= w * s[k];
    }
    return {true, std::move(estimate)};
}

std::optional<PrivateWorld> underdetermination_witness(const EavesdropperView& view,
                                                       const DirectedGraph& graph, std::size_t target,
                                                       const PrivateWorld& actual) {
    PrivateWorld other = actual;
    const std::size_t dim = actual.shares.at({target, target}).size();

    // If the reconstructed state is not even anchored, shifting the retained
    // share moves x(0) while touching nothing observable.
    if (!view.x1_claims.count(target)) {
        auto& own = other.shares[{target, target}];
        for (double& v : own) v += 1.0;
        return other;
    }

    // Otherwise find one unobserved term of the pinning identity and move it,
    // rebalancing the two retained shares so every observation stays fixed.
    // The perturbed edge moves the sender's x(0) by (w's' - w s) and the
    // receiver's by its negative; both endpoints' x(1) stay put.
    auto rebalance = [&](std::size_t from, std::size_t to) {
        const std::pair<std::size_t, std::size_t> edge{from, to};
        const double w_old = actual.weights.at(edge);
        const std::vector<double> s_old = actual.shares.at(edge);

        double w_new = w_old;
        std::vector<double> s_new = s_old;
        if (!view.weight_known(from, to) && view.share_known(from, to)) {
            // Only the weight is free (external view, encryption on): the
            // product w*s must move, so the share must be nonzero somewhere.
            bool nonzero = false;
            for (double v : s_old) nonzero = nonzero || std::abs(v) > 1e-9;
            if (!nonzero) return false;
            w_new = (w_old <= 0.5) ? w_old + 0.4999 : w_old - 0.4999;
        } else if (!view.share_known(from, to)) {
            for (double& v : s_new) v += 1.0;
            if (!view.weight_known(from, to) && w_old < 1e-6) w_new = 0.5;
        } else {
            return false;  // both observed; this term is pinned
        }

        other.weights[edge] = w_new;
        other.shares[edge] = s_new;

        // Keep both endpoints' x(1) unchanged: the sender absorbs the change
        // of (1-w)s, the receiver absorbs the change of w*s.
        auto& sender_own = other.shares[{from, from}];
        auto& receiver_own = other.shares[{to, to}];
        for (std::size_t k = 0; k < dim; ++k) {
            const double mixed_delta = w_new * s_new[k] - w_old * s_old[k];
            const double kept_delta = (1.0 - w_new) * s_new[k] - (1.0 - w_old) * s_old[k];
            sender_own[k] -= kept_delta;
            receiver_own[k] -= mixed_delta;
        }
        return true;
    };

    for (std::size_t j : graph.out_neighbors(target)) {
        PrivateWorld saved = other;
        if (rebalance(target, j)) {
            // x0(target) changed by (w_new s_new - w_old s_old); verify nonzero.
            const auto a = other.x0_of(graph, target);
            const auto b = actual.x0_of(graph, target);
            double diff = 0.0;
            for (std::size_t k = 0; k < dim; ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
            if (diff > 1e-9) return other;
        }
        other = saved;
    }
    for (std::size_t j : graph.in_neighbors(target)) {
        PrivateWorld saved = other;
        if (rebalance(j, target)) {
            const auto a = other.x0_of(graph, target);
            const auto b = actual.x0_of(graph, target);
            double diff = 0.0;
            for (std::size_t k = 0; k < dim; ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
            if (diff > 1e-9) return other;
        }
        other = saved;
    }
    return std::nullopt;
}

}  // namespace cefac::adversary
