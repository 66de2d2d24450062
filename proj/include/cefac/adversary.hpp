#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cefac/digraph.hpp"
#include "cefac/protocol.hpp"

namespace cefac::adversary {

enum class AttackKind { DoS, Deception };

/// Declared attacker: node, kind, and (for deception) the payload script.
/// The kind is fixed for the whole run and deception payloads are identical
/// across out-neighbors within a round.
struct AttackerSpec {
    std::size_t node = 0;
    AttackKind kind = AttackKind::DoS;
    std::string script = "uniform-noise";  // uniform-noise | constant-lie | replay
    std::uint64_t seed = 0;
};

/// Uniform interface the round engine steps: honest nodes, DoS nodes and
/// deception nodes all live behind it.
class NodeActor {
public:
    virtual ~NodeActor() = default;
    virtual std::vector<protocol::Message> step(std::size_t round,
                                                const std::vector<protocol::Message>& inbox) = 0;
    virtual bool converged() const = 0;
    virtual const std::vector<double>& state() const = 0;
    virtual const protocol::NodeRunner* runner() const { return nullptr; }
};

class HonestNode final : public NodeActor {
public:
    explicit HonestNode(std::unique_ptr<protocol::NodeRunner> runner) : runner_(std::move(runner)) {}
    std::vector<protocol::Message> step(std::size_t round,
                                        const std::vector<protocol::Message>& inbox) override {
        return runner_->step(round, inbox);
    }
    bool converged() const override { return runner_->converged(); }
    const std::vector<double>& state() const override { return runner_->x(); }
    const protocol::NodeRunner* runner() const override { return runner_.get(); }
    protocol::NodeRunner* mutable_runner() { return runner_.get(); }

private:
    std::unique_ptr<protocol::NodeRunner> runner_;
};

/// Drops every packet: empty outbox, inbox discarded, state frozen at x(0).
class DoSNode final : public NodeActor {
public:
    explicit DoSNode(std::vector<double> x0) : x0_(std::move(x0)) {}
    std::vector<protocol::Message> step(std::size_t, const std::vector<protocol::Message>&) override {
        return {};
    }
    bool converged() const override { return true; }
    const std::vector<double>& state() const override { return x0_; }

private:
    std::vector<double> x0_;
};

/// Runs the honest machinery on everything it receives but broadcasts
/// script-generated payloads, identical for every out-neighbor. It cannot
/// repair the damage it causes, so its internal runner never applies
/// corrections.
class DeceptionNode final : public NodeActor {
public:
    DeceptionNode(std::unique_ptr<protocol::NodeRunner> runner, const AttackerSpec& spec,
                  const protocol::KeyDirectory* keys, bool encrypt_weights);

    std::vector<protocol::Message> step(std::size_t round,
                                        const std::vector<protocol::Message>& inbox) override;
    bool converged() const override { return runner_->converged(); }
    const std::vector<double>& state() const override { return runner_->x(); }
    const protocol::NodeRunner* runner() const override { return runner_.get(); }

private:
    std::vector<double> perturb(const std::vector<double>& base);

    std::unique_ptr<protocol::NodeRunner> runner_;
    AttackerSpec spec_;
    const protocol::KeyDirectory* keys_;
    bool encrypt_;
    std::mt19937_64 rng_;
    paillier::Rng enc_rng_;
    std::optional<std::vector<double>> lie_share_;
    std::optional<protocol::StorageVector> replay_storage_;
};

/// What an eavesdropper has accumulated. Internal views hold the traffic of
/// one node plus its own secrets; external views hold every edge's traffic
/// (ciphertexts included) and the topology, but no private key.
struct EavesdropperView {
    bool external = true;
    std::size_t node = static_cast<std::size_t>(-1);

    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> shares;  // (from,to) -> value
    std::map<std::pair<std::size_t, std::size_t>, double> weights;              // decoded values only
    std::map<std::size_t, std::vector<double>> x1_claims;                       // node -> claimed x(1)

    bool share_known(std::size_t from, std::size_t to) const { return shares.count({from, to}) > 0; }
    bool weight_known(std::size_t from, std::size_t to) const { return weights.count({from, to}) > 0; }
};

struct ReconstructionVerdict {
    bool determined = false;
    std::vector<double> estimate;  // only meaningful when determined
};

/// Attempts to pin the target's initial state from the observed constraints
/// (the decomposition and reconstruction identities). Determined only when
/// every term of x(0) = x(1) + sum w_out s_out - sum w_in s_in is observed.
/// The analysis grants the eavesdropper full topology knowledge (worst case).
ReconstructionVerdict eavesdrop_reconstruct(const EavesdropperView& view, const DirectedGraph& graph,
                                            std::size_t target);

/// Ground-truth private assignment of one run; used to build and check
/// underdetermination witnesses.
struct PrivateWorld {
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> shares;  // (owner, holder)
    std::map<std::pair<std::size_t, std::size_t>, double> weights;              // (from, to)

    std::vector<double> x0_of(const DirectedGraph& g, std::size_t i) const;
    std::vector<double> x1_of(const DirectedGraph& g, std::size_t i) const;
};

/// Constructs a second private world that reproduces every observation in the
/// view but assigns the target a different initial state. Empty when the view
/// pins the target (the Determined case).
std::optional<PrivateWorld> underdetermination_witness(const EavesdropperView& view,
                                                       const DirectedGraph& graph, std::size_t target,
                                                       const PrivateWorld& actual);

}  // namespace cefac::adversary
