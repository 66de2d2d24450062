#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <variant>
#include <vector>

#include "cefac/credibility.hpp"
#include "cefac/digraph.hpp"
#include "cefac/paillier.hpp"

namespace cefac::protocol {

/// Slot-adoption threshold under full reception: the algorithm-listing form
/// (strictly more than f * in_degree agreeing vectors) or the stricter prose
/// form (more than f * in_degree + 1).
enum class ThresholdSemantics { Algorithm, Prose };

enum class MessageKind { SubState, Weight, Storage, Correction };

struct SubStatePayload {
    std::vector<double> share;
    bool operator==(const SubStatePayload&) const = default;
};

/// Weight travels encrypted under the recipient's key, or as the raw scaled
/// integer when the encryption ablation is active.
struct WeightPayload {
    std::optional<paillier::Ciphertext> cipher;
    std::optional<long> plain;
    bool operator==(const WeightPayload&) const = default;
};

/// Replicated ledger of claimed reconstructed states x_j(1), one slot per node.
struct StorageVector {
    std::vector<std::optional<std::vector<double>>> slots;

    explicit StorageVector(std::size_t n = 0) : slots(n) {}
    std::size_t filled() const;
    bool operator==(const StorageVector&) const = default;
};

/// A normal node's published detection + compensation record. Version 1
/// carries the identified neighbor sets; version 2 adds the correction
/// components, keyed by the attacker they compensate for or delete.
struct CorrectionRecord {
    std::size_t owner = 0;
    int version = 1;
    std::set<std::size_t> dos;
    std::set<std::size_t> deception;
    std::map<std::size_t, std::vector<double>> corrections;

    std::vector<double> total(std::size_t dim) const;
    bool operator==(const CorrectionRecord&) const = default;
};

struct CorrectionVector {
    std::vector<std::optional<CorrectionRecord>> slots;

    explicit CorrectionVector(std::size_t n = 0) : slots(n) {}
    bool operator==(const CorrectionVector&) const = default;
};

struct StoragePayload {
    StorageVector vec;
    bool operator==(const StoragePayload&) const = default;
};
struct CorrectionPayload {
    CorrectionVector vec;
    bool operator==(const CorrectionPayload&) const = default;
};

struct Message {
    std::size_t round = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    MessageKind kind = MessageKind::SubState;
    std::variant<SubStatePayload, WeightPayload, StoragePayload, CorrectionPayload> payload;
};

/// Pre-distributed key directory: "public keys of all nodes have been
/// broadcast to the entire network in advance". Private keys are used only by
/// their owner; the directory is scenario-seeded.
struct KeyDirectory {
    std::vector<paillier::Keypair> keys;
};

struct NodeConfig {
    double f = 0.0;
    ThresholdSemantics threshold_semantics = ThresholdSemantics::Algorithm;
    std::size_t stability_rounds = 8;  // N_s
    double epsilon = 0.5;
    double x_stability_tol = 1e-12;
    bool encrypt_weights = true;
    /// Deception attackers run the storage machinery but cannot repair the
    /// damage they caused; their internal runner has this switched off.
    bool apply_corrections = true;
};

enum class Phase { Init, Decompose, Reconstruct, Disseminate, Correct, Converged };

// ---------------------------------------------------------------------------
// Stateless protocol steps (unit-testable in isolation)

/// Splits x0 into |out_neighbors|+1 sub-states that sum to x0 exactly. The
/// transmitted shares are uniform noise in [-R, R], R = max(1, 2 max|x0|);
/// the retained share absorbs the remainder.
std::map<std::size_t, std::vector<double>> decompose_state(const std::vector<double>& x0,
                                                           std::size_t self,
                                                           const std::vector<std::size_t>& out_neighbors,
                                                           std::mt19937_64& rng);

/// Reconstruction rule: x(1) = own share + sum w_ji * received_j + sum
/// (1 - w_ij) * sent_j. Missing in-neighbor entries contribute nothing.
std::vector<double> reconstruct_state(
    const std::vector<double>& own_share,
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& received,
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& sent);

/// One storage-vector update. round == 2 trusts each sender about its own
/// slot; later rounds use the majority rule when a vector is missing (DoS
/// observed) and the f-threshold rule under full reception. Adopted slots are
/// never overwritten; the own slot is never touched. Returns the new vector.
StorageVector storage_update(const StorageVector& current, std::size_t own_id,
                             const std::vector<std::pair<std::size_t, StorageVector>>& received,
                             std::size_t in_degree, double f, std::size_t round,
                             ThresholdSemantics semantics = ThresholdSemantics::Algorithm);

/// Classifies in-neighbors from the observed storage traffic: never delivered
/// -> DoS; asserted a value that contradicts an accepted slot -> deception.
std::pair<std::set<std::size_t>, std::set<std::size_t>> detect_attackers(
    const std::vector<std::vector<std::pair<std::size_t, StorageVector>>>& history,
    const StorageVector& converged, const std::vector<std::size_t>& in_neighbors);

/// Correction components for one node: compensation for every share handed to
/// an attacker, deletion of every share mixed in from a deceiver. Keyed by the
/// attacker so the network-wide sum counts each component exactly once.
std::map<std::size_t, std::vector<double>> compute_correction(
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& sent,
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& received_mixed,
    const std::set<std::size_t>& attackers_out, const std::set<std::size_t>& deceivers_in);

/// Convergent update rule: x <- eps x + (1-eps) (sum of trusted slots + sum of
/// corrections) / |V_n,i|.
std::vector<double> consensus_update(const std::vector<double>& x_prev, const StorageVector& storage,
                                     const CorrectionVector& corrections,
                                     const std::set<std::size_t>& normal_view, double epsilon);

// ---------------------------------------------------------------------------

/// Per-node state machine for the consensus under attack. Deterministic given
/// its seed and inbox order; the harness steps nodes round by round.
class NodeRunner {
public:
    NodeRunner(std::size_t id, const DirectedGraph& graph, std::vector<double> x0, NodeConfig cfg,
               const KeyDirectory* keys, std::uint64_t seed);

    std::vector<Message> step(std::size_t round, const std::vector<Message>& inbox);

    Phase phase() const { return phase_; }
    bool converged() const { return phase_ == Phase::Converged; }
    std::size_t id() const { return id_; }

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& x0() const { return x0_; }
    const std::vector<double>& x1() const { return x1_; }
    const std::vector<double>& own_share() const { return own_share_; }
    const StorageVector& storage() const { return storage_; }
    const CorrectionVector& corrections() const { return corrections_; }

    const std::set<std::size_t>& detected_dos() const { return detected_dos_; }
    const std::set<std::size_t>& detected_deception() const { return detected_deception_; }

    std::size_t storage_stable_rounds() const { return s_stable_rounds_; }
    std::size_t correction_stable_rounds() const { return e_stable_rounds_; }
    std::size_t state_stable_rounds() const { return x_stable_rounds_; }
    bool detection_published() const { return detection_done_; }
    bool corrections_final() const { return corrections_final_; }

    /// Attackers known to this node: own detections plus the union over
    /// adopted correction records.
    std::set<std::size_t> attacker_view() const;
    std::set<std::size_t> normal_view() const;

    const std::map<std::size_t, std::pair<std::vector<double>, double>>& sent_records() const {
        return sent_;
    }
    const std::map<std::size_t, std::pair<std::vector<double>, double>>& received_records() const {
        return received_;
    }
    double weight_sent_to(std::size_t j) const;

    /// Replaces the own storage slot (used by the deception wrapper to make
    /// the broadcast claim and the local ledger coincide).
    void force_own_slot(std::vector<double> value);

private:
    std::vector<Message> step_decompose();
    std::vector<Message> step_reconstruct(const std::vector<Message>& inbox);
    std::vector<Message> step_disseminate(std::size_t round, const std::vector<Message>& inbox);

    void process_storage(std::size_t round, const std::vector<std::pair<std::size_t, StorageVector>>& received);
    void process_corrections(const std::vector<std::pair<std::size_t, CorrectionVector>>& received);
    void publish_detection();
    void maybe_finalize_corrections();
    void update_state();

    std::size_t id_;
    std::size_t n_;
    std::vector<std::size_t> in_nbrs_;
    std::vector<std::size_t> out_nbrs_;
    NodeConfig cfg_;
    const KeyDirectory* keys_;
    std::mt19937_64 rng_;
    paillier::Rng enc_rng_;

    std::vector<double> x0_, x1_, x_;
    std::vector<double> own_share_;
    std::map<std::size_t, std::pair<std::vector<double>, double>> sent_;      // recipient -> (share, w)
    std::map<std::size_t, std::pair<std::vector<double>, double>> received_;  // sender -> (share, w), mixed only
    std::map<std::size_t, std::vector<double>> pending_shares_;
    std::map<std::size_t, WeightPayload> pending_weights_;

    StorageVector storage_;
    CorrectionVector corrections_;
    std::set<std::size_t> delivered_ever_;
    std::set<std::size_t> detected_dos_;
    std::set<std::size_t> detected_deception_;
    std::set<std::size_t> mismatch_;

    std::size_t s_stable_rounds_ = 0;
    std::size_t e_stable_rounds_ = 0;
    std::size_t x_stable_rounds_ = 0;
    std::size_t rounds_since_detection_ = 0;
    bool detection_done_ = false;
    bool corrections_final_ = false;
    // Nodes that look normal in the ledger but never publish a correction
    // record. Every normal node publishes one, so silence past the timeout
    // marks an attacker whose claims were consistent lies.
    std::set<std::size_t> inferred_silent_;
    Phase phase_ = Phase::Init;
};

}  // namespace cefac::protocol
