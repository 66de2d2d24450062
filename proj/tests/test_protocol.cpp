#include <doctest.h>

#include <random>

#include "cefac/json_io.hpp"
#include "cefac/protocol.hpp"

using namespace cefac;
using namespace cefac::protocol;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return std::vector<double>(v); }

}  // namespace

TEST_SUITE_BEGIN("protocol");

TEST_CASE("state decomposition") {
    std::mt19937_64 rng(41);
    SUBCASE("no out-neighbors keeps everything at home") {
        auto shares = decompose_state(vec({1.0, -2.0, 3.0}), 0, {}, rng);
        CHECK(shares.size() == 1);
        CHECK(shares.at(0) == vec({1.0, -2.0, 3.0}));
    }
    SUBCASE("shares always sum to the initial state") {
        std::uniform_real_distribution<double> unit(-5.0, 5.0);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> x0(4);
            for (double& v : x0) v = unit(rng);
            auto shares = decompose_state(x0, 9, {1, 2, 5}, rng);
            CHECK(shares.size() == 4);
            std::vector<double> sum(4, 0.0);
            for (const auto& [who, s] : shares) {
                for (std::size_t k = 0; k < 4; ++k) sum[k] += s[k];
            }
            for (std::size_t k = 0; k < 4; ++k) {
                CHECK(sum[k] == doctest::Approx(x0[k]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("different seeds give different decompositions") {
        std::mt19937_64 r1(100), r2(101);
        auto a = decompose_state(vec({1.0, 1.0}), 0, {1, 2}, r1);
        auto b = decompose_state(vec({1.0, 1.0}), 0, {1, 2}, r2);
        CHECK(a.at(1) != b.at(1));
    }
}

TEST_CASE("state reconstruction") {
    SUBCASE("isolated node keeps its state") {
        auto x1 = reconstruct_state(vec({2.0, 3.0}), {}, {});
        CHECK(x1 == vec({2.0, 3.0}));
    }
    SUBCASE("full handover with weight one") {
        // Two-node exchange: node 1 holds x_1^1, receives x_2^1 at weight 1,
        // and keeps (1-1) = 0 of what it sent node 2.
        std::map<std::size_t, std::pair<std::vector<double>, double>> received{
            {2, {vec({5.0}), 1.0}}};
        std::map<std::size_t, std::pair<std::vector<double>, double>> sent{{2, {vec({7.0}), 1.0}}};
        auto x1 = reconstruct_state(vec({1.0}), received, sent);
        CHECK(x1 == vec({6.0}));
    }
    SUBCASE("weights outside [0,1] are rejected") {
        std::map<std::size_t, std::pair<std::vector<double>, double>> received{
            {2, {vec({5.0}), 1.5}}};
        CHECK_THROWS_AS(reconstruct_state(vec({1.0}), received, {}), WeightDecodeFailure);
    }
    SUBCASE("network-wide sum is preserved on random wirings") {
        std::mt19937_64 rng(43);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 3 + trial % 8;
            // random digraph
            std::vector<std::vector<std::size_t>> outs(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (i != j && unit(rng) < 0.5) outs[i].push_back(j);
                }
            }
            std::vector<std::vector<double>> x0(n, std::vector<double>(3));
            for (auto& x : x0) {
                for (double& v : x) v = unit(rng) * 4.0 - 2.0;
            }
            std::vector<std::map<std::size_t, std::vector<double>>> shares(n);
            std::vector<std::map<std::size_t, double>> weights(n);
            for (std::size_t i = 0; i < n; ++i) {
                shares[i] = decompose_state(x0[i], i, outs[i], rng);
                for (std::size_t j : outs[i]) {
                    weights[i][j] = paillier::decode_weight(paillier::encode_weight(unit(rng)));
                }
            }
            std::vector<double> sum1(3, 0.0), sum0(3, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                std::map<std::size_t, std::pair<std::vector<double>, double>> received, sent;
                for (std::size_t j = 0; j < n; ++j) {
                    for (std::size_t to : outs[j]) {
                        if (to == i) received[j] = {shares[j].at(i), weights[j][i]};
                    }
                }
                for (std::size_t to : outs[i]) sent[to] = {shares[i].at(to), weights[i][to]};
                auto x1 = reconstruct_state(shares[i].at(i), received, sent);
                for (std::size_t k = 0; k < 3; ++k) {
                    sum1[k] += x1[k];
                    sum0[k] += x0[i][k];
                }
            }
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(sum1[k] == doctest::Approx(sum0[k]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("storage updates") {
    const std::size_t n = 5;
    SUBCASE("round 2 trusts senders about themselves") {
        StorageVector mine(n);
        mine.slots[0] = vec({1.0});
        StorageVector theirs(n);
        theirs.slots[1] = vec({2.0});
        theirs.slots[3] = vec({9.0});  // asserting someone else: ignored at round 2
        auto next = storage_update(mine, 0, {{1, theirs}}, 2, 0.25, 2);
        CHECK(next.slots[1] == vec({2.0}));
        CHECK_FALSE(next.slots[3].has_value());
        CHECK(next.slots[0] == vec({1.0}));
    }
    SUBCASE("rounds below 2 are a protocol violation") {
        CHECK_THROWS_AS(storage_update(StorageVector(n), 0, {}, 2, 0.25, 1), ProtocolViolation);
    }
    SUBCASE("zero received leaves the vector unchanged") {
        StorageVector mine(n);
        mine.slots[0] = vec({1.0});
        auto next = storage_update(mine, 0, {}, 2, 0.25, 5);
        CHECK(next == mine);
    }
    SUBCASE("lone assertion below the threshold is never adopted") {
        // in-degree 4, f = 1/4: adoption needs strictly more than one vector.
        StorageVector mine(n);
        mine.slots[0] = vec({1.0});
        StorageVector liar(n);
        liar.slots[3] = vec({666.0});
        StorageVector honest(n);
        std::vector<std::pair<std::size_t, StorageVector>> received{
            {1, liar}, {2, honest}, {3, honest}, {4, honest}};
        auto next = storage_update(mine, 0, received, 4, 0.25, 3);
        CHECK_FALSE(next.slots[3].has_value());
    }
    SUBCASE("agreement above the threshold is adopted") {
        StorageVector mine(n);
        mine.slots[0] = vec({1.0});
        StorageVector a(n), b(n), c(n), d(n);
        a.slots[3] = b.slots[3] = vec({4.0});
        std::vector<std::pair<std::size_t, StorageVector>> received{{1, a}, {2, b}, {3, c}, {4, d}};
        auto next = storage_update(mine, 0, received, 4, 0.25, 3);
        CHECK(next.slots[3] == vec({4.0}));
    }
    SUBCASE("prose semantics needs one more vector") {
        StorageVector mine(n);
        StorageVector a(n), b(n), c(n), d(n);
        a.slots[3] = b.slots[3] = vec({4.0});
        std::vector<std::pair<std::size_t, StorageVector>> received{{1, a}, {2, b}, {3, c}, {4, d}};
        auto next = storage_update(mine, 0, received, 4, 0.25, 3, ThresholdSemantics::Prose);
        CHECK_FALSE(next.slots[3].has_value());
        a.slots[3] = b.slots[3] = c.slots[3] = vec({4.0});
        received = {{1, a}, {2, b}, {3, c}, {4, d}};
        next = storage_update(mine, 0, received, 4, 0.25, 3, ThresholdSemantics::Prose);
        CHECK(next.slots[3] == vec({4.0}));
    }
    SUBCASE("missing vector switches to the majority rule") {
        StorageVector mine(n);
        StorageVector a(n), b(n), c(n);
        a.slots[3] = b.slots[3] = vec({4.0});
        c.slots[3] = vec({5.0});
        // in-degree 4 but only 3 delivered: majority of 3 is 2.
        std::vector<std::pair<std::size_t, StorageVector>> received{{1, a}, {2, b}, {3, c}};
        auto next = storage_update(mine, 0, received, 4, 0.25, 3);
        CHECK(next.slots[3] == vec({4.0}));
    }
    SUBCASE("majority ties adopt nothing") {
        StorageVector mine(n);
        StorageVector a(n), b(n);
        a.slots[3] = vec({4.0});
        b.slots[3] = vec({5.0});
        auto next = storage_update(mine, 0, {{1, a}, {2, b}}, 4, 0.25, 3);
        CHECK_FALSE(next.slots[3].has_value());
    }
    SUBCASE("adopted slots are immutable") {
        StorageVector mine(n);
        mine.slots[3] = vec({4.0});
        StorageVector a(n), b(n), c(n), d(n);
        a.slots[3] = b.slots[3] = c.slots[3] = d.slots[3] = vec({7.0});
        auto next = storage_update(mine, 0, {{1, a}, {2, b}, {3, c}, {4, d}}, 4, 0.25, 3);
        CHECK(next.slots[3] == vec({4.0}));
    }
    SUBCASE("own slot is never overwritten") {
        StorageVector mine(n);
        mine.slots[0] = vec({1.0});
        StorageVector a(n), b(n), c(n), d(n);
        a.slots[0] = b.slots[0] = c.slots[0] = d.slots[0] = vec({9.0});
        auto next = storage_update(mine, 0, {{1, a}, {2, b}, {3, c}, {4, d}}, 4, 0.25, 3);
        CHECK(next.slots[0] == vec({1.0}));
    }
}

TEST_CASE("attacker detection") {
    const std::size_t n = 4;
    StorageVector converged(n);
    converged.slots[0] = vec({0.0});
    converged.slots[1] = vec({1.0});
    converged.slots[2] = vec({2.0});
    converged.slots[3] = vec({3.0});

    SUBCASE("clean history finds nothing") {
        StorageVector honest = converged;
        auto [dos, dec] = detect_attackers({{{1, honest}, {2, honest}}}, converged, {1, 2});
        CHECK(dos.empty());
        CHECK(dec.empty());
    }
    SUBCASE("silent in-neighbor is DoS") {
        StorageVector honest = converged;
        auto [dos, dec] = detect_attackers({{{1, honest}}}, converged, {1, 2});
        CHECK(dos == std::set<std::size_t>{2});
        CHECK(dec.empty());
    }
    SUBCASE("contradicting assertion is deception") {
        StorageVector tampered = converged;
        tampered.slots[3] = vec({99.0});
        auto [dos, dec] = detect_attackers({{{1, tampered}, {2, converged}}}, converged, {1, 2});
        CHECK(dec == std::set<std::size_t>{1});
        CHECK(dos.empty());
    }
}

TEST_CASE("correction computation") {
    std::map<std::size_t, std::pair<std::vector<double>, double>> sent{
        {2, {vec({2.0, 4.0}), 0.25}}, {3, {vec({1.0, 1.0}), 0.5}}};
    std::map<std::size_t, std::pair<std::vector<double>, double>> received{
        {5, {vec({8.0, -8.0}), 0.5}}};

    SUBCASE("no attackers, no corrections") {
        CHECK(compute_correction(sent, received, {}, {}).empty());
    }
    SUBCASE("dos out-neighbor is compensated") {
        auto comps = compute_correction(sent, received, {2}, {});
        CHECK(comps.size() == 1);
        CHECK(comps.at(2) == vec({0.5, 1.0}));
    }
    SUBCASE("deceiver in-neighbor is deleted") {
        auto comps = compute_correction(sent, received, {}, {5});
        CHECK(comps.at(5) == vec({-4.0, 4.0}));
    }
    SUBCASE("unknown out-neighbor is a missing record") {
        CHECK_THROWS_AS(compute_correction(sent, received, {7}, {}), MissingLocalRecord);
    }
    SUBCASE("deceiver that never delivered is skipped") {
        auto comps = compute_correction(sent, received, {}, {6});
        CHECK(comps.empty());
    }
}

TEST_CASE("consensus update") {
    const std::size_t n = 3;
    StorageVector storage(n);
    storage.slots[0] = vec({3.0});
    storage.slots[1] = vec({6.0});
    storage.slots[2] = vec({9.0});
    CorrectionVector corrections(n);

    SUBCASE("zero gain jumps to the target") {
        auto x = consensus_update(vec({100.0}), storage, corrections, {0, 1, 2}, 0.0);
        CHECK(x == vec({6.0}));
    }
    SUBCASE("geometric contraction at rate epsilon") {
        const double eps = 0.25;
        auto x1 = consensus_update(vec({100.0}), storage, corrections, {0, 1, 2}, eps);
        auto x2 = consensus_update(x1, storage, corrections, {0, 1, 2}, eps);
        CHECK(std::abs(x2[0] - 6.0) == doctest::Approx(eps * std::abs(x1[0] - 6.0)));
    }
    SUBCASE("corrections enter the numerator once each") {
        CorrectionRecord rec;
        rec.owner = 1;
        rec.version = 2;
        rec.corrections[2] = vec({3.0});
        corrections.slots[1] = rec;
        // excluded node 2: slots {0,1} plus the correction, divided by 2.
        auto x = consensus_update(vec({0.0}), storage, corrections, {0, 1}, 0.0);
        CHECK(x == vec({6.0}));
    }
    SUBCASE("empty view rejected") {
        CHECK_THROWS_AS(consensus_update(vec({0.0}), storage, corrections, {}, 0.5), EmptyNormalSet);
    }
}

TEST_CASE("message wire format round trip") {
    Message m1{0, 1, 2, MessageKind::SubState, SubStatePayload{vec({1.5, -2.5})}};
    auto j1 = message_to_json(m1);
    CHECK(j1["kind"] == "substate");
    CHECK(j1["v"] == 1);
    auto back1 = message_from_json(j1);
    CHECK(std::get<SubStatePayload>(back1.payload).share == vec({1.5, -2.5}));

    Message m2{0, 1, 2, MessageKind::Weight,
               WeightPayload{paillier::Ciphertext{mpz_class("123456789012345678901234567890"), 2},
                             std::nullopt}};
    auto back2 = message_from_json(message_to_json(m2));
    CHECK(std::get<WeightPayload>(back2.payload).cipher->value ==
          mpz_class("123456789012345678901234567890"));

    StorageVector v(3);
    v.slots[1] = vec({4.0, 5.0});
    Message m3{4, 0, 2, MessageKind::Storage, StoragePayload{v}};
    auto back3 = message_from_json(message_to_json(m3));
    CHECK(std::get<StoragePayload>(back3.payload).vec == v);

    CorrectionVector cv(3);
    CorrectionRecord rec;
    rec.owner = 1;
    rec.version = 2;
    rec.dos = {0};
    rec.corrections[0] = vec({1.0, 2.0});
    cv.slots[1] = rec;
    Message m4{9, 1, 2, MessageKind::Correction, CorrectionPayload{cv}};
    auto back4 = message_from_json(message_to_json(m4));
    CHECK(std::get<CorrectionPayload>(back4.payload).vec == cv);

    SUBCASE("unsupported version rejected") {
        auto j = message_to_json(m1);
        j["v"] = 2;
        CHECK_THROWS_AS(message_from_json(j), ProtocolViolation);
    }
}

TEST_CASE("node runner handles out-of-phase messages") {
    DirectedGraph g(2, {{0, 1}, {1, 0}});
    NodeConfig cfg;
    cfg.encrypt_weights = false;
    NodeRunner node(0, g, vec({1.0, 2.0}), cfg, nullptr, 7);
    auto outbox = node.step(0, {});
    CHECK(outbox.size() == 2);  // substate + weight to node 1

    // A storage message during the reconstruction round is dropped, not fatal.
    Message stray{1, 1, 0, MessageKind::Storage, StoragePayload{StorageVector(2)}};
    Message share{1, 1, 0, MessageKind::SubState, SubStatePayload{vec({0.5, 0.5})}};
    Message weight{1, 1, 0, MessageKind::Weight, WeightPayload{std::nullopt, 5000}};
    auto out1 = node.step(1, {stray, share, weight});
    CHECK(node.x1().size() == 2);
}

TEST_SUITE_END();
