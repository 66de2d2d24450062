#include <doctest.h>

#include <cmath>
#include <random>

#include "cefac/credibility.hpp"
#include "cefac/oracles.hpp"

using namespace cefac;

namespace {

const FrameOfDiscernment kAB({"a", "b"});
const FrameOfDiscernment kABC({"a", "b", "c"});

MassFunction from_map(const FrameOfDiscernment& frame,
                      const std::map<std::string, double>& entries) {
    std::vector<double> masses(frame.subset_count(), 0.0);
    for (const auto& [label, v] : entries) masses[frame.subset_from_label(label)] = v;
    return MassFunction(frame, masses);
}

}  // namespace

TEST_SUITE_BEGIN("credibility");

TEST_CASE("initial state structure") {
    SUBCASE("event evidence has unit support for its own event") {
        auto st = build_initial_state(event_evidence(kABC, 0), 1.0);
        CHECK(st.Y[0] == doctest::Approx(1.0));
        // row 0 of X equals the mass vector over non-empty subsets
        auto m = event_evidence(kABC, 0);
        for (std::size_t a = 1; a < kABC.subset_count(); ++a) {
            CHECK(st.X.at(0, a - 1) == doctest::Approx(m.masses()[a]));
        }
    }
    SUBCASE("rows recover the evidence after dividing by Y") {
        std::mt19937_64 rng(8);
        auto m = oracles::random_mass(kABC, rng);
        auto st = build_initial_state(m, 1.7);
        for (std::size_t j = 0; j < kABC.size(); ++j) {
            for (std::size_t a = 1; a < kABC.subset_count(); ++a) {
                CHECK(st.X.at(j, a - 1) / st.Y[j] == doctest::Approx(m.masses()[a]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("symmetric evidence gives equal supports") {
        auto m = from_map(kAB, {{"a", 0.5}, {"b", 0.5}});
        auto st = build_initial_state(m, 1.0);
        CHECK(st.Y[0] == doctest::Approx(st.Y[1]).epsilon(1e-12));
    }
    SUBCASE("supports lie in (0,1]") {
        std::mt19937_64 rng(9);
        for (int i = 0; i < 40; ++i) {
            auto st = build_initial_state(oracles::random_mass(kABC, rng), 2.0);
            for (double y : st.Y) {
                CHECK(y > 0.0);
                CHECK(y <= 1.0);
            }
        }
    }
}

TEST_CASE("conditional credibility") {
    SUBCASE("single node gets everything") {
        Matrix sup(2, 1);
        sup.at(0, 0) = 0.3;
        sup.at(1, 0) = 0.9;
        auto cred = conditional_credibility(sup);
        CHECK(cred.at(0, 0) == doctest::Approx(1.0));
        CHECK(cred.at(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("identical nodes split evenly") {
        Matrix sup(2, 2, 0.4);
        auto cred = conditional_credibility(sup);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(cred.at(j, 0) == doctest::Approx(0.5));
            CHECK(cred.at(j, 1) == doctest::Approx(0.5));
        }
    }
    SUBCASE("rows sum to one") {
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> unit(0.01, 1.0);
        Matrix sup(3, 7);
        for (auto& v : sup.data) v = unit(rng);
        auto cred = conditional_credibility(sup);
        for (std::size_t j = 0; j < 3; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < 7; ++i) sum += cred.at(j, i);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("empty input rejected") {
        CHECK_THROWS_AS(conditional_credibility(Matrix()), EmptyInput);
    }
}

TEST_CASE("wavccme assembly") {
    SUBCASE("single node gives its own evidence in every column") {
        std::mt19937_64 rng(13);
        auto m = oracles::random_mass(kABC, rng);
        auto st = build_initial_state(m, 1.0);
        auto w = assemble_wavccme(kABC, st.X, st.Y);
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t a = 1; a < kABC.subset_count(); ++a) {
                CHECK(w.values().at(a - 1, j) == doctest::Approx(m.masses()[a]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("zero support rejected") {
        Matrix x(2, 3, 0.1);
        CHECK_THROWS_AS(assemble_wavccme(kAB, x, {0.5, 0.0}), ZeroSupport);
    }
    SUBCASE("summed states equal the direct construction") {
        std::mt19937_64 rng(14);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t n_nodes = 1 + trial % 10;
            std::vector<MassFunction> evidence;
            for (std::size_t i = 0; i < n_nodes; ++i) {
                evidence.push_back(oracles::random_mass(kABC, rng));
            }
            const double tau = 0.5 + (trial % 5) * 0.4;
            std::vector<double> flat(NodeInitialState::flat_length(3), 0.0);
            for (const auto& m : evidence) {
                auto f = build_initial_state(m, tau).flatten();
                for (std::size_t k = 0; k < f.size(); ++k) flat[k] += f[k];
            }
            auto assembled = assemble_wavccme(kABC, flat);
            auto direct = centralized_wavccme(evidence, tau);
            for (std::size_t idx = 0; idx < assembled.values().data.size(); ++idx) {
                CHECK(assembled.values().data[idx] ==
                      doctest::Approx(direct.values().data[idx]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("columns are mass functions") {
        std::mt19937_64 rng(15);
        std::vector<MassFunction> evidence;
        for (int i = 0; i < 6; ++i) evidence.push_back(oracles::random_mass(kABC, rng));
        auto w = centralized_wavccme(evidence, 1.0);
        for (std::size_t j = 0; j < 3; ++j) {
            auto col = w.column_as_mass(j);
            CHECK(col.is_normalized());
        }
    }
    SUBCASE("permutation invariance") {
        std::mt19937_64 rng(16);
        std::vector<MassFunction> evidence;
        for (int i = 0; i < 5; ++i) evidence.push_back(oracles::random_mass(kABC, rng));
        auto w1 = centralized_wavccme(evidence, 1.0);
        std::reverse(evidence.begin(), evidence.end());
        auto w2 = centralized_wavccme(evidence, 1.0);
        for (std::size_t idx = 0; idx < w1.values().data.size(); ++idx) {
            CHECK(w1.values().data[idx] == doctest::Approx(w2.values().data[idx]).epsilon(1e-12));
        }
    }
}

TEST_CASE("an outlier earns less credibility than the inliers") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n_inliers = 3 + trial % 7;
        std::vector<MassFunction> evidence;
        auto inlier = from_map(kABC, {{"a", 0.8}, {"b", 0.1}, {"a|b|c", 0.1}});
        for (std::size_t i = 0; i < n_inliers; ++i) evidence.push_back(inlier);
        evidence.push_back(from_map(kABC, {{"c", 0.85}, {"b", 0.05}, {"a|b|c", 0.1}}));

        Matrix sup(3, evidence.size());
        for (std::size_t i = 0; i < evidence.size(); ++i) {
            for (std::size_t j = 0; j < 3; ++j) sup.at(j, i) = support(evidence[i], j, 2.0);
        }
        auto cred = conditional_credibility(sup);
        // Under the inliers' favorite event, the outlier is the least credible.
        for (std::size_t i = 0; i < n_inliers; ++i) {
            CHECK(cred.at(0, evidence.size() - 1) < cred.at(0, i));
        }
    }
}

TEST_CASE("n-fold self combination") {
    std::mt19937_64 rng(18);
    auto m = oracles::random_mass(kABC, rng);
    SUBCASE("count zero is identity") { CHECK(n_fold_self_combine(m, 0) == m); }
    SUBCASE("count one is a single combine") {
        auto once = n_fold_self_combine(m, 1);
        auto expect = dempster_combine(m, m);
        for (std::uint32_t a = 0; a < kABC.subset_count(); ++a) {
            CHECK(once.masses()[a] == doctest::Approx(expect.masses()[a]).epsilon(1e-12));
        }
    }
    SUBCASE("count three matches the stepwise oracle") {
        auto got = n_fold_self_combine(m, 3);
        auto lm = oracles::to_label_mass(m);
        auto acc = oracles::dempster_oracle(m, m);
        // fold twice more through the oracle
        auto fold = [&](const oracles::LabelMass& a) {
            oracles::LabelMass conv;
            double k = 0.0;
            for (const auto& [sa, va] : a) {
                for (const auto& [sb, vb] : lm) {
                    auto inter = oracles::set_intersection(sa, sb);
                    if (inter.empty()) k += va * vb;
                    else conv[inter] += va * vb;
                }
            }
            oracles::LabelMass out;
            for (const auto& [s, v] : conv) out[s] = v / (1.0 - k);
            return out;
        };
        acc = fold(fold(acc));
        auto got_lm = oracles::to_label_mass(got);
        for (const auto& [s, v] : acc) {
            CHECK(oracles::oracle_mass_of(got_lm, s) == doctest::Approx(v).epsilon(1e-9));
        }
    }
}

TEST_CASE("iterative fusion") {
    SUBCASE("identical columns collapse to self-combination") {
        std::mt19937_64 rng(19);
        auto m = oracles::random_mass(kABC, rng);
        Matrix cols(kABC.subset_count() - 1, 3);
        for (std::size_t a = 1; a < kABC.subset_count(); ++a) {
            for (std::size_t j = 0; j < 3; ++j) cols.at(a - 1, j) = m.masses()[a];
        }
        WavccmeMatrix w(kABC, cols);
        auto result = iterative_fusion(w, 4, 1e-9);
        CHECK(result.converged);
        auto expect = n_fold_self_combine(m, 3);
        for (std::uint32_t a = 0; a < kABC.subset_count(); ++a) {
            CHECK(result.m_fused.masses()[a] == doctest::Approx(expect.masses()[a]).epsilon(1e-9));
        }
    }
    SUBCASE("two identical pieces of evidence fuse to their pairwise combination") {
        std::mt19937_64 rng(20);
        auto m = oracles::random_mass(kAB, rng);
        auto w = centralized_wavccme({m, m}, 1.0);
        auto result = iterative_fusion(w, 2, 1e-10);
        auto expect = dempster_combine(m, m);
        for (std::uint32_t a = 0; a < kAB.subset_count(); ++a) {
            CHECK(result.m_fused.masses()[a] == doctest::Approx(expect.masses()[a]).epsilon(1e-8));
        }
    }
    SUBCASE("event probabilities are the pignistic transform of the result") {
        std::mt19937_64 rng(21);
        std::vector<MassFunction> evidence;
        for (int i = 0; i < 5; ++i) evidence.push_back(oracles::random_mass(kABC, rng));
        auto w = centralized_wavccme(evidence, 1.0);
        auto result = iterative_fusion(w, 5, 1e-8);
        auto probs = betp(result.m_fused);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(result.event_probs[j] == doctest::Approx(probs[j]).epsilon(1e-12));
        }
    }
    SUBCASE("one extra step after convergence moves P by at most delta") {
        std::mt19937_64 rng(22);
        std::vector<MassFunction> evidence;
        for (int i = 0; i < 4; ++i) evidence.push_back(oracles::random_mass(kABC, rng));
        auto w = centralized_wavccme(evidence, 1.0);
        const double delta = 1e-7;
        auto result = iterative_fusion(w, 4, delta);
        // Re-run one iteration by hand from the converged P.
        std::vector<double> masses(kABC.subset_count(), 0.0);
        double sum = 0.0;
        for (std::size_t a = 1; a < kABC.subset_count(); ++a) {
            for (std::size_t j = 0; j < 3; ++j) {
                masses[a] += w.values().at(a - 1, j) * result.event_probs[j];
            }
            sum += masses[a];
        }
        for (auto& v : masses) v /= sum;
        auto fused = n_fold_self_combine(MassFunction(kABC, masses), 3);
        auto probs = betp(fused);
        double dist2 = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            dist2 += (probs[j] - result.event_probs[j]) * (probs[j] - result.event_probs[j]);
        }
        CHECK(std::sqrt(dist2) <= delta * 1.01);
    }
}

TEST_SUITE_END();
