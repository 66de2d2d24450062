// Independent brute-force oracles for the verification suites. These
// deliberately use different representations than the main implementations
// (label sets instead of bitmasks, direct definition transcriptions instead
// of precomputed tables) so they cannot share a bug with the code they check.
// Used only by the test binaries and the `verify` command.
#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cefac/digraph.hpp"
#include "cefac/evidence.hpp"

namespace cefac::oracles {

using LabelSet = std::set<std::string>;
using LabelMass = std::map<LabelSet, double>;

inline LabelMass to_label_mass(const cefac::MassFunction& m) {
    LabelMass out;
    for (std::uint32_t a = 0; a < m.frame().subset_count(); ++a) {
        if (m.masses()[a] == 0.0) continue;
        LabelSet s;
        for (std::size_t k = 0; k < m.frame().size(); ++k) {
            if (a & (1u << k)) s.insert(m.frame().events()[k]);
        }
        out[s] += m.masses()[a];
    }
    return out;
}

inline LabelSet set_intersection(const LabelSet& a, const LabelSet& b) {
    LabelSet out;
    for (const auto& x : a) {
        if (b.count(x)) out.insert(x);
    }
    return out;
}

// Dempster's rule by direct pairwise enumeration over label sets.
inline LabelMass dempster_oracle(const cefac::MassFunction& m1, const cefac::MassFunction& m2,
                                 double* conflict_out = nullptr) {
    const LabelMass a = to_label_mass(m1);
    const LabelMass b = to_label_mass(m2);
    LabelMass conv;
    double k = 0.0;
    for (const auto& [sa, va] : a) {
        for (const auto& [sb, vb] : b) {
            const LabelSet inter = set_intersection(sa, sb);
            if (inter.empty()) {
                k += va * vb;
            } else {
                conv[inter] += va * vb;
            }
        }
    }
    if (conflict_out) *conflict_out = k;
    LabelMass out;
    for (const auto& [s, v] : conv) out[s] = v / (1.0 - k);
    return out;
}

inline double oracle_mass_of(const LabelMass& m, const LabelSet& s) {
    auto it = m.find(s);
    return it == m.end() ? 0.0 : it->second;
}

// Naive transcriptions of Definitions 1-3 over explicit node-set subsets.
inline bool reachable_naive(const cefac::DirectedGraph& g, const std::set<std::size_t>& s, double p) {
    for (std::size_t i : s) {
        std::set<std::size_t> ins(g.in_neighbors(i).begin(), g.in_neighbors(i).end());
        std::size_t outside = 0;
        for (std::size_t j : ins) {
            if (!s.count(j)) ++outside;
        }
        const double bound = p * static_cast<double>(ins.size());
        if (bound > 0.0 && static_cast<double>(outside) >= bound) return true;
    }
    return false;
}

inline std::set<std::size_t> subset_from_mask(std::uint32_t mask, std::size_t n) {
    std::set<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) s.insert(i);
    }
    return s;
}

inline bool robust_naive(const cefac::DirectedGraph& g, double p) {
    const std::size_t n = g.size();
    if (n < 2) return true;
    const std::uint32_t full = (1u << n) - 1;
    for (std::uint32_t m1 = 1; m1 <= full; ++m1) {
        for (std::uint32_t m2 = 1; m2 <= full; ++m2) {
            if (m1 & m2) continue;
            if (!reachable_naive(g, subset_from_mask(m1, n), p) &&
                !reachable_naive(g, subset_from_mask(m2, n), p)) {
                return false;
            }
        }
    }
    return true;
}

inline bool strongly_robust_naive(const cefac::DirectedGraph& g, double p) {
    const std::size_t n = g.size();
    if (n < 2) return true;
    const std::uint32_t full = (1u << n) - 1;
    for (std::uint32_t m = 1; m <= full; ++m) {
        const auto s = subset_from_mask(m, n);
        if (reachable_naive(g, s, p)) continue;
        bool covered = false;
        for (std::size_t i : s) {
            std::set<std::size_t> ins(g.in_neighbors(i).begin(), g.in_neighbors(i).end());
            bool all_in = true;
            for (std::size_t v = 0; v < n; ++v) {
                if (!s.count(v) && !ins.count(v)) {
                    all_in = false;
                    break;
                }
            }
            if (all_in) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

// Random normalized mass function; singleton-leaning so conflicts vary.
inline cefac::MassFunction random_mass(const cefac::FrameOfDiscernment& frame, std::mt19937_64& rng,
                                       bool allow_empty = false) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> raw(frame.subset_count(), 0.0);
    double total = 0.0;
    for (std::size_t a = allow_empty ? 0 : 1; a < raw.size(); ++a) {
        const double v = unit(rng);
        raw[a] = v * v;  // skew toward sparse masses
        total += raw[a];
    }
    for (double& v : raw) v /= total;
    double sum = 0.0;
    for (double v : raw) sum += v;
    raw[raw.size() - 1] += 1.0 - sum;
    return cefac::MassFunction(frame, raw);
}

}  // namespace cefac::oracles
