#include "cefac/digraph.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace cefac {

namespace {

constexpr std::size_t kEnumerationCap = 20;

void require_enumerable(const DirectedGraph& g, const char* what) {
    if (g.size() > kEnumerationCap) {
        throw ExplainedLimit(std::string(what) +
                             " enumerates subsets exponentially and is limited to graphs with at most " +
                             std::to_string(kEnumerationCap) +
                             " nodes; it is a verification tool for desk-scale graphs");
    }
}

// Reachability of the subset encoded as a bitmask, against precomputed
// in-neighbor masks.
bool mask_reachable(const std::vector<std::uint32_t>& in_masks,
                    const std::vector<std::size_t>& in_degrees, std::uint32_t subset, double p) {
    for (std::size_t i = 0; i < in_masks.size(); ++i) {
        if (!(subset & (1u << i))) continue;
        const double threshold = p * static_cast<double>(in_degrees[i]);
        if (!(threshold > 0.0)) continue;
        const auto outside = static_cast<double>(std::popcount(in_masks[i] & ~subset));
        if (outside >= threshold) return true;
    }
    return false;
}

std::vector<std::uint32_t> in_neighbor_masks(const DirectedGraph& g) {
    std::vector<std::uint32_t> masks(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j : g.in_neighbors(i)) {
            masks[i] |= 1u << j;
        }
    }
    return masks;
}

}  // namespace

DirectedGraph::DirectedGraph(std::size_t n_nodes,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : n_(n_nodes), in_(n_nodes), out_(n_nodes) {
    for (const auto& [from, to] : edges) {
        if (from >= n_ || to >= n_) {
            throw InvalidNode("edge (" + std::to_string(from) + "," + std::to_string(to) +
                              ") references a node outside the graph");
        }
        if (from == to) {
            throw InvalidNode("self-loop on node " + std::to_string(from) + " is not allowed");
        }
        in_[to].push_back(from);
        out_[from].push_back(to);
    }
    for (auto& v : in_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (auto& v : out_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

bool DirectedGraph::has_edge(std::size_t from, std::size_t to) const {
    if (from >= n_ || to >= n_) return false;
    const auto& ins = in_[to];
    return std::binary_search(ins.begin(), ins.end(), from);
}

const std::vector<std::size_t>& DirectedGraph::in_neighbors(std::size_t i) const {
    if (i >= n_) throw InvalidNode("node " + std::to_string(i) + " out of range");
    return in_[i];
}

const std::vector<std::size_t>& DirectedGraph::out_neighbors(std::size_t i) const {
    if (i >= n_) throw InvalidNode("node " + std::to_string(i) + " out of range");
    return out_[i];
}

std::vector<std::pair<std::size_t, std::size_t>> DirectedGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t from = 0; from < n_; ++from) {
        for (std::size_t to : out_[from]) {
            out.emplace_back(from, to);
        }
    }
    return out;
}

bool DirectedGraph::is_strongly_connected() const {
    if (n_ <= 1) return true;
    auto reaches_all = [&](const std::vector<std::vector<std::size_t>>& adj) {
        std::vector<bool> seen(n_, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w : adj[v]) {
                if (!seen[w]) {
                    seen[w] = true;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == n_;
    };
    return reaches_all(out_) && reaches_all(in_);
}

std::pair<DirectedGraph, std::vector<std::size_t>> DirectedGraph::induced_subgraph(
    const std::set<std::size_t>& keep) const {
    std::vector<std::size_t> old_ids(keep.begin(), keep.end());
    std::vector<std::size_t> new_id(n_, n_);
    for (std::size_t k = 0; k < old_ids.size(); ++k) {
        if (old_ids[k] >= n_) throw InvalidNode("subgraph references a node outside the graph");
        new_id[old_ids[k]] = k;
    }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t from = 0; from < n_; ++from) {
        if (new_id[from] == n_) continue;
        for (std::size_t to : out_[from]) {
            if (new_id[to] == n_) continue;
            edges.emplace_back(new_id[from], new_id[to]);
        }
    }
    return {DirectedGraph(old_ids.size(), edges), std::move(old_ids)};
}

bool is_p_fraction_reachable(const DirectedGraph& g, const std::set<std::size_t>& subset, double p) {
    if (subset.empty()) {
        throw EmptySubset("reachability is defined for non-empty subsets");
    }
    for (std::size_t i : subset) {
        const auto& ins = g.in_neighbors(i);  // validates i
        const double threshold = p * static_cast<double>(ins.size());
        if (!(threshold > 0.0)) continue;
        std::size_t outside = 0;
        for (std::size_t j : ins) {
            if (!subset.count(j)) ++outside;
        }
        if (static_cast<double>(outside) >= threshold) return true;
    }
    return false;
}

bool is_p_fraction_robust(const DirectedGraph& g, double p) {
    if (g.size() < 2) return true;
    require_enumerable(g, "is_p_fraction_robust");
    const auto in_masks = in_neighbor_masks(g);
    std::vector<std::size_t> in_degrees(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) in_degrees[i] = g.in_degree(i);

    const std::uint32_t full = (g.size() == 32) ? 0xffffffffu : ((1u << g.size()) - 1u);
    std::vector<char> reachable(static_cast<std::size_t>(full) + 1, 0);
    for (std::uint32_t s = 1; s <= full; ++s) {
        reachable[s] = mask_reachable(in_masks, in_degrees, s, p) ? 1 : 0;
    }
    // Enumerate disjoint pairs: s1 over subsets, s2 over non-empty subsets of
    // the complement, with s1 containing the complement's lowest free bit
    // excluded to avoid double-visiting (order does not matter).
    for (std::uint32_t s1 = 1; s1 <= full; ++s1) {
        if (reachable[s1]) continue;
        const std::uint32_t rest = full & ~s1;
        // s2 iterates over non-empty submasks of rest.
        for (std::uint32_t s2 = rest; s2 != 0; s2 = (s2 - 1) & rest) {
            if (!reachable[s2]) return false;
        }
    }
    return true;
}

bool is_strongly_p_fraction_robust(const DirectedGraph& g, double p) {
    if (g.size() < 2) return true;
    require_enumerable(g, "is_strongly_p_fraction_robust");
    const auto in_masks = in_neighbor_masks(g);
    std::vector<std::size_t> in_degrees(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) in_degrees[i] = g.in_degree(i);

    const std::uint32_t full = (g.size() == 32) ? 0xffffffffu : ((1u << g.size()) - 1u);
    for (std::uint32_t s = 1; s <= full; ++s) {
        if (mask_reachable(in_masks, in_degrees, s, p)) continue;
        const std::uint32_t outside = full & ~s;
        bool covered = false;
        for (std::size_t i = 0; i < g.size() && !covered; ++i) {
            if (!(s & (1u << i))) continue;
            if ((outside & ~in_masks[i]) == 0) covered = true;
        }
        if (!covered) return false;
    }
    return true;
}

bool satisfies_f_fraction_local(const DirectedGraph& g, const std::set<std::size_t>& attackers,
                                double f, FLocalSemantics semantics) {
    for (std::size_t a : attackers) {
        if (a >= g.size()) throw InvalidNode("attacker id out of range");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (attackers.count(i)) continue;
        const auto& ins = g.in_neighbors(i);
        std::size_t count;
        if (semantics == FLocalSemantics::Neighborhood) {
            count = 0;
            for (std::size_t j : ins) {
                if (attackers.count(j)) ++count;
            }
        } else {
            count = attackers.size();
        }
        if (static_cast<double>(count) > f * static_cast<double>(ins.size())) return false;
    }
    return true;
}

}  // namespace cefac
