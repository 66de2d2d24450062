#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "cefac/errors.hpp"

namespace cefac {

/// Directed communication graph. Edge (j, i) means node i receives from j.
/// Self-loops are rejected at construction. Immutable once built.
class DirectedGraph {
public:
    /// edges are (from, to) pairs, 0-based.
    DirectedGraph(std::size_t n_nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

    std::size_t size() const { return n_; }
    bool has_edge(std::size_t from, std::size_t to) const;

    /// Nodes that send to i.
    const std::vector<std::size_t>& in_neighbors(std::size_t i) const;
    /// Nodes that receive from i.
    const std::vector<std::size_t>& out_neighbors(std::size_t i) const;

    std::size_t in_degree(std::size_t i) const { return in_neighbors(i).size(); }
    std::size_t out_degree(std::size_t i) const { return out_neighbors(i).size(); }

    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    bool is_strongly_connected() const;

    /// The subgraph induced by `keep`, with nodes renumbered in ascending
    /// order of the kept ids. Returns the graph and the old id for each new id.
    std::pair<DirectedGraph, std::vector<std::size_t>> induced_subgraph(
        const std::set<std::size_t>& keep) const;

private:
    std::size_t n_;
    std::vector<std::vector<std::size_t>> in_;
    std::vector<std::vector<std::size_t>> out_;
};

/// Semantics switch for the f-fraction local attack predicate: count attackers
/// inside each in-neighborhood (the reading the detection thresholds need), or
/// the literal global attacker count from the definition.
enum class FLocalSemantics { Neighborhood, LiteralGlobal };

/// True iff some node in the subset has at least p * in_degree in-neighbors
/// outside the subset, with that threshold strictly positive.
bool is_p_fraction_reachable(const DirectedGraph& g, const std::set<std::size_t>& subset, double p);

/// Definition 2: every pair of disjoint non-empty subsets has at least one
/// p-fraction reachable member. Trivial graphs (< 2 nodes) qualify.
/// Exponential in the node count; refuses graphs above 20 nodes.
bool is_p_fraction_robust(const DirectedGraph& g, double p);

/// Definition 3: every non-empty subset is p-fraction reachable or contains a
/// node whose in-neighborhood covers the rest of the graph.
/// Exponential in the node count; refuses graphs above 20 nodes.
bool is_strongly_p_fraction_robust(const DirectedGraph& g, double p);

/// Definition 4 with the chosen semantics (see FLocalSemantics).
bool satisfies_f_fraction_local(const DirectedGraph& g, const std::set<std::size_t>& attackers,
                                double f, FLocalSemantics semantics = FLocalSemantics::Neighborhood);

}  // namespace cefac
