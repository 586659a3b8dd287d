#pragma once

#include "vlp/chaining.hpp"
#include "vlp/logic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vlp {

struct ProofEdge {
    std::vector<int> tail;  // vertex ids, in rule body order
    std::string rule;
    int head = -1;

    bool operator==(const ProofEdge& o) const { return tail == o.tail && rule == o.rule && head == o.head; }
};

// Vertices are identified with their labels: no two vertices share an atom.
struct ProofForest {
    std::vector<Atom> labels;
    std::vector<ProofEdge> edges;
    std::vector<bool> is_axiom;
    int goal = -1;

    std::size_t size() const { return labels.size(); }
    int add_vertex(const Atom& a, bool axiom);
    std::optional<int> find(const Atom& a) const;
    std::vector<Atom> axioms() const;
    std::vector<Atom> conclusions() const;
    // Incoming edge of each vertex, -1 for sources.
    std::vector<int> incoming() const;
    // One line per hyperedge: `tail -> head [rule]`, debug atom syntax.
    std::string dump() const;
};

// Post-order DFS from the goal visiting premises in body order; each vertex
// appears once, at its first completion.
std::vector<int> dfs_order(const ProofForest& p);

// Same labels and the same hyperedges (up to vertex numbering).
bool same_proof(const ProofForest& a, const ProofForest& b);

struct Validation {
    bool ok = true;
    std::string diagnostic;
};
// Source vertices must be axioms. Negated premises are checked against them
// and against `program_axioms` (the full axiom set, when known).
Validation validate_proof(const ProofForest& p, const std::vector<Rule>& rules,
                          const std::vector<Atom>& program_axioms = {});

struct ShortestProofOptions {
    std::size_t max_nodes = 20'000'000;
    std::size_t max_proofs = 64;
};

struct ShortestProofs {
    std::size_t size = 0;
    std::vector<ProofForest> proofs;
    bool truncated = false;  // a cap was hit; the list may be incomplete
    std::size_t nodes = 0;
};

// Exact minimum-vertex proofs over the hypergraph recorded in a closure.
// Axioms act as leaves. Throws UnprovableError when the goal is missing.
ShortestProofs all_shortest_proofs(const ChainResult& closure, const Atom& goal,
                                   const ShortestProofOptions& opts = {});
ProofForest shortest_proof(const ChainResult& closure, const Atom& goal);
ProofForest shortest_proof(const std::vector<Rule>& rules, const std::vector<Atom>& axioms, const Atom& goal,
                           const ChainOptions& opts = {});

std::vector<Atom> irrelevant_axioms(const ChainResult& closure, const Atom& goal,
                                    const ShortestProofOptions& opts = {});
std::vector<Atom> irrelevant_axioms(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                                    const Atom& goal, const ChainOptions& opts = {});

struct Efficiency {
    std::size_t shortest = 0;
    std::size_t parsed = 0;
    double value = 0;
    bool skipped_steps = false;  // parsed proof shorter than the shortest
};
struct EfficiencyError : LogicError {
    using LogicError::LogicError;
};
Efficiency efficiency(std::size_t parsed_size, std::size_t shortest_size);

}  // namespace vlp
