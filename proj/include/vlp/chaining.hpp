#pragma once

#include "vlp/logic.hpp"

#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

namespace vlp {

enum class AgendaPolicy { Lifo, Fifo };

struct ChainError : LogicError {
    using LogicError::LogicError;
};
struct UnprovableError : LogicError {
    using LogicError::LogicError;
};

struct HyperEdge {
    std::vector<int> tail;  // premise atom ids in rule body order, builtins excluded
    std::string rule;
    int head = -1;
};

struct ChainOptions {
    AgendaPolicy policy = AgendaPolicy::Lifo;
    // Drop conclusions whose timestamps exceed the horizon. Defaults to
    // max axiom timestamp + 1.
    std::optional<Nat> horizon;
    // Keep saturating after the goals are met (closure computation).
    bool exhaustive = false;
    // Extra admissibility test on conclusions; bounds the theorem space.
    std::function<bool(const Atom&)> admit;
    // Called when a builtin binds a rule variable mid-join; false abandons
    // the partial instantiation. Only sound when every completion would fail
    // `admit` anyway.
    std::function<bool(const Rule&, const std::string&, const Term&)> bind_admit;
    std::size_t max_atoms = 4'000'000;
};

// Atoms are interned: ids index `atoms`. Only ids in `pop_trace` are in the
// chart; the rest were left on the agenda when chaining stopped.
struct ChainResult {
    bool proved = false;
    std::vector<Atom> atoms;
    std::vector<int> pop_trace;
    std::vector<HyperEdge> hyperedges;
    std::vector<bool> in_chart;
    std::vector<bool> is_axiom;
    std::optional<Nat> horizon;

    std::optional<int> id_of(const Atom& a) const;
    bool chart_contains(const Atom& a) const;
    std::vector<Atom> chart() const;  // in pop order

    std::unordered_map<Atom, int, AtomHash> index;
};

ChainResult forward_chain(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                          const std::vector<Atom>& goals, const ChainOptions& opts = {});

// Saturates from the axioms; the result's chart is the bounded closure.
ChainResult closure(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                    const ChainOptions& opts = {});

std::vector<Atom> answer_query(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                               const Atom& query, const ChainOptions& opts = {});

// Non-axiom pop order of the agenda loop with axioms popped in presentation order,
// stopping once the goal is derived. The goal closes the list.
std::vector<Atom> reference_pop_order(const std::vector<Rule>& rules,
                                      const std::vector<Atom>& presentation_order, AgendaPolicy policy,
                                      const Atom& goal, ChainOptions opts = {});

Nat default_horizon(const std::vector<Atom>& axioms);
std::optional<Nat> timestamp_of(const Atom& a);

}  // namespace vlp
