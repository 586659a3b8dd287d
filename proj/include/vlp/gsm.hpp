#pragma once

#include "vlp/chaining.hpp"
#include "vlp/logic.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vlp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace pred {
inline constexpr const char* Cont = "cont";
inline constexpr const char* Comp = "comp";
inline constexpr const char* Transfer = "transfer";
inline constexpr const char* Rate = "rate";
inline constexpr const char* Compeq = "compeq";
}  // namespace pred

// cont(A;X;E;T)  comp(B;A;Y;E;T)  transfer(A;B;Y;E;T)  rate(A;Y;E;F;T)
// compeq(A;B;C;D;E;T)
const Signature& gsm_signature();

struct GsmRuleSet {
    std::vector<Rule> rules;
    int k_max = 4;

    const Rule& by_name(const std::string& name) const;
    bool has(const std::string& name) const;
};

// Union instances are named 3.2 .. 3.K, frame instances 6.cont, 6.comp, ...
GsmRuleSet build_gsm_rules(int k_max = 4);

enum class RuleKind { Introduction, Elimination, Union, Unused };
struct RuleClass {
    RuleKind kind;
    std::string predicate;  // empty for union/unused

    bool operator==(const RuleClass& o) const { return kind == o.kind && predicate == o.predicate; }
};
std::string to_string(const RuleClass& c);

// Throws LogicError for rules outside the family.
RuleClass classify_rule(const Rule& r);

struct Selectors {
    std::vector<Term> agents;
    std::vector<Term> entities;
};
// Throws LogicError for builtins.
Selectors term_selectors(const Atom& a);

// Checks the conservation conditions for every rule with the chosen
// selector. Returns the names of violating rules. With `relaxed`, an
// elimination rule may share a C-term between its head and a side premise
// when the two differ in timestamp or entity (a later state of the same
// holder).
enum class Selector { Agents, Entities };
std::vector<std::string> conservation_violations(const GsmRuleSet& rs, Selector sel, bool relaxed);

// Agent sets allowed as derived cont holders: those mentioned by the axioms
// or the goal. Keeps union blow-up out of the closure.
std::function<bool(const Atom&)> vocabulary_filter(const std::vector<Atom>& axioms,
                                                   const std::optional<Atom>& goal = std::nullopt);

struct ConsistencyReport {
    bool consistent = true;
    std::optional<std::pair<Atom, Atom>> conflict;
};

ConsistencyReport consistency_report(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                                     const std::optional<Nat>& horizon = std::nullopt,
                                     const std::optional<Atom>& goal = std::nullopt);
bool check_numerical_consistency(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                                 const std::optional<Nat>& horizon = std::nullopt);

// Bounded closure under the vocabulary filter. With `consistency`, also
// records the first cont conflict (and refuses the conflicting head); an
// inconsistent axiom set yields an empty result.
ChainResult gsm_closure(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                        const std::optional<Nat>& horizon, const std::optional<Atom>& goal = std::nullopt,
                        AgendaPolicy policy = AgendaPolicy::Lifo, ConsistencyReport* consistency = nullptr);

std::string rules_listing(const GsmRuleSet& rs);

// Atom constructors for the GSM predicates.
Atom cont(const Term& a, Nat q, const std::string& e, Nat t);
Atom comp(const Term& b, const Term& a, Nat q, const std::string& e, Nat t);
Atom transfer(const Term& to, const Term& from, Nat q, const std::string& e, Nat t);
Atom rate(const Term& a, Nat q, const std::string& container, const std::string& e, Nat t);
Atom compeq(const Term& a, const Term& b, const Term& c, const Term& d, const std::string& e, Nat t);
Term ag(std::initializer_list<std::string> names);

// Named accessors; positions follow the layout above.
const Term& agents_of(const Atom& a);
const std::string& entity_of(const Atom& a);
const Nat& quantity_of(const Atom& a);
const Nat& time_of(const Atom& a);

}  // namespace vlp
