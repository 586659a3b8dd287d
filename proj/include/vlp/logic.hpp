#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlp {

using Nat = boost::multiprecision::cpp_int;

enum class Sort : std::uint8_t { Agents, Entity, Quantity, Time };

const char* sort_name(Sort s);
bool is_numeric(Sort s);

struct LogicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TypedSubstitutionError : LogicError {
    using LogicError::LogicError;
};
struct EvalError : LogicError {
    using LogicError::LogicError;
};

// A constant or a sorted variable. Agent sets are kept sorted and
// de-duplicated so set equality is plain vector equality.
class Term {
public:
    static Term variable(std::string id, Sort s);
    static Term agents(std::vector<std::string> names);
    static Term entity(std::string name);
    static Term quantity(Nat n);
    static Term time(Nat n);
    static Term number(Sort s, Nat n);

    bool is_var() const { return var_; }
    Sort sort() const { return sort_; }
    const std::string& var_id() const { return text_; }
    const std::string& entity_name() const { return text_; }
    const std::vector<std::string>& agent_names() const { return names_; }
    const Nat& value() const { return num_; }
    std::size_t hash() const { return hash_; }

    bool operator==(const Term& o) const;
    bool operator!=(const Term& o) const { return !(*this == o); }
    bool operator<(const Term& o) const;

    std::string str() const;

private:
    Term() = default;
    void rehash();

    bool var_ = false;
    Sort sort_ = Sort::Entity;
    std::string text_;
    std::vector<std::string> names_;
    Nat num_;
    std::size_t hash_ = 0;
};

// Built-in predicate symbols. Argument layout:
//   add(X,Y,Z)  X + Y = Z        sub(X,Y,Z)  X - Y = Z
//   mul(X,Y,Z)  X * Y = Z        eq(X,Y)     X = Y
//   ge(X,Y)     X >= Y
//   union(X,Y,Z) X u Y = Z       inter(X,Y,Z) X n Y = Z
//   card(X,N)   |X| = N          seteq(X,Y)  X = Y
//   cardge(X,N) |X| >= N
namespace builtin {
inline constexpr const char* Add = "add";
inline constexpr const char* Sub = "sub";
inline constexpr const char* Mul = "mul";
inline constexpr const char* Eq = "eq";
inline constexpr const char* Ge = "ge";
inline constexpr const char* Union = "union";
inline constexpr const char* Inter = "inter";
inline constexpr const char* Card = "card";
inline constexpr const char* SetEq = "seteq";
inline constexpr const char* CardGe = "cardge";
}  // namespace builtin

bool is_builtin(const std::string& pred);
const std::vector<std::string>& builtin_names();

struct Atom {
    std::string pred;
    std::vector<Term> args;
    bool negated = false;

    Atom() = default;
    Atom(std::string p, std::vector<Term> a, bool neg = false)
        : pred(std::move(p)), args(std::move(a)), negated(neg) {}

    bool is_builtin() const { return vlp::is_builtin(pred); }
    bool is_ground() const;
    std::size_t hash() const;
    bool operator==(const Atom& o) const;
    bool operator!=(const Atom& o) const { return !(*this == o); }
    bool operator<(const Atom& o) const;

    // Canonical record syntax: pred({a,b};3;apple;1)
    std::string str() const;
    // Debug syntax used in proof dumps: pred({a,b},3,apple)@1
    std::string debug_str() const;
};

struct AtomHash {
    std::size_t operator()(const Atom& a) const { return a.hash(); }
};
struct TermHash {
    std::size_t operator()(const Term& t) const { return t.hash(); }
};

std::set<std::string> variables_of(const Atom& a);

class Substitution {
public:
    // Throws TypedSubstitutionError when the sorts differ.
    void bind(const std::string& var, Sort var_sort, const Term& t);
    const Term* find(const std::string& var) const;
    bool empty() const { return map_.empty(); }
    std::size_t size() const { return map_.size(); }
    const std::map<std::string, Term>& bindings() const { return map_; }
    bool operator==(const Substitution& o) const { return map_ == o.map_; }

private:
    std::map<std::string, Term> map_;
};

Term apply_substitution(const Term& t, const Substitution& theta);
Atom apply_substitution(const Atom& a, const Substitution& theta);
// (a / s1) / s2 == a / compose(s1, s2)
Substitution compose(const Substitution& s1, const Substitution& s2);

std::optional<Substitution> unify(const Atom& a, const Atom& b);

// Throws EvalError when the atom is not ground.
bool eval_builtin(const Atom& a);

// Builtin solving for rule instantiation: with at most one unbound
// numeric or set result variable, computes its value.
enum class SolveStatus { True, False, Bound, Unsolvable };
SolveStatus solve_builtin(const Atom& a, Substitution& theta);

struct Rule {
    std::string name;
    std::vector<Atom> body;
    Atom head;
    // Negated premises with unbound variables succeed when no axiom matches.
    // With naf_overlap, agent-set arguments match on intersection rather
    // than equality.
    bool naf_overlap = false;

    bool is_axiom() const { return body.empty(); }
};

bool check_range_restricted(const Rule& r);
// Structural checks: head not builtin or negated, builtins never negated,
// axioms ground. Returns an empty string when fine.
std::string rule_problem(const Rule& r);

class Signature {
public:
    void declare(const std::string& pred, std::vector<Sort> sorts);
    void add_agent(const std::string& name);
    void add_entity(const std::string& name);

    bool has_predicate(const std::string& pred) const;
    const std::vector<Sort>& sorts(const std::string& pred) const;
    const std::map<std::string, std::vector<Sort>>& predicates() const { return preds_; }
    const std::set<std::string>& agent_names() const { return agents_; }
    const std::set<std::string>& entity_names() const { return entities_; }

    // Empty when the atom matches its declaration (or builtin layout).
    std::string check(const Atom& a) const;
    // Names must be pairwise distinct across the three pools.
    bool names_disjoint() const;

private:
    std::map<std::string, std::vector<Sort>> preds_;
    std::set<std::string> agents_;
    std::set<std::string> entities_;
};

// Parse the record syntax using the signature to recover numeric sorts.
Atom parse_atom(const std::string& text, const Signature& sig);

}  // namespace vlp
