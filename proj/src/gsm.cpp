#include "vlp/gsm.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_set>

namespace vlp {

namespace {

Term va(const std::string& n) { return Term::variable(n, Sort::Agents); }
Term ve(const std::string& n) { return Term::variable(n, Sort::Entity); }
Term vq(const std::string& n) { return Term::variable(n, Sort::Quantity); }
Term vt(const std::string& n) { return Term::variable(n, Sort::Time); }

Atom mk(const std::string& p, std::vector<Term> args, bool neg = false) { return Atom(p, std::move(args), neg); }

Atom add(Term x, Term y, Term z) { return mk(builtin::Add, {std::move(x), std::move(y), std::move(z)}); }
Atom sub(Term x, Term y, Term z) { return mk(builtin::Sub, {std::move(x), std::move(y), std::move(z)}); }
Atom ge(Term x, Term y) { return mk(builtin::Ge, {std::move(x), std::move(y)}); }
Atom eq(Term x, Term y) { return mk(builtin::Eq, {std::move(x), std::move(y)}); }
Atom next_t(Term t, Term u) { return add(std::move(t), Term::time(1), std::move(u)); }

Atom vcont(const Term& a, const Term& x, const Term& e, const Term& t) { return mk(pred::Cont, {a, x, e, t}); }
Atom vcomp(const Term& b, const Term& a, const Term& y, const Term& e, const Term& t)
{
    return mk(pred::Comp, {b, a, y, e, t});
}
Atom vtransfer(const Term& a, const Term& b, const Term& y, const Term& e, const Term& t, bool neg = false)
{
    return mk(pred::Transfer, {a, b, y, e, t}, neg);
}

Rule union_rule(int k)
{
    Rule r;
    r.name = "3." + std::to_string(k);
    const Term E = ve("E"), T = vt("T"), B = va("B"), Y = vq("Y");
    for (int i = 1; i <= k; ++i)
        r.body.push_back(vcont(va("A" + std::to_string(i)), vq("Q" + std::to_string(i)), E, T));
    // Disjointness is enforced through cardinalities: |A1 u .. u Aj| must
    // equal |A1| + .. + |Aj| at every prefix.
    for (int i = 1; i <= k; ++i)
        r.body.push_back(mk(builtin::Card, {va("A" + std::to_string(i)), vq("N" + std::to_string(i))}));
    Term u = va("A1"), n = vq("N1"), q = vq("Q1");
    for (int i = 2; i <= k; ++i) {
        const std::string s = std::to_string(i);
        Term un = i == k ? B : va("U" + s);
        Term nn = vq("S" + s);
        Term qn = i == k ? Y : vq("R" + s);
        r.body.push_back(mk(builtin::Union, {u, va("A" + s), un}));
        r.body.push_back(add(n, vq("N" + s), nn));
        r.body.push_back(mk(builtin::Card, {un, nn}));
        r.body.push_back(add(q, vq("Q" + s), qn));
        u = un;
        n = nn;
        q = qn;
    }
    r.head = vcont(B, Y, E, T);
    return r;
}

Rule frame_rule(const std::string& p)
{
    Rule r;
    r.name = "6." + p;
    r.naf_overlap = true;
    const Term T = vt("T"), U = vt("U");
    std::vector<Term> args;
    std::vector<Term> holders;
    std::vector<Term> ents;
    if (p == pred::Cont) {
        args = {va("A"), vq("X"), ve("E"), T};
        holders = {va("A")};
        ents = {ve("E")};
    } else if (p == pred::Comp) {
        args = {va("B"), va("A"), vq("X"), ve("E"), T};
        holders = {va("B"), va("A")};
        ents = {ve("E")};
    } else if (p == pred::Rate) {
        args = {va("A"), vq("X"), ve("E"), ve("F"), T};
        holders = {va("A")};
        ents = {ve("E"), ve("F")};
    } else {
        args = {va("A"), va("B"), va("C"), va("D"), ve("E"), T};
        holders = {va("A"), va("B"), va("C"), va("D")};
        ents = {ve("E")};
    }
    r.body.push_back(mk(p, args));
    int fresh = 0;
    for (const auto& h : holders)
        for (const auto& e : ents) {
            std::string i = std::to_string(fresh++);
            r.body.push_back(vtransfer(h, va("G" + i), vq("Y" + i), e, T, true));
            r.body.push_back(vtransfer(va("H" + i), h, vq("Z" + i), e, T, true));
        }
    r.body.push_back(next_t(T, U));
    args.back() = U;
    r.head = mk(p, args);
    return r;
}

}  // namespace

const Signature& gsm_signature()
{
    static const Signature sig = [] {
        Signature s;
        using S = Sort;
        s.declare(pred::Cont, {S::Agents, S::Quantity, S::Entity, S::Time});
        s.declare(pred::Comp, {S::Agents, S::Agents, S::Quantity, S::Entity, S::Time});
        s.declare(pred::Transfer, {S::Agents, S::Agents, S::Quantity, S::Entity, S::Time});
        s.declare(pred::Rate, {S::Agents, S::Quantity, S::Entity, S::Entity, S::Time});
        s.declare(pred::Compeq, {S::Agents, S::Agents, S::Agents, S::Agents, S::Entity, S::Time});
        return s;
    }();
    return sig;
}

const Rule& GsmRuleSet::by_name(const std::string& name) const
{
    for (const auto& r : rules)
        if (r.name == name) return r;
    throw LogicError("no rule named " + name);
}

bool GsmRuleSet::has(const std::string& name) const
{
    return std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return r.name == name; });
}

GsmRuleSet build_gsm_rules(int k_max)
{
    if (k_max < 2) throw ConfigError("K_max must be at least 2, got " + std::to_string(k_max));
    GsmRuleSet rs;
    rs.k_max = k_max;
    auto& R = rs.rules;
    const Term A = va("A"), B = va("B"), C = va("C"), D = va("D");
    const Term X = vq("X"), Y = vq("Y"), Z = vq("Z");
    const Term E = ve("E"), F = ve("F"), T = vt("T"), U = vt("U");

    R.push_back({"1a", {vcont(A, X, E, T), vcomp(B, A, Y, E, T), add(X, Y, Z)}, vcont(B, Z, E, T)});
    R.push_back({"1b", {vcont(B, Z, E, T), vcomp(B, A, Y, E, T), ge(Z, Y), sub(Z, Y, X)}, vcont(A, X, E, T)});
    R.push_back({"1c", {vcont(A, X, E, T), vcont(B, Y, E, T), ge(Y, X), sub(Y, X, Z)}, vcomp(B, A, Z, E, T)});
    R.push_back({"2a", {vcont(A, X, E, T), vtransfer(A, B, Y, E, T), add(X, Y, Z), next_t(T, U)}, vcont(A, Z, E, U)});
    R.push_back({"2b",
                 {vcont(B, Z, E, T), vtransfer(A, B, Y, E, T), ge(Z, Y), sub(Z, Y, X), next_t(T, U)},
                 vcont(B, X, E, U)});
    for (int k = 2; k <= k_max; ++k) R.push_back(union_rule(k));
    R.push_back({"4",
                 {vcont(A, X, E, T), mk(pred::Rate, {A, Y, E, F, T}), mk(builtin::Mul, {X, Y, Z})},
                 vcont(A, Z, F, T)});
    R.push_back({"5a",
                 {vcont(A, X, E, T), vcomp(D, C, Y, E, T), mk(pred::Compeq, {A, B, C, D, E, T}), add(X, Y, Z)},
                 vcont(B, Z, E, T)});
    R.push_back({"5b", {vcomp(B, A, X, E, T), vcomp(D, C, Y, E, T), eq(X, Y)}, mk(pred::Compeq, {A, B, C, D, E, T})});
    for (const char* p : {pred::Cont, pred::Comp, pred::Rate, pred::Compeq}) R.push_back(frame_rule(p));
    for (const auto& r : R)
        if (auto why = rule_problem(r); !why.empty()) throw LogicError("rule " + r.name + ": " + why);
    return rs;
}

std::string to_string(const RuleClass& c)
{
    switch (c.kind) {
    case RuleKind::Introduction: return "introduction(" + c.predicate + ")";
    case RuleKind::Elimination: return "elimination(" + c.predicate + ")";
    case RuleKind::Union: return "union";
    default: return "unused";
    }
}

RuleClass classify_rule(const Rule& r)
{
    const std::string& n = r.name;
    if (n == "1a" || n == "1b") return {RuleKind::Elimination, pred::Comp};
    if (n == "1c") return {RuleKind::Introduction, pred::Comp};
    if (n == "2a" || n == "2b") return {RuleKind::Elimination, pred::Transfer};
    if (n == "4") return {RuleKind::Elimination, pred::Rate};
    if (n == "5a") return {RuleKind::Elimination, pred::Compeq};
    if (n == "5b") return {RuleKind::Introduction, pred::Compeq};
    if (n.rfind("3.", 0) == 0) return {RuleKind::Union, ""};
    if (n.rfind("6.", 0) == 0) return {RuleKind::Unused, ""};
    throw LogicError("rule outside the GSM family: " + n);
}

Selectors term_selectors(const Atom& a)
{
    if (a.is_builtin()) throw LogicError("selectors are undefined on builtins: " + a.pred);
    Selectors s;
    for (const auto& t : a.args) {
        if (t.sort() == Sort::Agents) s.agents.push_back(t);
        else if (t.sort() == Sort::Entity) s.entities.push_back(t);
    }
    if (s.agents.empty() || s.entities.empty()) throw LogicError("not a GSM atom: " + a.str());
    return s;
}

namespace {

using TermSet = std::set<Term>;

TermSet sel(const Atom& a, Selector s)
{
    auto x = term_selectors(a);
    const auto& v = s == Selector::Agents ? x.agents : x.entities;
    return TermSet(v.begin(), v.end());
}

bool disjoint(const TermSet& a, const TermSet& b)
{
    return std::none_of(a.begin(), a.end(), [&](const Term& t) { return b.count(t) > 0; });
}

bool contains(const TermSet& big, const TermSet& small)
{
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

// Same holder at a later time, or converted into another entity.
bool differs_in_state(const Atom& x, const Atom& y)
{
    return !(x.args.back() == y.args.back()) || !(entity_of(x) == entity_of(y));
}

}  // namespace

std::vector<std::string> conservation_violations(const GsmRuleSet& rs, Selector s, bool relaxed)
{
    std::vector<std::string> bad;
    for (const auto& r : rs.rules) {
        std::vector<const Atom*> prem;
        for (const auto& b : r.body)
            if (!b.is_builtin() && !b.negated) prem.push_back(&b);
        TermSet ch = sel(r.head, s);
        bool ok = !ch.empty();
        for (auto* p : prem) ok = ok && !sel(*p, s).empty();
        RuleClass c = classify_rule(r);
        if (s == Selector::Entities && c.kind != RuleKind::Unused) {
            // Entity monotonicity: entity-eliminating rules aside, every rule
            // preserves E-terms.
            bool preserves = true;
            for (auto* p : prem) preserves = preserves && sel(*p, s) == ch;
            if (!preserves) {
                bool elim_rate = r.name == "4";
                if (elim_rate) {
                    TermSet side = sel(*prem[0], s), dist = sel(*prem.back(), s);
                    TermSet all = side;
                    all.insert(ch.begin(), ch.end());
                    ok = ok && disjoint(ch, side) && contains(dist, all);
                } else {
                    ok = false;
                }
            }
            if (!ok) bad.push_back(r.name);
            continue;
        }
        switch (c.kind) {
        case RuleKind::Introduction: {
            TermSet u;
            for (std::size_t i = 0; i < prem.size(); ++i) {
                ok = ok && prem[i]->pred != r.head.pred;
                TermSet pi = sel(*prem[i], s);
                for (std::size_t j = 0; j < i; ++j) ok = ok && disjoint(pi, sel(*prem[j], s));
                u.insert(pi.begin(), pi.end());
            }
            ok = ok && u == ch;
            break;
        }
        case RuleKind::Elimination: {
            const Atom* dist = prem.back();
            TermSet cd = sel(*dist, s);
            TermSet need = ch;
            for (std::size_t i = 0; i + 1 < prem.size(); ++i) {
                TermSet pi = sel(*prem[i], s);
                bool sep = disjoint(ch, pi) || (relaxed && differs_in_state(r.head, *prem[i]));
                ok = ok && sep;
                for (std::size_t j = 0; j < i; ++j) ok = ok && disjoint(pi, sel(*prem[j], s));
                need.insert(pi.begin(), pi.end());
            }
            ok = ok && contains(cd, need);
            break;
        }
        case RuleKind::Union: {
            bool has_union = std::any_of(r.body.begin(), r.body.end(),
                                         [](const Atom& b) { return b.pred == builtin::Union; });
            ok = ok && has_union;
            break;
        }
        case RuleKind::Unused: {
            // Some premise must match no rule conclusion: the negated transfers.
            bool some = false;
            for (const auto& b : r.body)
                if (b.negated) some = true;
            ok = ok && some;
            break;
        }
        }
        if (!ok) bad.push_back(r.name);
    }
    return bad;
}

namespace {

struct Vocabulary {
    std::unordered_set<Term, TermHash> sets;
    std::vector<const Term*> multi;  // holder sets with two or more agents

    Vocabulary(const std::vector<Atom>& axioms, const std::optional<Atom>& goal)
    {
        auto take = [&](const Atom& a) {
            for (const auto& t : a.args)
                if (t.sort() == Sort::Agents) sets.insert(t);
        };
        for (const auto& a : axioms) take(a);
        if (goal) take(*goal);
        for (const auto& t : sets)
            if (t.agent_names().size() > 1) multi.push_back(&t);
    }

    bool admits(const Atom& h) const { return h.pred != pred::Cont || sets.count(h.args[0]) > 0; }

    // A partial union can only end in an admitted holder if it sits inside one.
    bool may_grow(const Term& u) const
    {
        const auto& n = u.agent_names();
        return std::any_of(multi.begin(), multi.end(), [&](const Term* t) {
            const auto& m = t->agent_names();
            return m.size() >= n.size() && std::includes(m.begin(), m.end(), n.begin(), n.end());
        });
    }
};

struct ContKey {
    Term a, e, t;
    bool operator==(const ContKey& o) const { return a == o.a && e == o.e && t == o.t; }
};
struct ContKeyHash {
    std::size_t operator()(const ContKey& k) const
    {
        std::size_t h = k.a.hash();
        boost::hash_combine(h, k.e.hash());
        boost::hash_combine(h, k.t.hash());
        return h;
    }
};

ChainOptions bounded_options(std::shared_ptr<const Vocabulary> v, const std::optional<Nat>& horizon)
{
    ChainOptions o;
    o.horizon = horizon;
    o.admit = [v](const Atom& h) { return v->admits(h); };
    o.bind_admit = [v](const Rule& r, const std::string& var, const Term& t) {
        if (t.sort() != Sort::Agents || r.name.rfind("3.", 0) != 0) return true;
        if (var != "B" && var[0] != 'U') return true;
        return v->may_grow(t);
    };
    return o;
}

}  // namespace

std::function<bool(const Atom&)> vocabulary_filter(const std::vector<Atom>& axioms, const std::optional<Atom>& goal)
{
    auto v = std::make_shared<const Vocabulary>(axioms, goal);
    return [v](const Atom& h) { return v->admits(h); };
}

ConsistencyReport consistency_report(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                                     const std::optional<Nat>& horizon, const std::optional<Atom>& goal)
{
    ConsistencyReport rep;
    if (axioms.empty()) return rep;
    gsm_closure(rules, axioms, horizon, goal, AgendaPolicy::Lifo, &rep);
    return rep;
}

bool check_numerical_consistency(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                                 const std::optional<Nat>& horizon)
{
    return consistency_report(rules, axioms, horizon).consistent;
}

ChainResult gsm_closure(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                        const std::optional<Nat>& horizon, const std::optional<Atom>& goal, AgendaPolicy policy,
                        ConsistencyReport* consistency)
{
    auto v = std::make_shared<const Vocabulary>(axioms, goal);
    ChainOptions o = bounded_options(v, horizon);
    o.policy = policy;
    if (consistency) {
        ConsistencyReport& rep = *consistency;
        rep = {};
        auto seen = std::make_shared<std::unordered_map<ContKey, Atom, ContKeyHash>>();
        auto note = [&rep, seen](const Atom& a) {
            if (a.pred != pred::Cont) return true;
            ContKey k{a.args[0], a.args[2], a.args[3]};
            auto [it, fresh] = seen->try_emplace(k, a);
            if (fresh || it->second.args[1] == a.args[1]) return true;
            if (rep.consistent) rep.conflict = std::make_pair(it->second, a);
            rep.consistent = false;
            return false;
        };
        for (const auto& a : axioms) note(a);
        if (!rep.consistent) return {};
        // Refusing the offending head keeps inconsistent programs from diverging.
        o.admit = [v, note](const Atom& h) { return v->admits(h) && note(h); };
    }
    return closure(rules, axioms, o);
}

std::string rules_listing(const GsmRuleSet& rs)
{
    std::ostringstream os;
    for (const auto& r : rs.rules) {
        os << "(" << r.name << ") ";
        for (std::size_t i = 0; i < r.body.size(); ++i) os << (i ? ", " : "") << r.body[i].str();
        os << " |- " << r.head.str() << "\n";
    }
    return os.str();
}

Term ag(std::initializer_list<std::string> names) { return Term::agents(std::vector<std::string>(names)); }

Atom cont(const Term& a, Nat q, const std::string& e, Nat t)
{
    return Atom(pred::Cont, {a, Term::quantity(std::move(q)), Term::entity(e), Term::time(std::move(t))});
}
Atom comp(const Term& b, const Term& a, Nat q, const std::string& e, Nat t)
{
    return Atom(pred::Comp, {b, a, Term::quantity(std::move(q)), Term::entity(e), Term::time(std::move(t))});
}
Atom transfer(const Term& to, const Term& from, Nat q, const std::string& e, Nat t)
{
    return Atom(pred::Transfer, {to, from, Term::quantity(std::move(q)), Term::entity(e), Term::time(std::move(t))});
}
Atom rate(const Term& a, Nat q, const std::string& container, const std::string& e, Nat t)
{
    return Atom(pred::Rate, {a, Term::quantity(std::move(q)), Term::entity(container), Term::entity(e),
                             Term::time(std::move(t))});
}
Atom compeq(const Term& a, const Term& b, const Term& c, const Term& d, const std::string& e, Nat t)
{
    return Atom(pred::Compeq, {a, b, c, d, Term::entity(e), Term::time(std::move(t))});
}

const Term& agents_of(const Atom& a)
{
    for (const auto& t : a.args)
        if (t.sort() == Sort::Agents) return t;
    throw LogicError("atom has no agent argument: " + a.str());
}

const std::string& entity_of(const Atom& a)
{
    for (const auto& t : a.args)
        if (t.sort() == Sort::Entity) return t.entity_name();
    throw LogicError("atom has no entity argument: " + a.str());
}

const Nat& quantity_of(const Atom& a)
{
    for (const auto& t : a.args)
        if (t.sort() == Sort::Quantity) return t.value();
    throw LogicError("atom has no quantity argument: " + a.str());
}

const Nat& time_of(const Atom& a)
{
    if (a.args.empty() || a.args.back().sort() != Sort::Time) throw LogicError("atom has no timestamp: " + a.str());
    return a.args.back().value();
}

}  // namespace vlp
