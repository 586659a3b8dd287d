#include "vlp/logic.hpp"

#include <boost/container_hash/hash.hpp>

#include <algorithm>
#include <sstream>

namespace vlp {

const char* sort_name(Sort s)
{
    switch (s) {
    case Sort::Agents: return "agents";
    case Sort::Entity: return "entity";
    case Sort::Quantity: return "quantity";
    case Sort::Time: return "time";
    }
    return "?";
}

bool is_numeric(Sort s) { return s == Sort::Quantity || s == Sort::Time; }

Term Term::variable(std::string id, Sort s)
{
    if (id.empty()) throw LogicError("empty variable identifier");
    Term t;
    t.var_ = true;
    t.sort_ = s;
    t.text_ = std::move(id);
    t.rehash();
    return t;
}

Term Term::agents(std::vector<std::string> names)
{
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    if (names.empty()) throw LogicError("agent set constant must be non-empty");
    for (const auto& n : names)
        if (n.empty()) throw LogicError("empty agent name");
    Term t;
    t.sort_ = Sort::Agents;
    t.names_ = std::move(names);
    t.rehash();
    return t;
}

Term Term::entity(std::string name)
{
    if (name.empty()) throw LogicError("empty entity name");
    Term t;
    t.sort_ = Sort::Entity;
    t.text_ = std::move(name);
    t.rehash();
    return t;
}

Term Term::number(Sort s, Nat n)
{
    if (!is_numeric(s)) throw LogicError("number term needs a numeric sort");
    if (n < 0) throw LogicError("quantities and timestamps are natural numbers");
    Term t;
    t.sort_ = s;
    t.num_ = std::move(n);
    t.rehash();
    return t;
}

Term Term::quantity(Nat n) { return number(Sort::Quantity, std::move(n)); }
Term Term::time(Nat n) { return number(Sort::Time, std::move(n)); }

void Term::rehash()
{
    std::size_t h = std::hash<int>{}(static_cast<int>(sort_) * 2 + (var_ ? 1 : 0));
    if (var_ || sort_ == Sort::Entity) {
        boost::hash_combine(h, text_);
    } else if (sort_ == Sort::Agents) {
        for (const auto& n : names_) boost::hash_combine(h, n);
    } else {
        boost::hash_combine(h, boost::hash<Nat>{}(num_));
    }
    hash_ = h;
}

bool Term::operator==(const Term& o) const
{
    if (hash_ != o.hash_ || var_ != o.var_ || sort_ != o.sort_) return false;
    if (var_ || sort_ == Sort::Entity) return text_ == o.text_;
    if (sort_ == Sort::Agents) return names_ == o.names_;
    return num_ == o.num_;
}

bool Term::operator<(const Term& o) const
{
    if (var_ != o.var_) return var_ < o.var_;
    if (sort_ != o.sort_) return sort_ < o.sort_;
    if (var_ || sort_ == Sort::Entity) return text_ < o.text_;
    if (sort_ == Sort::Agents) return names_ < o.names_;
    return num_ < o.num_;
}

std::string Term::str() const
{
    if (var_) return "?" + text_;
    switch (sort_) {
    case Sort::Agents: {
        std::string s = "{";
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (i) s += ',';
            s += names_[i];
        }
        return s + "}";
    }
    case Sort::Entity: return text_;
    default: return num_.str();
    }
}

const std::vector<std::string>& builtin_names()
{
    static const std::vector<std::string> names = {
        builtin::Add, builtin::Sub, builtin::Mul, builtin::Eq, builtin::Ge,
        builtin::Union, builtin::Inter, builtin::Card, builtin::SetEq, builtin::CardGe};
    return names;
}

bool is_builtin(const std::string& pred)
{
    const auto& n = builtin_names();
    return std::find(n.begin(), n.end(), pred) != n.end();
}

bool Atom::is_ground() const
{
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_var(); });
}

std::size_t Atom::hash() const
{
    std::size_t h = std::hash<std::string>{}(pred);
    boost::hash_combine(h, negated);
    for (const auto& t : args) boost::hash_combine(h, t.hash());
    return h;
}

bool Atom::operator==(const Atom& o) const
{
    return negated == o.negated && pred == o.pred && args == o.args;
}

bool Atom::operator<(const Atom& o) const
{
    if (pred != o.pred) return pred < o.pred;
    if (negated != o.negated) return negated < o.negated;
    return std::lexicographical_compare(args.begin(), args.end(), o.args.begin(), o.args.end());
}

std::string Atom::str() const
{
    std::string s = negated ? "not " : "";
    s += pred + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ';';
        s += args[i].str();
    }
    return s + ")";
}

std::string Atom::debug_str() const
{
    std::string s = negated ? "not " : "";
    s += pred + "(";
    std::string t;
    bool first = true;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].is_var() && args[i].sort() == Sort::Time && t.empty() && i + 1 == args.size()) {
            t = args[i].str();
            continue;
        }
        if (!first) s += ',';
        first = false;
        s += args[i].str();
    }
    s += ")";
    if (!t.empty()) s += "@" + t;
    return s;
}

std::set<std::string> variables_of(const Atom& a)
{
    std::set<std::string> v;
    for (const auto& t : a.args)
        if (t.is_var()) v.insert(t.var_id());
    return v;
}

void Substitution::bind(const std::string& var, Sort var_sort, const Term& t)
{
    if (t.sort() != var_sort)
        throw TypedSubstitutionError("variable " + var + " of sort " + sort_name(var_sort) +
                                     " cannot take a " + sort_name(t.sort()) + " term");
    if (t.is_var() && t.var_id() == var) return;  // never map a variable to itself
    map_.insert_or_assign(var, t);
}

const Term* Substitution::find(const std::string& var) const
{
    auto it = map_.find(var);
    return it == map_.end() ? nullptr : &it->second;
}

Term apply_substitution(const Term& t, const Substitution& theta)
{
    if (!t.is_var()) return t;
    const Term* img = theta.find(t.var_id());
    if (!img) return t;
    if (img->sort() != t.sort())
        throw TypedSubstitutionError("sort mismatch for variable " + t.var_id());
    return *img;
}

Atom apply_substitution(const Atom& a, const Substitution& theta)
{
    Atom out = a;
    for (auto& t : out.args) t = apply_substitution(t, theta);
    return out;
}

Substitution compose(const Substitution& s1, const Substitution& s2)
{
    Substitution out;
    for (const auto& [v, t] : s1.bindings()) {
        Term img = apply_substitution(t, s2);
        if (img.is_var() && img.var_id() == v) continue;
        out.bind(v, t.sort(), img);
    }
    for (const auto& [v, t] : s2.bindings())
        if (!s1.find(v)) out.bind(v, t.sort(), t);
    return out;
}

namespace {

const Term& walk(const Term& t, const Substitution& s)
{
    const Term* cur = &t;
    while (cur->is_var()) {
        const Term* next = s.find(cur->var_id());
        if (!next) break;
        cur = next;
    }
    return *cur;
}

}  // namespace

std::optional<Substitution> unify(const Atom& a, const Atom& b)
{
    if (a.pred != b.pred || a.negated != b.negated || a.args.size() != b.args.size())
        return std::nullopt;
    Substitution s;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        const Term& x = walk(a.args[i], s);
        const Term& y = walk(b.args[i], s);
        if (x.sort() != y.sort()) return std::nullopt;
        if (x == y) continue;
        if (x.is_var()) {
            s.bind(x.var_id(), x.sort(), y);
        } else if (y.is_var()) {
            s.bind(y.var_id(), y.sort(), x);
        } else {
            return std::nullopt;
        }
    }
    // Resolve chains so the result is idempotent.
    Substitution out;
    for (const auto& [v, t] : s.bindings()) {
        const Term& r = walk(t, s);
        if (r.is_var() && r.var_id() == v) continue;
        out.bind(v, t.sort(), r);
    }
    return out;
}

namespace {

using Names = std::vector<std::string>;

Names set_union(const Names& x, const Names& y)
{
    Names out;
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
}

Names set_inter(const Names& x, const Names& y)
{
    Names out;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
}

void expect_arity(const Atom& a, std::size_t n)
{
    if (a.args.size() != n) throw LogicError("builtin " + a.pred + " expects " + std::to_string(n) + " arguments");
}

}  // namespace

bool eval_builtin(const Atom& a)
{
    if (!a.is_ground()) throw EvalError("cannot evaluate a non-ground atom: " + a.str());
    if (!a.is_builtin()) return false;
    const auto& p = a.pred;
    const auto& g = a.args;
    auto num = [&](std::size_t i) -> const Nat& {
        if (!is_numeric(g[i].sort())) throw LogicError("numeric argument expected in " + a.str());
        return g[i].value();
    };
    auto names = [&](std::size_t i) -> const Names& {
        if (g[i].sort() != Sort::Agents) throw LogicError("set argument expected in " + a.str());
        return g[i].agent_names();
    };
    bool r = false;
    if (p == builtin::Add) {
        expect_arity(a, 3);
        r = num(0) + num(1) == num(2);
    } else if (p == builtin::Sub) {
        expect_arity(a, 3);
        r = num(0) - num(1) == num(2);
    } else if (p == builtin::Mul) {
        expect_arity(a, 3);
        r = num(0) * num(1) == num(2);
    } else if (p == builtin::Eq) {
        expect_arity(a, 2);
        r = num(0) == num(1);
    } else if (p == builtin::Ge) {
        expect_arity(a, 2);
        r = num(0) >= num(1);
    } else if (p == builtin::Union) {
        expect_arity(a, 3);
        r = set_union(names(0), names(1)) == names(2);
    } else if (p == builtin::Inter) {
        expect_arity(a, 3);
        r = set_inter(names(0), names(1)) == names(2);
    } else if (p == builtin::Card) {
        expect_arity(a, 2);
        r = Nat(names(0).size()) == num(1);
    } else if (p == builtin::SetEq) {
        expect_arity(a, 2);
        r = names(0) == names(1);
    } else if (p == builtin::CardGe) {
        expect_arity(a, 2);
        r = Nat(names(0).size()) >= num(1);
    }
    return a.negated ? !r : r;
}

SolveStatus solve_builtin(const Atom& atom, Substitution& theta)
{
    Atom a = apply_substitution(atom, theta);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (a.args[i].is_var()) free.push_back(i);
    if (free.empty()) return eval_builtin(a) ? SolveStatus::True : SolveStatus::False;
    if (free.size() > 1 || a.negated) return SolveStatus::Unsolvable;

    const std::size_t k = free[0];
    const Term& v = a.args[k];
    const auto& g = a.args;
    const auto& p = a.pred;
    std::optional<Term> value;
    auto n = [&](std::size_t i) -> const Nat& { return g[i].value(); };
    auto mk = [&](const Nat& x) -> std::optional<Term> {
        if (x < 0) return std::nullopt;
        return Term::number(v.sort(), x);
    };

    if (p == builtin::Add) {
        if (k == 2) value = mk(n(0) + n(1));
        else if (k == 0) value = mk(n(2) - n(1));
        else value = mk(n(2) - n(0));
    } else if (p == builtin::Sub) {
        if (k == 2) value = mk(n(0) - n(1));
        else if (k == 0) value = mk(n(2) + n(1));
        else value = mk(n(0) - n(2));
    } else if (p == builtin::Mul) {
        if (k == 2) {
            value = mk(n(0) * n(1));
        } else {
            const Nat& other = n(k == 0 ? 1 : 0);
            if (other == 0 || n(2) % other != 0) return SolveStatus::False;
            value = mk(n(2) / other);
        }
    } else if (p == builtin::Eq || p == builtin::SetEq) {
        value = g[1 - k];
    } else if (p == builtin::Union && k == 2) {
        value = Term::agents(set_union(g[0].agent_names(), g[1].agent_names()));
    } else if (p == builtin::Inter && k == 2) {
        auto x = set_inter(g[0].agent_names(), g[1].agent_names());
        if (x.empty()) return SolveStatus::False;
        value = Term::agents(x);
    } else if (p == builtin::Card && k == 1) {
        value = mk(Nat(g[0].agent_names().size()));
    } else {
        return SolveStatus::Unsolvable;
    }
    if (!value) return SolveStatus::False;
    if (value->sort() != v.sort()) return SolveStatus::False;
    theta.bind(v.var_id(), v.sort(), *value);
    return SolveStatus::Bound;
}

bool check_range_restricted(const Rule& r)
{
    std::set<std::string> body_vars;
    for (const auto& b : r.body)
        for (const auto& v : variables_of(b)) body_vars.insert(v);
    for (const auto& v : variables_of(r.head))
        if (!body_vars.count(v)) return false;
    return true;
}

std::string rule_problem(const Rule& r)
{
    if (r.head.is_builtin()) return "head is a builtin";
    if (r.head.negated) return "head is negated";
    for (const auto& b : r.body)
        if (b.is_builtin() && b.negated) return "negated builtin in body";
    if (r.body.empty() && !r.head.is_ground()) return "axiom head is not ground";
    if (!check_range_restricted(r)) return "rule is not range restricted";
    return {};
}

void Signature::declare(const std::string& pred, std::vector<Sort> sorts)
{
    if (is_builtin(pred)) throw LogicError("cannot redeclare builtin " + pred);
    preds_[pred] = std::move(sorts);
}

void Signature::add_agent(const std::string& name) { agents_.insert(name); }
void Signature::add_entity(const std::string& name) { entities_.insert(name); }

bool Signature::has_predicate(const std::string& pred) const { return preds_.count(pred) > 0; }

const std::vector<Sort>& Signature::sorts(const std::string& pred) const
{
    auto it = preds_.find(pred);
    if (it == preds_.end()) throw LogicError("undeclared predicate " + pred);
    return it->second;
}

std::string Signature::check(const Atom& a) const
{
    if (a.is_builtin()) {
        if (a.negated) return "builtins are never negated";
        const auto& p = a.pred;
        std::size_t arity = (p == builtin::Eq || p == builtin::Ge || p == builtin::Card ||
                             p == builtin::SetEq || p == builtin::CardGe)
                                ? 2
                                : 3;
        if (a.args.size() != arity) return "wrong arity for " + p;
        bool sets = p == builtin::Union || p == builtin::Inter || p == builtin::SetEq;
        bool card = p == builtin::Card || p == builtin::CardGe;
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            Sort s = a.args[i].sort();
            if (sets && s != Sort::Agents) return "set argument expected";
            if (card && i == 0 && s != Sort::Agents) return "set argument expected";
            if (card && i == 1 && s != Sort::Quantity) return "quantity argument expected";
            if (!sets && !card && !is_numeric(s)) return "numeric argument expected";
        }
        return {};
    }
    auto it = preds_.find(a.pred);
    if (it == preds_.end()) return "undeclared predicate " + a.pred;
    if (it->second.size() != a.args.size()) return "wrong arity for " + a.pred;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (a.args[i].sort() != it->second[i])
            return "argument " + std::to_string(i) + " of " + a.pred + " must be " + sort_name(it->second[i]);
    return {};
}

bool Signature::names_disjoint() const
{
    for (const auto& [p, _] : preds_)
        if (agents_.count(p) || entities_.count(p)) return false;
    for (const auto& a : agents_)
        if (entities_.count(a)) return false;
    return true;
}

Atom parse_atom(const std::string& text, const Signature& sig)
{
    auto fail = [&](const std::string& why) { return LogicError("cannot parse atom '" + text + "': " + why); };
    std::string s = text;
    bool neg = false;
    if (s.rfind("not ", 0) == 0) {
        neg = true;
        s = s.substr(4);
    }
    auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') throw fail("missing parentheses");
    std::string pred = s.substr(0, open);
    std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char c : inner) {
        if (c == '{') ++depth;
        if (c == '}') --depth;
        if (c == ';' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (!sig.has_predicate(pred)) throw fail("unknown predicate");
    const auto& sorts = sig.sorts(pred);
    if (parts.size() != sorts.size()) throw fail("wrong arity");
    std::vector<Term> args;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (p.empty()) throw fail("empty argument");
        if (p[0] == '?') {
            args.push_back(Term::variable(p.substr(1), sorts[i]));
            continue;
        }
        switch (sorts[i]) {
        case Sort::Agents: {
            if (p.front() != '{' || p.back() != '}') throw fail("agent set expected");
            std::vector<std::string> names;
            std::stringstream ss(p.substr(1, p.size() - 2));
            std::string n;
            while (std::getline(ss, n, ',')) names.push_back(n);
            args.push_back(Term::agents(names));
            break;
        }
        case Sort::Entity: args.push_back(Term::entity(p)); break;
        default:
            if (!std::all_of(p.begin(), p.end(), [](char c) { return c >= '0' && c <= '9'; }))
                throw fail("natural number expected");
            args.push_back(Term::number(sorts[i], Nat(p)));
        }
    }
    return Atom(pred, std::move(args), neg);
}

}  // namespace vlp
