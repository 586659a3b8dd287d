#include "vlp/chaining.hpp"

#include <boost/container_hash/hash.hpp>

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace vlp {

std::optional<Nat> timestamp_of(const Atom& a)
{
    for (auto it = a.args.rbegin(); it != a.args.rend(); ++it)
        if (!it->is_var() && it->sort() == Sort::Time) return it->value();
    return std::nullopt;
}

Nat default_horizon(const std::vector<Atom>& axioms)
{
    Nat best = -1;
    for (const auto& a : axioms)
        for (const auto& t : a.args)
            if (!t.is_var() && t.sort() == Sort::Time && t.value() > best) best = t.value();
    return best + 1;
}

std::optional<int> ChainResult::id_of(const Atom& a) const
{
    auto it = index.find(a);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

bool ChainResult::chart_contains(const Atom& a) const
{
    auto id = id_of(a);
    return id && in_chart[*id];
}

std::vector<Atom> ChainResult::chart() const
{
    std::vector<Atom> out;
    out.reserve(pop_trace.size());
    for (int id : pop_trace) out.push_back(atoms[id]);
    return out;
}

namespace {

struct CArg {
    int slot = -1;  // -1 for constants
    std::optional<Term> constant;
};

struct CAtom {
    const Atom* src = nullptr;
    std::vector<CArg> args;
};

struct CRule {
    const Rule* rule = nullptr;
    std::vector<CAtom> pos;
    std::vector<CAtom> builtins;
    std::vector<CAtom> neg;
    CAtom head;
    std::vector<Sort> slot_sort;
    std::vector<std::string> slot_name;
};

CRule compile(const Rule& r)
{
    if (auto why = rule_problem(r); !why.empty()) throw ChainError("rule " + r.name + ": " + why);
    CRule c;
    c.rule = &r;
    std::unordered_map<std::string, int> slots;
    auto conv = [&](const Atom& a) {
        CAtom ca;
        ca.src = &a;
        for (const auto& t : a.args) {
            CArg arg;
            if (t.is_var()) {
                auto [it, fresh] = slots.try_emplace(t.var_id(), static_cast<int>(c.slot_sort.size()));
                if (fresh) {
                    c.slot_sort.push_back(t.sort());
                    c.slot_name.push_back(t.var_id());
                }
                arg.slot = it->second;
            } else {
                arg.constant = t;
            }
            ca.args.push_back(std::move(arg));
        }
        return ca;
    };
    for (const auto& b : r.body) {
        if (b.is_builtin()) c.builtins.push_back(conv(b));
        else if (b.negated) c.neg.push_back(conv(b));
        else c.pos.push_back(conv(b));
    }
    c.head = conv(r.head);
    return c;
}

bool agents_overlap(const Term& x, const Term& y)
{
    const auto& a = x.agent_names();
    const auto& b = y.agent_names();
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j]) ++i;
        else ++j;
    }
    return false;
}

struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const
    {
        std::size_t h = v.size();
        for (int x : v) boost::hash_combine(h, x);
        return h;
    }
};

struct IndexKey {
    int pred;
    int pos;
    std::size_t term;
    bool operator==(const IndexKey& o) const { return pred == o.pred && pos == o.pos && term == o.term; }
};
struct IndexKeyHash {
    std::size_t operator()(const IndexKey& k) const
    {
        std::size_t h = k.term;
        boost::hash_combine(h, k.pred);
        boost::hash_combine(h, k.pos);
        return h;
    }
};

class Engine {
public:
    Engine(const std::vector<Rule>& rules, const std::vector<Atom>& axioms, const ChainOptions& opts)
        : opts_(opts)
    {
        for (const auto& r : rules) crules_.push_back(compile(r));
        for (const auto& a : axioms) {
            if (!a.is_ground()) throw ChainError("axiom is not ground: " + a.str());
            if (a.is_builtin() || a.negated) throw ChainError("axiom must be a positive domain atom: " + a.str());
        }
        res_.horizon = opts.horizon ? opts.horizon : std::optional<Nat>(default_horizon(axioms));
        for (const auto& a : axioms) axioms_by_pred_[a.pred].push_back(a);
    }

    ChainResult run(const std::vector<Atom>& axioms, const std::vector<Atom>& goals)
    {
        for (const auto& g : goals) goals_.insert(g);
        if (goals_.empty() && !opts_.exhaustive) {
            res_.proved = true;
            return std::move(res_);
        }
        for (const auto& a : axioms) {
            auto [id, fresh] = intern(a);
            res_.is_axiom[id] = true;
            if (fresh) push(id);
        }
        while (!agenda_.empty() && !(done_ && !opts_.exhaustive)) {
            int id;
            if (opts_.policy == AgendaPolicy::Lifo) {
                id = agenda_.back();
                agenda_.pop_back();
            } else {
                id = agenda_.front();
                agenda_.pop_front();
            }
            in_agenda_[id] = false;
            add_to_chart(id);
            if (goals_.erase(res_.atoms[id]) && goals_.empty()) {
                done_ = true;
                if (!opts_.exhaustive) break;
            }
            fire(id);
        }
        if (opts_.exhaustive) {
            bool all = true;
            for (const auto& g : goals) all = all && res_.chart_contains(g);
            res_.proved = all;
        } else {
            res_.proved = done_;
        }
        return std::move(res_);
    }

private:
    std::pair<int, bool> intern(const Atom& a)
    {
        auto it = res_.index.find(a);
        if (it != res_.index.end()) return {it->second, false};
        if (res_.atoms.size() >= opts_.max_atoms)
            throw ChainError("theorem space exceeded " + std::to_string(opts_.max_atoms) + " atoms");
        int id = static_cast<int>(res_.atoms.size());
        res_.atoms.push_back(a);
        res_.index.emplace(a, id);
        res_.in_chart.push_back(false);
        res_.is_axiom.push_back(false);
        in_agenda_.push_back(false);
        return {id, true};
    }

    void push(int id)
    {
        agenda_.push_back(id);
        in_agenda_[id] = true;
    }

    int pred_id(const std::string& p)
    {
        auto [it, fresh] = pred_ids_.try_emplace(p, static_cast<int>(pred_ids_.size()));
        return it->second;
    }

    void add_to_chart(int id)
    {
        res_.in_chart[id] = true;
        res_.pop_trace.push_back(id);
        const Atom& a = res_.atoms[id];
        int p = pred_id(a.pred);
        by_pred_[p].push_back(id);
        for (std::size_t i = 0; i < a.args.size(); ++i)
            by_arg_[IndexKey{p, static_cast<int>(i), a.args[i].hash()}].push_back(id);
    }

    using Binding = std::vector<const Term*>;

    bool match(const CAtom& pat, const Atom& a, Binding& b) const
    {
        if (a.pred != pat.src->pred || a.args.size() != pat.args.size() || a.negated) return false;
        for (std::size_t i = 0; i < pat.args.size(); ++i) {
            const CArg& arg = pat.args[i];
            const Term& t = a.args[i];
            if (arg.slot < 0) {
                if (!(*arg.constant == t)) return false;
            } else if (b[arg.slot]) {
                if (!(*b[arg.slot] == t)) return false;
            } else {
                b[arg.slot] = &t;
            }
        }
        return true;
    }

    // Runs builtins whose inputs are bound. False when one of them fails.
    bool settle(const CRule& r, Binding& b, std::vector<char>& done)
    {
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t k = 0; k < r.builtins.size(); ++k) {
                if (done[k]) continue;
                const CAtom& ca = r.builtins[k];
                int unbound = -1, count = 0;
                for (std::size_t i = 0; i < ca.args.size(); ++i)
                    if (ca.args[i].slot >= 0 && !b[ca.args[i].slot]) {
                        unbound = static_cast<int>(i);
                        ++count;
                    }
                if (count > 1) continue;
                Substitution theta;
                std::vector<Term> args;
                for (std::size_t i = 0; i < ca.args.size(); ++i) {
                    const CArg& arg = ca.args[i];
                    if (arg.slot < 0) args.push_back(*arg.constant);
                    else if (b[arg.slot]) args.push_back(*b[arg.slot]);
                    else args.push_back(Term::variable(r.slot_name[arg.slot], r.slot_sort[arg.slot]));
                }
                Atom atom(ca.src->pred, std::move(args));
                SolveStatus st = solve_builtin(atom, theta);
                if (st == SolveStatus::False) return false;
                if (st == SolveStatus::Unsolvable) continue;
                if (st == SolveStatus::Bound) {
                    int slot = ca.args[unbound].slot;
                    const Term& v = *theta.find(r.slot_name[slot]);
                    if (opts_.bind_admit && !opts_.bind_admit(*r.rule, r.slot_name[slot], v)) return false;
                    arena_.push_back(v);
                    b[slot] = &arena_.back();
                }
                done[k] = 1;
                progress = true;
            }
        }
        return true;
    }

    bool naf_holds(const CRule& r, const Binding& b) const
    {
        for (const auto& ca : r.neg) {
            auto it = axioms_by_pred_.find(ca.src->pred);
            if (it == axioms_by_pred_.end()) continue;
            for (const auto& ax : it->second) {
                if (ax.args.size() != ca.args.size()) continue;
                bool hit = true;
                for (std::size_t i = 0; i < ca.args.size() && hit; ++i) {
                    const CArg& arg = ca.args[i];
                    const Term* want = arg.slot < 0 ? &*arg.constant : b[arg.slot];
                    if (!want) continue;
                    if (r.rule->naf_overlap && want->sort() == Sort::Agents) hit = agents_overlap(*want, ax.args[i]);
                    else hit = *want == ax.args[i];
                }
                if (hit) return false;
            }
        }
        return true;
    }

    const std::vector<int>* candidates(const CAtom& pat, const Binding& b)
    {
        int p = pred_id(pat.src->pred);
        const std::vector<int>* best = &by_pred_[p];
        for (std::size_t i = 0; i < pat.args.size(); ++i) {
            const CArg& arg = pat.args[i];
            const Term* t = arg.slot < 0 ? &*arg.constant : b[arg.slot];
            if (!t) continue;
            auto it = by_arg_.find(IndexKey{p, static_cast<int>(i), t->hash()});
            if (it == by_arg_.end()) return &empty_;
            if (it->second.size() < best->size()) best = &it->second;
        }
        return best;
    }

    struct Found {
        std::vector<int> tail;
        Atom head;
    };

    void join(const CRule& r, Binding b, std::vector<char> done, std::vector<int> matched,
              std::vector<int> remaining, std::vector<Found>& out)
    {
        if (!settle(r, b, done)) return;
        if (remaining.empty()) {
            for (char d : done)
                if (!d) return;
            if (!naf_holds(r, b)) return;
            std::vector<Term> args;
            for (const auto& arg : r.head.args) {
                if (arg.slot < 0) args.push_back(*arg.constant);
                else if (b[arg.slot]) args.push_back(*b[arg.slot]);
                else return;
            }
            out.push_back({std::move(matched), Atom(r.head.src->pred, std::move(args))});
            return;
        }
        std::size_t pick = 0;
        std::size_t best = SIZE_MAX;
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            std::size_t n = candidates(r.pos[remaining[k]], b)->size();
            if (n < best) {
                best = n;
                pick = k;
            }
        }
        int pos = remaining[pick];
        remaining.erase(remaining.begin() + static_cast<long>(pick));
        const std::vector<int>& cands = *candidates(r.pos[pos], b);
        for (int id : cands) {
            Binding nb = b;
            if (!match(r.pos[pos], res_.atoms[id], nb)) continue;
            std::vector<int> nm = matched;
            nm[pos] = id;
            join(r, std::move(nb), done, std::move(nm), remaining, out);
        }
    }

    bool within_horizon(const Atom& h) const
    {
        if (!res_.horizon) return true;
        for (const auto& t : h.args)
            if (t.sort() == Sort::Time && t.value() > *res_.horizon) return false;
        return true;
    }

    void fire(int popped)
    {
        arena_.clear();
        for (std::size_t ri = 0; ri < crules_.size(); ++ri) {
            const CRule& r = crules_[ri];
            std::vector<Found> found;
            for (std::size_t p = 0; p < r.pos.size(); ++p) {
                Binding b(r.slot_sort.size(), nullptr);
                if (!match(r.pos[p], res_.atoms[popped], b)) continue;
                std::vector<int> matched(r.pos.size(), -1);
                matched[p] = popped;
                std::vector<int> remaining;
                for (std::size_t q = 0; q < r.pos.size(); ++q)
                    if (q != p) remaining.push_back(static_cast<int>(q));
                join(r, std::move(b), std::vector<char>(r.builtins.size(), 0), std::move(matched),
                     std::move(remaining), found);
            }
            for (auto& f : found) {
                if (!within_horizon(f.head)) continue;
                if (opts_.admit && !opts_.admit(f.head)) continue;
                auto [hid, fresh] = intern(f.head);
                std::vector<int> tail;
                for (int t : f.tail)
                    if (std::find(tail.begin(), tail.end(), t) == tail.end()) tail.push_back(t);
                std::vector<int> key = tail;
                std::sort(key.begin(), key.end());
                key.insert(key.begin(), {static_cast<int>(ri), hid});
                if (edge_keys_.insert(key).second) res_.hyperedges.push_back({tail, r.rule->name, hid});
                if (res_.in_chart[hid] || in_agenda_[hid]) continue;
                push(hid);
                if (goals_.erase(res_.atoms[hid]) && goals_.empty()) {
                    done_ = true;
                    if (!opts_.exhaustive) {
                        // Counts as popped: the chart then holds every goal.
                        agenda_.pop_back();
                        in_agenda_[hid] = false;
                        add_to_chart(hid);
                        return;
                    }
                }
            }
        }
    }

    ChainOptions opts_;
    std::vector<CRule> crules_;
    std::unordered_map<std::string, std::vector<Atom>> axioms_by_pred_;
    ChainResult res_;
    std::deque<int> agenda_;
    std::vector<bool> in_agenda_;
    std::unordered_set<Atom, AtomHash> goals_;
    bool done_ = false;
    std::unordered_map<std::string, int> pred_ids_;
    std::unordered_map<int, std::vector<int>> by_pred_;
    std::unordered_map<IndexKey, std::vector<int>, IndexKeyHash> by_arg_;
    std::unordered_set<std::vector<int>, VecHash> edge_keys_;
    std::deque<Term> arena_;
    const std::vector<int> empty_;
};

}  // namespace

ChainResult forward_chain(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                          const std::vector<Atom>& goals, const ChainOptions& opts)
{
    Engine e(rules, axioms, opts);
    return e.run(axioms, goals);
}

ChainResult closure(const std::vector<Rule>& rules, const std::vector<Atom>& axioms, const ChainOptions& opts)
{
    ChainOptions o = opts;
    o.exhaustive = true;
    Engine e(rules, axioms, o);
    return e.run(axioms, {});
}

std::vector<Atom> answer_query(const std::vector<Rule>& rules, const std::vector<Atom>& axioms, const Atom& query,
                               const ChainOptions& opts)
{
    ChainResult c = closure(rules, axioms, opts);
    std::vector<Atom> out;
    for (int id : c.pop_trace)
        if (unify(query, c.atoms[id])) out.push_back(c.atoms[id]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Atom> reference_pop_order(const std::vector<Rule>& rules, const std::vector<Atom>& presentation_order,
                                      AgendaPolicy policy, const Atom& goal, ChainOptions opts)
{
    opts.policy = policy;
    opts.exhaustive = false;
    std::vector<Atom> pushed = presentation_order;
    // LIFO pops the last push first; reverse so axioms come off in
    // presentation order.
    if (policy == AgendaPolicy::Lifo) std::reverse(pushed.begin(), pushed.end());
    ChainResult r = forward_chain(rules, pushed, {goal}, opts);
    if (!r.proved) throw UnprovableError("goal is not derivable: " + goal.str());
    std::vector<Atom> out;
    for (int id : r.pop_trace)
        if (!r.is_axiom[id] && r.atoms[id] != goal) out.push_back(r.atoms[id]);
    out.push_back(goal);
    return out;
}

}  // namespace vlp
