#include "vlp/proof.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace vlp {

int ProofForest::add_vertex(const Atom& a, bool axiom)
{
    if (auto id = find(a)) return *id;
    labels.push_back(a);
    is_axiom.push_back(axiom);
    return static_cast<int>(labels.size()) - 1;
}

std::optional<int> ProofForest::find(const Atom& a) const
{
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == a) return static_cast<int>(i);
    return std::nullopt;
}

std::vector<Atom> ProofForest::axioms() const
{
    std::vector<Atom> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (is_axiom[i]) out.push_back(labels[i]);
    return out;
}

std::vector<Atom> ProofForest::conclusions() const
{
    std::vector<Atom> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (!is_axiom[i]) out.push_back(labels[i]);
    return out;
}

std::vector<int> ProofForest::incoming() const
{
    std::vector<int> in(labels.size(), -1);
    for (std::size_t e = 0; e < edges.size(); ++e) in[edges[e].head] = static_cast<int>(e);
    return in;
}

std::string ProofForest::dump() const
{
    std::ostringstream os;
    for (const auto& e : edges) {
        for (std::size_t i = 0; i < e.tail.size(); ++i) os << (i ? " " : "") << labels[e.tail[i]].debug_str();
        os << " -> " << labels[e.head].debug_str() << " [" << e.rule << "]\n";
    }
    return os.str();
}

std::vector<int> dfs_order(const ProofForest& p)
{
    std::vector<int> out;
    if (p.goal < 0) return out;
    auto in = p.incoming();
    std::vector<char> seen(p.size(), 0);
    std::function<void(int)> go = [&](int v) {
        if (seen[v]) return;
        seen[v] = 1;
        if (in[v] >= 0)
            for (int u : p.edges[in[v]].tail) go(u);
        out.push_back(v);
    };
    go(p.goal);
    return out;
}

bool same_proof(const ProofForest& a, const ProofForest& b)
{
    if (a.size() != b.size() || a.edges.size() != b.edges.size()) return false;
    auto key = [](const ProofForest& p) {
        std::set<std::tuple<std::vector<Atom>, std::string, Atom>> s;
        for (const auto& e : p.edges) {
            std::vector<Atom> t;
            for (int v : e.tail) t.push_back(p.labels[v]);
            std::sort(t.begin(), t.end());
            s.emplace(t, e.rule, p.labels[e.head]);
        }
        return s;
    };
    std::set<Atom> la(a.labels.begin(), a.labels.end()), lb(b.labels.begin(), b.labels.end());
    return la == lb && key(a) == key(b) && a.labels[a.goal] == b.labels[b.goal];
}

namespace {

bool agents_meet(const Term& x, const Term& y)
{
    for (const auto& n : x.agent_names())
        if (std::binary_search(y.agent_names().begin(), y.agent_names().end(), n)) return true;
    return false;
}

// Returns true if the ground instance of rule r with premises `tail` and
// conclusion `head` is correct.
bool instance_ok(const Rule& r, const std::vector<Atom>& tail, const Atom& head, const std::vector<Atom>& axioms)
{
    std::vector<const Atom*> pos, bi, neg;
    for (const auto& b : r.body) {
        if (b.is_builtin()) bi.push_back(&b);
        else if (b.negated) neg.push_back(&b);
        else pos.push_back(&b);
    }
    std::vector<int> used(tail.size(), 0);
    std::function<bool(std::size_t, const Substitution&)> go = [&](std::size_t i, const Substitution& th) {
        if (i == pos.size()) {
            if (std::find(used.begin(), used.end(), 0) != used.end()) return false;
            Substitution t = th;
            std::vector<char> done(bi.size(), 0);
            for (bool progress = true; progress;) {
                progress = false;
                for (std::size_t k = 0; k < bi.size(); ++k) {
                    if (done[k]) continue;
                    SolveStatus st = solve_builtin(*bi[k], t);
                    if (st == SolveStatus::False) return false;
                    if (st != SolveStatus::Unsolvable) {
                        done[k] = 1;
                        progress = true;
                    }
                }
            }
            if (std::find(done.begin(), done.end(), 0) != done.end()) return false;
            Atom h = apply_substitution(r.head, t);
            if (!(h == head)) {
                auto m = unify(h, head);
                if (!m) return false;
                // Head variables left over are bound by the conclusion.
                t = compose(t, *m);
                h = apply_substitution(r.head, t);
                if (!(h == head)) return false;
            }
            for (const Atom* n : neg) {
                Atom pat = apply_substitution(*n, t);
                pat.negated = false;
                for (const auto& ax : axioms) {
                    if (ax.pred != pat.pred || ax.args.size() != pat.args.size()) continue;
                    bool hit = true;
                    for (std::size_t j = 0; j < pat.args.size() && hit; ++j) {
                        const Term& w = pat.args[j];
                        if (w.is_var()) continue;
                        if (r.naf_overlap && w.sort() == Sort::Agents) hit = agents_meet(w, ax.args[j]);
                        else hit = w == ax.args[j];
                    }
                    if (hit) return false;
                }
            }
            return true;
        }
        for (std::size_t j = 0; j < tail.size(); ++j) {
            Atom p = apply_substitution(*pos[i], th);
            auto m = unify(p, tail[j]);
            if (!m) continue;
            ++used[j];
            bool ok = go(i + 1, compose(th, *m));
            --used[j];
            if (ok) return true;
        }
        return false;
    };
    return go(0, Substitution{});
}

}  // namespace

Validation validate_proof(const ProofForest& p, const std::vector<Rule>& rules, const std::vector<Atom>& program_axioms)
{
    auto fail = [](std::string why) { return Validation{false, std::move(why)}; };
    if (p.goal < 0 || p.goal >= static_cast<int>(p.size())) return fail("no goal vertex");
    std::vector<int> indeg(p.size(), 0);
    for (const auto& e : p.edges) {
        if (e.head < 0 || e.head >= static_cast<int>(p.size())) return fail("edge head out of range");
        ++indeg[e.head];
    }
    std::vector<Atom> axioms;
    for (std::size_t v = 0; v < p.size(); ++v) {
        if (indeg[v] == 0 && !p.is_axiom[v]) return fail("source vertex is not an axiom: " + p.labels[v].debug_str());
        if (p.is_axiom[v]) axioms.push_back(p.labels[v]);
    }
    axioms.insert(axioms.end(), program_axioms.begin(), program_axioms.end());
    for (const auto& e : p.edges) {
        auto it = std::find_if(rules.begin(), rules.end(), [&](const Rule& r) { return r.name == e.rule; });
        std::ostringstream d;
        for (int v : e.tail) d << p.labels[v].debug_str() << " ";
        d << "-> " << p.labels[e.head].debug_str() << " [" << e.rule << "]";
        if (it == rules.end()) return fail("unknown rule: " + d.str());
        std::vector<Atom> tail;
        for (int v : e.tail) tail.push_back(p.labels[v]);
        if (!instance_ok(*it, tail, p.labels[e.head], axioms)) return fail("bad instantiation: " + d.str());
    }
    // Hyperpath: cover the goal starting from the axioms.
    std::vector<char> have(p.size(), 0);
    for (std::size_t v = 0; v < p.size(); ++v) have[v] = p.is_axiom[v];
    std::vector<char> used(p.edges.size(), 0);
    for (bool progress = true; progress;) {
        progress = false;
        for (std::size_t k = 0; k < p.edges.size(); ++k) {
            if (used[k]) continue;
            const auto& e = p.edges[k];
            if (std::all_of(e.tail.begin(), e.tail.end(), [&](int u) { return have[u]; })) {
                used[k] = 1;
                have[e.head] = 1;
                progress = true;
            }
        }
    }
    if (!have[p.goal]) return fail("goal is not reachable from the axioms");
    return {};
}

namespace {

constexpr int Inf = INT_MAX / 4;

class Search {
public:
    Search(const ChainResult& c, int goal, const ShortestProofOptions& opts) : c_(c), goal_(goal), opts_(opts)
    {
        build();
    }

    ShortestProofs run()
    {
        ShortestProofs out;
        if (lb_[goal_] >= Inf) throw UnprovableError("goal has no proof in the closure: " + c_.atoms[goal_].str());
        best_ = greedy_size();
        state_.assign(c_.atoms.size(), Out);
        users_.assign(c_.atoms.size(), {});
        include(goal_);
        dfs();
        out.size = best_;
        out.truncated = truncated_;
        out.nodes = nodes_;
        for (const auto& a : found_) out.proofs.push_back(to_forest(a));
        return out;
    }

private:
    static constexpr int Out = -3, Open = -2, Leaf = -1;

    void build()
    {
        std::size_t n = c_.atoms.size();
        in_.assign(n, {});
        for (std::size_t e = 0; e < c_.hyperedges.size(); ++e) {
            const auto& h = c_.hyperedges[e];
            if (c_.is_axiom[h.head] || !c_.in_chart[h.head]) continue;
            if (std::find(h.tail.begin(), h.tail.end(), h.head) != h.tail.end()) continue;
            in_[h.head].push_back(static_cast<int>(e));
        }
        lb_.assign(n, Inf);
        tc_.assign(n, Inf);
        for (std::size_t v = 0; v < n; ++v)
            if (c_.is_axiom[v]) lb_[v] = tc_[v] = 1;
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t v = 0; v < n; ++v) {
                for (int e : in_[v]) {
                    const auto& t = c_.hyperedges[e].tail;
                    long m = static_cast<long>(t.size()), s = 1;
                    bool ok = true;
                    for (int u : t) {
                        if (lb_[u] >= Inf) {
                            ok = false;
                            break;
                        }
                        m = std::max<long>(m, lb_[u]);
                        s = std::min<long>(s + tc_[u], Inf);
                    }
                    if (!ok) continue;
                    if (1 + m < lb_[v]) {
                        lb_[v] = static_cast<int>(1 + m);
                        changed = true;
                    }
                    if (s < tc_[v]) {
                        tc_[v] = static_cast<int>(s);
                        changed = true;
                    }
                }
            }
        }
        for (auto& list : in_)
            std::stable_sort(list.begin(), list.end(), [&](int a, int b) { return edge_key(a) < edge_key(b); });
    }

    std::pair<long, long> edge_key(int e) const
    {
        const auto& t = c_.hyperedges[e].tail;
        long m = static_cast<long>(t.size()), s = 0;
        for (int u : t) {
            m = std::max<long>(m, lb_[u]);
            s += tc_[u];
        }
        return {m, s};
    }

    // Size of the proof read off the tree-cost choices, shared vertices
    // counted once.
    std::size_t greedy_size() const
    {
        std::set<int> seen;
        std::function<void(int)> go = [&](int v) {
            if (!seen.insert(v).second || c_.is_axiom[v]) return;
            int best = -1;
            long bc = Inf;
            for (int e : in_[v]) {
                long s = 1;
                for (int u : c_.hyperedges[e].tail) s += tc_[u];
                if (s < bc) {
                    bc = s;
                    best = e;
                }
            }
            for (int u : c_.hyperedges[best].tail) go(u);
        };
        go(goal_);
        return seen.size();
    }

    void include(int u)
    {
        state_[u] = c_.is_axiom[u] ? Leaf : Open;
        members_.push_back(u);
        if (state_[u] == Open) open_.push_back(u);
    }

    std::vector<int> consumers(int u) const
    {
        std::vector<int> out;
        std::vector<int> stack(users_[u].begin(), users_[u].end());
        std::set<int> seen;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            if (!seen.insert(x).second) continue;
            out.push_back(x);
            for (int y : users_[x]) stack.push_back(y);
        }
        return out;
    }

    bool edge_allowed(int v, int e, const std::vector<int>& cons) const
    {
        for (int u : c_.hyperedges[e].tail) {
            if (u == v || lb_[u] >= Inf) return false;
            if (std::find(cons.begin(), cons.end(), u) != cons.end()) return false;
        }
        return true;
    }

    void dfs()
    {
        if (++nodes_ > opts_.max_nodes) {
            truncated_ = true;
            return;
        }
        if (members_.size() > best_) return;
        if (open_.empty()) {
            if (members_.size() < best_ || found_.empty()) {
                if (members_.size() < best_) found_.clear();
                best_ = members_.size();
            }
            if (found_.size() >= opts_.max_proofs) {
                truncated_ = true;
                return;
            }
            found_.push_back(snapshot());
            return;
        }
        int pick = -1;
        std::size_t pick_n = SIZE_MAX;
        std::vector<int> pick_cons;
        for (int u : open_) {
            auto cons = consumers(u);
            if (cons.size() + static_cast<std::size_t>(lb_[u]) > best_) return;
            std::size_t n = 0;
            for (int e : in_[u]) n += edge_allowed(u, e, cons);
            if (n == 0) return;
            if (n < pick_n) {
                pick_n = n;
                pick = u;
                pick_cons = std::move(cons);
            }
        }
        auto pos = std::find(open_.begin(), open_.end(), pick) - open_.begin();
        open_.erase(open_.begin() + pos);
        for (int e : in_[pick]) {
            if (truncated_) break;
            if (!edge_allowed(pick, e, pick_cons)) continue;
            std::size_t mark = members_.size(), open_mark = open_.size();
            state_[pick] = e;
            const auto& tail = c_.hyperedges[e].tail;
            for (int u : tail) {
                users_[u].push_back(pick);
                if (state_[u] == Out) include(u);
            }
            dfs();
            for (int u : tail) users_[u].pop_back();
            while (members_.size() > mark) {
                state_[members_.back()] = Out;
                members_.pop_back();
            }
            open_.resize(open_mark);
            state_[pick] = Open;
        }
        open_.insert(open_.begin() + pos, pick);
    }

    std::vector<std::pair<int, int>> snapshot() const
    {
        std::vector<std::pair<int, int>> a;
        for (int v : members_) a.emplace_back(v, state_[v]);
        return a;
    }

    ProofForest to_forest(const std::vector<std::pair<int, int>>& a) const
    {
        std::unordered_map<int, int> choice(a.begin(), a.end());
        ProofForest p;
        std::unordered_map<int, int> vid;
        std::function<int(int)> go = [&](int v) {
            if (auto it = vid.find(v); it != vid.end()) return it->second;
            int e = choice.at(v);
            std::vector<int> tail;
            if (e >= 0)
                for (int u : c_.hyperedges[e].tail) tail.push_back(go(u));
            int id = p.add_vertex(c_.atoms[v], e < 0);
            vid[v] = id;
            if (e >= 0) p.edges.push_back({tail, c_.hyperedges[e].rule, id});
            return id;
        };
        p.goal = go(goal_);
        return p;
    }

    const ChainResult& c_;
    int goal_;
    ShortestProofOptions opts_;
    std::vector<std::vector<int>> in_;
    std::vector<int> lb_, tc_;
    std::vector<int> state_;
    std::vector<std::vector<int>> users_;
    std::vector<int> members_, open_;
    std::size_t best_ = 0;
    std::size_t nodes_ = 0;
    bool truncated_ = false;
    std::vector<std::vector<std::pair<int, int>>> found_;
};

}  // namespace

ShortestProofs all_shortest_proofs(const ChainResult& closure, const Atom& goal, const ShortestProofOptions& opts)
{
    auto id = closure.id_of(goal);
    if (!id || !closure.in_chart[*id]) throw UnprovableError("goal is not derivable: " + goal.str());
    Search s(closure, *id, opts);
    return s.run();
}

ProofForest shortest_proof(const ChainResult& closure, const Atom& goal)
{
    ShortestProofOptions o;
    o.max_proofs = 1;
    auto r = all_shortest_proofs(closure, goal, o);
    return r.proofs.front();
}

ProofForest shortest_proof(const std::vector<Rule>& rules, const std::vector<Atom>& axioms, const Atom& goal,
                           const ChainOptions& opts)
{
    return shortest_proof(closure(rules, axioms, opts), goal);
}

std::vector<Atom> irrelevant_axioms(const ChainResult& c, const Atom& goal, const ShortestProofOptions& opts)
{
    auto r = all_shortest_proofs(c, goal, opts);
    if (r.truncated) throw ChainError("shortest-proof enumeration hit its cap for " + goal.str());
    std::set<Atom> used;
    for (const auto& p : r.proofs)
        for (const auto& a : p.axioms()) used.insert(a);
    std::vector<Atom> out;
    for (std::size_t i = 0; i < c.atoms.size(); ++i)
        if (c.is_axiom[i] && !used.count(c.atoms[i])) out.push_back(c.atoms[i]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Atom> irrelevant_axioms(const std::vector<Rule>& rules, const std::vector<Atom>& axioms,
                                    const Atom& goal, const ChainOptions& opts)
{
    return irrelevant_axioms(closure(rules, axioms, opts), goal);
}

Efficiency efficiency(std::size_t parsed_size, std::size_t shortest_size)
{
    if (parsed_size == 0) throw EfficiencyError("efficiency is undefined for an empty parsed proof");
    if (shortest_size == 0) throw EfficiencyError("shortest proof size must be positive");
    Efficiency e;
    e.parsed = parsed_size;
    e.shortest = shortest_size;
    e.value = static_cast<double>(shortest_size) / static_cast<double>(parsed_size);
    e.skipped_steps = shortest_size > parsed_size;
    return e;
}

}  // namespace vlp
