#pragma once

// Test-only reference implementations, written without reusing the
// library's search code.

#include "vlp/chaining.hpp"
#include "vlp/generator.hpp"
#include "vlp/proof.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using vlp::Atom;
using vlp::ChainResult;

// Every proof is a choice of one incoming hyperedge per non-axiom vertex,
// closed downward from the goal and acyclic. Iterative deepening on the
// vertex count finds all minimum proofs exhaustively.
struct Enumeration {
    std::size_t min_size = 0;
    std::vector<std::map<int, int>> proofs;  // vertex -> edge (-1 for axioms)
    bool exhausted_budget = false;
};

class Enumerator {
public:
    Enumerator(const ChainResult& c, std::size_t budget) : c_(c), budget_(budget)
    {
        for (std::size_t e = 0; e < c.hyperedges.size(); ++e) in_[c.hyperedges[e].head].push_back(static_cast<int>(e));
        // Minimum derivation height, by plain fixpoint.
        height_.assign(c.atoms.size(), kInf);
        for (std::size_t v = 0; v < c.atoms.size(); ++v)
            if (c.is_axiom[v]) height_[v] = 0;
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& e : c.hyperedges) {
                int h = 0;
                for (int t : e.tail) h = std::max(h, height_[t]);
                if (h < kInf && h + 1 < height_[e.head]) {
                    height_[e.head] = h + 1;
                    changed = true;
                }
            }
        }
        // cone(v): v and everything reachable through incoming edges.
        const std::size_t n = c.atoms.size();
        words_ = (n + 63) / 64;
        cone_.assign(n, std::vector<std::uint64_t>(words_, 0));
        for (std::size_t v = 0; v < n; ++v) {
            std::vector<int> stack = {static_cast<int>(v)};
            auto& cv = cone_[v];
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                if (cv[u / 64] >> (u % 64) & 1) continue;
                cv[u / 64] |= std::uint64_t(1) << (u % 64);
                if (c.is_axiom[u]) continue;
                auto it = in_.find(u);
                if (it != in_.end())
                    for (int e : it->second)
                        for (int t : c.hyperedges[e].tail) stack.push_back(t);
            }
        }
    }

    Enumeration run(int goal, std::size_t max_size)
    {
        size_lb(static_cast<int>(max_size) + 1);
        Enumeration out;
        for (std::size_t bound = static_cast<std::size_t>(lb_[goal]); bound <= max_size; ++bound) {
            bound_ = bound;
            found_.clear();
            std::map<int, int> chosen;
            go({{goal, 0}}, chosen);
            if (steps_ > budget_) {
                out.exhausted_budget = true;
                return out;
            }
            if (!found_.empty()) {
                out.min_size = bound;
                out.proofs = found_;
                return out;
            }
        }
        return out;
    }

private:
    bool acyclic(const std::map<int, int>& chosen) const
    {
        std::map<int, int> state;  // 1 visiting, 2 done
        std::function<bool(int)> dfs = [&](int v) {
            int& s = state[v];
            if (s == 1) return false;
            if (s == 2) return true;
            s = 1;
            int e = chosen.at(v);
            if (e >= 0)
                for (int t : c_.hyperedges[e].tail)
                    if (!dfs(t)) return false;
            state[v] = 2;
            return true;
        };
        for (const auto& [v, e] : chosen)
            if (!dfs(v)) return false;
        return true;
    }

    bool disjoint(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) const
    {
        for (std::size_t w = 0; w < words_; ++w)
            if (a[w] & b[w]) return false;
        return true;
    }

    // Vertices with pairwise disjoint cones have vertex-disjoint subproofs,
    // so their size bounds add up. Greedy, largest bound first.
    int set_lb(std::vector<int> vs, const std::vector<std::uint64_t>& avoid, std::vector<std::uint64_t>& covered) const
    {
        std::sort(vs.begin(), vs.end(), [&](int a, int b) { return lb_[a] > lb_[b]; });
        int total = 0;
        for (int u : vs) {
            if (covered[u / 64] >> (u % 64) & 1) continue;
            if (disjoint(cone_[u], covered) && disjoint(cone_[u], avoid)) {
                total += lb_[u];
                for (std::size_t w = 0; w < words_; ++w) covered[w] |= cone_[u][w];
            } else {
                total += 1;
            }
        }
        return total;
    }

    // lb(v) <= minimum proof size of v, raised by fixpoint and capped.
    void size_lb(int cap)
    {
        lb_.assign(c_.atoms.size(), 1);
        std::vector<std::uint64_t> none(words_, 0);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t v = 0; v < c_.atoms.size(); ++v) {
                if (c_.is_axiom[v]) continue;
                int best = cap;
                auto it = in_.find(static_cast<int>(v));
                if (it != in_.end())
                    for (int e : it->second) {
                        std::vector<int> tail(c_.hyperedges[e].tail.begin(), c_.hyperedges[e].tail.end());
                        std::sort(tail.begin(), tail.end());
                        tail.erase(std::unique(tail.begin(), tail.end()), tail.end());
                        std::vector<std::uint64_t> covered(words_, 0);
                        best = std::min(best, 1 + set_lb(tail, none, covered));
                    }
                best = std::min(best, cap);
                if (best > lb_[v]) {
                    lb_[v] = best;
                    changed = true;
                }
            }
        }
    }

    // True when a premise of `e` already depends on `v` through chosen edges.
    bool closes_cycle(int e, int v, const std::map<int, int>& chosen) const
    {
        std::vector<int> stack(c_.hyperedges[e].tail.begin(), c_.hyperedges[e].tail.end());
        std::set<int> seen;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (u == v) return true;
            if (!seen.insert(u).second) continue;
            auto it = chosen.find(u);
            if (it == chosen.end() || it->second < 0) continue;
            for (int t : c_.hyperedges[it->second].tail) stack.push_back(t);
        }
        return false;
    }

    // Pending entries carry the number of ancestors on the path that reached
    // them. Those ancestors, the vertex, and a chain of `height` vertices
    // below it are pairwise distinct in any acyclic proof.
    void go(std::vector<std::pair<int, int>> pending, std::map<int, int>& chosen)
    {
        if (++steps_ > budget_) return;
        while (!pending.empty() && chosen.count(pending.back().first)) pending.pop_back();
        if (pending.empty()) {
            if (acyclic(chosen)) found_.push_back(chosen);
            return;
        }
        // Each distinct pending vertex still needs a place in the proof.
        std::set<int> open;
        for (const auto& [u, depth] : pending) {
            if (height_[u] >= kInf || static_cast<std::size_t>(depth + height_[u] + 1) > bound_) return;
            if (!chosen.count(u)) open.insert(u);
        }
        if (chosen.size() + open.size() > bound_) return;
        {
            std::vector<std::uint64_t> avoid(words_, 0), covered(words_, 0);
            for (const auto& [u, e] : chosen) avoid[u / 64] |= std::uint64_t(1) << (u % 64);
            std::size_t need = set_lb({open.begin(), open.end()}, avoid, covered);
            if (chosen.size() + need > bound_) return;
        }
        auto [v, depth] = pending.back();
        pending.pop_back();
        if (c_.is_axiom[v]) {
            chosen[v] = -1;
            go(pending, chosen);
            chosen.erase(v);
            return;
        }
        auto it = in_.find(v);
        if (it == in_.end()) return;
        for (int e : it->second) {
            if (closes_cycle(e, v, chosen)) continue;
            chosen[v] = e;
            auto next = pending;
            for (int t : c_.hyperedges[e].tail) next.emplace_back(t, depth + 1);
            go(next, chosen);
            chosen.erase(v);
        }
    }

    static constexpr int kInf = 1 << 28;
    const ChainResult& c_;
    std::map<int, std::vector<int>> in_;
    std::vector<int> height_;
    std::size_t words_ = 0;
    std::vector<std::vector<std::uint64_t>> cone_;
    std::vector<int> lb_;
    std::size_t budget_;
    std::size_t steps_ = 0;
    std::size_t bound_ = 0;
    std::vector<std::map<int, int>> found_;
};

inline vlp::ProofForest to_forest(const ChainResult& c, const std::map<int, int>& chosen, int goal)
{
    vlp::ProofForest p;
    std::map<int, int> vid;
    for (const auto& [v, e] : chosen) vid[v] = p.add_vertex(c.atoms[v], e < 0);
    for (const auto& [v, e] : chosen) {
        if (e < 0) continue;
        std::vector<int> tail;
        for (int t : c.hyperedges[e].tail) tail.push_back(vid[t]);
        p.edges.push_back({tail, c.hyperedges[e].rule, vid[v]});
    }
    p.goal = vid[goal];
    return p;
}

// Axioms that sit in no minimum proof.
inline std::set<Atom> irrelevant_from(const ChainResult& c, const Enumeration& en)
{
    std::set<Atom> used, out;
    for (const auto& pr : en.proofs)
        for (const auto& [v, e] : pr)
            if (e < 0) used.insert(c.atoms[v]);
    for (std::size_t i = 0; i < c.atoms.size(); ++i)
        if (c.is_axiom[i] && c.in_chart[i] && !used.count(c.atoms[i])) out.insert(c.atoms[i]);
    return out;
}

// Small random Datalog programs over unary and binary entity predicates.
struct Program {
    std::vector<vlp::Rule> rules;
    std::vector<Atom> axioms;
};

inline Program random_program(vlp::Rng& rng, int n_consts = 4, int n_rules = 4, int n_axioms = 5)
{
    using vlp::Sort;
    using vlp::Term;
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
    const char* preds[] = {"p", "q", "r", "s"};
    const int arity[] = {1, 2, 1, 2};
    auto konst = [&] { return Term::entity("c" + std::to_string(pick(n_consts))); };
    Program pr;
    for (int i = 0; i < n_axioms; ++i) {
        int k = pick(4);
        std::vector<Term> args;
        for (int a = 0; a < arity[k]; ++a) args.push_back(konst());
        pr.axioms.emplace_back(preds[k], args);
    }
    const char* vars[] = {"X", "Y", "Z"};
    for (int i = 0; i < n_rules; ++i) {
        vlp::Rule r;
        r.name = "r" + std::to_string(i);
        int nb = 1 + pick(2);
        std::set<std::string> bound;
        for (int b = 0; b < nb; ++b) {
            int k = pick(4);
            std::vector<Term> args;
            for (int a = 0; a < arity[k]; ++a) {
                std::string v = vars[pick(3)];
                bound.insert(v);
                args.push_back(Term::variable(v, Sort::Entity));
            }
            r.body.emplace_back(preds[k], args);
        }
        int k = pick(4);
        std::vector<Term> hargs;
        std::vector<std::string> bv(bound.begin(), bound.end());
        for (int a = 0; a < arity[k]; ++a) {
            if (pick(5) == 0)
                hargs.push_back(konst());
            else
                hargs.push_back(Term::variable(bv[pick(static_cast<int>(bv.size()))], Sort::Entity));
        }
        r.head = Atom(preds[k], hargs);
        pr.rules.push_back(r);
    }
    return pr;
}

inline std::set<Atom> chart_set(const ChainResult& r)
{
    auto v = r.chart();
    return {v.begin(), v.end()};
}

}  // namespace oracle
