#include "doctest.h"
#include "oracle.hpp"

#include "vlp/chaining.hpp"

#include <set>

using namespace vlp;

namespace {

Term E(const std::string& s) { return Term::entity(s); }
Term V(const std::string& s) { return Term::variable(s, Sort::Entity); }

// edge/path transitive closure
std::vector<Rule> path_rules()
{
    return {
        Rule{"base", {Atom("edge", {V("X"), V("Y")})}, Atom("path", {V("X"), V("Y")})},
        Rule{"step", {Atom("path", {V("X"), V("Y")}), Atom("edge", {V("Y"), V("Z")})}, Atom("path", {V("X"), V("Z")})},
    };
}

std::vector<Atom> chain_edges(int n)
{
    std::vector<Atom> out;
    for (int i = 0; i + 1 < n; ++i) out.emplace_back("edge", std::vector<Term>{E("n" + std::to_string(i)), E("n" + std::to_string(i + 1))});
    return out;
}

}  // namespace

TEST_CASE("transitive closure of a chain")
{
    ChainOptions o;
    o.exhaustive = true;
    auto r = closure(path_rules(), chain_edges(5), o);
    std::size_t paths = 0;
    for (const auto& a : r.chart()) paths += a.pred == "path";
    CHECK(paths == 10);  // 4 + 3 + 2 + 1
}

TEST_CASE("goal-directed chaining stops once proved")
{
    Atom goal("path", {E("n0"), E("n2")});
    auto r = forward_chain(path_rules(), chain_edges(6), {goal});
    CHECK(r.proved);
    CHECK(r.chart_contains(goal));
    auto full = closure(path_rules(), chain_edges(6), ChainOptions{AgendaPolicy::Lifo, std::nullopt, true});
    CHECK(r.chart().size() <= full.chart().size());
    CHECK_FALSE(forward_chain(path_rules(), chain_edges(3), {Atom("path", {E("n2"), E("n0")})}).proved);
}

TEST_CASE("hyperedges record rule instantiations")
{
    ChainOptions o;
    o.exhaustive = true;
    auto r = closure(path_rules(), chain_edges(3), o);
    auto id = r.id_of(Atom("path", {E("n0"), E("n2")}));
    REQUIRE(id);
    bool found = false;
    for (const auto& e : r.hyperedges)
        if (e.head == *id && e.rule == "step") {
            found = true;
            CHECK(e.tail.size() == 2);
            CHECK(r.atoms[e.tail[0]] == Atom("path", {E("n0"), E("n1")}));
        }
    CHECK(found);
}

TEST_CASE("negation as failure consults the axioms")
{
    std::vector<Rule> rules = {
        Rule{"r", {Atom("p", {V("X")}), Atom("blocked", {V("X")}, true)}, Atom("q", {V("X")})},
    };
    std::vector<Atom> ax = {Atom("p", {E("a")}), Atom("p", {E("b")}), Atom("blocked", {E("b")})};
    auto r = closure(rules, ax, ChainOptions{AgendaPolicy::Lifo, std::nullopt, true});
    CHECK(r.chart_contains(Atom("q", {E("a")})));
    CHECK_FALSE(r.chart_contains(Atom("q", {E("b")})));
}

TEST_CASE("horizon drops late conclusions")
{
    auto T = [](int n) { return Term::time(n); };
    auto TV = [](const char* s) { return Term::variable(s, Sort::Time); };
    std::vector<Rule> rules = {Rule{"tick",
                                    {Atom("at", {TV("T")}),
                                     Atom(builtin::Add, {TV("T"), T(1), TV("U")})},
                                    Atom("at", {TV("U")})}};
    ChainOptions o;
    o.exhaustive = true;
    o.horizon = Nat(4);
    auto r = closure(rules, {Atom("at", {T(0)})}, o);
    CHECK(r.chart().size() == 5);
    CHECK_FALSE(r.chart_contains(Atom("at", {T(5)})));
}

TEST_CASE("admit filter bounds the theorem space")
{
    ChainOptions o;
    o.exhaustive = true;
    o.admit = [](const Atom& a) { return a.args[0] == Term::entity("n0"); };
    auto r = closure(path_rules(), chain_edges(5), o);
    for (const auto& a : r.chart())
        if (a.pred == "path") CHECK(a.args[0] == E("n0"));
}

TEST_CASE("reference pop orders follow the agenda discipline")
{
    // Two independent chains; LIFO finishes the first before touching the second.
    std::vector<Atom> ax = {Atom("edge", {E("a0"), E("a1")}), Atom("edge", {E("b0"), E("b1")}),
                            Atom("edge", {E("a1"), E("a2")}), Atom("edge", {E("b1"), E("b2")})};
    Atom goal("path", {E("b0"), E("b2")});
    auto dfs = reference_pop_order(path_rules(), ax, AgendaPolicy::Lifo, goal);
    auto bfs = reference_pop_order(path_rules(), ax, AgendaPolicy::Fifo, goal);
    CHECK(dfs.back() == goal);
    CHECK(bfs.back() == goal);
    CHECK(dfs != bfs);
    for (const auto& a : dfs) CHECK(a.pred == "path");
}

TEST_CASE("random programs: monotone, idempotent, policy independent")
{
    Rng rng = make_rng(77);
    for (int i = 0; i < 1000; ++i) {
        auto pr = oracle::random_program(rng);
        ChainOptions o;
        o.exhaustive = true;
        auto full = closure(pr.rules, pr.axioms, o);
        auto fc = oracle::chart_set(full);
        auto sub = pr.axioms;
        sub.pop_back();
        auto sc = oracle::chart_set(closure(pr.rules, sub, o));
        CHECK(std::includes(fc.begin(), fc.end(), sc.begin(), sc.end()));
        CHECK(oracle::chart_set(closure(pr.rules, full.chart(), o)) == fc);
        o.policy = AgendaPolicy::Fifo;
        CHECK(oracle::chart_set(closure(pr.rules, pr.axioms, o)) == fc);
        for (const auto& a : full.chart()) CHECK(a.is_ground());
    }
}

TEST_CASE("naive fixpoint agrees with the agenda")
{
    // Independent saturation: apply every rule to every pair of known facts
    // until nothing changes.
    Rng rng = make_rng(78);
    for (int i = 0; i < 300; ++i) {
        auto pr = oracle::random_program(rng);
        std::set<Atom> known(pr.axioms.begin(), pr.axioms.end());
        for (bool grew = true; grew;) {
            grew = false;
            std::vector<Atom> facts(known.begin(), known.end());
            for (const auto& r : pr.rules) {
                std::vector<Substitution> partial = {Substitution{}};
                for (const auto& b : r.body) {
                    std::vector<Substitution> next;
                    for (const auto& th : partial)
                        for (const auto& f : facts) {
                            auto u = unify(apply_substitution(b, th), f);
                            if (u) next.push_back(compose(th, *u));
                        }
                    partial = std::move(next);
                }
                for (const auto& th : partial) {
                    Atom h = apply_substitution(r.head, th);
                    if (h.is_ground() && known.insert(h).second) grew = true;
                }
            }
        }
        ChainOptions o;
        o.exhaustive = true;
        CHECK(oracle::chart_set(closure(pr.rules, pr.axioms, o)) == known);
    }
}
