#include "doctest.h"
#include "oracle.hpp"

#include "vlp/proof.hpp"

using namespace vlp;

namespace {

Term E(const std::string& s) { return Term::entity(s); }
Term V(const std::string& s) { return Term::variable(s, Sort::Entity); }
Atom P(const char* p, const char* a) { return Atom(p, {E(a)}); }

// a -> b directly, or a -> m -> n -> b through a longer route
std::vector<Rule> diamond_rules()
{
    return {
        Rule{"short", {Atom("a", {V("X")}), Atom("s", {V("X")})}, Atom("b", {V("X")})},
        Rule{"m", {Atom("a", {V("X")})}, Atom("m", {V("X")})},
        Rule{"n", {Atom("m", {V("X")})}, Atom("n", {V("X")})},
        Rule{"long", {Atom("n", {V("X")})}, Atom("b", {V("X")})},
    };
}

ChainResult full_closure(const std::vector<Rule>& rules, const std::vector<Atom>& ax)
{
    ChainOptions o;
    o.exhaustive = true;
    return closure(rules, ax, o);
}

}  // namespace

TEST_CASE("shortest proof picks the cheaper derivation")
{
    std::vector<Atom> ax = {P("a", "k"), P("s", "k")};
    auto c = full_closure(diamond_rules(), ax);
    auto p = shortest_proof(c, P("b", "k"));
    CHECK(p.size() == 3);
    CHECK(p.labels[p.goal] == P("b", "k"));
    CHECK(p.axioms().size() == 2);
    CHECK(validate_proof(p, diamond_rules(), ax).ok);
    // The long route uses one axiom but four vertices, so `s` is relevant.
    CHECK(irrelevant_axioms(c, P("b", "k")).empty());
}

TEST_CASE("a long chain loses to nothing when it is the only route")
{
    std::vector<Atom> ax = {P("a", "k")};
    auto p = shortest_proof(diamond_rules(), ax, P("b", "k"));
    CHECK(p.size() == 4);
    auto order = dfs_order(p);
    REQUIRE(order.size() == 4);
    CHECK(p.labels[order.front()] == P("a", "k"));
    CHECK(order.back() == p.goal);
}

TEST_CASE("ties are all reported")
{
    std::vector<Rule> rules = {
        Rule{"x", {Atom("a", {V("X")})}, Atom("g", {V("X")})},
        Rule{"y", {Atom("b", {V("X")})}, Atom("g", {V("X")})},
    };
    std::vector<Atom> ax = {P("a", "k"), P("b", "k"), P("c", "k")};
    auto c = full_closure(rules, ax);
    auto all = all_shortest_proofs(c, P("g", "k"));
    CHECK(all.size == 2);
    CHECK(all.proofs.size() == 2);
    CHECK_FALSE(all.truncated);
    CHECK_FALSE(same_proof(all.proofs[0], all.proofs[1]));
    auto irr = irrelevant_axioms(c, P("g", "k"));
    CHECK(irr == std::vector<Atom>{P("c", "k")});
}

TEST_CASE("missing goal is unprovable")
{
    auto c = full_closure(diamond_rules(), {P("s", "k")});
    CHECK_THROWS_AS(shortest_proof(c, P("b", "k")), UnprovableError);
}

TEST_CASE("validation catches bad proofs")
{
    std::vector<Atom> ax = {P("a", "k"), P("s", "k")};
    auto p = shortest_proof(diamond_rules(), ax, P("b", "k"));
    auto broken = p;
    broken.edges[0].rule = "long";
    CHECK_FALSE(validate_proof(broken, diamond_rules(), ax).ok);
    auto fake = p;
    for (std::size_t i = 0; i < fake.size(); ++i) fake.is_axiom[i] = false;
    CHECK_FALSE(validate_proof(fake, diamond_rules(), ax).ok);
}

TEST_CASE("same_proof ignores vertex numbering")
{
    ProofForest a, b;
    int a1 = a.add_vertex(P("a", "k"), true), a2 = a.add_vertex(P("s", "k"), true);
    int ag = a.add_vertex(P("b", "k"), false);
    a.edges.push_back({{a1, a2}, "short", ag});
    a.goal = ag;
    int bg = b.add_vertex(P("b", "k"), false);
    int b1 = b.add_vertex(P("a", "k"), true), b2 = b.add_vertex(P("s", "k"), true);
    b.edges.push_back({{b1, b2}, "short", bg});
    b.goal = bg;
    CHECK(same_proof(a, b));
    b.edges[0].tail = {b2, b1};
    CHECK(same_proof(a, b));  // premises are identified by label
    b.edges[0].rule = "long";
    CHECK_FALSE(same_proof(a, b));
}

TEST_CASE("efficiency")
{
    auto e = efficiency(10, 8);
    CHECK(e.value == doctest::Approx(0.8));
    CHECK_FALSE(e.skipped_steps);
    auto s = efficiency(5, 8);
    CHECK(s.skipped_steps);
    CHECK(s.value == doctest::Approx(1.6));
    CHECK_THROWS_AS(efficiency(0, 8), EfficiencyError);
}

TEST_CASE("shortest proofs match exhaustive enumeration on random programs")
{
    Rng rng = make_rng(91);
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        auto pr = oracle::random_program(rng);
        auto c = full_closure(pr.rules, pr.axioms);
        for (std::size_t v = 0; v < c.atoms.size(); ++v) {
            if (!c.in_chart[v] || c.is_axiom[v]) continue;
            auto mine = all_shortest_proofs(c, c.atoms[v]);
            oracle::Enumerator en(c, 2'000'000);
            auto ref = en.run(static_cast<int>(v), 12);
            if (ref.exhausted_budget || mine.truncated) continue;
            CHECK(mine.size == ref.min_size);
            CHECK(mine.proofs.size() == ref.proofs.size());
            auto ir = irrelevant_axioms(c, c.atoms[v]);
            auto want = oracle::irrelevant_from(c, ref);
            CHECK(std::set<Atom>(ir.begin(), ir.end()) == want);
            for (const auto& p : mine.proofs) CHECK(validate_proof(p, pr.rules, pr.axioms).ok);
            ++checked;
        }
    }
    CHECK(checked > 100);
}
