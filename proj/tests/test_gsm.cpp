#include "doctest.h"

#include "vlp/gsm.hpp"
#include "vlp/records.hpp"

using namespace vlp;

namespace {

const GsmRuleSet& rules4()
{
    static const GsmRuleSet rs = build_gsm_rules(4);
    return rs;
}

const std::optional<Nat> kH2 = Nat(2);

}  // namespace

TEST_CASE("rule family and classification")
{
    const auto& rs = rules4();
    for (const char* n : {"1a", "1b", "1c", "2a", "2b", "3.2", "3.3", "3.4", "4", "5a", "5b", "6.cont"})
        CHECK(rs.has(n));
    CHECK_FALSE(rs.has("3.5"));
    CHECK(build_gsm_rules(6).has("3.6"));
    CHECK(classify_rule(rs.by_name("1a")) == RuleClass{RuleKind::Elimination, "comp"});
    CHECK(classify_rule(rs.by_name("1c")) == RuleClass{RuleKind::Introduction, "comp"});
    CHECK(classify_rule(rs.by_name("2b")) == RuleClass{RuleKind::Elimination, "transfer"});
    CHECK(classify_rule(rs.by_name("5b")) == RuleClass{RuleKind::Introduction, "compeq"});
    CHECK(classify_rule(rs.by_name("3.3")).kind == RuleKind::Union);
    CHECK_THROWS_AS(classify_rule(Rule{"zz", {}, cont(ag({"a"}), 1, "e", 0)}), LogicError);
    for (const auto& r : rs.rules) CHECK(check_range_restricted(r));
}

TEST_CASE("conservation holds for both selectors under the relaxed reading")
{
    CHECK(conservation_violations(rules4(), Selector::Agents, true).empty());
    CHECK(conservation_violations(rules4(), Selector::Entities, true).empty());
    CHECK(conservation_violations(rules4(), Selector::Entities, false).empty());
    // Strictly, a transfer or rate conclusion reuses the holder of its side premise.
    auto strict = conservation_violations(rules4(), Selector::Agents, false);
    CHECK(strict == std::vector<std::string>{"2a", "2b", "4"});
}

TEST_CASE("comparison elimination and introduction")
{
    auto cl = gsm_closure(rules4().rules, {cont(ag({"a"}), 5, "pen", 1), comp(ag({"b"}), ag({"a"}), 2, "pen", 1)}, kH2);
    CHECK(cl.chart_contains(cont(ag({"b"}), 7, "pen", 1)));
    auto cl2 = gsm_closure(rules4().rules, {cont(ag({"a"}), 5, "pen", 1), cont(ag({"b"}), 9, "pen", 1)}, kH2);
    CHECK(cl2.chart_contains(comp(ag({"b"}), ag({"a"}), 4, "pen", 1)));
}

TEST_CASE("transfers move quantities forward in time")
{
    std::vector<Atom> ax = {cont(ag({"a"}), 5, "pen", 1), cont(ag({"b"}), 4, "pen", 1),
                            transfer(ag({"a"}), ag({"b"}), 2, "pen", 1)};
    auto cl = gsm_closure(rules4().rules, ax, kH2);
    CHECK(cl.chart_contains(cont(ag({"a"}), 7, "pen", 2)));
    CHECK(cl.chart_contains(cont(ag({"b"}), 2, "pen", 2)));
    // The frame rule is blocked for holders touched by the transfer.
    CHECK_FALSE(cl.chart_contains(cont(ag({"a"}), 5, "pen", 2)));
    CHECK_FALSE(cl.chart_contains(cont(ag({"b"}), 4, "pen", 2)));
}

TEST_CASE("frame rule carries untouched state")
{
    auto cl = gsm_closure(rules4().rules, {cont(ag({"a"}), 5, "pen", 1)}, kH2);
    CHECK(cl.chart_contains(cont(ag({"a"}), 5, "pen", 2)));
    CHECK_FALSE(cl.chart_contains(cont(ag({"a"}), 5, "pen", 3)));
}

TEST_CASE("union and rate rules")
{
    std::vector<Atom> ax = {cont(ag({"a"}), 5, "pen", 1), cont(ag({"b"}), 4, "pen", 1),
                            rate(ag({"a"}), 3, "box", "pen", 1)};
    Atom goal = cont(ag({"a", "b"}), 9, "pen", 1);
    auto cl = gsm_closure(rules4().rules, ax, kH2, goal);
    CHECK(cl.chart_contains(goal));
    auto r = gsm_closure(rules4().rules, {cont(ag({"a"}), 5, "box", 1), rate(ag({"a"}), 3, "box", "pen", 1)}, kH2);
    CHECK(r.chart_contains(cont(ag({"a"}), 15, "pen", 1)));
}

TEST_CASE("vocabulary filter keeps unmentioned unions out")
{
    std::vector<Atom> ax = {cont(ag({"a"}), 1, "pen", 1), cont(ag({"b"}), 2, "pen", 1), cont(ag({"c"}), 3, "pen", 1)};
    auto f = vocabulary_filter(ax, cont(ag({"a", "b"}), 3, "pen", 1));
    CHECK(f(cont(ag({"a", "b"}), 3, "pen", 1)));
    CHECK_FALSE(f(cont(ag({"a", "b", "c"}), 6, "pen", 1)));
    auto cl = gsm_closure(rules4().rules, ax, kH2, cont(ag({"a", "b"}), 3, "pen", 1));
    CHECK_FALSE(cl.chart_contains(cont(ag({"a", "c"}), 4, "pen", 1)));
}

TEST_CASE("numerical consistency")
{
    std::vector<Atom> ok = {cont(ag({"a"}), 5, "pen", 1), comp(ag({"b"}), ag({"a"}), 2, "pen", 1),
                            cont(ag({"b"}), 7, "pen", 1)};
    CHECK(check_numerical_consistency(rules4().rules, ok, kH2));
    auto bad = ok;
    bad.back() = cont(ag({"b"}), 9, "pen", 1);
    auto rep = consistency_report(rules4().rules, bad, kH2);
    CHECK_FALSE(rep.consistent);
    REQUIRE(rep.conflict);
    CHECK(rep.conflict->first.pred == "cont");
    CHECK(agents_of(rep.conflict->first) == agents_of(rep.conflict->second));
    CHECK(quantity_of(rep.conflict->first) != quantity_of(rep.conflict->second));
}

TEST_CASE("the worked example has a ten-vertex shortest proof")
{
    auto recs = read_dataset(std::string(VLP_SOURCE_DIR) + "/tests/fixtures/d3_problem.jsonl");
    REQUIRE(recs.size() == 1);
    const auto& r = recs[0];
    auto cl = gsm_closure(rules4().rules, r.all_axioms(), r.horizon, r.goal);
    auto sp = all_shortest_proofs(cl, r.goal);
    CHECK(sp.size == 10);
    CHECK(sp.proofs.size() == 1);
    CHECK(same_proof(sp.proofs[0], r.shortest_proof));
    CHECK(quantity_of(r.goal) == 26);
    CHECK(validate_proof(r.shortest_proof, rules4().rules, r.all_axioms()).ok);
    auto irr = irrelevant_axioms(cl, r.goal);
    CHECK(irr.size() == 6);
}

TEST_CASE("accessors and signature")
{
    Atom t = transfer(ag({"x"}), ag({"y"}), 4, "cup", 3);
    CHECK(agents_of(t) == ag({"x"}));
    CHECK(entity_of(t) == "cup");
    CHECK(quantity_of(t) == 4);
    CHECK(time_of(t) == 3);
    CHECK(gsm_signature().check(t) == "");
    CHECK(rules_listing(rules4()).find("1a") != std::string::npos);
}
