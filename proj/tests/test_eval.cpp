#include "doctest.h"

#include "vlp/eval.hpp"

#include <cmath>
#include <limits>

using namespace vlp;

namespace {

const std::string kRoot = VLP_SOURCE_DIR;

const TemplateSet& templates()
{
    static const TemplateSet ts = TemplateSet::load(kRoot + "/data/templates.txt");
    return ts;
}

Atom c(const char* a, int q, int t = 1) { return cont(ag({a}), q, "pen", t); }

}  // namespace

TEST_CASE("wilson interval")
{
    auto iv = wilson_interval(325, 500, 1.96);
    CHECK(iv.low == doctest::Approx(0.6072).epsilon(1e-3));
    CHECK(iv.high == doctest::Approx(0.6906).epsilon(1e-3));
    auto zero = wilson_interval(0, 20);
    CHECK(zero.low == doctest::Approx(0.0));
    CHECK(zero.high > 0.1);
    auto all = wilson_interval(500, 500);
    CHECK(all.high == doctest::Approx(1.0));
    CHECK(all.low > 0.99);
    CHECK_THROWS_AS(wilson_interval(0, 0), StatsError);
    // Symmetry around one half.
    auto a = wilson_interval(30, 100), b = wilson_interval(70, 100);
    CHECK(a.low == doctest::Approx(1 - b.high));
}

TEST_CASE("one-way anova")
{
    auto r = anova_oneway({{1, 2, 3}, {2, 3, 4}});
    CHECK(r.f == doctest::Approx(1.5));
    CHECK(r.df_between == 1);
    CHECK(r.df_within == 4);
    // F(1, 4) is the square of Student t with 4 degrees of freedom, whose
    // tail has a closed form.
    double t = std::sqrt(1.5), x = t / std::sqrt(t * t + 4);
    double p = 1 - 1.5 * x * (1 - x * x / 3);
    CHECK(r.p == doctest::Approx(p).epsilon(1e-9));

    auto same = anova_oneway({{1, 2, 3}, {1, 2, 3}});
    CHECK(same.f == doctest::Approx(0.0));
    CHECK(same.p == doctest::Approx(1.0));
    auto split = anova_oneway({{0, 0, 0, 0}, {1, 1, 1, 1}});
    CHECK(split.f == std::numeric_limits<double>::infinity());
    CHECK(split.p == 0.0);
    CHECK_THROWS_AS(anova_oneway({{1, 1}, {1, 1}}), StatsError);
    CHECK_THROWS_AS(anova_oneway({{1, 2, 3}}), StatsError);
    CHECK_THROWS_AS(anova_oneway({{1, 2}, {3}}), StatsError);
}

TEST_CASE("normalized edit distance")
{
    std::vector<int> a = {1, 2, 3}, b = {1, 2, 4}, e;
    CHECK(levenshtein_normalized(a, b) == doctest::Approx(1.0 / 3));
    CHECK(levenshtein_normalized(a, a) == 0.0);
    CHECK(levenshtein_normalized(a, e) == 1.0);
    CHECK(levenshtein_normalized(e, e) == 0.0);
    CHECK(levenshtein_normalized(std::vector<int>{1, 2}, std::vector<int>{2, 1}) == doctest::Approx(1.0));
}

TEST_CASE("answer scoring")
{
    CHECK(score_answer(std::string(" 26."), Nat(26)).correct);
    auto wrong = score_answer(std::string(" 25."), Nat(26));
    CHECK(wrong.answered);
    CHECK_FALSE(wrong.correct);
    auto none = score_answer(std::nullopt, Nat(26));
    CHECK_FALSE(none.answered);
    CHECK_FALSE(none.correct);
    CHECK_FALSE(score_answer(std::string("no idea"), Nat(26)).extracted);
}

TEST_CASE("proof scores")
{
    std::vector<Atom> axioms = {c("a", 1), c("b", 2), c("x", 9)};
    std::vector<Atom> shortest = {c("a", 1), c("b", 2), c("d", 3), c("e", 4)};

    auto exact = score_proof(shortest, shortest, axioms);
    CHECK(exact.computed);
    CHECK(exact.efficiency == 1.0);
    CHECK(exact.recall == 1.0);
    CHECK(exact.exact_match);
    CHECK(exact.efficiency_non_axioms == 1.0);

    // One theorem missing and two extras.
    std::vector<Atom> parsed = {c("a", 1), c("b", 2), c("d", 3), c("x", 9), c("y", 5)};
    auto s = score_proof(shortest, parsed, axioms, 2);
    CHECK(s.efficiency == doctest::Approx(4.0 / 5));
    CHECK(s.recall == doctest::Approx(3.0 / 4));
    CHECK_FALSE(s.exact_match);
    CHECK_FALSE(s.skipped_steps);
    CHECK(s.unmatched_sentences == 2);
    CHECK(s.irrelevant_theorems == std::vector<Atom>{c("x", 9), c("y", 5)});
    // Non-axioms: shortest has d, e; parsed has d, y.
    CHECK(s.non_axiom_defined);
    CHECK(s.efficiency_non_axioms == doctest::Approx(2.0 / 2));

    auto skip = score_proof(shortest, {c("a", 1), c("e", 4)}, axioms);
    CHECK(skip.skipped_steps);
    CHECK(skip.efficiency == doctest::Approx(2.0));

    auto empty = score_proof(shortest, {}, axioms, 5);
    CHECK(empty.zero_parsed);
    CHECK_FALSE(empty.exact_match);
}

TEST_CASE("ten-vertex proof missing one theorem")
{
    std::vector<Atom> shortest, axioms;
    for (int i = 0; i < 10; ++i) {
        shortest.push_back(c("s", i));
        if (i < 5) axioms.push_back(shortest.back());
    }
    std::vector<Atom> parsed(shortest.begin(), shortest.end() - 1);
    auto s = score_proof(shortest, parsed, axioms);
    CHECK(s.recall == doctest::Approx(0.9));
    CHECK(s.skipped_steps);
}

TEST_CASE("search order distances")
{
    SearchReferences refs;
    refs.dfs = {c("p", 1), c("q", 2), c("g", 3)};
    refs.bfs = {c("q", 2), c("p", 1), c("g", 3)};
    refs.efficient_dfs = {c("p", 1), c("g", 3)};
    std::vector<Atom> axioms = {c("a", 1)};
    auto r = search_order_report({c("a", 1), c("p", 1), c("q", 2), c("g", 3)}, axioms, refs);
    REQUIRE(r);
    CHECK(r->dfs == 0.0);
    CHECK(r->bfs == doctest::Approx(2.0 / 3));
    CHECK(r->efficient_dfs == doctest::Approx(1.0 / 3));
    CHECK_FALSE(search_order_report({c("a", 1)}, axioms, refs));
}

TEST_CASE("worked example end to end")
{
    auto r = read_dataset(kRoot + "/tests/fixtures/d3_problem.jsonl").at(0);
    auto t = read_transcripts(kRoot + "/tests/fixtures/d3_transcript.jsonl").at(0);
    auto j = score_problem(r, &t, {}, templates());
    CHECK(j["correct"] == true);
    CHECK(j["extracted"] == "26");
    const auto& p = j["proof"];
    CHECK(p["shortest"] == 10);
    CHECK(p["efficiency"].get<double>() < 1.0);
    CHECK(p["efficiency"].get<double>() == doctest::Approx(10.0 / 16));
    CHECK(p["recall"].get<double>() == doctest::Approx(0.8));
    CHECK(p["unmatched_sentences"] == 1);
    CHECK(p["irrelevant_theorems"].size() >= 3);
    std::set<std::string> ents;
    for (const auto& s : p["irrelevant_theorems"]) {
        auto a = parse_atom(s.get<std::string>(), gsm_signature());
        ents.insert(entity_of(a));
    }
    CHECK(ents.count("key"));
    CHECK(ents.count("packet"));
    CHECK(ents.count("crayon"));
    CHECK(!j["search_order"].is_null());

    ScoreOptions ar;
    ar.arithmetic_only = true;
    auto ja = score_problem(r, &t, ar, templates());
    CHECK(ja["arithmetic_expressions"] == 7);
    CHECK(ja["proof"]["parsed"] == 7);
}

TEST_CASE("dataset scoring is deterministic and rejects unknown ids")
{
    auto recs = read_dataset(kRoot + "/tests/fixtures/golden_dataset.jsonl");
    auto ts = read_transcripts(kRoot + "/tests/fixtures/golden_transcripts.jsonl");
    ScoreOptions one, many;
    one.threads = 1;
    many.threads = 4;
    auto a = score_dataset(recs, ts, templates(), one);
    auto b = score_dataset(recs, ts, templates(), many);
    CHECK(a.summary.dump() == b.summary.dump());
    CHECK(a.tables == b.tables);
    REQUIRE(a.per_problem.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) CHECK(a.per_problem[i].dump() == b.per_problem[i].dump());
    CHECK(a.summary["accuracy"] == 1.0);
    for (const auto& row : a.per_problem) CHECK(row["proof"]["exact_match"] == true);

    auto extra = ts;
    extra.push_back(ts[0]);
    extra.back().id = "nope";
    auto u = score_dataset(recs, extra, templates());
    CHECK(u.unknown_ids == std::vector<std::string>{"nope"});
    CHECK(u.per_problem.empty());

    // Missing transcripts count as unanswered, not as errors.
    auto half = std::vector<TranscriptRecord>(ts.begin(), ts.begin() + 32);
    auto h = score_dataset(recs, half, templates());
    CHECK(h.summary["unanswered"] == 32);
    CHECK(h.summary["accuracy"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("strata labels")
{
    DatasetRecord r;
    CHECK(stratum_of(r) == "base");
    r.structural_mode = "with_tree";
    r.overlap_mode = "agent";
    CHECK(stratum_of(r) == "with_tree/agent");
    r.overlap_mode.reset();
    r.is_control = true;
    CHECK(stratum_of(r) == "with_tree/control");
}
