#include "vlp/eval.hpp"

#include "vlp/gsm.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace vlp {

Interval wilson_interval(std::size_t successes, std::size_t n, double z)
{
    if (n == 0) throw StatsError("wilson interval needs n >= 1");
    if (successes > n) throw StatsError("more successes than trials");
    if (!(z > 0)) throw StatsError("critical value must be positive");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1 + z2 / nn;
    const double center = (p + z2 / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
    Interval iv{center - half, center + half};
    // The closed form hits the bounds exactly in exact arithmetic.
    if (successes == 0) iv.low = 0;
    if (successes == n) iv.high = 1;
    iv.low = std::max(0.0, iv.low);
    iv.high = std::min(1.0, iv.high);
    return iv;
}

AnswerScore score_answer(const std::optional<std::string>& stage2, const Nat& goal_quantity)
{
    AnswerScore s;
    if (!stage2) return s;
    s.answered = true;
    s.extracted = extract_answer(*stage2);
    s.correct = s.extracted && *s.extracted == goal_quantity;
    return s;
}

ProofScore score_proof(const std::vector<Atom>& shortest, const std::vector<Atom>& parsed,
                       const std::vector<Atom>& axioms, std::size_t unmatched)
{
    ProofScore s;
    s.computed = true;
    s.unmatched_sentences = unmatched;
    std::set<Atom> sp(shortest.begin(), shortest.end());
    std::set<Atom> ax(axioms.begin(), axioms.end());
    std::set<Atom> seen;
    std::vector<Atom> ps;
    for (const auto& a : parsed)
        if (seen.insert(a).second) ps.push_back(a);
    s.shortest = sp.size();
    s.parsed = ps.size();
    if (ps.empty()) {
        s.zero_parsed = true;
        return s;
    }
    std::size_t hit = 0, sp_non = 0, ps_non = 0;
    for (const auto& a : sp) sp_non += !ax.count(a);
    for (const auto& a : ps) {
        if (sp.count(a))
            ++hit;
        else
            s.irrelevant_theorems.push_back(a);
        ps_non += !ax.count(a);
    }
    Efficiency e = efficiency(s.parsed, s.shortest);
    s.efficiency = e.value;
    s.skipped_steps = e.skipped_steps;
    if (ps_non > 0 && sp_non > 0) {
        s.non_axiom_defined = true;
        s.efficiency_non_axioms = static_cast<double>(sp_non) / static_cast<double>(ps_non);
    }
    s.recall = sp.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(sp.size());
    s.exact_match = hit == sp.size() && ps.size() == sp.size();
    return s;
}

SearchReferences search_references(const std::vector<Rule>& rules, const std::vector<Atom>& presentation_order,
                                   const std::vector<Atom>& relevant_axioms, const Atom& goal, const Nat& horizon,
                                   const std::vector<Atom>& shortest_theorems,
                                   const std::vector<Atom>& distractor_theorems)
{
    ChainOptions opts;
    opts.horizon = horizon;
    opts.admit = vocabulary_filter(presentation_order, goal);
    std::set<Atom> mine(shortest_theorems.begin(), shortest_theorems.end());
    std::set<Atom> kept = mine;
    kept.insert(distractor_theorems.begin(), distractor_theorems.end());
    auto only = [](std::vector<Atom> v, const std::set<Atom>& keep) {
        v.erase(std::remove_if(v.begin(), v.end(), [&](const Atom& a) { return !keep.count(a); }), v.end());
        return v;
    };
    SearchReferences r;
    r.dfs = only(reference_pop_order(rules, presentation_order, AgendaPolicy::Lifo, goal, opts), kept);
    r.bfs = only(reference_pop_order(rules, presentation_order, AgendaPolicy::Fifo, goal, opts), kept);
    std::set<Atom> rel(relevant_axioms.begin(), relevant_axioms.end());
    std::vector<Atom> rel_order;
    for (const auto& a : presentation_order)
        if (rel.count(a)) rel_order.push_back(a);
    ChainOptions ropts = opts;
    ropts.admit = vocabulary_filter(rel_order, goal);
    r.efficient_dfs = only(reference_pop_order(rules, rel_order, AgendaPolicy::Lifo, goal, ropts), mine);
    return r;
}

std::optional<SearchOrderReport> search_order_report(const std::vector<Atom>& model_order,
                                                     const std::vector<Atom>& axioms,
                                                     const SearchReferences& refs)
{
    std::set<Atom> ax(axioms.begin(), axioms.end());
    std::vector<Atom> m;
    for (const auto& a : model_order)
        if (!ax.count(a)) m.push_back(a);
    if (m.empty()) return std::nullopt;
    return SearchOrderReport{levenshtein_normalized(m, refs.dfs), levenshtein_normalized(m, refs.bfs),
                             levenshtein_normalized(m, refs.efficient_dfs)};
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups)
{
    if (groups.size() < 2) throw StatsError("anova needs at least two groups");
    double total = 0;
    std::size_t n = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw StatsError("anova needs at least two samples per group");
        for (double x : g) total += x;
        n += g.size();
    }
    const double grand = total / static_cast<double>(n);
    double ssb = 0, ssw = 0;
    for (const auto& g : groups) {
        double mean = 0;
        for (double x : g) mean += x;
        mean /= static_cast<double>(g.size());
        ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
        for (double x : g) ssw += (x - mean) * (x - mean);
    }
    AnovaResult r;
    r.df_between = groups.size() - 1;
    r.df_within = n - groups.size();
    // Rounding noise in the sums should not decide degeneracy.
    const double eps = 1e-12 * std::max(1.0, std::abs(grand) * std::abs(grand)) * static_cast<double>(n);
    if (ssb <= eps) ssb = 0;
    if (ssw <= eps) ssw = 0;
    if (ssw == 0) {
        if (ssb == 0) throw StatsError("anova inapplicable: every sample is identical");
        r.f = std::numeric_limits<double>::infinity();
        r.p = 0;
        return r;
    }
    r.f = (ssb / static_cast<double>(r.df_between)) / (ssw / static_cast<double>(r.df_within));
    boost::math::fisher_f dist(static_cast<double>(r.df_between), static_cast<double>(r.df_within));
    r.p = r.f == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, r.f));
    return r;
}

namespace {

const GsmRuleSet& rules_for_k(int k)
{
    thread_local std::map<int, GsmRuleSet> cache;
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, build_gsm_rules(k)).first;
    return it->second;
}

// Union rules must reach the widest agent set the record mentions.
int union_width(const DatasetRecord& r)
{
    std::size_t k = 4;
    auto see = [&](const Atom& a) {
        for (const auto& t : a.args)
            if (!t.is_var() && t.sort() == Sort::Agents) k = std::max(k, t.agent_names().size());
    };
    for (const auto& a : r.presentation_order) see(a);
    for (const auto& a : r.shortest_proof.labels) see(a);
    see(r.goal);
    return static_cast<int>(k);
}

std::size_t word_count(const std::string& s)
{
    std::istringstream in(s);
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

Json atoms_array(const std::vector<Atom>& v)
{
    Json a = Json::array();
    for (const auto& x : v) a.push_back(x.str());
    return a;
}

double mean(const std::vector<double>& v)
{
    if (v.empty()) return 0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

}  // namespace

std::string stratum_of(const DatasetRecord& r)
{
    if (r.structural_mode == "base") return "base";
    if (r.is_control) return r.structural_mode + "/control";
    return r.structural_mode + "/" + r.overlap_mode.value_or("none");
}

Json score_problem(const DatasetRecord& rec, const TranscriptRecord* t, const ScoreOptions& opts,
                   const TemplateSet& ts)
{
    Json j;
    j["id"] = rec.id;
    j["model"] = t ? Json(t->model) : Json(nullptr);
    j["stratum"] = stratum_of(rec);
    j["structural_mode"] = rec.structural_mode;
    j["overlap_mode"] = rec.overlap_mode ? Json(*rec.overlap_mode) : Json(nullptr);
    j["is_control"] = rec.is_control;
    std::optional<std::string> stage2;
    if (t && !t->error) stage2 = t->stage2;
    AnswerScore a = score_answer(stage2, rec.goal_quantity());
    j["answered"] = a.answered;
    j["extracted"] = a.extracted ? Json(a.extracted->str()) : Json(nullptr);
    j["goal_quantity"] = rec.goal_quantity().str();
    j["correct"] = a.correct;
    j["annotation_words"] = word_count(rec.annotation);
    j["stage1_words"] = t && t->stage1 ? Json(word_count(*t->stage1)) : Json(nullptr);
    j["proof"] = nullptr;
    j["search_order"] = nullptr;
    if (!a.correct || !t->stage1) return j;

    const GsmRuleSet& rs = rules_for_k(union_width(rec));
    auto axioms = rec.all_axioms();
    ParseContext ctx = make_parse_context(axioms, rec.shortest_proof, rec.horizon, rec.goal, rs, ts, rec.plurals);
    std::vector<Atom> order;
    std::size_t unmatched = 0;
    if (opts.arithmetic_only) {
        std::set<Atom> seen;
        auto ms = extract_arithmetic_matches(*t->stage1, ctx);
        for (const auto& m : ms) {
            if (!m.theorem) {
                ++unmatched;
                continue;
            }
            if (seen.insert(*m.theorem).second) order.push_back(*m.theorem);
        }
        j["arithmetic_expressions"] = ms.size();
    } else {
        ParsedProof pp = parse_proof(*t->stage1, ctx);
        order = pp.theorems;
        unmatched = pp.unmatched();
        j["sentences"] = pp.steps.size();
    }
    // The arithmetic view only ever sees conclusions.
    std::vector<Atom> shortest = rec.shortest_proof.labels;
    if (opts.arithmetic_only) {
        std::set<Atom> ax(axioms.begin(), axioms.end());
        shortest.erase(std::remove_if(shortest.begin(), shortest.end(), [&](const Atom& x) { return ax.count(x) > 0; }),
                       shortest.end());
    }
    ProofScore ps = score_proof(shortest, order, axioms, unmatched);
    Json p;
    p["shortest"] = ps.shortest;
    p["parsed"] = ps.parsed;
    p["zero_parsed"] = ps.zero_parsed;
    p["efficiency"] = ps.zero_parsed ? Json(nullptr) : Json(ps.efficiency);
    p["efficiency_non_axioms"] = ps.non_axiom_defined ? Json(ps.efficiency_non_axioms) : Json(nullptr);
    p["recall"] = ps.zero_parsed ? Json(nullptr) : Json(ps.recall);
    p["exact_match"] = ps.exact_match;
    p["skipped_steps"] = ps.skipped_steps;
    p["unmatched_sentences"] = ps.unmatched_sentences;
    p["irrelevant_theorems"] = atoms_array(ps.irrelevant_theorems);
    p["parsed_theorems"] = atoms_array(order);
    j["proof"] = p;

    try {
        std::vector<Atom> others;
        for (const auto& g : rec.distractor_theorems) others.insert(others.end(), g.begin(), g.end());
        SearchReferences refs = search_references(rs.rules, rec.presentation_order, rec.relevant_axioms, rec.goal,
                                                  rec.horizon, rec.shortest_proof.labels, others);
        if (auto so = search_order_report(order, axioms, refs))
            j["search_order"] = Json{{"dfs", so->dfs}, {"bfs", so->bfs}, {"efficient_dfs", so->efficient_dfs}};
    } catch (const UnprovableError&) {
        // Leave the report absent; the record's goal should always be derivable.
    }
    return j;
}

ScoreOutput score_dataset(const std::vector<DatasetRecord>& recs, const std::vector<TranscriptRecord>& transcripts,
                          const TemplateSet& ts, const ScoreOptions& opts)
{
    ScoreOutput out;
    std::map<std::string, std::size_t> ids;
    for (std::size_t i = 0; i < recs.size(); ++i) ids.emplace(recs[i].id, i);
    std::map<std::string, const TranscriptRecord*> by_id;
    std::set<std::string> unknown;
    for (const auto& t : transcripts) {
        if (!ids.count(t.id))
            unknown.insert(t.id);
        else
            by_id[t.id] = &t;  // a later line for the same id wins
    }
    if (!unknown.empty()) {
        out.unknown_ids.assign(unknown.begin(), unknown.end());
        return out;
    }

    out.per_problem.resize(recs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < recs.size();) {
            auto it = by_id.find(recs[i].id);
            out.per_problem[i] = score_problem(recs[i], it == by_id.end() ? nullptr : it->second, opts, ts);
        }
    };
    int n = opts.threads > 0 ? opts.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n = std::min<int>(n, static_cast<int>(std::max<std::size_t>(recs.size(), 1)));
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();

    // Deterministic fold in dataset order.
    struct Agg {
        Tally tally;
        std::vector<double> eff, eff_non, recall, dfs, bfs, edfs;
        std::size_t exact = 0, scored = 0, zero = 0, irrelevant = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Agg> agg;
    std::map<std::string, std::map<std::string, std::vector<double>>> by_overlap;  // structural -> overlap -> eff
    std::set<std::string> models;
    for (const auto& j : out.per_problem) {
        std::string s = j["stratum"].get<std::string>();
        if (!agg.count(s)) order.push_back(s);
        Agg& g = agg[s];
        ++g.tally.n;
        g.tally.correct += j["correct"].get<bool>();
        g.tally.unanswered += !j["answered"].get<bool>();
        if (!j["model"].is_null()) models.insert(j["model"].get<std::string>());
        const Json& p = j["proof"];
        if (!p.is_null()) {
            if (p["zero_parsed"].get<bool>()) {
                ++g.zero;
            } else {
                ++g.scored;
                g.eff.push_back(p["efficiency"].get<double>());
                g.recall.push_back(p["recall"].get<double>());
                if (!p["efficiency_non_axioms"].is_null()) g.eff_non.push_back(p["efficiency_non_axioms"].get<double>());
                g.exact += p["exact_match"].get<bool>();
                g.irrelevant += p["irrelevant_theorems"].size();
                if (!j["is_control"].get<bool>() && j["structural_mode"] != "base")
                    by_overlap[j["structural_mode"].get<std::string>()][j["overlap_mode"].get<std::string>()].push_back(
                        p["efficiency"].get<double>());
            }
        }
        const Json& so = j["search_order"];
        if (!so.is_null()) {
            g.dfs.push_back(so["dfs"].get<double>());
            g.bfs.push_back(so["bfs"].get<double>());
            g.edfs.push_back(so["efficient_dfs"].get<double>());
        }
    }

    Json strata = Json::array();
    std::ostringstream t3, t4, t6;
    t3 << "Answer accuracy (%), " << (opts.z == kZ95 ? "95%" : "z=" + fmt("%.3f", opts.z)) << " Wilson interval\n";
    t3 << "stratum                          n   unans   acc     (low, high)\n";
    t4 << "Proof metrics on correct answers\n";
    t4 << "stratum                          scored  zero  eff     exact   eff_nonax  recall  irr/problem\n";
    t6 << "Search order, mean normalized Levenshtein distance\n";
    t6 << "stratum                          n     dfs     bfs     eff_dfs\n";
    std::size_t total = 0, correct = 0, unanswered = 0;
    for (const auto& s : order) {
        const Agg& g = agg[s];
        total += g.tally.n;
        correct += g.tally.correct;
        unanswered += g.tally.unanswered;
        Interval iv = wilson_interval(g.tally.correct, g.tally.n, opts.z);
        double acc = g.tally.accuracy();
        Json row;
        row["stratum"] = s;
        row["n"] = g.tally.n;
        row["correct"] = g.tally.correct;
        row["unanswered"] = g.tally.unanswered;
        row["accuracy"] = acc;
        row["wilson_low"] = iv.low;
        row["wilson_high"] = iv.high;
        row["proof_scored"] = g.scored;
        row["zero_parsed"] = g.zero;
        row["efficiency"] = g.scored ? Json(mean(g.eff)) : Json(nullptr);
        row["exact_match"] = g.scored ? Json(static_cast<double>(g.exact) / static_cast<double>(g.scored)) : Json(nullptr);
        row["efficiency_non_axioms"] = g.eff_non.empty() ? Json(nullptr) : Json(mean(g.eff_non));
        row["recall"] = g.scored ? Json(mean(g.recall)) : Json(nullptr);
        row["irrelevant_per_problem"] =
            g.scored ? Json(static_cast<double>(g.irrelevant) / static_cast<double>(g.scored)) : Json(nullptr);
        row["search_order_n"] = g.dfs.size();
        row["dfs"] = g.dfs.empty() ? Json(nullptr) : Json(mean(g.dfs));
        row["bfs"] = g.bfs.empty() ? Json(nullptr) : Json(mean(g.bfs));
        row["efficient_dfs"] = g.edfs.empty() ? Json(nullptr) : Json(mean(g.edfs));
        strata.push_back(row);

        char line[256];
        std::snprintf(line, sizeof line, "%-30s %5zu %7zu   %5.1f   (%+.1f, %+.1f)\n", s.c_str(), g.tally.n,
                      g.tally.unanswered, 100 * acc, 100 * (iv.low - acc), 100 * (iv.high - acc));
        t3 << line;
        if (g.scored) {
            std::snprintf(line, sizeof line, "%-30s %8zu %5zu  %.3f   %.3f   %s      %.3f   %.2f\n", s.c_str(), g.scored,
                          g.zero, mean(g.eff), static_cast<double>(g.exact) / static_cast<double>(g.scored),
                          g.eff_non.empty() ? "  -  " : fmt("%.3f", mean(g.eff_non)).c_str(), mean(g.recall),
                          static_cast<double>(g.irrelevant) / static_cast<double>(g.scored));
        } else {
            std::snprintf(line, sizeof line, "%-30s %8zu %5zu  -\n", s.c_str(), g.scored, g.zero);
        }
        t4 << line;
        if (!g.dfs.empty()) {
            std::snprintf(line, sizeof line, "%-30s %5zu  %.3f   %.3f   %.3f\n", s.c_str(), g.dfs.size(), mean(g.dfs),
                          mean(g.bfs), mean(g.edfs));
            t6 << line;
        }
    }

    Json anova = Json::array();
    t4 << "\nOne-way ANOVA of efficiency across overlap modes\n";
    for (const auto& [mode, groups] : by_overlap) {
        std::vector<std::vector<double>> gs;
        for (const auto& [ov, v] : groups) gs.push_back(v);
        Json a;
        a["structural_mode"] = mode;
        a["groups"] = gs.size();
        try {
            AnovaResult r = anova_oneway(gs);
            a["F"] = std::isinf(r.f) ? Json("inf") : Json(r.f);
            a["p"] = r.p;
            a["df"] = Json::array({r.df_between, r.df_within});
            t4 << "  " << mode << ": F(" << r.df_between << ", " << r.df_within << ") = "
               << (std::isinf(r.f) ? std::string("inf") : fmt("%.3f", r.f)) << ", p = " << fmt("%.4g", r.p) << "\n";
        } catch (const StatsError& e) {
            a["error"] = e.what();
            t4 << "  " << mode << ": not applicable (" << e.what() << ")\n";
        }
        anova.push_back(a);
    }

    Json& sm = out.summary;
    sm["mode"] = opts.arithmetic_only ? "arithmetic_only" : "sentences";
    sm["models"] = Json(std::vector<std::string>(models.begin(), models.end()));
    sm["problems"] = total;
    sm["transcripts"] = by_id.size();
    sm["unanswered"] = unanswered;
    sm["correct"] = correct;
    sm["accuracy"] = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    sm["z"] = opts.z;
    sm["strata"] = strata;
    sm["anova"] = anova;
    out.tables = t3.str() + "\n" + t4.str() + "\n" + t6.str();
    return out;
}

}  // namespace vlp
