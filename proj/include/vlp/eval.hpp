#pragma once

#include "vlp/logic.hpp"
#include "vlp/records.hpp"
#include "vlp/verbal.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vlp {

struct StatsError : LogicError {
    using LogicError::LogicError;
};

inline constexpr double kZ95 = 1.959964;

struct Interval {
    double low = 0;
    double high = 0;
};
// Wilson score interval, as proportions. Throws StatsError for n = 0.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = kZ95);

struct AnswerScore {
    bool answered = false;  // a transcript existed
    std::optional<Nat> extracted;
    bool correct = false;
};
AnswerScore score_answer(const std::optional<std::string>& stage2, const Nat& goal_quantity);

struct ProofScore {
    bool computed = false;     // only on correct answers
    bool zero_parsed = false;  // nothing matched; efficiency undefined
    std::size_t shortest = 0;
    std::size_t parsed = 0;    // distinct matched theorems
    double efficiency = 0;
    double efficiency_non_axioms = 0;
    bool non_axiom_defined = false;
    double recall = 0;
    bool exact_match = false;
    bool skipped_steps = false;
    std::size_t unmatched_sentences = 0;
    std::vector<Atom> irrelevant_theorems;  // parsed, outside the shortest proof
};

// `parsed` are the distinct matched theorems; `axioms` the problem's axiom set.
ProofScore score_proof(const std::vector<Atom>& shortest, const std::vector<Atom>& parsed,
                       const std::vector<Atom>& axioms, std::size_t unmatched_sentences = 0);

// Edit distance over any equality-comparable sequence, divided by the
// longer length; 0 for two empty sequences.
template <class T>
double levenshtein_normalized(const std::vector<T>& a, const std::vector<T>& b)
{
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 && m == 0) return 0.0;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

struct SearchReferences {
    std::vector<Atom> dfs;
    std::vector<Atom> bfs;
    std::vector<Atom> efficient_dfs;  // shortest-proof theorems only
};

// Non-axiom pop orders of forward chaining with axioms popped in
// presentation order. DFS and BFS keep only theorems of the shortest proof
// and of the sampled distractor proofs; the rest of the closure is noise no
// reader would produce.
SearchReferences search_references(const std::vector<Rule>& rules, const std::vector<Atom>& presentation_order,
                                   const std::vector<Atom>& relevant_axioms, const Atom& goal, const Nat& horizon,
                                   const std::vector<Atom>& shortest_theorems,
                                   const std::vector<Atom>& distractor_theorems);

struct SearchOrderReport {
    double dfs = 0;
    double bfs = 0;
    double efficient_dfs = 0;
};
// Absent when the parse has no non-axiom theorems.
std::optional<SearchOrderReport> search_order_report(const std::vector<Atom>& model_order,
                                                     const std::vector<Atom>& axioms,
                                                     const SearchReferences& refs);

struct AnovaResult {
    double f = 0;
    double p = 1;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
};
// Throws StatsError with fewer than two groups, a group under two samples,
// or zero variance everywhere. Zero within-group variance with separated
// means gives F = inf, p = 0.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

// Accumulates per-stratum accuracy.
struct Tally {
    std::size_t n = 0;
    std::size_t correct = 0;
    std::size_t unanswered = 0;
    double accuracy() const { return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0; }
};

// Dataset-level scoring.
struct ScoreOptions {
    bool arithmetic_only = false;  // match theorems through arithmetic expressions only
    double z = kZ95;
    int threads = 0;  // 0: hardware concurrency
};

struct ScoreOutput {
    std::vector<Json> per_problem;  // dataset order
    Json summary;
    std::string tables;
    std::vector<std::string> unknown_ids;  // transcripts naming no dataset record
};

// Label used for aggregation: "base", "<mode>/<overlap>" or "<mode>/control".
std::string stratum_of(const DatasetRecord& r);

Json score_problem(const DatasetRecord& rec, const TranscriptRecord* t, const ScoreOptions& opts,
                   const TemplateSet& ts);

// Pure in its inputs. When unknown_ids is non-empty nothing else is filled.
ScoreOutput score_dataset(const std::vector<DatasetRecord>& recs, const std::vector<TranscriptRecord>& transcripts,
                          const TemplateSet& ts, const ScoreOptions& opts = {});

}  // namespace vlp
