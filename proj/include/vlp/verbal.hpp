#pragma once

#include "vlp/chaining.hpp"
#include "vlp/generator.hpp"
#include "vlp/proof.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace vlp {

// singular -> plural
using Nouns = std::map<std::string, std::string>;

struct VerbalError : LogicError {
    using LogicError::LogicError;
};

enum class Tense { Present, Past, Any };

// Roles: "" states a fact, "so" a derived conclusion, "parse" is accepted
// when reading but never written, "question" holds query sentences.
struct Template {
    std::string pred;
    std::string role;
    std::string variant;  // question templates: non_ground or ground
    Tense tense = Tense::Any;
    std::string pattern;
};

// File format, one per line: `pred[/role] | pattern | tense`.
struct TemplateSet {
    std::vector<Template> templates;

    static TemplateSet load(const std::string& path);
    static TemplateSet parse(const std::string& text);
    std::vector<const Template*> find(const std::string& pred, const std::string& role,
                                      Tense tense = Tense::Any) const;
};

// "pieter's_student" -> "Pieter's student"
std::string display_name(const std::string& agent);
// "Alice", "Alice and Bob", "Alice, Bob and Carol"
std::string display_agents(const Term& agents);

// Arithmetic carried by a rule instantiation, e.g. 20 + 4 = 24.
struct Arithmetic {
    std::vector<Nat> operands;
    char op = '+';
    Nat result;
    std::string str() const;
};
std::optional<Arithmetic> arithmetic_of(const std::string& rule, const std::vector<Atom>& tail, const Atom& head);

std::string render(const Template& t, const Atom& a, const Nouns& nouns, const std::string& qty_text = {});

// Throws VerbalError for builtins and atoms without templates.
std::string verbalize_atom(const Atom& a, const TemplateSet& ts, const Nouns& nouns, Tense tense, Rng& rng);
std::string verbalize_conclusion(const Atom& head, const std::string& rule, const std::vector<Atom>& tail,
                                 const TemplateSet& ts, const Nouns& nouns);

enum class QueryKind { NonGround, Ground };
std::string to_string(QueryKind k);
QueryKind query_kind_from(const std::string& s);

struct ProblemText {
    std::vector<std::string> sentences;  // aligned with presentation_order
    std::string question;                // non-ground form
    std::string ground_question;
    std::string body() const;            // sentences joined by spaces
    std::string text(QueryKind k) const;
};

ProblemText verbalize_problem(const ProblemInstance& inst, const TemplateSet& ts, const Nouns& nouns, Rng& rng);

// Proof vertices in the order they are written out: post-order DFS where
// sibling premises are visited by the earliest presentation position of the
// axioms beneath them (body order on ties).
std::vector<int> annotation_order(const ProofForest& p, const std::vector<Atom>& presentation_order);

// Numbered lines; axioms reuse their problem sentences.
std::string verbalize_proof(const ProofForest& p, const std::vector<Atom>& presentation_order,
                            const std::vector<std::string>& axiom_sentences, const TemplateSet& ts,
                            const Nouns& nouns, const std::vector<Rule>& rules = {});

// Lowercase, single spaces, no terminal period, no leading "so", and any
// `a op b = c` chain replaced by c.
std::string normalize_sentence(const std::string& s);

// Splits at periods after removing list numbering at line starts.
std::vector<std::string> split_sentences(const std::string& text);

// Sentence index over a candidate theorem universe.
class SentenceIndex {
public:
    SentenceIndex(const std::vector<Atom>& universe, const TemplateSet& ts, const Nouns& nouns);

    // Candidate atoms (indices into the universe) for a normalized sentence.
    const std::vector<int>* lookup(const std::string& normalized) const;
    const std::vector<Atom>& universe() const { return universe_; }
    // Pairs of distinct universe atoms sharing a rendering; parse-only
    // templates are left out since nothing is ever written with them, and
    // so are pairs that differ only in their timestamp.
    std::vector<std::pair<Atom, Atom>> collisions() const;
    std::size_t size() const { return index_.size(); }

private:
    std::vector<Atom> universe_;
    std::unordered_map<std::string, std::vector<int>> index_;
    std::unordered_map<std::string, std::vector<int>> written_;
};

struct ParsedStep {
    std::string sentence;
    std::optional<Atom> atom;
    bool is_axiom = false;
    bool in_shortest = false;
    bool duplicate = false;
};

struct ParsedProof {
    std::vector<ParsedStep> steps;
    std::vector<Atom> theorems;  // distinct matches, first-occurrence order
    std::size_t unmatched() const;
};

struct ParseContext {
    std::vector<Atom> axioms;
    std::vector<Atom> shortest;  // shortest-proof vertex labels
    ChainResult closure;
    SentenceIndex index;

    ParseContext(const std::vector<Atom>& axioms, const std::vector<Atom>& shortest, ChainResult closure,
                 const TemplateSet& ts, const Nouns& nouns);
};

// Builds the bounded closure of the full axiom set and its sentence index.
ParseContext make_parse_context(const std::vector<Atom>& axioms, const ProofForest& shortest, const Nat& horizon,
                                const Atom& goal, const GsmRuleSet& rs, const TemplateSet& ts, const Nouns& nouns);

ParsedProof parse_proof(const std::string& transcript, const ParseContext& ctx);

struct ArithmeticMatch {
    std::string expression;
    Arithmetic parsed;
    std::optional<Atom> theorem;  // head of a matching rule instantiation
    std::string rule;
};
std::vector<ArithmeticMatch> extract_arithmetic_matches(const std::string& transcript, const ParseContext& ctx);

// First integer in the completion.
std::optional<Nat> extract_answer(const std::string& completion);

struct Shot {
    std::string question;
    std::vector<std::string> steps;
    std::string answer;
};

struct PromptConfig {
    std::string system;
    std::string answer_prefix = "A: Let's think step by step.";
    std::string suffix = "Therefore, the answer (arabic numerals) is";
    std::vector<Shot> shots;

    static PromptConfig load(const std::string& path);
};

struct Prompts {
    std::string first;
    std::string suffix;
};
Prompts build_prompts(const PromptConfig& cfg, const std::string& problem);

}  // namespace vlp
