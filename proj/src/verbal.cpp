#include "vlp/verbal.hpp"

#include "vlp/gsm.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

namespace vlp {

namespace {

std::string read_file(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot read ") + what + ": " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Tense tense_from(const std::string& s)
{
    if (s == "present") return Tense::Present;
    if (s == "past") return Tense::Past;
    if (s == "any" || s.empty()) return Tense::Any;
    throw ConfigError("unknown tense in template file: " + s);
}

std::size_t pick(Rng& rng, std::size_t n)
{
    return static_cast<std::size_t>(boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
}

std::string num_str(const Nat& n) { return n.str(); }

}  // namespace

TemplateSet TemplateSet::load(const std::string& path) { return parse(read_file(path, "template file")); }

TemplateSet TemplateSet::parse(const std::string& text)
{
    TemplateSet ts;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        boost::trim(line);
        if (line.empty() || line[0] == '#') continue;
        // the pattern itself may hold '|' inside agreement slots
        auto first = line.find('|'), last = line.rfind('|');
        if (first == std::string::npos || first == last)
            throw ConfigError("template line " + std::to_string(lineno) + " needs three fields");
        Template t;
        std::string head = boost::trim_copy(line.substr(0, first));
        t.pattern = boost::trim_copy(line.substr(first + 1, last - first - 1));
        t.tense = tense_from(boost::trim_copy(line.substr(last + 1)));
        auto slash = head.find('/');
        t.pred = head.substr(0, slash);
        if (slash != std::string::npos) t.role = head.substr(slash + 1);
        if (t.pred == "question") {
            t.variant = t.role;
            t.role = "question";
            if (t.variant != "non_ground" && t.variant != "ground")
                throw ConfigError("question templates are question/non_ground or question/ground");
        } else if (!gsm_signature().has_predicate(t.pred)) {
            throw ConfigError("template for unknown predicate: " + t.pred);
        } else if (t.role != "" && t.role != "so" && t.role != "parse") {
            throw ConfigError("unknown template role: " + t.role);
        }
        if (t.role != "question" && (t.pattern.empty() || t.pattern.back() != '.' ||
                                     std::count(t.pattern.begin(), t.pattern.end(), '.') != 1))
            throw ConfigError("template must contain exactly one period, at the end: " + t.pattern);
        ts.templates.push_back(std::move(t));
    }
    return ts;
}

std::vector<const Template*> TemplateSet::find(const std::string& pred, const std::string& role, Tense tense) const
{
    std::vector<const Template*> out;
    for (const auto& t : templates) {
        if (t.role != role) continue;
        if (role == "question" ? t.variant != pred : t.pred != pred) continue;
        if (tense != Tense::Any && t.tense != Tense::Any && t.tense != tense) continue;
        out.push_back(&t);
    }
    return out;
}

std::string display_name(const std::string& agent)
{
    std::string s = agent;
    std::replace(s.begin(), s.end(), '_', ' ');
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string display_agents(const Term& agents)
{
    const auto& n = agents.agent_names();
    std::string s;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (i > 0) s += i + 1 == n.size() ? " and " : ", ";
        s += display_name(n[i]);
    }
    return s;
}

std::string Arithmetic::str() const
{
    std::string s;
    for (std::size_t i = 0; i < operands.size(); ++i) {
        if (i) s += std::string(" ") + op + " ";
        s += num_str(operands[i]);
    }
    return s + " = " + num_str(result);
}

std::optional<Arithmetic> arithmetic_of(const std::string& rule, const std::vector<Atom>& tail, const Atom& head)
{
    auto first = [&](const char* p) -> const Atom* {
        for (const auto& a : tail)
            if (a.pred == p) return &a;
        return nullptr;
    };
    const Atom* c = first(pred::Cont);
    auto q = [](const Atom* a) { return quantity_of(*a); };
    static const std::set<std::string> arithmetic_rules = {"1a", "1b", "1c", "2a", "2b", "4", "5a"};
    if (!arithmetic_rules.count(rule) && rule.rfind("3.", 0) != 0) return std::nullopt;
    Arithmetic r;
    r.result = quantity_of(head);
    if (rule == "1a" || rule == "5a") {
        const Atom* d = first(pred::Comp);
        if (!c || !d) return std::nullopt;
        r.operands = {q(c), q(d)};
    } else if (rule == "1b") {
        const Atom* d = first(pred::Comp);
        if (!c || !d) return std::nullopt;
        r.op = '-';
        r.operands = {q(c), q(d)};
    } else if (rule == "1c") {
        // head comp(B, A, Z): Z = qty(B) - qty(A)
        const Atom *b = nullptr, *a = nullptr;
        for (const auto& x : tail) {
            if (x.pred != pred::Cont) continue;
            if (x.args[0] == head.args[0]) b = &x;
            else if (x.args[0] == head.args[1]) a = &x;
        }
        if (!a || !b) return std::nullopt;
        r.op = '-';
        r.operands = {q(b), q(a)};
    } else if (rule == "2a" || rule == "2b") {
        const Atom* t = first(pred::Transfer);
        if (!c || !t) return std::nullopt;
        r.op = rule == "2a" ? '+' : '-';
        r.operands = {q(c), q(t)};
    } else if (rule == "4") {
        const Atom* t = first(pred::Rate);
        if (!c || !t) return std::nullopt;
        r.op = '*';
        r.operands = {q(c), q(t)};
    } else if (rule.rfind("3.", 0) == 0) {
        for (const auto& x : tail) r.operands.push_back(quantity_of(x));
    } else {
        return std::nullopt;
    }
    return r;
}

namespace {

struct Slots {
    std::vector<const Term*> agents;
    std::string qty;
    Nat count = 2;
    std::string entity;
    std::string entity2;
    Nat count2 = 2;
};

Slots slots_of(const Atom& a)
{
    Slots s;
    const auto& g = a.args;
    if (a.pred == pred::Cont) {
        s.agents = {&g[0]};
        s.qty = num_str(g[1].value());
        s.count = g[1].value();
        s.entity = g[2].entity_name();
    } else if (a.pred == pred::Comp || a.pred == pred::Transfer) {
        s.agents = {&g[0], &g[1]};
        s.qty = num_str(g[2].value());
        s.count = g[2].value();
        s.entity = g[3].entity_name();
    } else if (a.pred == pred::Rate) {
        s.agents = {&g[0]};
        s.qty = num_str(g[1].value());
        s.count = 1;
        s.entity = g[2].entity_name();
        s.entity2 = g[3].entity_name();
        s.count2 = g[1].value();
    } else if (a.pred == pred::Compeq) {
        s.agents = {&g[0], &g[1], &g[2], &g[3]};
        s.entity = g[4].entity_name();
    } else {
        throw VerbalError("no verbalization for " + a.str());
    }
    return s;
}

const std::string& plural_of(const Nouns& nouns, const std::string& e)
{
    auto it = nouns.find(e);
    if (it == nouns.end()) throw VerbalError("no plural form known for '" + e + "'");
    return it->second;
}

}  // namespace

std::string render(const Template& t, const Atom& a, const Nouns& nouns, const std::string& qty_text)
{
    if (a.is_builtin()) throw VerbalError("builtins are not verbalized");
    Slots s = slots_of(a);
    const std::string& p = t.pattern;
    std::string out;
    auto agent_slot = [&](int k) -> const Term& {
        if (k < 1 || k > static_cast<int>(s.agents.size()))
            throw VerbalError("template slot agents" + std::to_string(k) + " not available for " + a.pred);
        return *s.agents[k - 1];
    };
    for (std::size_t i = 0; i < p.size();) {
        if (p[i] != '{') {
            out += p[i++];
            continue;
        }
        auto close = p.find('}', i);
        if (close == std::string::npos) throw ConfigError("unterminated slot in template: " + p);
        std::string slot = p.substr(i + 1, close - i - 1);
        i = close + 1;
        if (slot == "agents") out += display_agents(agent_slot(1));
        else if (slot.size() == 7 && slot.rfind("agents", 0) == 0 && std::isdigit(static_cast<unsigned char>(slot[6])))
            out += display_agents(agent_slot(slot[6] - '0'));
        else if (slot == "qty") out += s.qty;
        else if (slot == "expr") out += qty_text.empty() ? s.qty : qty_text;
        else if (slot == "entity") out += s.count == 1 ? s.entity : plural_of(nouns, s.entity);
        else if (slot == "entity_s") out += s.entity;
        else if (slot == "entities") out += plural_of(nouns, s.entity);
        else if (slot == "entity2") out += s.count2 == 1 ? s.entity2 : plural_of(nouns, s.entity2);
        else if (slot == "entity2_s") out += s.entity2;
        else if (slot == "entities2") out += plural_of(nouns, s.entity2);
        else if (slot[0] == 'n' && slot.find(':') != std::string::npos) {
            auto colon = slot.find(':');
            int k = colon == 1 ? 1 : std::stoi(slot.substr(1, colon - 1));
            auto bar = slot.find('|', colon);
            if (bar == std::string::npos) throw ConfigError("agreement slot needs sing|plur: " + slot);
            bool one = agent_slot(k).agent_names().size() == 1;
            out += one ? slot.substr(colon + 1, bar - colon - 1) : slot.substr(bar + 1);
        } else {
            throw ConfigError("unknown template slot {" + slot + "}");
        }
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string verbalize_atom(const Atom& a, const TemplateSet& ts, const Nouns& nouns, Tense tense, Rng& rng)
{
    if (a.is_builtin()) throw VerbalError("builtins are not verbalized");
    auto c = ts.find(a.pred, "", tense);
    if (c.empty()) throw VerbalError("no template for predicate " + a.pred);
    return render(*c[pick(rng, c.size())], a, nouns);
}

std::string verbalize_conclusion(const Atom& head, const std::string& rule, const std::vector<Atom>& tail,
                                 const TemplateSet& ts, const Nouns& nouns)
{
    auto ar = arithmetic_of(rule, tail, head);
    auto c = ts.find(head.pred, "so");
    for (const Template* t : c) {
        bool has_expr = t->pattern.find("{expr}") != std::string::npos;
        if (has_expr == ar.has_value()) return render(*t, head, nouns, ar ? ar->str() : std::string());
    }
    auto plain = ts.find(head.pred, "");
    if (plain.empty()) throw VerbalError("no template for predicate " + head.pred);
    std::string s = render(*plain.front(), head, nouns);
    s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return "So " + s;
}

std::string to_string(QueryKind k) { return k == QueryKind::Ground ? "ground" : "non_ground"; }

QueryKind query_kind_from(const std::string& s)
{
    if (s == "ground") return QueryKind::Ground;
    if (s == "non_ground") return QueryKind::NonGround;
    throw ConfigError("unknown query kind: " + s);
}

std::string ProblemText::body() const { return boost::join(sentences, " "); }

std::string ProblemText::text(QueryKind k) const
{
    return body() + " " + (k == QueryKind::Ground ? ground_question : question);
}

ProblemText verbalize_problem(const ProblemInstance& inst, const TemplateSet& ts, const Nouns& nouns, Rng& rng)
{
    ProblemText pt;
    for (const auto& a : inst.presentation_order) pt.sentences.push_back(verbalize_atom(a, ts, nouns, Tense::Present, rng));
    for (auto kind : {QueryKind::NonGround, QueryKind::Ground}) {
        auto c = ts.find(to_string(kind), "question");
        if (c.empty()) throw ConfigError("no question template for " + to_string(kind));
        std::string q = render(*c[pick(rng, c.size())], inst.goal, nouns);
        (kind == QueryKind::Ground ? pt.ground_question : pt.question) = q;
    }
    return pt;
}

std::vector<int> annotation_order(const ProofForest& p, const std::vector<Atom>& presentation_order)
{
    std::map<Atom, std::size_t> pos;
    for (std::size_t i = 0; i < presentation_order.size(); ++i) pos.emplace(presentation_order[i], i);
    auto in = p.incoming();
    std::vector<std::size_t> first(p.size(), SIZE_MAX);
    std::vector<char> known(p.size(), 0);
    std::function<std::size_t(int)> earliest = [&](int v) {
        if (known[v]) return first[v];
        known[v] = 1;
        if (in[v] < 0) {
            auto it = pos.find(p.labels[v]);
            first[v] = it == pos.end() ? SIZE_MAX : it->second;
        } else {
            for (int t : p.edges[in[v]].tail) first[v] = std::min(first[v], earliest(t));
        }
        return first[v];
    };
    std::vector<int> out;
    std::vector<char> seen(p.size(), 0);
    std::function<void(int)> visit = [&](int v) {
        if (seen[v]) return;
        seen[v] = 1;
        if (in[v] >= 0) {
            std::vector<int> kids = p.edges[in[v]].tail;
            std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) { return earliest(a) < earliest(b); });
            for (int k : kids) visit(k);
        }
        out.push_back(v);
    };
    if (p.goal >= 0) visit(p.goal);
    return out;
}

std::string verbalize_proof(const ProofForest& p, const std::vector<Atom>& presentation_order,
                            const std::vector<std::string>& axiom_sentences, const TemplateSet& ts,
                            const Nouns& nouns, const std::vector<Rule>& rules)
{
    if (!rules.empty()) {
        auto v = validate_proof(p, rules);
        if (!v.ok) throw VerbalError("invalid proof: " + v.diagnostic);
    }
    std::map<Atom, std::size_t> pos;
    for (std::size_t i = 0; i < presentation_order.size(); ++i) pos.emplace(presentation_order[i], i);
    auto in = p.incoming();
    std::string out;
    int line = 1;
    for (int v : annotation_order(p, presentation_order)) {
        std::string s;
        if (in[v] < 0) {
            auto it = pos.find(p.labels[v]);
            if (it != pos.end() && it->second < axiom_sentences.size()) {
                s = axiom_sentences[it->second];
            } else {
                auto c = ts.find(p.labels[v].pred, "");
                if (c.empty()) throw VerbalError("no template for predicate " + p.labels[v].pred);
                s = render(*c.front(), p.labels[v], nouns);
            }
        } else {
            const ProofEdge& e = p.edges[in[v]];
            std::vector<Atom> tail;
            for (int t : e.tail) tail.push_back(p.labels[t]);
            s = verbalize_conclusion(p.labels[v], e.rule, tail, ts, nouns);
        }
        if (!out.empty()) out += '\n';
        out += std::to_string(line++) + ". " + s;
    }
    return out;
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to)
{
    for (std::size_t i = s.find(from); i != std::string::npos; i = s.find(from, i + to.size())) s.replace(i, from.size(), to);
}

std::string fold_symbols(std::string s)
{
    replace_all(s, "\xC3\x97", "*");      // multiplication sign
    replace_all(s, "\xE2\x88\x92", "-");  // minus sign
    replace_all(s, "\xE2\x80\x93", "-");  // en dash
    return s;
}

}  // namespace

std::string normalize_sentence(const std::string& in)
{
    std::string s = fold_symbols(in);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s.find('=') != std::string::npos) {
        static const std::regex chain(R"(\d+(?:\s*[-+*x/]\s*\d+)+\s*=\s*(\d+))");
        s = std::regex_replace(s, chain, "$1");
    }
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == ' ')) out.pop_back();
    if (out.rfind("so, ", 0) == 0) out.erase(0, 4);
    else if (out.rfind("so ", 0) == 0) out.erase(0, 3);
    return out;
}

std::vector<std::string> split_sentences(const std::string& text)
{
    static const std::regex numbering(R"(^\s*(?:\d+[.):]|[-*])\s+)");
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = std::regex_replace(line, numbering, "", std::regex_constants::format_first_only);
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i < line.size() && line[i] != '.') continue;
            std::string piece = boost::trim_copy(line.substr(start, i - start));
            if (!piece.empty()) out.push_back(piece + (i < line.size() ? "." : ""));
            start = i + 1;
        }
    }
    return out;
}

SentenceIndex::SentenceIndex(const std::vector<Atom>& universe, const TemplateSet& ts, const Nouns& nouns)
    : universe_(universe)
{
    for (std::size_t i = 0; i < universe_.size(); ++i) {
        const Atom& a = universe_[i];
        for (const auto& t : ts.templates) {
            if (t.role == "question" || t.pred != a.pred) continue;
            std::string key = normalize_sentence(render(t, a, nouns));
            for (auto* m : {&index_, t.role == "parse" ? nullptr : &written_}) {
                if (!m) continue;
                auto& slot = (*m)[key];
                if (std::find(slot.begin(), slot.end(), static_cast<int>(i)) == slot.end())
                    slot.push_back(static_cast<int>(i));
            }
        }
    }
}

const std::vector<int>* SentenceIndex::lookup(const std::string& normalized) const
{
    auto it = index_.find(normalized);
    return it == index_.end() ? nullptr : &it->second;
}

std::vector<std::pair<Atom, Atom>> SentenceIndex::collisions() const
{
    std::vector<std::pair<Atom, Atom>> out;
    for (const auto& [k, ids] : written_)
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                const Atom& a = universe_[ids[i]];
                const Atom& b = universe_[ids[j]];
                // Time is never spoken; states that differ only in their
                // timestamp are the same sentence by design.
                if (a.pred == b.pred && a.args.size() == b.args.size() &&
                    std::equal(a.args.begin(), a.args.end() - 1, b.args.begin()))
                    continue;
                out.emplace_back(a, b);
            }
    return out;
}

std::size_t ParsedProof::unmatched() const
{
    return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const ParsedStep& s) { return !s.atom; }));
}

ParseContext::ParseContext(const std::vector<Atom>& ax, const std::vector<Atom>& sp, ChainResult cl,
                           const TemplateSet& ts, const Nouns& nouns)
    : axioms(ax), shortest(sp), closure(std::move(cl)), index(closure.chart(), ts, nouns)
{
}

ParseContext make_parse_context(const std::vector<Atom>& axioms, const ProofForest& shortest, const Nat& horizon,
                                const Atom& goal, const GsmRuleSet& rs, const TemplateSet& ts, const Nouns& nouns)
{
    return ParseContext(axioms, shortest.labels, gsm_closure(rs.rules, axioms, horizon, goal), ts, nouns);
}

namespace {

// Among equally worded candidates prefer shortest-proof theorems, then
// axioms, then the earliest timestamp.
const Atom& prefer(const std::vector<const Atom*>& cands, const ParseContext& ctx)
{
    auto rank = [&](const Atom* a) {
        bool in_sp = std::find(ctx.shortest.begin(), ctx.shortest.end(), *a) != ctx.shortest.end();
        bool ax = std::find(ctx.axioms.begin(), ctx.axioms.end(), *a) != ctx.axioms.end();
        auto t = timestamp_of(*a);
        return std::make_tuple(!in_sp, !ax, t ? *t : Nat(0));
    };
    const Atom* best = cands.front();
    for (const Atom* a : cands)
        if (rank(a) < rank(best)) best = a;
    return *best;
}

}  // namespace

ParsedProof parse_proof(const std::string& transcript, const ParseContext& ctx)
{
    ParsedProof out;
    std::set<Atom> seen;
    std::set<Atom> sp(ctx.shortest.begin(), ctx.shortest.end());
    std::set<Atom> ax(ctx.axioms.begin(), ctx.axioms.end());
    for (const auto& s : split_sentences(transcript)) {
        ParsedStep st;
        st.sentence = s;
        if (const auto* ids = ctx.index.lookup(normalize_sentence(s))) {
            std::vector<const Atom*> cands;
            for (int i : *ids) cands.push_back(&ctx.index.universe()[i]);
            const Atom& a = prefer(cands, ctx);
            st.atom = a;
            st.is_axiom = ax.count(a) > 0;
            st.in_shortest = sp.count(a) > 0;
            st.duplicate = !seen.insert(a).second;
            if (!st.duplicate) out.theorems.push_back(a);
        }
        out.steps.push_back(std::move(st));
    }
    return out;
}

namespace {

struct Tok {
    enum Kind { Num, Op, Eq } kind;
    std::string text;
    char op = 0;
};

std::vector<Tok> tokenize(const std::string& sentence)
{
    std::string s = fold_symbols(sentence);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::vector<Tok> out;
    for (std::size_t i = 0; i < s.size();) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            // "1,234" is one number; "19, 4" is two
            while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) ||
                                    (s[j] == ',' && j + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[j + 1])))))
                ++j;
            std::string n;
            for (std::size_t k = i; k < j; ++k)
                if (s[k] != ',') n += s[k];
            out.push_back({Tok::Num, n});
            i = j;
        } else if (c == '+' || c == '-' || c == '*') {
            out.push_back({Tok::Op, std::string(1, c), c});
            ++i;
        } else if (c == '=') {
            out.push_back({Tok::Eq, "="});
            ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && (std::isalpha(static_cast<unsigned char>(s[j])) || s[j] == '\'')) ++j;
            std::string w = s.substr(i, j - i);
            if (w == "x" || w == "times") out.push_back({Tok::Op, w, '*'});
            else if (w == "plus") out.push_back({Tok::Op, w, '+'});
            else if (w == "minus") out.push_back({Tok::Op, w, '-'});
            else if (w == "equals") out.push_back({Tok::Eq, w});
            i = j;  // other words are skipped
        } else {
            ++i;
        }
    }
    return out;
}

std::string arith_key(const Arithmetic& a)
{
    std::vector<Nat> ops = a.operands;
    if (a.op != '-') std::sort(ops.begin(), ops.end());
    std::string k(1, a.op);
    for (const auto& n : ops) k += ' ' + n.str();
    return k + " = " + a.result.str();
}

}  // namespace

std::vector<ArithmeticMatch> extract_arithmetic_matches(const std::string& transcript, const ParseContext& ctx)
{
    std::unordered_map<std::string, std::vector<std::pair<int, std::string>>> truth;
    const auto& cl = ctx.closure;
    for (const auto& e : cl.hyperedges) {
        std::vector<Atom> tail;
        for (int t : e.tail) tail.push_back(cl.atoms[t]);
        if (auto a = arithmetic_of(e.rule, tail, cl.atoms[e.head])) truth[arith_key(*a)].emplace_back(e.head, e.rule);
    }
    std::vector<ArithmeticMatch> out;
    for (const auto& sentence : split_sentences(transcript)) {
        auto toks = tokenize(sentence);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (toks[i].kind != Tok::Eq || i + 1 >= toks.size() || toks[i + 1].kind != Tok::Num || i == 0 ||
                toks[i - 1].kind != Tok::Num)
                continue;
            Arithmetic a;
            a.result = Nat(toks[i + 1].text);
            std::vector<Nat> ops = {Nat(toks[i - 1].text)};
            char op = 0;
            std::size_t j = i - 1;
            while (j >= 2 && toks[j - 1].kind == Tok::Op && toks[j - 2].kind == Tok::Num &&
                   (op == 0 || toks[j - 1].op == op)) {
                op = toks[j - 1].op;
                ops.push_back(Nat(toks[j - 2].text));
                j -= 2;
            }
            if (op == 0) continue;
            std::reverse(ops.begin(), ops.end());
            a.operands = ops;
            a.op = op;
            ArithmeticMatch m;
            m.expression = a.str();
            m.parsed = a;
            auto it = truth.find(arith_key(a));
            if (it != truth.end()) {
                std::vector<const Atom*> cands;
                for (const auto& [h, r] : it->second) cands.push_back(&cl.atoms[h]);
                const Atom& best = prefer(cands, ctx);
                m.theorem = best;
                for (const auto& [h, r] : it->second)
                    if (cl.atoms[h] == best) {
                        m.rule = r;
                        break;
                    }
            }
            out.push_back(std::move(m));
        }
    }
    return out;
}

std::optional<Nat> extract_answer(const std::string& completion)
{
    // Digit groups like 1,234 count as one token.
    static const std::regex number(R"(\d{1,3}(?:,\d{3})+(?!\d)|\d+)");
    std::smatch m;
    if (!std::regex_search(completion, m, number)) return std::nullopt;
    std::string digits = m.str();
    std::erase(digits, ',');
    return Nat(digits);
}

PromptConfig PromptConfig::load(const std::string& path)
{
    PromptConfig pc;
    try {
        auto j = nlohmann::json::parse(read_file(path, "prompt config"));
        pc.system = j.at("system").get<std::string>();
        if (j.contains("answer_prefix")) pc.answer_prefix = j["answer_prefix"].get<std::string>();
        if (j.contains("suffix")) pc.suffix = j["suffix"].get<std::string>();
        for (const auto& s : j.at("shots")) {
            Shot shot;
            shot.question = s.at("question").get<std::string>();
            shot.steps = s.at("steps").get<std::vector<std::string>>();
            shot.answer = s.at("answer").get<std::string>();
            pc.shots.push_back(std::move(shot));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad prompt config " + path + ": " + e.what());
    }
    return pc;
}

Prompts build_prompts(const PromptConfig& cfg, const std::string& problem)
{
    std::string p = cfg.system + "\n\n";
    for (const auto& s : cfg.shots) {
        p += "Q: " + s.question + "\n\n" + cfg.answer_prefix + "\n";
        for (std::size_t i = 0; i < s.steps.size(); ++i) p += std::to_string(i + 1) + ". " + s.steps[i] + "\n";
        p += cfg.suffix + " " + s.answer + ".\n\n";
    }
    p += "Q: " + problem + "\n\n" + cfg.answer_prefix;
    return {p, cfg.suffix};
}

}  // namespace vlp
