#include "vlp/generator.hpp"

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cstdio>
#include <deque>
#include <future>
#include <map>

namespace vlp {

std::string to_string(Structural s)
{
    switch (s) {
    case Structural::Base: return "base";
    case Structural::WithAxiom: return "with_axiom";
    case Structural::WithTree: return "with_tree";
    default: return "with_multiple_trees";
    }
}

std::string to_string(Overlap o)
{
    switch (o) {
    case Overlap::None: return "none";
    case Overlap::Entity: return "entity";
    case Overlap::Agent: return "agent";
    default: return "both";
    }
}

Structural structural_from(const std::string& s)
{
    for (auto m : {Structural::Base, Structural::WithAxiom, Structural::WithTree, Structural::WithMultipleTrees})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown structural mode: " + s);
}

Overlap overlap_from(const std::string& s)
{
    for (auto m : {Overlap::None, Overlap::Entity, Overlap::Agent, Overlap::Both})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown overlap mode: " + s);
}

int distractor_count(Structural s)
{
    switch (s) {
    case Structural::Base: return 0;
    case Structural::WithMultipleTrees: return 3;
    default: return 1;
    }
}

std::vector<Atom> ProblemInstance::all_axioms() const
{
    std::vector<Atom> out = relevant_axioms;
    auto irr = irrelevant_axioms();
    out.insert(out.end(), irr.begin(), irr.end());
    return out;
}

std::vector<Atom> ProblemInstance::irrelevant_axioms() const
{
    std::vector<Atom> out;
    for (const auto& d : irrelevant) out.insert(out.end(), d.axioms.begin(), d.axioms.end());
    return out;
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 over (seed, stream) so neighbouring streams are unrelated
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return Rng(z);
}

void UsedNames::add(const Atom& a)
{
    for (const auto& t : a.args) {
        if (t.is_var()) continue;
        if (t.sort() == Sort::Agents) agents.insert(t.agent_names().begin(), t.agent_names().end());
        if (t.sort() == Sort::Entity) entities.insert(t.entity_name());
    }
}

namespace {

long long uni(Rng& rng, long long lo, long long hi)
{
    return boost::random::uniform_int_distribution<long long>(lo, hi)(rng);
}

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(uni(rng, 0, static_cast<long long>(n) - 1)); }

int weighted(Rng& rng, const std::vector<double>& w)
{
    return boost::random::discrete_distribution<int>(w.begin(), w.end())(rng);
}

long long num(const Nat& n) { return n.convert_to<long long>(); }

std::string fresh_agent(const Lexicon& lx, const std::set<std::string>& used, Rng& rng)
{
    std::vector<const std::string*> c;
    for (const auto& a : lx.agents)
        if (!used.count(a)) c.push_back(&a);
    if (c.empty()) throw ConfigError("agent lexicon exhausted");
    return *c[pick(rng, c.size())];
}

std::string fresh_from(const std::vector<std::string>& pool, const std::set<std::string>& used, Rng& rng)
{
    std::vector<const std::string*> c;
    for (const auto& e : pool)
        if (!used.count(e)) c.push_back(&e);
    if (c.empty()) return {};
    return *c[pick(rng, c.size())];
}

Term single(const std::string& n) { return Term::agents({n}); }

struct Step {
    std::string rule;
    std::vector<Atom> premises;
    std::vector<bool> push;
};

class Sampler {
public:
    Sampler(const GenConfig& cfg, Rng& rng, const SampleOptions& so, const std::set<Atom>& forbidden,
            const UsedNames& taken)
        : cfg_(cfg), rng_(rng), so_(so), set_(forbidden), used_(taken)
    {
        for (const auto& a : forbidden) used_.add(a);
    }

    ProofForest run(const Atom& goal, int depth)
    {
        set_.insert(goal);
        used_.add(goal);
        std::deque<std::pair<int, Atom>> queue;
        queue.emplace_back(0, goal);
        while (!queue.empty()) {
            auto [d, h] = queue.front();
            queue.pop_front();
            if (d > depth) break;
            Step s = expand(h);
            for (std::size_t k = 0; k < s.premises.size(); ++k) {
                set_.insert(s.premises[k]);
                used_.add(s.premises[k]);
                if (s.push[k]) queue.emplace_back(d + 1, s.premises[k]);
            }
            steps_.emplace(h, s);
        }
        return build(goal);
    }

private:
    std::vector<std::string> admissible(const Atom& h) const
    {
        std::vector<std::string> r;
        if (h.pred == pred::Comp) {
            r.push_back("1c");
            return r;
        }
        const Term& a = h.args[0];
        long long z = num(h.args[1].value());
        long long t = num(h.args[3].value());
        bool one = a.agent_names().size() == 1;
        if (z >= 2) r.push_back("1a");
        r.push_back("1b");
        if (one && t >= 1 && z >= 2) r.push_back("2a");
        if (one && t >= 1) r.push_back("2b");
        long long k = static_cast<long long>(a.agent_names().size());
        if (k >= 2 && k <= cfg_.k_max && z >= k) r.push_back("3." + std::to_string(k));
        if (one && so_.allow_rate && z >= 2 && !cfg_.lexicon.containers.empty()) r.push_back("4");
        if (z >= 2) r.push_back("5a");
        return r;
    }

    std::vector<std::string> fresh_agents(int n)
    {
        std::set<std::string> u = used_.agents;
        std::vector<std::string> out;
        for (int i = 0; i < n; ++i) {
            out.push_back(fresh_agent(cfg_.lexicon, u, rng_));
            u.insert(out.back());
        }
        return out;
    }

    long long q() { return uni(rng_, cfg_.qty_min, cfg_.qty_max); }

    std::optional<Step> instantiate(const std::string& rule, const Atom& h)
    {
        Step s;
        s.rule = rule;
        const Term& A = h.args[0];
        if (h.pred == pred::Comp) {
            const Term& B = h.args[0];
            const Term& Aa = h.args[1];
            Nat Z = h.args[2].value();
            const std::string& E = h.args[3].entity_name();
            Nat T = h.args[4].value();
            Nat X = q();
            s.premises = {cont(Aa, X, E, T), cont(B, X + Z, E, T)};
            s.push = {true, true};
            return s;
        }
        const Nat Z = h.args[1].value();
        const std::string& E = h.args[2].entity_name();
        const Nat T = h.args[3].value();
        long long z = num(Z);
        if (rule == "1a") {
            auto f = fresh_agents(1);
            Nat X = uni(rng_, 1, z - 1);
            s.premises = {cont(single(f[0]), X, E, T), comp(A, single(f[0]), Z - X, E, T)};
            s.push = {true, false};
        } else if (rule == "1b") {
            auto f = fresh_agents(1);
            Nat Y = q();
            s.premises = {cont(single(f[0]), Z + Y, E, T), comp(single(f[0]), A, Y, E, T)};
            s.push = {true, false};
        } else if (rule == "2a") {
            auto f = fresh_agents(1);
            Nat X = uni(rng_, 1, z - 1);
            s.premises = {cont(A, X, E, T - 1), transfer(A, single(f[0]), Z - X, E, T - 1)};
            s.push = {true, false};
        } else if (rule == "2b") {
            auto f = fresh_agents(1);
            Nat Y = q();
            s.premises = {cont(A, Z + Y, E, T - 1), transfer(single(f[0]), A, Y, E, T - 1)};
            s.push = {true, false};
        } else if (rule.rfind("3.", 0) == 0) {
            const auto& names = A.agent_names();
            long long k = static_cast<long long>(names.size());
            std::set<long long> cuts;
            while (static_cast<long long>(cuts.size()) < k - 1) cuts.insert(uni(rng_, 1, z - 1));
            long long prev = 0;
            std::vector<long long> parts;
            for (long long c : cuts) {
                parts.push_back(c - prev);
                prev = c;
            }
            parts.push_back(z - prev);
            for (long long i = 0; i < k; ++i) {
                s.premises.push_back(cont(single(names[i]), Nat(parts[i]), E, T));
                s.push.push_back(true);
            }
        } else if (rule == "4") {
            std::vector<long long> divs;
            for (long long d = 2; d <= z; ++d)
                if (z % d == 0) divs.push_back(d);
            if (divs.empty()) return std::nullopt;
            std::string c = fresh_from(cfg_.lexicon.containers, used_.entities, rng_);
            if (c.empty()) return std::nullopt;
            long long y = divs[pick(rng_, divs.size())];
            s.premises = {cont(A, Nat(z / y), c, T), rate(A, Nat(y), c, E, T)};
            s.push = {true, false};
        } else if (rule == "5a") {
            auto f = fresh_agents(3);
            Nat X = uni(rng_, 1, z - 1);
            Term a = single(f[0]), c = single(f[1]), d = single(f[2]);
            s.premises = {cont(a, X, E, T), comp(d, c, Z - X, E, T), compeq(a, A, c, d, E, T)};
            s.push = {true, true, false};
        } else {
            throw LogicError("generator cannot expand with rule " + rule);
        }
        return s;
    }

    Step expand(const Atom& h)
    {
        auto rules = admissible(h);
        if (rules.empty()) throw ResampleSignal("no rule concludes " + h.str());
        while (true) {
            const std::string& r = rules[pick(rng_, rules.size())];
            auto s = instantiate(r, h);
            bool ok = s.has_value();
            if (ok)
                for (const auto& p : s->premises) ok = ok && !set_.count(p);
            if (ok) return *s;
            if (++retries_ > cfg_.retry_cap) throw ResampleSignal("retry cap exceeded at " + h.str());
        }
    }

    ProofForest build(const Atom& goal)
    {
        ProofForest p;
        std::function<int(const Atom&)> go = [&](const Atom& a) {
            if (auto id = p.find(a)) return *id;
            auto it = steps_.find(a);
            if (it == steps_.end()) return p.add_vertex(a, true);
            std::vector<int> tail;
            for (const auto& b : it->second.premises) tail.push_back(go(b));
            int id = p.add_vertex(a, false);
            p.edges.push_back({tail, it->second.rule, id});
            return id;
        };
        p.goal = go(goal);
        return p;
    }

    const GenConfig& cfg_;
    Rng& rng_;
    SampleOptions so_;
    std::set<Atom> set_;
    UsedNames used_;
    std::map<Atom, Step> steps_;
    int retries_ = 0;
};

std::set<Atom> labels_of(const ProofForest& p) { return std::set<Atom>(p.labels.begin(), p.labels.end()); }

UsedNames names_of(const ProblemInstance& inst)
{
    UsedNames u;
    for (const auto& a : inst.shortest_proof.labels) u.add(a);
    for (const auto& d : inst.irrelevant)
        for (const auto& a : d.proof.labels) u.add(a);
    return u;
}

}  // namespace

int sample_depth(const GenConfig& cfg, Rng& rng) { return 1 + weighted(rng, cfg.depth_weights); }

Atom sample_goal(const GenConfig& cfg, int depth, Rng& rng, const UsedNames& used)
{
    int k = 1 + weighted(rng, cfg.cardinality_weights);
    std::set<std::string> u = used.agents;
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) {
        names.push_back(fresh_agent(cfg.lexicon, u, rng));
        u.insert(names.back());
    }
    std::string e = fresh_from(cfg.lexicon.topic_entities(), used.entities, rng);
    if (e.empty()) throw ConfigError("entity lexicon exhausted");
    long long lo = std::max<long long>(cfg.qty_min, k);
    return cont(Term::agents(names), Nat(uni(rng, lo, std::max<long long>(lo, cfg.qty_max))), e, Nat(depth + 1));
}

ProofForest sample_shortest_proof(const GenConfig& cfg, const Atom& goal, const std::set<Atom>& forbidden, int depth,
                                  Rng& rng, const SampleOptions& so, const UsedNames& taken)
{
    if (goal.pred != pred::Cont || !goal.is_ground()) throw LogicError("goal must be a ground cont atom");
    if (forbidden.count(goal)) throw ResampleSignal("goal is forbidden");
    Sampler s(cfg, rng, so, forbidden, taken);
    return s.run(goal, depth);
}

namespace {

ProblemInstance base_attempt(const GenConfig& cfg, Rng& rng)
{
    ProblemInstance inst;
    inst.depth = sample_depth(cfg, rng);
    inst.goal = sample_goal(cfg, inst.depth, rng);
    inst.shortest_proof = sample_shortest_proof(cfg, inst.goal, {}, inst.depth, rng);
    if (inst.shortest_proof.edges.size() > cfg.max_hyperedges) throw ResampleSignal("proof too long");
    inst.relevant_axioms = inst.shortest_proof.axioms();
    inst.horizon = time_of(inst.goal);
    return inst;
}

const GsmRuleSet& rules_for(const GenConfig& cfg)
{
    static thread_local std::map<int, GsmRuleSet> cache;
    auto it = cache.find(cfg.k_max);
    if (it == cache.end()) it = cache.emplace(cfg.k_max, build_gsm_rules(cfg.k_max)).first;
    return it->second;
}

}  // namespace

namespace {

// Time is never verbalized, so a proof that returns to an earlier state
// (same predicate and arguments at another timestamp) would annotate two
// vertices with the same sentence.
bool states_distinct(const ProofForest& p)
{
    std::set<std::pair<std::string, std::vector<Term>>> seen;
    for (const auto& a : p.labels) {
        std::vector<Term> untimed(a.args.begin(), a.args.end() - 1);
        if (!seen.emplace(a.pred, std::move(untimed)).second) return false;
    }
    return true;
}

}  // namespace

ProblemInstance generate_base(const GenConfig& cfg, Rng& rng)
{
    for (int attempt = 0; attempt < 100000; ++attempt) {
        try {
            ProblemInstance inst = base_attempt(cfg, rng);
            if (!states_distinct(inst.shortest_proof)) continue;
            if (cfg.verify && !verify_instance(inst, rules_for(cfg)).ok) continue;
            return inst;
        } catch (const ResampleSignal&) {
        }
    }
    throw ConfigError("could not sample a base problem; check the generator config");
}

namespace {

Atom perturb_goal(const ProblemInstance& base, Overlap ov, const GenConfig& cfg, const UsedNames& used, Rng& rng)
{
    const Atom& g = base.goal;
    const Term& agents = g.args[0];
    const std::string& e = g.args[2].entity_name();
    const Lexicon& lx = cfg.lexicon;
    Nat quantity(uni(rng, cfg.qty_min, cfg.qty_max));
    Nat t = time_of(g);
    auto fresh_entity_any = [&] {
        std::string f = fresh_from(lx.topic_entities(), used.entities, rng);
        if (f.empty()) throw ConfigError("entity lexicon exhausted");
        return f;
    };
    switch (ov) {
    case Overlap::None: {
        std::string f;
        auto c = lx.cluster_of.find(e);
        if (c != lx.cluster_of.end()) f = fresh_from(lx.clusters[c->second], used.entities, rng);
        if (f.empty()) f = fresh_entity_any();
        return cont(single(fresh_agent(lx, used.agents, rng)), quantity, f, t);
    }
    case Overlap::Entity: return cont(single(fresh_agent(lx, used.agents, rng)), quantity, e, t);
    case Overlap::Agent: {
        const auto& names = agents.agent_names();
        return cont(single(names[pick(rng, names.size())]), quantity, fresh_entity_any(), t);
    }
    default: {
        std::vector<std::string> derived;
        for (const auto& n : agents.agent_names())
            for (const auto& s : lx.suffixes)
                if (!used.agents.count(n + s)) derived.push_back(n + s);
        if (derived.empty()) throw ResampleSignal("no derived agent name left");
        return cont(single(derived[pick(rng, derived.size())]), quantity, e, t);
    }
    }
}

}  // namespace

ProblemInstance inject_irrelevant(const ProblemInstance& base, Structural mode, Overlap overlap, const GenConfig& cfg,
                                  Rng& rng)
{
    if (!base.irrelevant.empty()) throw LogicError("base already has irrelevant axioms");
    ProblemInstance inst = base;
    inst.structural = mode;
    inst.overlap = overlap;
    inst.id = base.id + "-" + to_string(mode) + "-" + to_string(overlap);
    std::set<Atom> forbidden = labels_of(base.shortest_proof);
    UsedNames used = names_of(base);
    SampleOptions so;
    so.singleton_cont = true;
    so.allow_rate = false;
    int m = distractor_count(mode);
    for (int i = 0; i < m; ++i) {
        bool done = false;
        for (int attempt = 0; attempt < 200 && !done; ++attempt) {
            Atom h = perturb_goal(inst, overlap, cfg, used, rng);
            if (forbidden.count(h)) continue;
            Distractor d;
            d.goal = h;
            if (mode == Structural::WithAxiom) {
                d.proof.goal = d.proof.add_vertex(h, true);
            } else {
                int depth = weighted(rng, cfg.distractor_depth_weights);
                try {
                    d.proof = sample_shortest_proof(cfg, h, forbidden, depth, rng, so, used);
                } catch (const ResampleSignal&) {
                    continue;
                }
            }
            d.axioms = d.proof.axioms();
            for (const auto& a : d.proof.labels) {
                forbidden.insert(a);
                used.add(a);
            }
            inst.irrelevant.push_back(std::move(d));
            done = true;
        }
        if (!done) throw ResampleSignal("could not place a distractor");
    }
    return inst;
}

ProblemInstance make_control(const ProblemInstance& base, std::size_t target, const GenConfig& cfg, Rng& rng)
{
    ProblemInstance inst = base;
    inst.irrelevant.clear();
    inst.is_control = true;
    inst.control_of = base.id;
    inst.overlap.reset();
    if (target < base.relevant_axioms.size()) throw LogicError("control target below the base axiom count");
    ProofForest& p = inst.shortest_proof;
    UsedNames used = names_of(base);
    int retries = 0;
    while (p.axioms().size() < target) {
        std::size_t need = target - p.axioms().size();
        const Atom g = p.labels[p.goal];
        const Term& A = g.args[0];
        const Nat Z = g.args[1].value();
        const std::string E = g.args[2].entity_name();
        const Nat T = g.args[3].value();
        bool one = A.agent_names().size() == 1;
        std::vector<std::string> opts = {"1a"};
        if (Z >= 2) opts.push_back("1b");
        if (one) opts.push_back("2a");
        if (one && Z >= 2) opts.push_back("2b");
        if (one && cfg.lexicon.is_container(E)) opts.push_back("4");
        if (need >= 2) opts.push_back("5a");
        // Unions only over singletons; a nested union would need a holder
        // set that no axiom mentions.
        for (int k = 2; one && k <= cfg.k_max && static_cast<std::size_t>(k - 1) <= need; ++k)
            opts.push_back("3." + std::to_string(k));
        std::string r = opts[pick(rng, opts.size())];
        auto fresh = [&] {
            std::string n = fresh_agent(cfg.lexicon, used.agents, rng);
            used.agents.insert(n);
            return single(n);
        };
        std::vector<Atom> ax;
        Atom head;
        long long z = num(Z);
        if (r == "1a") {
            Term b = fresh();
            Nat y = uni(rng, cfg.qty_min, cfg.qty_max);
            ax = {comp(b, A, y, E, T)};
            head = cont(b, Z + y, E, T);
        } else if (r == "1b") {
            Term a = fresh();
            Nat y = uni(rng, 1, z - 1);
            ax = {comp(A, a, y, E, T)};
            head = cont(a, Z - y, E, T);
        } else if (r == "2a") {
            Nat y = uni(rng, cfg.qty_min, cfg.qty_max);
            ax = {transfer(A, fresh(), y, E, T)};
            head = cont(A, Z + y, E, T + 1);
        } else if (r == "2b") {
            Nat y = uni(rng, 1, z - 1);
            ax = {transfer(fresh(), A, y, E, T)};
            head = cont(A, Z - y, E, T + 1);
        } else if (r == "4") {
            std::string f = fresh_from(cfg.lexicon.topic_entities(), used.entities, rng);
            if (f.empty()) {
                if (++retries > cfg.retry_cap) throw ResampleSignal("control growth stuck");
                continue;
            }
            used.entities.insert(f);
            Nat y = uni(rng, 2, 10);
            ax = {rate(A, y, E, f, T)};
            head = cont(A, Z * y, f, T);
        } else if (r == "5a") {
            Term b = fresh(), c = fresh(), d = fresh();
            Nat y = uni(rng, cfg.qty_min, cfg.qty_max);
            ax = {comp(d, c, y, E, T), compeq(A, b, c, d, E, T)};
            head = cont(b, Z + y, E, T);
        } else {
            int k = std::stoi(r.substr(2));
            std::vector<std::string> names = A.agent_names();
            Nat sum = Z;
            for (int i = 1; i < k; ++i) {
                Term s = fresh();
                names.push_back(s.agent_names()[0]);
                Nat y = uni(rng, cfg.qty_min, cfg.qty_max);
                ax.push_back(cont(s, y, E, T));
                sum += y;
            }
            head = cont(Term::agents(names), sum, E, T);
        }
        std::vector<int> tail = {p.goal};
        for (const auto& a : ax) tail.push_back(p.add_vertex(a, true));
        int h = p.add_vertex(head, false);
        p.edges.push_back({tail, r, h});
        p.goal = h;
    }
    inst.goal = p.labels[p.goal];
    inst.relevant_axioms = p.axioms();
    inst.horizon = time_of(inst.goal);
    return inst;
}

namespace {

std::vector<std::string> entities_in(const Atom& a)
{
    std::vector<std::string> out;
    for (const auto& t : a.args)
        if (t.sort() == Sort::Entity) out.push_back(t.entity_name());
    return out;
}

bool shares_entity(const Atom& a, const Atom& b)
{
    auto x = entities_in(a), y = entities_in(b);
    return std::any_of(x.begin(), x.end(), [&](const std::string& e) { return std::find(y.begin(), y.end(), e) != y.end(); });
}

std::pair<Nat, int> time_key(const Atom& a) { return {time_of(a), a.pred == pred::Transfer ? 1 : 0}; }

}  // namespace

std::vector<Atom> order_axioms(const std::vector<Atom>& axioms, Rng& rng)
{
    std::size_t n = axioms.size();
    std::vector<std::vector<int>> succ(n);
    std::vector<int> indeg(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && shares_entity(axioms[i], axioms[j]) && time_key(axioms[i]) < time_key(axioms[j])) {
                succ[i].push_back(static_cast<int>(j));
                ++indeg[j];
            }
    std::vector<int> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
    std::vector<Atom> out;
    while (!ready.empty()) {
        std::size_t k = pick(rng, ready.size());
        int v = ready[k];
        ready.erase(ready.begin() + static_cast<long>(k));
        out.push_back(axioms[v]);
        for (int w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    return out;
}

bool respects_time_order(const std::vector<Atom>& order)
{
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j)
            if (shares_entity(order[i], order[j]) && time_key(order[j]) < time_key(order[i])) return false;
    return true;
}

InstanceCheck verify_instance(const ProblemInstance& inst, const GsmRuleSet& rs)
{
    auto axioms = inst.all_axioms();
    ConsistencyReport c;
    ChainResult cl;
    try {
        cl = gsm_closure(rs.rules, axioms, inst.horizon, inst.goal, AgendaPolicy::Lifo, &c);
    } catch (const ChainError& e) {
        return {false, e.what()};
    }
    if (!c.consistent) return {false, "numerically inconsistent: " + c.conflict->first.str() + " vs " + c.conflict->second.str()};
    if (!cl.chart_contains(inst.goal)) return {false, "goal not derivable"};
    auto sp = all_shortest_proofs(cl, inst.goal);
    if (sp.truncated) return {false, "shortest-proof search truncated"};
    if (sp.proofs.size() != 1) return {false, std::to_string(sp.proofs.size()) + " shortest proofs"};
    if (!same_proof(sp.proofs[0], inst.shortest_proof)) return {false, "shortest proof differs from the sampled one"};
    std::set<Atom> want;
    for (const auto& a : inst.irrelevant_axioms()) want.insert(a);
    std::set<Atom> got;
    for (std::size_t i = 0; i < cl.atoms.size(); ++i)
        if (cl.is_axiom[i] && !labels_of(sp.proofs[0]).count(cl.atoms[i])) got.insert(cl.atoms[i]);
    if (want != got) return {false, "irrelevant set differs from the injected one"};
    return {};
}

std::vector<ProblemInstance> generate_group(const GenConfig& cfg, int index, DatasetStats* stats)
{
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(index));
    char id[32];
    std::snprintf(id, sizeof id, "b%04d", index);
    const GsmRuleSet& rs = rules_for(cfg);
    for (int group_attempt = 0; group_attempt < 1000; ++group_attempt) {
        std::vector<ProblemInstance> out;
        ProblemInstance base = generate_base(cfg, rng);
        base.id = id;
        base.seed = cfg.seed;
        base.presentation_order = order_axioms(base.relevant_axioms, rng);
        out.push_back(base);
        bool failed = false;
        for (Structural mode : cfg.modes) {
            if (mode == Structural::Base) continue;
            std::size_t none_count = 0;
            for (Overlap ov : {Overlap::None, Overlap::Entity, Overlap::Agent, Overlap::Both}) {
                std::optional<ProblemInstance> v;
                for (int attempt = 0; attempt < 50 && !v; ++attempt) {
                    try {
                        auto cand = inject_irrelevant(base, mode, ov, cfg, rng);
                        if (cfg.verify) {
                            auto chk = verify_instance(cand, rs);
                            if (!chk.ok) {
                                if (stats) ++stats->variant_rejections;
                                continue;
                            }
                        }
                        v = std::move(cand);
                    } catch (const ResampleSignal&) {
                        if (stats) ++stats->variant_rejections;
                    }
                }
                if (!v) {
                    failed = true;
                    break;
                }
                if (ov == Overlap::None) none_count = v->all_axioms().size();
                v->presentation_order = order_axioms(v->all_axioms(), rng);
                out.push_back(std::move(*v));
            }
            if (failed) break;
            std::optional<ProblemInstance> ctl;
            for (int attempt = 0; attempt < 50 && !ctl; ++attempt) {
                try {
                    auto cand = make_control(base, none_count, cfg, rng);
                    cand.structural = mode;
                    cand.id = base.id + "-" + to_string(mode) + "-control";
                    if (!states_distinct(cand.shortest_proof) || (cfg.verify && !verify_instance(cand, rs).ok)) {
                        if (stats) ++stats->variant_rejections;
                        continue;
                    }
                    ctl = std::move(cand);
                } catch (const ResampleSignal&) {
                }
            }
            if (!ctl) {
                failed = true;
                break;
            }
            ctl->presentation_order = order_axioms(ctl->relevant_axioms, rng);
            out.push_back(std::move(*ctl));
        }
        if (!failed) return out;
        if (stats) ++stats->base_rejections;
    }
    throw ConfigError("could not build a complete problem group for " + std::string(id));
}

std::vector<ProblemInstance> generate_dataset(const GenConfig& cfg, DatasetStats* stats)
{
    if (cfg.n_base < 1) throw ConfigError("n_base must be at least 1");
    // Groups are independent streams; running them concurrently changes
    // nothing in the output.
    std::vector<std::future<std::pair<std::vector<ProblemInstance>, DatasetStats>>> jobs;
    unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    std::vector<ProblemInstance> out;
    DatasetStats total;
    for (int start = 0; start < cfg.n_base; start += static_cast<int>(workers)) {
        jobs.clear();
        for (int i = start; i < std::min(cfg.n_base, start + static_cast<int>(workers)); ++i)
            jobs.push_back(std::async(std::launch::async, [&cfg, i] {
                DatasetStats s;
                auto g = generate_group(cfg, i, &s);
                return std::make_pair(std::move(g), s);
            }));
        for (auto& j : jobs) {
            auto [g, s] = j.get();
            total.base_rejections += s.base_rejections;
            total.variant_rejections += s.variant_rejections;
            for (auto& x : g) out.push_back(std::move(x));
        }
    }
    if (stats) *stats = total;
    return out;
}

}  // namespace vlp
