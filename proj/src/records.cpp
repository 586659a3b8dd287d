#include "vlp/records.hpp"

#include "vlp/gsm.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace vlp {

namespace {

Json atoms_json(const std::vector<Atom>& v)
{
    Json a = Json::array();
    for (const auto& x : v) a.push_back(x.str());
    return a;
}

std::vector<Atom> atoms_from(const Json& j)
{
    std::vector<Atom> out;
    for (const auto& s : j) out.push_back(parse_atom(s.get<std::string>(), gsm_signature()));
    return out;
}

template <class T>
T field(const Json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) throw RecordError(std::string("record is missing field '") + key + "'");
    try {
        return it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw RecordError(std::string("bad field '") + key + "': " + e.what());
    }
}

template <class T>
std::optional<T> opt_field(const Json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->template get<T>();
}

template <class T>
Json opt_json(const std::optional<T>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::vector<Atom> DatasetRecord::flat_irrelevant() const
{
    std::vector<Atom> out;
    for (const auto& g : irrelevant_axioms) out.insert(out.end(), g.begin(), g.end());
    return out;
}

std::vector<Atom> DatasetRecord::all_axioms() const
{
    auto out = relevant_axioms;
    auto irr = flat_irrelevant();
    out.insert(out.end(), irr.begin(), irr.end());
    return out;
}

const Nat& DatasetRecord::goal_quantity() const { return quantity_of(goal); }

Json DatasetRecord::to_json() const
{
    Json j;
    j["id"] = id;
    j["structural_mode"] = structural_mode;
    j["overlap_mode"] = opt_json(overlap_mode);
    j["is_control"] = is_control;
    j["control_of"] = opt_json(control_of);
    j["query_kind"] = to_string(query_kind);
    j["problem_text"] = problem_text;
    j["question_text"] = question_text;
    j["ground_question_text"] = ground_question_text;
    j["goal"] = goal.str();
    j["horizon"] = horizon.str();
    j["depth"] = depth;
    j["relevant_axioms"] = atoms_json(relevant_axioms);
    Json irr = Json::array();
    for (const auto& g : irrelevant_axioms) irr.push_back(atoms_json(g));
    j["irrelevant_axioms"] = irr;
    j["distractor_goals"] = atoms_json(distractor_goals);
    Json dt = Json::array();
    for (const auto& g : distractor_theorems) dt.push_back(atoms_json(g));
    j["distractor_theorems"] = dt;
    Json sp;
    sp["vertices"] = atoms_json(shortest_proof.labels);
    Json flags = Json::array();
    for (bool b : shortest_proof.is_axiom) flags.push_back(b);
    sp["axiom"] = flags;
    Json edges = Json::array();
    for (const auto& e : shortest_proof.edges) {
        Json ej;
        ej["tail"] = e.tail;
        ej["rule"] = e.rule;
        ej["head"] = e.head;
        edges.push_back(ej);
    }
    sp["hyperedges"] = edges;
    sp["goal"] = shortest_proof.goal;
    sp["annotation"] = annotation;
    j["shortest_proof"] = sp;
    j["presentation_order"] = atoms_json(presentation_order);
    j["axiom_sentences"] = axiom_sentences;
    Json pl = Json::object();
    for (const auto& [s, p] : plurals) pl[s] = p;
    j["plurals"] = pl;
    j["seed"] = seed;
    return j;
}

DatasetRecord DatasetRecord::from_json(const Json& j)
{
    DatasetRecord r;
    try {
        r.id = field<std::string>(j, "id");
        r.structural_mode = field<std::string>(j, "structural_mode");
        r.overlap_mode = opt_field<std::string>(j, "overlap_mode");
        r.is_control = field<bool>(j, "is_control");
        r.control_of = opt_field<std::string>(j, "control_of");
        r.query_kind = query_kind_from(field<std::string>(j, "query_kind"));
        r.problem_text = field<std::string>(j, "problem_text");
        r.question_text = field<std::string>(j, "question_text");
        r.ground_question_text = field<std::string>(j, "ground_question_text");
        r.goal = parse_atom(field<std::string>(j, "goal"), gsm_signature());
        r.horizon = Nat(field<std::string>(j, "horizon"));
        r.depth = field<int>(j, "depth");
        r.relevant_axioms = atoms_from(field<Json>(j, "relevant_axioms"));
        for (const auto& g : field<Json>(j, "irrelevant_axioms")) r.irrelevant_axioms.push_back(atoms_from(g));
        r.distractor_goals = atoms_from(field<Json>(j, "distractor_goals"));
        for (const auto& g : field<Json>(j, "distractor_theorems")) r.distractor_theorems.push_back(atoms_from(g));
        Json sp = field<Json>(j, "shortest_proof");
        auto labels = atoms_from(field<Json>(sp, "vertices"));
        auto flags = field<std::vector<bool>>(sp, "axiom");
        if (flags.size() != labels.size()) throw RecordError("proof axiom flags do not match vertices");
        for (std::size_t i = 0; i < labels.size(); ++i) r.shortest_proof.add_vertex(labels[i], flags[i]);
        if (r.shortest_proof.size() != labels.size()) throw RecordError("proof has repeated vertices");
        for (const auto& e : field<Json>(sp, "hyperedges")) {
            ProofEdge pe{field<std::vector<int>>(e, "tail"), field<std::string>(e, "rule"), field<int>(e, "head")};
            auto ok = [&](int v) { return v >= 0 && static_cast<std::size_t>(v) < labels.size(); };
            if (!ok(pe.head) || !std::all_of(pe.tail.begin(), pe.tail.end(), ok))
                throw RecordError("hyperedge vertex out of range");
            r.shortest_proof.edges.push_back(std::move(pe));
        }
        r.shortest_proof.goal = field<int>(sp, "goal");
        r.annotation = field<std::string>(sp, "annotation");
        r.presentation_order = atoms_from(field<Json>(j, "presentation_order"));
        r.axiom_sentences = field<std::vector<std::string>>(j, "axiom_sentences");
        Json pl = field<Json>(j, "plurals");
        for (const auto& [k, v] : pl.items()) r.plurals[k] = v.get<std::string>();
        r.seed = field<std::uint64_t>(j, "seed");
    } catch (const LogicError& e) {
        throw RecordError(std::string("bad dataset record: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw RecordError(std::string("bad dataset record: ") + e.what());
    }
    if (r.axiom_sentences.size() != r.presentation_order.size())
        throw RecordError("record " + r.id + ": axiom sentences do not line up with the presentation order");
    return r;
}

DatasetRecord make_record(const ProblemInstance& inst, const TemplateSet& ts, const Lexicon& lx,
                          const std::vector<Rule>& rules, QueryKind qk)
{
    DatasetRecord r;
    r.id = inst.id;
    r.structural_mode = to_string(inst.structural);
    if (inst.overlap) r.overlap_mode = to_string(*inst.overlap);
    r.is_control = inst.is_control;
    r.control_of = inst.control_of;
    r.query_kind = qk;
    r.goal = inst.goal;
    r.horizon = inst.horizon;
    r.depth = inst.depth;
    r.relevant_axioms = inst.relevant_axioms;
    for (const auto& d : inst.irrelevant) {
        r.irrelevant_axioms.push_back(d.axioms);
        r.distractor_goals.push_back(d.goal);
        r.distractor_theorems.push_back(d.proof.labels);
    }
    r.shortest_proof = inst.shortest_proof;
    r.presentation_order = inst.presentation_order;
    r.seed = inst.seed;

    std::set<std::string> ents;
    auto note = [&](const Atom& a) {
        for (const auto& t : a.args)
            if (!t.is_var() && t.sort() == Sort::Entity) ents.insert(t.entity_name());
    };
    for (const auto& a : inst.presentation_order) note(a);
    note(inst.goal);
    for (const auto& a : inst.shortest_proof.labels) note(a);
    for (const auto& e : ents) r.plurals[e] = lx.plural(e);

    // Template choice is seeded per record so that regenerating one id
    // never depends on its neighbours.
    Rng rng = make_rng(inst.seed, fnv1a(inst.id));
    ProblemText pt = verbalize_problem(inst, ts, r.plurals, rng);
    r.axiom_sentences = pt.sentences;
    r.question_text = pt.question;
    r.ground_question_text = pt.ground_question;
    r.problem_text = pt.text(qk);
    r.annotation = verbalize_proof(inst.shortest_proof, inst.presentation_order, pt.sentences, ts, r.plurals, rules);
    return r;
}

Json TranscriptRecord::to_json() const
{
    Json j;
    j["id"] = id;
    j["model"] = model;
    j["stage1"] = opt_json(stage1);
    j["stage2"] = opt_json(stage2);
    j["params"] = params;
    j["tokens"] = tokens;
    j["error"] = opt_json(error);
    return j;
}

TranscriptRecord TranscriptRecord::from_json(const Json& j)
{
    TranscriptRecord t;
    try {
        t.id = field<std::string>(j, "id");
        t.model = j.value("model", std::string());
        t.stage1 = opt_field<std::string>(j, "stage1");
        t.stage2 = opt_field<std::string>(j, "stage2");
        if (j.contains("params")) t.params = j["params"];
        if (j.contains("tokens")) t.tokens = j["tokens"];
        t.error = opt_field<std::string>(j, "error");
    } catch (const nlohmann::json::exception& e) {
        throw RecordError(std::string("bad transcript record: ") + e.what());
    }
    return t;
}

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict); }

std::vector<Json> read_jsonl(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw RecordError("cannot read " + path);
    std::vector<Json> out;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw RecordError(path + ":" + std::to_string(no) + ": " + e.what());
        }
    }
    return out;
}

void write_jsonl(const std::string& path, const std::vector<Json>& rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RecordError("cannot write " + path);
    for (const auto& r : rows) out << dump_line(r) << '\n';
    if (!out) throw RecordError("write failed: " + path);
}

std::vector<DatasetRecord> read_dataset(const std::string& path)
{
    std::vector<DatasetRecord> out;
    for (const auto& j : read_jsonl(path)) out.push_back(DatasetRecord::from_json(j));
    return out;
}

void write_dataset(const std::string& path, const std::vector<DatasetRecord>& recs)
{
    std::vector<Json> rows;
    for (const auto& r : recs) rows.push_back(r.to_json());
    write_jsonl(path, rows);
}

std::vector<TranscriptRecord> read_transcripts(const std::string& path)
{
    std::vector<TranscriptRecord> out;
    for (const auto& j : read_jsonl(path)) out.push_back(TranscriptRecord::from_json(j));
    return out;
}

GenerateConfig parse_generate_config(const Json& j, const std::string& base_dir)
{
    GenerateConfig c;
    auto path = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? p : (std::filesystem::path(base_dir) / fp).lexically_normal().string();
    };
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        static const std::set<std::string> known = {
            "lexicon", "templates", "depth_weights", "cardinality_weights", "distractor_depth_weights",
            "k_max", "qty_min", "qty_max", "retry_cap", "max_hyperedges", "verify", "modes", "n_base",
            "seed", "query_kind"};
        for (const auto& [k, v] : j.items())
            if (!known.count(k)) throw ConfigError("unknown config key: " + k);
        c.lexicon_path = path(j.value("lexicon", std::string("lexicon.txt")));
        c.templates_path = path(j.value("templates", std::string("templates.txt")));
        auto& g = c.gen;
        g.depth_weights = j.value("depth_weights", g.depth_weights);
        g.cardinality_weights = j.value("cardinality_weights", g.cardinality_weights);
        g.distractor_depth_weights = j.value("distractor_depth_weights", g.distractor_depth_weights);
        g.k_max = j.value("k_max", g.k_max);
        g.qty_min = j.value("qty_min", g.qty_min);
        g.qty_max = j.value("qty_max", g.qty_max);
        g.retry_cap = j.value("retry_cap", g.retry_cap);
        g.max_hyperedges = j.value("max_hyperedges", g.max_hyperedges);
        g.verify = j.value("verify", g.verify);
        g.n_base = j.value("n_base", g.n_base);
        g.seed = j.value("seed", g.seed);
        if (j.contains("modes")) {
            g.modes.clear();
            for (const auto& m : j["modes"]) g.modes.push_back(structural_from(m.get<std::string>()));
        }
        if (j.contains("query_kind")) c.query_kind = query_kind_from(j["query_kind"].get<std::string>());
        auto positive = [](const std::vector<double>& w) {
            double s = 0;
            for (double x : w) {
                if (x < 0) return false;
                s += x;
            }
            return s > 0;
        };
        if (!positive(g.depth_weights) || !positive(g.cardinality_weights) || !positive(g.distractor_depth_weights))
            throw ConfigError("weights must be non-negative with a positive sum");
        if (g.cardinality_weights.size() > 4) throw ConfigError("agent sets have at most four members");
        if (g.k_max < 2) throw ConfigError("k_max must be at least 2");
        if (g.qty_min < 1 || g.qty_max < g.qty_min) throw ConfigError("bad quantity range");
        if (g.n_base < 0) throw ConfigError("n_base must be non-negative");
        if (g.retry_cap < 1) throw ConfigError("retry_cap must be positive");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad generation config: ") + e.what());
    } catch (const LogicError& e) {
        throw ConfigError(std::string("bad generation config: ") + e.what());
    }
    c.gen.lexicon = Lexicon::load(c.lexicon_path);
    TemplateSet::load(c.templates_path);  // fail early on a bad path
    return c;
}

GenerateConfig load_generate_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    return parse_generate_config(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace vlp
