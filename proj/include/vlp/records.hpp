#pragma once

#include "vlp/generator.hpp"
#include "vlp/verbal.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vlp {

using Json = nlohmann::ordered_json;

struct RecordError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetRecord {
    std::string id;
    std::string structural_mode = "base";
    std::optional<std::string> overlap_mode;
    bool is_control = false;
    std::optional<std::string> control_of;
    QueryKind query_kind = QueryKind::NonGround;
    std::string problem_text;  // body plus the question for query_kind
    std::string question_text;
    std::string ground_question_text;
    Atom goal;
    Nat horizon = 0;
    int depth = 0;
    std::vector<Atom> relevant_axioms;
    std::vector<std::vector<Atom>> irrelevant_axioms;  // one group per distractor
    std::vector<Atom> distractor_goals;
    std::vector<std::vector<Atom>> distractor_theorems;  // vertices of each sampled distractor proof
    ProofForest shortest_proof;
    std::string annotation;
    std::vector<Atom> presentation_order;
    std::vector<std::string> axiom_sentences;  // aligned with presentation_order
    Nouns plurals;                             // every entity the record mentions
    std::uint64_t seed = 0;

    std::vector<Atom> all_axioms() const;
    std::vector<Atom> flat_irrelevant() const;
    const Nat& goal_quantity() const;

    Json to_json() const;
    static DatasetRecord from_json(const Json& j);
};

DatasetRecord make_record(const ProblemInstance& inst, const TemplateSet& ts, const Lexicon& lx,
                          const std::vector<Rule>& rules, QueryKind qk = QueryKind::NonGround);

struct TranscriptRecord {
    std::string id;
    std::string model;
    std::optional<std::string> stage1;
    std::optional<std::string> stage2;
    Json params = Json::object();
    Json tokens = Json::object();
    std::optional<std::string> error;

    bool complete() const { return stage1 && stage2 && !error; }
    Json to_json() const;
    static TranscriptRecord from_json(const Json& j);
};

// One compact object per line, fields in a fixed order.
std::string dump_line(const Json& j);
std::vector<Json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Json>& rows);

std::vector<DatasetRecord> read_dataset(const std::string& path);
void write_dataset(const std::string& path, const std::vector<DatasetRecord>& recs);
std::vector<TranscriptRecord> read_transcripts(const std::string& path);

// Generation config file (JSON). Relative paths resolve against the
// config's directory.
struct GenerateConfig {
    GenConfig gen;
    std::string lexicon_path;
    std::string templates_path;
    QueryKind query_kind = QueryKind::NonGround;
};
GenerateConfig load_generate_config(const std::string& path);
GenerateConfig parse_generate_config(const Json& j, const std::string& base_dir);

}  // namespace vlp
