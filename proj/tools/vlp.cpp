#include "vlp/client.hpp"
#include "vlp/eval.hpp"
#include "vlp/records.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

using namespace vlp;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kMismatch = 3;
constexpr int kNetwork = 4;

int cmd_generate(const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> n_base,
                 const std::string& out)
{
    GenerateConfig gc = load_generate_config(config);
    if (seed) gc.gen.seed = *seed;
    if (n_base) gc.gen.n_base = *n_base;
    TemplateSet ts = TemplateSet::load(gc.templates_path);
    auto rs = build_gsm_rules(gc.gen.k_max);
    DatasetStats st;
    auto insts = generate_dataset(gc.gen, &st);
    std::vector<DatasetRecord> recs;
    recs.reserve(insts.size());
    for (const auto& in : insts) recs.push_back(make_record(in, ts, gc.gen.lexicon, rs.rules, gc.query_kind));
    write_dataset(out, recs);

    std::map<std::string, std::size_t> counts;
    for (const auto& r : recs) counts[stratum_of(r)]++;
    std::cout << "wrote " << recs.size() << " records to " << out << "\n";
    for (const auto& [k, v] : counts) std::cout << "  " << k << ": " << v << "\n";
    std::cout << "rejected base samples: " << st.base_rejections << ", rejected variants: " << st.variant_rejections
              << "\n";
    return kOk;
}

int cmd_run(const std::string& dataset, const std::string& run_config, const std::string& out)
{
    RunConfig rc = RunConfig::load(run_config);
    PromptConfig pc = PromptConfig::load(rc.prompt_config);
    auto recs = read_dataset(dataset);
    HttpChatClient client(rc);
    RunSummary s = run_dataset(recs, pc, client, rc, out);
    std::cout << "records: " << s.total << ", reused: " << s.reused << ", sent: " << s.fresh
              << ", failed: " << s.failed << "\n";
    return s.failed ? kNetwork : kOk;
}

int cmd_score(const std::string& dataset, const std::string& transcripts, const std::string& outdir,
              const std::string& templates, bool arithmetic_only)
{
    TemplateSet ts = TemplateSet::load(templates);
    auto recs = read_dataset(dataset);
    auto trs = read_transcripts(transcripts);
    ScoreOptions so;
    so.arithmetic_only = arithmetic_only;
    ScoreOutput out = score_dataset(recs, trs, ts, so);
    if (!out.unknown_ids.empty()) {
        std::cerr << "transcripts reference ids missing from the dataset:";
        for (const auto& id : out.unknown_ids) std::cerr << " " << id;
        std::cerr << "\n";
        return kMismatch;
    }
    std::filesystem::create_directories(outdir);
    std::filesystem::path dir(outdir);
    write_jsonl((dir / "per_problem.jsonl").string(), out.per_problem);
    std::ofstream((dir / "summary.json").string()) << out.summary.dump(2) << "\n";
    std::ofstream((dir / "tables.txt").string()) << out.tables;
    std::cout << out.tables;
    return kOk;
}

int cmd_stats(const std::string& dataset)
{
    auto recs = read_dataset(dataset);
    std::map<std::size_t, std::size_t> edges;  // base problems
    std::map<std::string, std::map<std::size_t, std::size_t>> axioms;
    std::map<std::string, std::size_t> cells;
    for (const auto& r : recs) {
        if (r.structural_mode == "base") edges[r.shortest_proof.edges.size()]++;
        std::string key = r.is_control ? r.structural_mode + "/control" : r.structural_mode;
        axioms[key][r.presentation_order.size()]++;
        cells[stratum_of(r)]++;
    }
    Json j;
    j["records"] = recs.size();
    Json e = Json::object();
    for (auto [k, v] : edges) e[std::to_string(k)] = v;
    j["base_hyperedges"] = e;
    if (!edges.empty()) {
        j["base_hyperedges_min"] = edges.begin()->first;
        j["base_hyperedges_max"] = edges.rbegin()->first;
    }
    Json a = Json::object();
    for (const auto& [m, h] : axioms) {
        Json hh = Json::object();
        for (auto [k, v] : h) hh[std::to_string(k)] = v;
        a[m] = hh;
    }
    j["axiom_counts"] = a;
    Json c = Json::object();
    for (const auto& [k, v] : cells) c[k] = v;
    j["cells"] = c;
    std::cout << j.dump(2) << "\n";
    return kOk;
}

std::string default_data(const char* file)
{
#ifdef VLP_DATA_DIR
    return (std::filesystem::path(VLP_DATA_DIR) / file).string();
#else
    return (std::filesystem::path("data") / file).string();
#endif
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Verbalized logic programs: generate, run, score"};
    app.require_subcommand(1);

    std::string config, out, dataset, run_config, transcripts, templates = default_data("templates.txt");
    std::optional<std::uint64_t> seed;
    std::optional<int> n_base;
    bool arithmetic_only = false;

    auto* gen = app.add_subcommand("generate", "sample a dataset");
    gen->add_option("--config", config, "generation config (JSON)")->required();
    gen->add_option("--seed", seed, "overrides the config seed");
    gen->add_option("--n-base", n_base, "overrides the number of base problems");
    gen->add_option("--out", out, "output JSONL")->required();

    auto* run = app.add_subcommand("run", "collect two-stage completions from a chat endpoint");
    run->add_option("--dataset", dataset)->required();
    run->add_option("--run-config", run_config)->required();
    run->add_option("--out", out, "transcript JSONL; resumed when present")->required();

    auto* score = app.add_subcommand("score", "score transcripts against a dataset");
    score->add_option("--dataset", dataset)->required();
    score->add_option("--transcripts", transcripts)->required();
    score->add_option("--out", out, "report directory")->required();
    score->add_option("--templates", templates, "template file used for parsing");
    score->add_flag("--arithmetic-only", arithmetic_only, "match theorems through arithmetic expressions only");

    auto* stats = app.add_subcommand("stats", "dataset statistics");
    stats->add_option("--dataset", dataset)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kConfig;
    }

    try {
        if (*gen) return cmd_generate(config, seed, n_base, out);
        if (*run) return cmd_run(dataset, run_config, out);
        if (*score) return cmd_score(dataset, transcripts, out, templates, arithmetic_only);
        if (*stats) return cmd_stats(dataset);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const RecordError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kMismatch;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
