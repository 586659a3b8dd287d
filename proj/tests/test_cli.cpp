#include "doctest.h"

#include "vlp/client.hpp"
#include "vlp/records.hpp"

#include "httplib.h"

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

using namespace vlp;
namespace fs = std::filesystem;

namespace {

const std::string kRoot = VLP_SOURCE_DIR;
const std::string kFix = kRoot + "/tests/fixtures";

struct TempDir {
    fs::path path;
    TempDir()
    {
        static std::atomic<int> n{0};
        path = fs::temp_directory_path() / ("vlp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out;
};

Run cli(const std::string& args, const std::string& env = "")
{
    TempDir d;
    std::string cmd = env + " '" + std::string(VLP_CLI_PATH) + "' " + args + " > '" + (d / "out") + "' 2>&1";
    int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(d / "out")};
}

std::size_t lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Minimal chat endpoint: a one-line proof for stage one, a number for
// stage two.
class StubServer {
public:
    explicit StubServer(bool fail = false)
    {
        srv_.Post("/v1/chat/completions", [this, fail](const httplib::Request& req, httplib::Response& res) {
            auto body = nlohmann::json::parse(req.body);
            {
                std::lock_guard<std::mutex> lk(mu_);
                bodies_.push_back(body);
                auth_.push_back(req.get_header_value("Authorization"));
            }
            if (fail) {
                res.status = 400;
                res.set_content(R"({"error":"bad request"})", "application/json");
                return;
            }
            bool second = body["messages"].size() == 3;
            nlohmann::json out = {{"choices", {{{"message", {{"role", "assistant"},
                                                             {"content", second ? " 7." : "\n1. Ann has 7 pens."}}}}}},
                                  {"usage", {{"prompt_tokens", 10}, {"completion_tokens", 3}}}};
            res.set_content(out.dump(), "application/json");
        });
        port_ = srv_.bind_to_any_port("127.0.0.1");
        th_ = std::thread([this] { srv_.listen_after_bind(); });
        srv_.wait_until_ready();
    }
    ~StubServer()
    {
        srv_.stop();
        th_.join();
    }
    int port() const { return port_; }
    std::vector<nlohmann::json> bodies()
    {
        std::lock_guard<std::mutex> lk(mu_);
        return bodies_;
    }
    std::vector<std::string> auth()
    {
        std::lock_guard<std::mutex> lk(mu_);
        return auth_;
    }

private:
    httplib::Server srv_;
    std::thread th_;
    int port_ = 0;
    std::mutex mu_;
    std::vector<nlohmann::json> bodies_;
    std::vector<std::string> auth_;
};

std::string write_run_config(const TempDir& d, int port, int retries = 0)
{
    Json rc = {{"endpoint", "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"},
               {"model", "stub"},
               {"api_key_env", "VLP_TEST_KEY"},
               {"max_retries", retries},
               {"backoff_ms", 1},
               {"concurrency", 2},
               {"prompt_config", kRoot + "/data/prompt.json"}};
    std::ofstream(d / "run.json") << rc.dump(2);
    return d / "run.json";
}

std::string small_dataset(const TempDir& d, std::size_t n)
{
    auto recs = read_dataset(kFix + "/golden_dataset.jsonl");
    recs.resize(n);
    write_dataset(d / "ds.jsonl", recs);
    return d / "ds.jsonl";
}

const char* kKey = "sk-test-do-not-leak-31337";

}  // namespace

TEST_CASE("generate reproduces the golden dataset byte for byte")
{
    TempDir d;
    auto a = cli("generate --config '" + kFix + "/golden_config.json' --out '" + (d / "a.jsonl") + "'");
    REQUIRE(a.code == 0);
    CHECK(a.out.find("wrote 64 records") != std::string::npos);
    auto b = cli("generate --config '" + kFix + "/golden_config.json' --out '" + (d / "b.jsonl") + "'");
    REQUIRE(b.code == 0);
    CHECK(slurp(d / "a.jsonl") == slurp(d / "b.jsonl"));
    CHECK(slurp(d / "a.jsonl") == slurp(kFix + "/golden_dataset.jsonl"));
    auto c = cli("generate --config '" + kFix + "/golden_config.json' --seed 8 --n-base 1 --out '" + (d / "c.jsonl") +
                 "'");
    REQUIRE(c.code == 0);
    CHECK(lines(slurp(d / "c.jsonl")) == 16);
}

TEST_CASE("configuration errors exit with code 2")
{
    TempDir d;
    std::ofstream(d / "bad.json") << R"({"lexicon": "missing.txt", "templates": "missing.txt", "n_base": 1})";
    CHECK(cli("generate --config '" + (d / "bad.json") + "' --out '" + (d / "x.jsonl") + "'").code == 2);
    std::ofstream(d / "typo.json") << R"({"n_bse": 1})";
    CHECK(cli("generate --config '" + (d / "typo.json") + "' --out '" + (d / "x.jsonl") + "'").code == 2);
    CHECK(cli("generate").code == 2);
    CHECK(cli("frobnicate").code == 2);
    std::ofstream(d / "key.json") << R"({"endpoint": "http://x/y", "model": "m", "api_key": "inline"})";
    CHECK(cli("run --dataset '" + kFix + "/d3_problem.jsonl' --run-config '" + (d / "key.json") + "' --out '" +
              (d / "t.jsonl") + "'")
              .code == 2);
}

TEST_CASE("scoring the golden transcripts")
{
    TempDir d;
    auto r = cli("score --dataset '" + kFix + "/golden_dataset.jsonl' --transcripts '" + kFix +
                 "/golden_transcripts.jsonl' --out '" + (d / "rep") + "'");
    REQUIRE(r.code == 0);
    auto summary = Json::parse(slurp(d / "rep/summary.json"));
    CHECK(summary["accuracy"] == 1.0);
    auto rows = read_jsonl(d / "rep/per_problem.jsonl");
    REQUIRE(rows.size() == 64);
    for (const auto& row : rows) {
        CHECK(row["correct"] == true);
        CHECK(row["proof"]["efficiency"] == 1.0);
        CHECK(row["proof"]["exact_match"] == true);
    }
    CHECK(!slurp(d / "rep/tables.txt").empty());
}

TEST_CASE("scoring the worked example")
{
    TempDir d;
    auto r = cli("score --dataset '" + kFix + "/d3_problem.jsonl' --transcripts '" + kFix +
                 "/d3_transcript.jsonl' --out '" + (d / "rep") + "'");
    REQUIRE(r.code == 0);
    auto rows = read_jsonl(d / "rep/per_problem.jsonl");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["extracted"] == "26");
    CHECK(rows[0]["proof"]["shortest"] == 10);
    CHECK(rows[0]["proof"]["efficiency"].get<double>() < 1.0);
    auto ar = cli("score --arithmetic-only --dataset '" + kFix + "/d3_problem.jsonl' --transcripts '" + kFix +
                  "/d3_transcript.jsonl' --out '" + (d / "ar") + "'");
    REQUIRE(ar.code == 0);
    CHECK(read_jsonl(d / "ar/per_problem.jsonl")[0]["arithmetic_expressions"] == 7);
}

TEST_CASE("unknown transcript ids exit with code 3")
{
    TempDir d;
    auto t = read_transcripts(kFix + "/d3_transcript.jsonl");
    t[0].id = "ghost";
    write_jsonl(d / "t.jsonl", {t[0].to_json()});
    auto r = cli("score --dataset '" + kFix + "/d3_problem.jsonl' --transcripts '" + (d / "t.jsonl") + "' --out '" +
                 (d / "rep") + "'");
    CHECK(r.code == 3);
    CHECK(r.out.find("ghost") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "rep/summary.json"));
    std::ofstream(d / "broken.jsonl") << "{\"id\": 1}\n";
    CHECK(cli("stats --dataset '" + (d / "broken.jsonl") + "'").code == 3);
}

TEST_CASE("stats")
{
    auto r = cli("stats --dataset '" + kFix + "/golden_dataset.jsonl'");
    REQUIRE(r.code == 0);
    auto j = Json::parse(r.out);
    CHECK(j["records"] == 64);
    CHECK(j["base_hyperedges_min"].get<int>() >= 1);
    CHECK(j["base_hyperedges_max"].get<int>() <= 13);
    CHECK(j["cells"]["base"] == 4);
    CHECK(j["cells"]["with_tree/control"] == 4);
}

TEST_CASE("records round-trip exactly")
{
    for (const char* f : {"golden_dataset.jsonl", "d3_problem.jsonl"}) {
        std::string text = slurp(kFix + "/" + f);
        std::string again;
        for (const auto& r : read_dataset(kFix + "/" + f)) again += dump_line(r.to_json()) + "\n";
        CHECK(again == text);
    }
    std::string text = slurp(kFix + "/golden_transcripts.jsonl");
    std::string again;
    for (const auto& t : read_transcripts(kFix + "/golden_transcripts.jsonl")) again += dump_line(t.to_json()) + "\n";
    CHECK(again == text);
}

TEST_CASE("run against a stub endpoint")
{
    TempDir d;
    StubServer srv;
    std::string rc = write_run_config(d, srv.port());
    std::string ds = small_dataset(d, 4);
    std::string env = std::string("VLP_TEST_KEY=") + kKey;
    auto r = cli("run --dataset '" + ds + "' --run-config '" + rc + "' --out '" + (d / "t.jsonl") + "'", env);
    REQUIRE(r.code == 0);
    auto ts = read_transcripts(d / "t.jsonl");
    REQUIRE(ts.size() == 4);
    auto recs = read_dataset(ds);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CHECK(ts[i].id == recs[i].id);
        CHECK(ts[i].complete());
        CHECK(*ts[i].stage2 == " 7.");
        CHECK(ts[i].model == "stub");
    }
    auto bodies = srv.bodies();
    CHECK(bodies.size() == 8);
    for (const auto& b : bodies) {
        CHECK(b["max_tokens"] == 4000);
        CHECK(b["temperature"] == 1.0);
        CHECK(b["model"] == "stub");
        if (b["messages"].size() == 3) {
            CHECK(b["messages"][1]["role"] == "assistant");
            CHECK(b["messages"][2]["content"].get<std::string>().find("Therefore, the answer (arabic numerals) is") !=
                  std::string::npos);
        } else {
            CHECK(b["messages"][0]["content"].get<std::string>().ends_with("A: Let's think step by step."));
        }
    }
    for (const auto& a : srv.auth()) CHECK(a == std::string("Bearer ") + kKey);
    CHECK(slurp(d / "t.jsonl").find(kKey) == std::string::npos);
    CHECK(r.out.find(kKey) == std::string::npos);

    // Resume: drop the last two lines and rerun; only those are requested again.
    std::vector<Json> keep;
    for (std::size_t i = 0; i < 2; ++i) keep.push_back(ts[i].to_json());
    write_jsonl(d / "t.jsonl", keep);
    auto again = cli("run --dataset '" + ds + "' --run-config '" + rc + "' --out '" + (d / "t.jsonl") + "'", env);
    REQUIRE(again.code == 0);
    CHECK(srv.bodies().size() == 12);
    auto ts2 = read_transcripts(d / "t.jsonl");
    REQUIRE(ts2.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(ts2[i].id == recs[i].id);
    auto third = cli("run --dataset '" + ds + "' --run-config '" + rc + "' --out '" + (d / "t.jsonl") + "'", env);
    CHECK(third.code == 0);
    CHECK(srv.bodies().size() == 12);
    CHECK(lines(slurp(d / "t.jsonl")) == 4);
}

TEST_CASE("failed requests are recorded and exit with code 4")
{
    TempDir d;
    StubServer srv(true);
    std::string rc = write_run_config(d, srv.port(), 2);
    std::string ds = small_dataset(d, 2);
    auto r = cli("run --dataset '" + ds + "' --run-config '" + rc + "' --out '" + (d / "t.jsonl") + "'",
                 std::string("VLP_TEST_KEY=") + kKey);
    CHECK(r.code == 4);
    auto ts = read_transcripts(d / "t.jsonl");
    REQUIRE(ts.size() == 2);
    for (const auto& t : ts) {
        CHECK_FALSE(t.complete());
        CHECK(t.error);
    }
    // 400 is not retried.
    CHECK(srv.bodies().size() == 2);
    CHECK(slurp(d / "t.jsonl").find(kKey) == std::string::npos);
}

TEST_CASE("run config parsing")
{
    TempDir d;
    CHECK_THROWS_AS(RunConfig::parse(Json{{"endpoint", "not a url"}, {"model", "m"}}, d.path.string()), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse(Json{{"endpoint", "http://h/x"}, {"model", "m"}, {"api_key", "k"}}, "."),
                    ConfigError);
    auto rc = RunConfig::parse(Json{{"endpoint", "http://h/x"}, {"model", "m"}}, ".");
    CHECK(rc.max_tokens == 4000);
    CHECK(rc.temperature == 1.0);
    CHECK(rc.concurrency == 4);
    auto body = chat_request_body({{"user", "hi"}}, rc);
    CHECK(body["messages"][0]["content"] == "hi");
    CHECK_FALSE(body.contains("top_p"));
}
