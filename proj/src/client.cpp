#include "vlp/client.hpp"

#include "vlp/gsm.hpp"

#include "httplib.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

namespace vlp {

Json RunConfig::params() const
{
    Json p;
    p["temperature"] = temperature;
    p["max_tokens"] = max_tokens;
    if (top_p) p["top_p"] = *top_p;
    return p;
}

RunConfig RunConfig::parse(const Json& j, const std::string& base_dir)
{
    RunConfig c;
    try {
        if (!j.is_object()) throw ConfigError("run config must be a JSON object");
        c.endpoint = j.at("endpoint").get<std::string>();
        c.model = j.at("model").get<std::string>();
        c.api_key_env = j.value("api_key_env", std::string());
        c.temperature = j.value("temperature", c.temperature);
        c.max_tokens = j.value("max_tokens", c.max_tokens);
        if (j.contains("top_p") && !j["top_p"].is_null()) c.top_p = j["top_p"].get<double>();
        c.concurrency = j.value("concurrency", c.concurrency);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
        c.timeout_s = j.value("timeout_s", c.timeout_s);
        if (j.contains("query_kind")) c.query_kind = query_kind_from(j["query_kind"].get<std::string>());
        std::string pc = j.value("prompt_config", std::string("prompt.json"));
        std::filesystem::path fp(pc);
        c.prompt_config = fp.is_absolute() ? pc : (std::filesystem::path(base_dir) / fp).lexically_normal().string();
        if (j.contains("api_key")) throw ConfigError("put the credential in an environment variable, not the run config");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad run config: ") + e.what());
    } catch (const LogicError& e) {
        throw ConfigError(std::string("bad run config: ") + e.what());
    }
    if (c.concurrency < 1) throw ConfigError("concurrency must be at least 1");
    if (c.max_tokens < 1) throw ConfigError("max_tokens must be positive");
    if (c.max_retries < 0 || c.backoff_ms < 0 || c.timeout_s < 1) throw ConfigError("bad retry settings");
    static const std::regex url(R"(^https?://[^/\s]+(/\S*)?$)");
    if (!std::regex_match(c.endpoint, url)) throw ConfigError("endpoint must be an http(s) URL: " + c.endpoint);
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read run config: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("run config is not valid JSON: " + std::string(e.what()));
    }
    return parse(j, std::filesystem::path(path).parent_path().string());
}

Json chat_request_body(const std::vector<ChatMessage>& messages, const RunConfig& cfg)
{
    Json body;
    body["model"] = cfg.model;
    Json ms = Json::array();
    for (const auto& m : messages) ms.push_back(Json{{"role", m.role}, {"content", m.content}});
    body["messages"] = ms;
    Json params = cfg.params();
    for (const auto& [k, v] : params.items()) body[k] = v;
    return body;
}

HttpChatClient::HttpChatClient(const RunConfig& cfg)
{
    static const std::regex url(R"(^(https?://[^/\s]+)(/\S*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg.endpoint, m, url)) throw ConfigError("endpoint must be an http(s) URL");
    base_ = m[1].str();
    path_ = m[2].matched && !m[2].str().empty() ? m[2].str() : "/v1/chat/completions";
    if (!cfg.api_key_env.empty()) {
        const char* v = std::getenv(cfg.api_key_env.c_str());
        if (!v || !*v) throw ConfigError("environment variable " + cfg.api_key_env + " is not set");
        key_ = v;
    }
}

Completion HttpChatClient::complete(const std::vector<ChatMessage>& messages, const RunConfig& cfg)
{
    httplib::Client cli(base_);
    cli.set_connection_timeout(cfg.timeout_s, 0);
    cli.set_read_timeout(cfg.timeout_s, 0);
    cli.set_write_timeout(cfg.timeout_s, 0);
    httplib::Headers h;
    if (!key_.empty()) h.emplace("Authorization", "Bearer " + key_);
    auto res = cli.Post(path_, h, chat_request_body(messages, cfg).dump(), "application/json");
    if (!res) throw ChatError("request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
        throw ChatError("server returned HTTP " + std::to_string(res->status), true);
    if (res->status != 200) throw ChatError("server returned HTTP " + std::to_string(res->status), false);
    Completion c;
    try {
        Json j = Json::parse(res->body);
        const auto& choice = j.at("choices").at(0);
        if (choice.contains("message"))
            c.text = choice.at("message").at("content").get<std::string>();
        else
            c.text = choice.at("text").get<std::string>();
        if (j.contains("usage") && j["usage"].is_object()) c.usage = j["usage"];
    } catch (const nlohmann::json::exception& e) {
        throw ChatError(std::string("unexpected response body: ") + e.what(), true);
    }
    return c;
}

namespace {

Completion with_retries(ChatClient& client, const std::vector<ChatMessage>& ms, const RunConfig& cfg)
{
    for (int attempt = 0;; ++attempt) {
        try {
            return client.complete(ms, cfg);
        } catch (const ChatError& e) {
            if (!e.retryable || attempt >= cfg.max_retries) throw;
        }
        long long wait = static_cast<long long>(cfg.backoff_ms) << std::min(attempt, 16);
        std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    }
}

}  // namespace

TranscriptRecord run_one(const DatasetRecord& rec, const Prompts& prompts, ChatClient& client, const RunConfig& cfg)
{
    TranscriptRecord t;
    t.id = rec.id;
    t.model = cfg.model;
    t.params = cfg.params();
    try {
        std::vector<ChatMessage> ms = {{"user", prompts.first}};
        Completion c1 = with_retries(client, ms, cfg);
        t.stage1 = c1.text;
        t.tokens["stage1"] = c1.usage;
        ms.push_back({"assistant", c1.text});
        ms.push_back({"user", prompts.suffix});
        Completion c2 = with_retries(client, ms, cfg);
        t.stage2 = c2.text;
        t.tokens["stage2"] = c2.usage;
    } catch (const ChatError& e) {
        t.error = e.what();
    }
    return t;
}

RunSummary run_dataset(const std::vector<DatasetRecord>& recs, const PromptConfig& pc, ChatClient& client,
                       const RunConfig& cfg, const std::string& out_path)
{
    RunSummary s;
    s.total = recs.size();
    std::map<std::string, TranscriptRecord> done;
    if (std::filesystem::exists(out_path)) {
        std::map<std::string, bool> ids;
        for (const auto& r : recs) ids[r.id] = true;
        for (auto& t : read_transcripts(out_path))
            if (t.complete() && ids.count(t.id)) done.insert_or_assign(t.id, t);
    }
    std::vector<std::optional<TranscriptRecord>> slots(recs.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        auto it = done.find(recs[i].id);
        if (it != done.end()) {
            slots[i] = it->second;
            ++s.reused;
        } else {
            todo.push_back(i);
        }
    }

    // Rewrite what we keep, then append fresh records as soon as every
    // earlier slot is filled, so an interrupted file stays in order.
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw RecordError("cannot write " + out_path);
    std::size_t flushed = 0;
    std::mutex mu;
    auto flush = [&] {
        while (flushed < slots.size() && slots[flushed]) {
            out << dump_line(slots[flushed]->to_json()) << '\n';
            ++flushed;
        }
        out.flush();
    };
    flush();

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t k = next++;
            if (k >= todo.size()) return;
            const auto& rec = recs[todo[k]];
            QueryKind qk = cfg.query_kind.value_or(rec.query_kind);
            std::string problem = rec.problem_text;
            if (qk != rec.query_kind) {
                std::string body;
                for (const auto& x : rec.axiom_sentences) body += (body.empty() ? "" : " ") + x;
                problem = body + " " + (qk == QueryKind::Ground ? rec.ground_question_text : rec.question_text);
            }
            TranscriptRecord t = run_one(rec, build_prompts(pc, problem), client, cfg);
            std::lock_guard<std::mutex> lk(mu);
            slots[todo[k]] = std::move(t);
            flush();
        }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(cfg.concurrency, static_cast<int>(std::max<std::size_t>(todo.size(), 1)));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    flush();
    for (std::size_t i : todo) {
        ++s.fresh;
        if (!slots[i]->complete()) ++s.failed;
    }
    return s;
}

}  // namespace vlp
