#pragma once

#include "vlp/records.hpp"
#include "vlp/verbal.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vlp {

struct RunConfig {
    std::string endpoint;  // full URL of a chat-completions route
    std::string model;
    std::string api_key_env;  // name of the variable holding the key; may be empty
    double temperature = 1.0;
    int max_tokens = 4000;
    std::optional<double> top_p;
    int concurrency = 4;
    int max_retries = 4;
    int backoff_ms = 500;
    int timeout_s = 300;
    std::optional<QueryKind> query_kind;  // overrides the dataset's
    std::string prompt_config;           // path; resolved against the run config

    Json params() const;  // decoding parameters as recorded in transcripts
    static RunConfig load(const std::string& path);
    static RunConfig parse(const Json& j, const std::string& base_dir);
};

struct ChatMessage {
    std::string role;
    std::string content;
};

struct Completion {
    std::string text;
    Json usage = Json::object();
};

// Transient failures are retried; permanent ones (auth, bad request) are not.
struct ChatError : std::runtime_error {
    ChatError(const std::string& what, bool retryable) : std::runtime_error(what), retryable(retryable) {}
    bool retryable;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual Completion complete(const std::vector<ChatMessage>& messages, const RunConfig& cfg) = 0;
};

// OpenAI-style JSON chat completions over HTTP or HTTPS.
class HttpChatClient : public ChatClient {
public:
    // Reads the key from the environment once; it is kept only in memory.
    explicit HttpChatClient(const RunConfig& cfg);
    Completion complete(const std::vector<ChatMessage>& messages, const RunConfig& cfg) override;

private:
    std::string base_;
    std::string path_;
    std::string key_;
};

Json chat_request_body(const std::vector<ChatMessage>& messages, const RunConfig& cfg);

// Both stages for one record, with retries.
TranscriptRecord run_one(const DatasetRecord& rec, const Prompts& prompts, ChatClient& client, const RunConfig& cfg);

struct RunSummary {
    std::size_t total = 0;
    std::size_t reused = 0;   // already complete in the output file
    std::size_t fresh = 0;
    std::size_t failed = 0;   // error entries left after retries
};

// Resumes from `out_path` when it exists: complete records are kept and only
// missing or failed ids are sent. Output follows dataset order.
RunSummary run_dataset(const std::vector<DatasetRecord>& recs, const PromptConfig& pc, ChatClient& client,
                       const RunConfig& cfg, const std::string& out_path);

}  // namespace vlp
