#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace fsel {

struct CompletionRequest {
    std::string system;
    std::string user;
    double temperature = 0.0;
    int max_tokens = 1024;
};

struct CompletionResponse {
    std::string text;
    bool finished = true;
};

class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;  // throws TransportError
    virtual std::string model_id() const = 0;
};

// Content hash keying transcript records: FNV-1a 64 over (system, user, model_id).
std::string prompt_hash(const std::string& system, const std::string& user,
                        const std::string& model_id);

struct HttpTransportConfig {
    std::string base_url;          // e.g. http://localhost:8080
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "FSEL_API_KEY";  // credential read from this env var
    int timeout_seconds = 120;
    int max_retries = 3;
};

// Chat-completion wire shape: {model, temperature, max_tokens,
// messages:[{role:system},{role:user}]} -> choices[0].message.content.
class HttpCompletionClient : public CompletionClient {
public:
    explicit HttpCompletionClient(HttpTransportConfig cfg);
    CompletionResponse complete(const CompletionRequest& req) override;
    std::string model_id() const override { return cfg_.model; }

private:
    HttpTransportConfig cfg_;
};

// Replays persisted transcripts; a request whose hash is absent throws.
// Record file: one JSON object per line,
// {hash, model_id, system, user, response_text}.
class ReplayClient : public CompletionClient {
public:
    ReplayClient(const std::string& transcript_path, std::string model_id);
    CompletionResponse complete(const CompletionRequest& req) override;
    std::string model_id() const override { return model_id_; }

private:
    std::map<std::string, std::string> responses_;  // hash -> text
    std::string model_id_;
};

// Delegates to an inner client and appends each exchange to a transcript.
class RecordingClient : public CompletionClient {
public:
    RecordingClient(std::shared_ptr<CompletionClient> inner, std::string transcript_path);
    CompletionResponse complete(const CompletionRequest& req) override;
    std::string model_id() const override { return inner_->model_id(); }

private:
    std::shared_ptr<CompletionClient> inner_;
    std::string path_;
    std::mutex mu_;
};

}  // namespace fsel
