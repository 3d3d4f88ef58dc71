#include "fsel/transport.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fsel/error.hpp"

namespace fsel {

namespace {

void fnv1a(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;  // field separator
    h *= 0x100000001b3ULL;
}

}  // namespace

std::string prompt_hash(const std::string& system, const std::string& user,
                        const std::string& model_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    fnv1a(h, system);
    fnv1a(h, user);
    fnv1a(h, model_id);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

HttpCompletionClient::HttpCompletionClient(HttpTransportConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw ConfigError("transport: base_url is required");
    if (cfg_.model.empty()) throw ConfigError("transport: model id is required");
}

CompletionResponse HttpCompletionClient::complete(const CompletionRequest& req) {
    nlohmann::json body{
        {"model", cfg_.model},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", req.system}},
                                {{"role", "user"}, {"content", req.user}}})},
    };

    httplib::Client cli(cfg_.base_url);
    cli.set_read_timeout(cfg_.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
        }
        auto res = cli.Post(cfg_.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "connection error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            if (res->status >= 400 && res->status < 500 && res->status != 429) break;
            continue;
        }
        try {
            auto j = nlohmann::json::parse(res->body);
            CompletionResponse out;
            out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            auto reason = j.at("choices").at(0).value("finish_reason", std::string("stop"));
            out.finished = reason == "stop";
            if (out.text.empty()) throw TransportError("empty completion text");
            return out;
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed completion response: ") + e.what();
        }
    }
    throw TransportError("completion request failed: " + last_error);
}

ReplayClient::ReplayClient(const std::string& transcript_path, std::string model_id)
    : model_id_(std::move(model_id)) {
    std::ifstream in(transcript_path);
    if (!in) throw ConfigError("cannot open transcript: " + transcript_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            responses_[j.at("hash").get<std::string>()] =
                j.at("response_text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("transcript " + transcript_path + " line " + std::to_string(lineno) +
                              ": " + e.what());
        }
    }
}

CompletionResponse ReplayClient::complete(const CompletionRequest& req) {
    auto h = prompt_hash(req.system, req.user, model_id_);
    auto it = responses_.find(h);
    if (it == responses_.end()) {
        throw TransportError("replay miss: no transcript record for hash " + h);
    }
    return {it->second, true};
}

RecordingClient::RecordingClient(std::shared_ptr<CompletionClient> inner,
                                 std::string transcript_path)
    : inner_(std::move(inner)), path_(std::move(transcript_path)) {}

CompletionResponse RecordingClient::complete(const CompletionRequest& req) {
    auto res = inner_->complete(req);
    nlohmann::json j{{"hash", prompt_hash(req.system, req.user, inner_->model_id())},
                     {"model_id", inner_->model_id()},
                     {"system", req.system},
                     {"user", req.user},
                     {"response_text", res.text}};
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw TransportError("cannot append to transcript: " + path_);
    out << j.dump() << "\n";
    return res;
}

}  // namespace fsel
