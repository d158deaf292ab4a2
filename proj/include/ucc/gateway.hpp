#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ucc/detail/jsonio.hpp"

namespace ucc {

enum class GatewayMode {
    Live,
    Record,
    Replay,
};

const char* to_string(GatewayMode mode);
std::optional<GatewayMode> gateway_mode_from_string(std::string_view s);

struct LlmRequest {
    std::string model_name = "gpt-4o-2024-05-13";
    double temperature = 0.0;
    std::string prompt;
};

/// Deterministic content hash of (model_name, temperature, prompt) over a
/// canonical JSON encoding; stable across runs and platforms.
std::string request_hash(const LlmRequest& req);

struct ExchangeRecord {
    std::string request_hash;
    LlmRequest request;
    std::string response_text;
    std::string recorded_at; // ISO 8601 UTC
};

detail::ojson exchange_record_to_json(const ExchangeRecord& rec);
ExchangeRecord exchange_record_from_json(const detail::ojson& j);

struct HttpRequest {
    std::string url;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
    int status = 0; // 0 = connection failure
    std::string body;
};

using Transport = std::function<HttpResponse(const HttpRequest&)>;

struct GatewayConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model_name = "gpt-4o-2024-05-13";
    double temperature = 0.0;
    GatewayMode mode = GatewayMode::Replay;
    std::filesystem::path cache_path;
    int permits = 1;
    int max_retries = 3;
    int retry_base_ms = 250;
    int timeout_ms = 30000;
    std::string api_key_env = "OPENAI_API_KEY";
};

/// Client for an OpenAI-compatible chat-completions endpoint with a JSONL
/// record/replay cache keyed by request hash.
///
/// Replay never touches the transport; a cache miss is a distinct error.
/// Record fetches live and appends an ExchangeRecord (both to the in-memory
/// index and, when a cache path is configured, to the JSONL file). Live and
/// record retry with exponential backoff on 429/5xx and connection failures.
class LlmGateway {
public:
    explicit LlmGateway(GatewayConfig config, Transport transport = {});
    LlmGateway(GatewayConfig config, std::vector<ExchangeRecord> preload,
               Transport transport = {});

    std::string complete(const LlmRequest& req, GatewayMode mode);
    std::string complete(const LlmRequest& req) { return complete(req, config_.mode); }
    /// Builds the request from the configured model and temperature.
    std::string complete_prompt(const std::string& prompt) {
        return complete(make_request(prompt));
    }

    LlmRequest make_request(std::string prompt) const {
        return LlmRequest{config_.model_name, config_.temperature, std::move(prompt)};
    }

    const GatewayConfig& config() const { return config_; }
    std::size_t cache_size() const;

private:
    std::string complete_live(const LlmRequest& req, bool record);
    void append_record(const ExchangeRecord& rec);

    GatewayConfig config_;
    Transport transport_;

    mutable std::mutex cache_mutex_;
    std::unordered_map<std::string, std::string> cache_;

    std::mutex permit_mutex_;
    std::condition_variable permit_cv_;
    int permits_available_ = 1;
};

/// Loads a JSONL cache file. Later records with the same hash win.
std::vector<ExchangeRecord> load_cache_file(const std::filesystem::path& path);
void append_cache_file(const std::filesystem::path& path, const ExchangeRecord& rec);

std::string now_iso8601_utc();

} // namespace ucc
