#include "ucc/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "ucc/detail/sha256.hpp"
#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"

namespace ucc {

namespace {

// "http://host:port/v1" -> ("http://host:port", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw GatewayError(GatewayErrorKind::Config,
                           "base_url must start with http:// or https://: " + base_url);
    }
    auto path_begin = base_url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) {
        return {base_url, ""};
    }
    std::string prefix = base_url.substr(path_begin);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_begin), prefix};
}

Transport make_http_transport(int timeout_ms) {
    return [timeout_ms](const HttpRequest& req) -> HttpResponse {
        auto [origin, path] = split_base_url(req.url);
        httplib::Client client(origin);
        client.set_connection_timeout(0, timeout_ms * 1000LL);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        for (const auto& [k, v] : req.headers) headers.emplace(k, v);
        auto res = client.Post(path.empty() ? "/" : path, headers, req.body, "application/json");
        if (!res) {
            return {0, httplib::to_string(res.error())};
        }
        return {res->status, res->body};
    };
}

bool retryable_status(int status) {
    return status == 0 || status == 429 || (status >= 500 && status < 600);
}

std::string canonical_request_encoding(const LlmRequest& req) {
    detail::ojson j = detail::ojson::object();
    j["model_name"] = req.model_name;
    j["temperature"] = req.temperature;
    j["prompt"] = req.prompt;
    return j.dump();
}

std::string extract_completion_text(const std::string& body) {
    detail::ojson j = detail::ojson::parse(body, nullptr, false);
    if (j.is_discarded()) {
        throw GatewayError(GatewayErrorKind::MalformedResponse,
                           "endpoint returned non-JSON body");
    }
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
        j["choices"].empty()) {
        throw GatewayError(GatewayErrorKind::MalformedResponse,
                           "endpoint response has no choices");
    }
    const auto& first = j["choices"][0];
    if (!first.is_object() || !first.contains("message") ||
        !first["message"].contains("content") || !first["message"]["content"].is_string()) {
        throw GatewayError(GatewayErrorKind::MalformedResponse,
                           "endpoint response has no message content");
    }
    return first["message"]["content"].get<std::string>();
}

class Permit {
public:
    Permit(std::mutex& m, std::condition_variable& cv, int& available)
        : mutex_(m), cv_(cv), available_(available) {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    ~Permit() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex& mutex_;
    std::condition_variable& cv_;
    int& available_;
};

} // namespace

const char* to_string(GatewayMode mode) {
    switch (mode) {
        case GatewayMode::Live: return "live";
        case GatewayMode::Record: return "record";
        case GatewayMode::Replay: return "replay";
    }
    return "unknown";
}

std::optional<GatewayMode> gateway_mode_from_string(std::string_view s) {
    if (s == "live") return GatewayMode::Live;
    if (s == "record") return GatewayMode::Record;
    if (s == "replay") return GatewayMode::Replay;
    return std::nullopt;
}

std::string request_hash(const LlmRequest& req) {
    return detail::sha256_hex(canonical_request_encoding(req));
}

detail::ojson exchange_record_to_json(const ExchangeRecord& rec) {
    detail::ojson j = detail::ojson::object();
    j["request_hash"] = rec.request_hash;
    j["model_name"] = rec.request.model_name;
    j["temperature"] = rec.request.temperature;
    j["prompt"] = rec.request.prompt;
    j["response_text"] = rec.response_text;
    j["recorded_at"] = rec.recorded_at;
    return j;
}

ExchangeRecord exchange_record_from_json(const detail::ojson& j) {
    if (!j.is_object()) {
        throw ParseError(ParseErrorKind::WrongShape, "exchange record must be an object");
    }
    ExchangeRecord rec;
    for (const char* key : {"request_hash", "model_name", "prompt", "response_text"}) {
        if (!j.contains(key) || !j.at(key).is_string()) {
            throw ParseError(ParseErrorKind::MissingKey,
                             std::string("exchange record: missing string key \"") + key + "\"");
        }
    }
    rec.request_hash = j.at("request_hash").get<std::string>();
    rec.request.model_name = j.at("model_name").get<std::string>();
    rec.request.temperature = j.contains("temperature") ? j.at("temperature").get<double>() : 0.0;
    rec.request.prompt = j.at("prompt").get<std::string>();
    rec.response_text = j.at("response_text").get<std::string>();
    if (j.contains("recorded_at") && j.at("recorded_at").is_string()) {
        rec.recorded_at = j.at("recorded_at").get<std::string>();
    }
    return rec;
}

std::vector<ExchangeRecord> load_cache_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GatewayError(GatewayErrorKind::Config, "cannot read cache file: " + path.string());
    }
    std::vector<ExchangeRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        detail::ojson j = detail::ojson::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw GatewayError(GatewayErrorKind::Config,
                               "cache file " + path.string() + ": bad JSON on line " +
                                   std::to_string(line_no));
        }
        records.push_back(exchange_record_from_json(j));
    }
    return records;
}

void append_cache_file(const std::filesystem::path& path, const ExchangeRecord& rec) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw GatewayError(GatewayErrorKind::Config, "cannot write cache file: " + path.string());
    }
    out << exchange_record_to_json(rec).dump() << '\n';
}

std::string now_iso8601_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

LlmGateway::LlmGateway(GatewayConfig config, Transport transport)
    : LlmGateway(std::move(config), std::vector<ExchangeRecord>{}, std::move(transport)) {}

LlmGateway::LlmGateway(GatewayConfig config, std::vector<ExchangeRecord> preload,
                       Transport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.permits < 1) {
        throw GatewayError(GatewayErrorKind::Config, "permits must be >= 1");
    }
    permits_available_ = config_.permits;

    for (auto& rec : preload) {
        cache_[rec.request_hash] = std::move(rec.response_text);
    }
    if (!config_.cache_path.empty() && std::filesystem::exists(config_.cache_path)) {
        for (auto& rec : load_cache_file(config_.cache_path)) {
            cache_[rec.request_hash] = std::move(rec.response_text);
        }
    } else if (config_.mode == GatewayMode::Replay && cache_.empty()) {
        throw GatewayError(GatewayErrorKind::Config,
                           config_.cache_path.empty()
                               ? "replay mode requires a cache path"
                               : "replay cache file not found: " + config_.cache_path.string());
    }
}

std::size_t LlmGateway::cache_size() const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.size();
}

std::string LlmGateway::complete(const LlmRequest& req, GatewayMode mode) {
    if (detail::trim(req.prompt).empty()) {
        throw GatewayError(GatewayErrorKind::Config, "prompt is empty");
    }
    switch (mode) {
        case GatewayMode::Replay: {
            const std::string hash = request_hash(req);
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = cache_.find(hash);
            if (it == cache_.end()) {
                throw GatewayError(GatewayErrorKind::CacheMiss,
                                   "replay cache miss for request " + hash.substr(0, 12) +
                                       " (prompt starts: \"" + req.prompt.substr(0, 48) + "...\")");
            }
            return it->second;
        }
        case GatewayMode::Live:
            return complete_live(req, /*record=*/false);
        case GatewayMode::Record:
            return complete_live(req, /*record=*/true);
    }
    throw GatewayError(GatewayErrorKind::Config, "unknown gateway mode");
}

std::string LlmGateway::complete_live(const LlmRequest& req, bool record) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw GatewayError(GatewayErrorKind::CredentialMissing,
                           "environment variable " + config_.api_key_env + " is not set");
    }
    if (!transport_) {
        transport_ = make_http_transport(config_.timeout_ms);
    }

    detail::ojson body = detail::ojson::object();
    body["model"] = req.model_name;
    body["temperature"] = req.temperature;
    body["messages"] = detail::ojson::array(
        {detail::ojson{{"role", "user"}, {"content", req.prompt}}});

    HttpRequest http;
    http.url = config_.base_url + "/chat/completions";
    http.body = body.dump();
    http.headers = {{"Authorization", std::string("Bearer ") + key}};

    Permit permit(permit_mutex_, permit_cv_, permits_available_);

    HttpResponse resp;
    int attempt = 0;
    for (;;) {
        resp = transport_(http);
        if (resp.status >= 200 && resp.status < 300) break;
        if (!retryable_status(resp.status) || attempt >= config_.max_retries) {
            throw GatewayError(GatewayErrorKind::Network,
                               "endpoint request failed (status " +
                                   std::to_string(resp.status) + "): " + resp.body.substr(0, 200),
                               resp.status);
        }
        std::this_thread::sleep_for(
            std::chrono::milliseconds(config_.retry_base_ms * (1LL << attempt)));
        ++attempt;
    }

    std::string text = extract_completion_text(resp.body);
    if (record) {
        ExchangeRecord rec{request_hash(req), req, text, now_iso8601_utc()};
        append_record(rec);
    }
    return text;
}

void LlmGateway::append_record(const ExchangeRecord& rec) {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_[rec.request_hash] = rec.response_text;
    if (!config_.cache_path.empty()) {
        append_cache_file(config_.cache_path, rec);
    }
}

const char* to_string(GatewayErrorKind kind) {
    switch (kind) {
        case GatewayErrorKind::Config: return "config";
        case GatewayErrorKind::CredentialMissing: return "credential-missing";
        case GatewayErrorKind::Network: return "network";
        case GatewayErrorKind::MalformedResponse: return "malformed-response";
        case GatewayErrorKind::CacheMiss: return "cache-miss";
    }
    return "unknown";
}

} // namespace ucc
