#pragma once

// Text-generation backends behind one client that owns retries, the
// concurrency cap, the usage ledger, and the per-run response cache.

#include "agwo/agent_space.hpp"
#include "agwo/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace agwo {

struct GenerationRequest {
    std::string model;
    std::string system_text;
    std::string user_text;
    DecodingConfig decoding;
    std::optional<std::uint64_t> seed;
};

struct TokenCounts {
    std::uint64_t prompt = 0;
    std::uint64_t completion = 0;
};

struct GenerationResponse {
    std::string text;
    TokenCounts tokens;
    std::uint64_t latency_ms = 0;
    std::string provider_id;
};

/// Connection reset, timeout, 5xx. Retried.
class TransportError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// HTTP 429. Retried after `retry_after` when the server supplied one.
class RateLimited : public ProviderError {
public:
    RateLimited(const std::string& what, std::optional<std::chrono::milliseconds> after)
        : ProviderError(what), retry_after(after) {}
    std::optional<std::chrono::milliseconds> retry_after;
};

class Backend {
public:
    virtual ~Backend() = default;
    /// Throws TransportError / RateLimited for retryable failures and
    /// ProtocolError for responses that cannot be interpreted.
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct UsageTotals {
    std::uint64_t calls = 0;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::uint64_t total_tokens() const noexcept { return prompt_tokens + completion_tokens; }
    friend bool operator==(const UsageTotals&, const UsageTotals&) = default;
};

/// Per-provider call and token counters. Only ever grows.
class UsageLedger {
public:
    void record(const GenerationResponse& response);
    std::map<std::string, UsageTotals> snapshot() const;
    UsageTotals total() const;
    /// Replaces the counters, used when resuming from a checkpoint.
    void restore(const std::map<std::string, UsageTotals>& totals);

private:
    mutable std::mutex mutex_;
    std::map<std::string, UsageTotals> totals_;
};

nlohmann::json usage_to_json(const std::map<std::string, UsageTotals>& totals);
std::map<std::string, UsageTotals> usage_from_json(const nlohmann::json& j);

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{1000};
    double factor = 2.0;
    double jitter = 0.2;  // +-20%
};

struct ClientOptions {
    RetryPolicy retry;
    std::size_t max_concurrency = 8;
    bool cache = true;
    /// When set, every exchange is appended to this JSONL file.
    std::optional<std::filesystem::path> trace_path;
    /// Injected for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;
};

/// Shareable across threads.
class LlmClient {
public:
    LlmClient(std::shared_ptr<Backend> backend, ClientOptions options = {});

    /// Validates the request, then calls the backend under the concurrency
    /// cap with exponential backoff. Throws ProviderError after the last
    /// attempt, ProtocolError immediately.
    GenerationResponse generate(const GenerationRequest& request);

    UsageLedger& ledger() noexcept { return ledger_; }
    const UsageLedger& ledger() const noexcept { return ledger_; }
    const std::string& provider_id() const noexcept { return provider_id_; }

    /// Backoff before attempt `attempt` (1-based retry count), jitter included.
    std::chrono::milliseconds backoff_delay(int attempt, std::uint64_t jitter_seed) const;

private:
    GenerationResponse call_with_retries(const GenerationRequest& request, std::uint64_t key);
    void trace(const GenerationRequest& request, const GenerationResponse* response,
               const std::string& error);

    std::shared_ptr<Backend> backend_;
    ClientOptions options_;
    std::string provider_id_;
    UsageLedger ledger_;

    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    std::size_t in_flight_ = 0;

    std::mutex cache_mutex_;
    std::unordered_map<std::uint64_t, GenerationResponse> cache_;

    std::mutex trace_mutex_;
};

/// Stable content hash of a request (model, texts, decoding, seed).
std::uint64_t request_key(const GenerationRequest& request);

// --- chat-completions wire format ---------------------------------------

nlohmann::json chat_request_body(const GenerationRequest& request);
/// Throws ProtocolError when the body lacks choices[0].message.content.
GenerationResponse parse_chat_response(const std::string& body, const std::string& provider_id);

struct HttpBackendOptions {
    std::string base_url;  // empty: PROVIDER_BASE_URL, then https://api.openai.com/v1
    std::string api_key;
    std::chrono::seconds timeout{120};
};

/// Chat-completions over HTTP(S). Defaults come from PROVIDER_BASE_URL and
/// PROVIDER_API_KEY when the options leave them empty.
class HttpChatBackend : public Backend {
public:
    explicit HttpChatBackend(HttpBackendOptions options);
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return id_; }

private:
    HttpBackendOptions options_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::string id_;
};

} // namespace agwo
