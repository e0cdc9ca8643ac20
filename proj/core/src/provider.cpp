#include "agwo/provider.hpp"

#include "agwo/rng.hpp"

#include <cmath>
#include <fstream>
#include <thread>

namespace agwo {

void UsageLedger::record(const GenerationResponse& response) {
    std::lock_guard lock(mutex_);
    auto& t = totals_[response.provider_id];
    t.calls += 1;
    t.prompt_tokens += response.tokens.prompt;
    t.completion_tokens += response.tokens.completion;
}

std::map<std::string, UsageTotals> UsageLedger::snapshot() const {
    std::lock_guard lock(mutex_);
    return totals_;
}

UsageTotals UsageLedger::total() const {
    std::lock_guard lock(mutex_);
    UsageTotals sum;
    for (const auto& [_, t] : totals_) {
        sum.calls += t.calls;
        sum.prompt_tokens += t.prompt_tokens;
        sum.completion_tokens += t.completion_tokens;
    }
    return sum;
}

void UsageLedger::restore(const std::map<std::string, UsageTotals>& totals) {
    std::lock_guard lock(mutex_);
    totals_ = totals;
}

nlohmann::json usage_to_json(const std::map<std::string, UsageTotals>& totals) {
    auto j = nlohmann::json::object();
    for (const auto& [id, t] : totals)
        j[id] = {{"calls", t.calls}, {"prompt_tokens", t.prompt_tokens},
                 {"completion_tokens", t.completion_tokens}};
    return j;
}

std::map<std::string, UsageTotals> usage_from_json(const nlohmann::json& j) {
    std::map<std::string, UsageTotals> out;
    for (const auto& [id, t] : j.items())
        out[id] = {t.at("calls").get<std::uint64_t>(), t.at("prompt_tokens").get<std::uint64_t>(),
                   t.at("completion_tokens").get<std::uint64_t>()};
    return out;
}

// ---------------------------------------------------------------------------

std::uint64_t request_key(const GenerationRequest& r) {
    nlohmann::json j = {{"model", r.model}, {"system", r.system_text}, {"user", r.user_text},
                        {"decoding", r.decoding}};
    if (r.seed) j["seed"] = *r.seed;
    return hash_string(j.dump());
}

namespace {

void validate(const GenerationRequest& r) {
    for (auto f : kContinuousFields)
        if (!std::isfinite(r.decoding.at(f)))
            throw ConfigError("request: " + std::string(field_name(f)) + " is not finite");
    if (!(r.decoding.top_p > 0.0 && r.decoding.top_p <= 1.0))
        throw ConfigError("request: top_p must lie in (0, 1]");
    if (r.decoding.max_tokens <= 0) throw ConfigError("request: max_tokens must be positive");
    if (r.user_text.empty() && r.system_text.empty()) throw ConfigError("request: empty prompt");
}

nlohmann::json request_log(const GenerationRequest& r) {
    nlohmann::json j = {{"model", r.model}, {"system", r.system_text}, {"user", r.user_text},
                        {"decoding", r.decoding}};
    if (r.seed) j["seed"] = *r.seed;
    return j;
}

} // namespace

LlmClient::LlmClient(std::shared_ptr<Backend> backend, ClientOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
    if (!backend_) throw ConfigError("LLM client needs a backend");
    if (options_.max_concurrency == 0) throw ConfigError("max_concurrency must be >= 1");
    if (options_.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    provider_id_ = backend_->id();
}

std::chrono::milliseconds LlmClient::backoff_delay(int attempt, std::uint64_t jitter_seed) const {
    Rng rng(derive_seed(jitter_seed, {static_cast<std::uint64_t>(attempt)}));
    const double scale = std::pow(options_.retry.factor, attempt - 1);
    const double jitter = 1.0 + options_.retry.jitter * (2.0 * rng.uniform() - 1.0);
    const double ms = static_cast<double>(options_.retry.base_delay.count()) * scale * jitter;
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

GenerationResponse LlmClient::generate(const GenerationRequest& request) {
    validate(request);
    const auto key = request_key(request);
    const bool cacheable = options_.cache && request.seed.has_value();
    if (cacheable) {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }

    {
        std::unique_lock lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_concurrency; });
        ++in_flight_;
    }
    struct Release {
        LlmClient* self;
        ~Release() {
            {
                std::lock_guard lock(self->slots_mutex_);
                --self->in_flight_;
            }
            self->slots_cv_.notify_one();
        }
    } release{this};

    auto response = call_with_retries(request, key);
    ledger_.record(response);
    if (cacheable) {
        std::lock_guard lock(cache_mutex_);
        cache_.emplace(key, response);
    }
    return response;
}

GenerationResponse LlmClient::call_with_retries(const GenerationRequest& request, std::uint64_t key) {
    const int attempts = options_.retry.max_attempts;
    for (int attempt = 1;; ++attempt) {
        std::chrono::milliseconds wait{0};
        try {
            auto response = backend_->generate(request);
            if (response.provider_id.empty()) response.provider_id = provider_id_;
            if (response.tokens.completion > static_cast<std::uint64_t>(request.decoding.max_tokens))
                throw ProtocolError("backend returned more completion tokens than max_tokens");
            trace(request, &response, {});
            return response;
        } catch (const RateLimited& e) {
            trace(request, nullptr, e.what());
            if (attempt >= attempts)
                throw ProviderError("rate limited after " + std::to_string(attempt) + " attempts: " + e.what());
            wait = e.retry_after ? *e.retry_after : backoff_delay(attempt, key);
        } catch (const TransportError& e) {
            trace(request, nullptr, e.what());
            if (attempt >= attempts)
                throw ProviderError("transport failed after " + std::to_string(attempt) + " attempts: " + e.what());
            wait = backoff_delay(attempt, key);
        } catch (const ProtocolError& e) {
            trace(request, nullptr, e.what());
            throw;
        }
        options_.sleep(wait);
    }
}

void LlmClient::trace(const GenerationRequest& request, const GenerationResponse* response,
                      const std::string& error) {
    if (!options_.trace_path) return;
    nlohmann::json j = {{"request", request_log(request)}};
    if (response)
        j["response"] = {{"text", response->text},
                         {"prompt_tokens", response->tokens.prompt},
                         {"completion_tokens", response->tokens.completion},
                         {"latency_ms", response->latency_ms},
                         {"provider_id", response->provider_id}};
    else
        j["error"] = error;
    std::lock_guard lock(trace_mutex_);
    std::ofstream out(*options_.trace_path, std::ios::app);
    out << j.dump() << '\n';
}

} // namespace agwo
