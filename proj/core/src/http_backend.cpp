#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "agwo/provider.hpp"

#include <cstdlib>

namespace agwo {

nlohmann::json chat_request_body(const GenerationRequest& r) {
    auto messages = nlohmann::json::array();
    if (!r.system_text.empty()) messages.push_back({{"role", "system"}, {"content", r.system_text}});
    messages.push_back({{"role", "user"}, {"content", r.user_text}});
    nlohmann::json body = {{"model", r.model},
                           {"messages", messages},
                           {"temperature", r.decoding.temperature},
                           {"top_p", r.decoding.top_p},
                           {"frequency_penalty", r.decoding.frequency_penalty},
                           {"presence_penalty", r.decoding.presence_penalty},
                           {"max_tokens", r.decoding.max_tokens}};
    if (r.seed) body["seed"] = *r.seed;
    return body;
}

GenerationResponse parse_chat_response(const std::string& body, const std::string& provider_id) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }
    GenerationResponse out;
    out.provider_id = provider_id;
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        out.text = content.is_null() ? std::string{} : content.get<std::string>();
        if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
            out.tokens.prompt = u->value("prompt_tokens", std::uint64_t{0});
            out.tokens.completion = u->value("completion_tokens", std::uint64_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed chat-completions response: ") + e.what());
    }
    return out;
}

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    if (const char* v = std::getenv(name); v && *v) return v;
    return fallback;
}

} // namespace

HttpChatBackend::HttpChatBackend(HttpBackendOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty()) options_.base_url = env_or("PROVIDER_BASE_URL", "https://api.openai.com/v1");
    if (options_.api_key.empty()) options_.api_key = env_or("PROVIDER_API_KEY", "");

    const auto& url = options_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("provider base URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? std::string{} : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    id_ = scheme_host_port_;
}

GenerationResponse HttpChatBackend::generate(const GenerationRequest& request) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);

    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(path_prefix_ + "/chat/completions", headers, chat_request_body(request).dump(),
                           "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    if (!res) throw TransportError("HTTP request failed: " + httplib::to_string(res.error()));
    if (res->status == 429) {
        std::optional<std::chrono::milliseconds> after;
        if (res->has_header("Retry-After")) {
            try {
                after = std::chrono::milliseconds(
                    static_cast<std::int64_t>(std::stod(res->get_header_value("Retry-After")) * 1000.0));
            } catch (const std::exception&) {
                // HTTP-date form is not supported; fall back to backoff.
            }
        }
        throw RateLimited("HTTP 429", after);
    }
    if (res->status >= 500) throw TransportError("HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw ProtocolError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));

    auto out = parse_chat_response(res->body, id_);
    out.latency_ms = static_cast<std::uint64_t>(elapsed.count());
    return out;
}

} // namespace agwo
