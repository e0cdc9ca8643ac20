#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "agwo/mock_backend.hpp"
#include "agwo/provider.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

using namespace agwo;
using namespace std::chrono_literals;

namespace {

GenerationRequest basic_request(std::optional<std::uint64_t> seed = 1) {
    GenerationRequest r;
    r.model = "m";
    r.user_text = "What is 2 + 2?";
    r.seed = seed;
    return r;
}

GenerationResponse reply(std::string text, std::uint64_t p = 3, std::uint64_t c = 2) {
    GenerationResponse out;
    out.text = std::move(text);
    out.tokens = {p, c};
    out.provider_id = "fn";
    return out;
}

/// Fails the first `failures` calls with the given exception factory.
struct Flaky {
    Flaky(int failures, std::function<void()> fail) : failures(failures), fail(std::move(fail)) {}
    int failures;
    std::function<void()> fail;
    std::atomic<int> calls{0};
    GenerationResponse operator()(const GenerationRequest&) {
        if (calls.fetch_add(1) < failures) fail();
        return reply("ok");
    }
};

ClientOptions recording(std::vector<std::chrono::milliseconds>& sleeps) {
    ClientOptions o;
    o.sleep = [&sleeps](std::chrono::milliseconds d) { sleeps.push_back(d); };
    o.cache = false;
    return o;
}

} // namespace

TEST(Client, RetriesTransportWithExponentialBackoff) {
    auto flaky = std::make_shared<Flaky>(3, [] { throw TransportError("reset"); });
    std::vector<std::chrono::milliseconds> sleeps;
    LlmClient client(std::make_shared<FunctionBackend>([flaky](const auto& r) { return (*flaky)(r); }),
                     recording(sleeps));
    EXPECT_EQ(client.generate(basic_request()).text, "ok");
    EXPECT_EQ(flaky->calls.load(), 4);
    ASSERT_EQ(sleeps.size(), 3u);
    const double nominal[] = {1000, 2000, 4000};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_GE(sleeps[i].count(), nominal[i] * 0.8 - 1);
        EXPECT_LE(sleeps[i].count(), nominal[i] * 1.2 + 1);
    }
}

TEST(Client, GivesUpAfterMaxAttempts) {
    auto flaky = std::make_shared<Flaky>(100, [] { throw TransportError("down"); });
    std::vector<std::chrono::milliseconds> sleeps;
    LlmClient client(std::make_shared<FunctionBackend>([flaky](const auto& r) { return (*flaky)(r); }),
                     recording(sleeps));
    EXPECT_THROW(client.generate(basic_request()), ProviderError);
    EXPECT_EQ(flaky->calls.load(), 5);
    EXPECT_EQ(sleeps.size(), 4u);
    EXPECT_EQ(client.ledger().total().calls, 0u);
}

TEST(Client, RateLimitHonoursRetryAfter) {
    auto flaky = std::make_shared<Flaky>(1, [] { throw RateLimited("429", 2500ms); });
    std::vector<std::chrono::milliseconds> sleeps;
    LlmClient client(std::make_shared<FunctionBackend>([flaky](const auto& r) { return (*flaky)(r); }),
                     recording(sleeps));
    client.generate(basic_request());
    ASSERT_EQ(sleeps.size(), 1u);
    EXPECT_EQ(sleeps[0], 2500ms);
}

TEST(Client, ProtocolErrorIsNotRetried) {
    auto flaky = std::make_shared<Flaky>(100, [] { throw ProtocolError("garbage"); });
    std::vector<std::chrono::milliseconds> sleeps;
    LlmClient client(std::make_shared<FunctionBackend>([flaky](const auto& r) { return (*flaky)(r); }),
                     recording(sleeps));
    EXPECT_THROW(client.generate(basic_request()), ProtocolError);
    EXPECT_EQ(flaky->calls.load(), 1);
    EXPECT_TRUE(sleeps.empty());
}

TEST(Client, BackoffIsDeterministicPerSeed) {
    LlmClient client(std::make_shared<FunctionBackend>([](const auto&) { return reply("x"); }));
    EXPECT_EQ(client.backoff_delay(2, 77), client.backoff_delay(2, 77));
}

TEST(Client, RejectsInvalidRequests) {
    LlmClient client(std::make_shared<FunctionBackend>([](const auto&) { return reply("x"); }));
    auto r = basic_request();
    r.decoding.top_p = 0.0;
    EXPECT_THROW(client.generate(r), ConfigError);
    r = basic_request();
    r.decoding.max_tokens = 0;
    EXPECT_THROW(client.generate(r), ConfigError);
    r = basic_request();
    r.user_text.clear();
    EXPECT_THROW(client.generate(r), ConfigError);
    EXPECT_THROW(LlmClient(nullptr), ConfigError);
}

TEST(Client, CachesSeededRequestsOnly) {
    std::atomic<int> calls{0};
    LlmClient client(std::make_shared<FunctionBackend>([&](const auto&) {
        ++calls;
        return reply("x");
    }));
    client.generate(basic_request(5));
    client.generate(basic_request(5));
    EXPECT_EQ(calls.load(), 1);
    client.generate(basic_request(6));
    EXPECT_EQ(calls.load(), 2);
    client.generate(basic_request(std::nullopt));
    client.generate(basic_request(std::nullopt));
    EXPECT_EQ(calls.load(), 4);
    EXPECT_EQ(client.ledger().total().calls, 4u);
}

TEST(Client, ConcurrencyCapIsRespected) {
    std::atomic<int> active{0}, peak{0};
    ClientOptions o;
    o.max_concurrency = 3;
    o.cache = false;
    LlmClient client(std::make_shared<FunctionBackend>([&](const auto&) {
                         const int now = ++active;
                         int prev = peak.load();
                         while (now > prev && !peak.compare_exchange_weak(prev, now)) {
                         }
                         std::this_thread::sleep_for(5ms);
                         --active;
                         return reply("x");
                     }),
                     o);
    std::vector<std::thread> threads;
    for (int i = 0; i < 16; ++i) threads.emplace_back([&] { client.generate(basic_request()); });
    for (auto& t : threads) t.join();
    EXPECT_LE(peak.load(), 3);
    EXPECT_GE(peak.load(), 2);
}

TEST(Ledger, AccumulatesPerProvider) {
    UsageLedger ledger;
    ledger.record(reply("a", 10, 5));
    auto other = reply("b", 1, 1);
    other.provider_id = "other";
    ledger.record(other);
    ledger.record(reply("c", 2, 3));
    const auto snap = ledger.snapshot();
    EXPECT_EQ(snap.at("fn"), (UsageTotals{2, 12, 8}));
    EXPECT_EQ(ledger.total().total_tokens(), 22u);
    EXPECT_EQ(usage_from_json(usage_to_json(snap)), snap);
    ledger.restore({});
    EXPECT_EQ(ledger.total().calls, 0u);
}

TEST(Ledger, CompletionOverBudgetIsProtocolError) {
    LlmClient client(std::make_shared<FunctionBackend>([](const auto&) { return reply("x", 1, 100000); }));
    EXPECT_THROW(client.generate(basic_request()), ProtocolError);
}

TEST(Trace, AppendsOneLinePerExchange) {
    agwo::testing::TempDir dir;
    ClientOptions o;
    o.trace_path = dir / "trace.jsonl";
    LlmClient client(std::make_shared<FunctionBackend>([](const auto&) { return reply("x"); }), o);
    client.generate(basic_request(1));
    client.generate(basic_request(2));
    const auto text = agwo::testing::slurp(dir / "trace.jsonl");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Wire, ChatBodyCarriesDecodingAndSeed) {
    auto r = basic_request(9);
    r.system_text = "sys";
    r.decoding.temperature = 0.25;
    const auto body = chat_request_body(r);
    EXPECT_EQ(body["messages"].size(), 2u);
    EXPECT_EQ(body["messages"][0]["role"], "system");
    EXPECT_EQ(body["temperature"], 0.25);
    EXPECT_EQ(body["seed"], 9);
    EXPECT_EQ(body["max_tokens"], r.decoding.max_tokens);
    r.seed.reset();
    r.system_text.clear();
    EXPECT_FALSE(chat_request_body(r).contains("seed"));
    EXPECT_EQ(chat_request_body(r)["messages"].size(), 1u);
}

TEST(Wire, ParseResponse) {
    const auto ok = parse_chat_response(
        R"({"choices":[{"message":{"content":"hi"}}],"usage":{"prompt_tokens":4,"completion_tokens":1}})", "p");
    EXPECT_EQ(ok.text, "hi");
    EXPECT_EQ(ok.tokens.prompt, 4u);
    EXPECT_THROW(parse_chat_response("not json", "p"), ProtocolError);
    EXPECT_THROW(parse_chat_response(R"({"choices":[]})", "p"), ProtocolError);
}

namespace {

class LocalServer {
public:
    explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

constexpr const char* kOkBody =
    R"({"choices":[{"message":{"content":"The answer is 4"}}],"usage":{"prompt_tokens":7,"completion_tokens":4}})";

} // namespace

TEST(Http, RetriesServerErrorsAndRateLimits) {
    std::atomic<int> hits{0};
    std::string last_auth;
    LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
        last_auth = req.get_header_value("Authorization");
        const int n = ++hits;
        if (n == 1) {
            res.status = 503;
        } else if (n == 2) {
            res.status = 429;
            res.set_header("Retry-After", "0.01");
        } else {
            res.set_content(kOkBody, "application/json");
        }
    });
    std::vector<std::chrono::milliseconds> sleeps;
    auto backend = std::make_shared<HttpChatBackend>(HttpBackendOptions{server.url(), "secret", 5s});
    LlmClient client(backend, recording(sleeps));
    const auto r = client.generate(basic_request());
    EXPECT_EQ(r.text, "The answer is 4");
    EXPECT_EQ(r.tokens.completion, 4u);
    EXPECT_EQ(hits.load(), 3);
    ASSERT_EQ(sleeps.size(), 2u);
    EXPECT_EQ(sleeps[1], 10ms);
    EXPECT_EQ(last_auth, "Bearer secret");
}

TEST(Http, ClientErrorIsProtocolError) {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 400;
        res.set_content("bad", "text/plain");
    });
    std::vector<std::chrono::milliseconds> sleeps;
    LlmClient client(std::make_shared<HttpChatBackend>(HttpBackendOptions{server.url(), "k", 5s}),
                     recording(sleeps));
    EXPECT_THROW(client.generate(basic_request()), ProtocolError);
    EXPECT_EQ(hits.load(), 1);
}

TEST(Http, UnreachableHostIsTransportError) {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    HttpChatBackend backend(HttpBackendOptions{"http://127.0.0.1:" + std::to_string(port) + "/v1", "k", 1s});
    EXPECT_THROW(backend.generate(basic_request()), TransportError);
}

TEST(Http, BaseUrlNeedsScheme) {
    EXPECT_THROW(HttpChatBackend(HttpBackendOptions{"localhost:8080", "k", 1s}), ConfigError);
}
