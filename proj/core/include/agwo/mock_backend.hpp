#pragma once

// Offline backends: scripted replay, a synthetic accuracy landscape over the
// decoding fields, and deterministic judge / prompt-editor stand-ins.

#include "agwo/agent_space.hpp"
#include "agwo/provider.hpp"

#include <array>
#include <deque>
#include <functional>
#include <map>
#include <mutex>

namespace agwo {

/// Replays a fixed list of completions in request order. Running past the end
/// of the script is a ProtocolError.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<std::string> transcript, std::string id = "mock-scripted");
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return id_; }
    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::deque<std::string> script_;
    std::string id_;
};

/// Wraps a callable; handy in tests.
class FunctionBackend : public Backend {
public:
    using Fn = std::function<GenerationResponse(const GenerationRequest&)>;
    FunctionBackend(Fn fn, std::string id = "mock-fn") : fn_(std::move(fn)), id_(std::move(id)) {}
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return id_; }

private:
    Fn fn_;
    std::string id_;
};

struct LandscapeAxis {
    double target = 0.6;
    double width = 0.0;  // <= 0 disables the axis
};

struct MockBackendSpec {
    /// Indexed like kContinuousFields. Default: temperature peaked at 0.6, width 0.2.
    std::array<LandscapeAxis, 4> axes{LandscapeAxis{0.6, 0.2}, LandscapeAxis{}, LandscapeAxis{},
                                      LandscapeAxis{}};
    std::uint64_t seed = 0;
};

/// exp(-sum over enabled axes of ((x - target) / width)^2). Equals 1 at the peak.
double mock_fitness_landscape(const DecodingConfig& decoding, const MockBackendSpec& spec);

/// question text -> gold answer
using AnswerKey = std::map<std::string, std::string, std::less<>>;

/// Answers a question correctly with the landscape probability of the
/// request's decoding. The Bernoulli draw is seeded from (spec seed, request
/// seed, prompt text), so identical request sequences replay identically.
class LandscapeBackend : public Backend {
public:
    LandscapeBackend(MockBackendSpec spec, AnswerKey key, std::string id = "mock-landscape");
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return id_; }
    const MockBackendSpec& spec() const noexcept { return spec_; }

private:
    const std::string* find_gold(std::string_view prompt) const;
    MockBackendSpec spec_;
    AnswerKey key_;
    std::string id_;
};

/// Judge stand-in: reads the judge payload, checks the trajectory's final
/// number against the answer key and replies with 0-100 integer scores.
class MockJudgeBackend : public Backend {
public:
    explicit MockJudgeBackend(AnswerKey key, std::string id = "mock-judge");
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return id_; }

private:
    AnswerKey key_;
    std::string id_;
};

/// Prompt-editor stand-in: returns the current prompt with one deterministic
/// formatting constraint appended (or unchanged when it is already present).
class MockEditorBackend : public Backend {
public:
    explicit MockEditorBackend(std::string id = "mock-editor") : id_(std::move(id)) {}
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return id_; }

private:
    std::string id_;
};

/// Dispatches on GenerationRequest::model; one shared client can then serve
/// agent, judge, and editor roles with different mock models.
class RoutingBackend : public Backend {
public:
    explicit RoutingBackend(std::string id = "mock") : id_(std::move(id)) {}
    void route(std::string model, std::shared_ptr<Backend> backend);
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return id_; }

private:
    std::map<std::string, std::shared_ptr<Backend>, std::less<>> routes_;
    std::string id_;
};

/// Whitespace-separated word count, the mock token estimate.
std::uint64_t approx_tokens(std::string_view text);

} // namespace agwo
