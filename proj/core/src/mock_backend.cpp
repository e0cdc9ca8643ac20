#include "agwo/mock_backend.hpp"

#include "agwo/fitness.hpp"
#include "agwo/rng.hpp"

#include <cmath>
#include <sstream>

namespace agwo {

std::uint64_t approx_tokens(std::string_view text) {
    std::uint64_t n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

namespace {

/// Keeps at most `limit` words, mimicking a max_tokens cut-off.
std::string truncate_words(const std::string& text, std::uint64_t limit) {
    std::uint64_t words = 0;
    bool in_word = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
        if (!space && !in_word && ++words > limit) return text.substr(0, i);
        in_word = !space;
    }
    return text;
}

GenerationResponse respond(std::string text, const GenerationRequest& req, const std::string& id) {
    const auto limit = static_cast<std::uint64_t>(std::max(req.decoding.max_tokens, 0));
    GenerationResponse r;
    r.text = truncate_words(text, limit);
    r.tokens.prompt = approx_tokens(req.system_text) + approx_tokens(req.user_text);
    r.tokens.completion = approx_tokens(r.text);
    r.provider_id = id;
    return r;
}

std::string wrong_answer(const std::string& gold) {
    if (auto n = canonical_number(gold); n && n->find('.') == std::string::npos) {
        try {
            return std::to_string(std::stoll(*n) + 1);
        } catch (const std::exception&) {
        }
    }
    if (gold.size() == 1 && gold[0] >= 'A' && gold[0] <= 'J') return gold[0] == 'A' ? "B" : "A";
    return "unknown";
}

} // namespace

ScriptedBackend::ScriptedBackend(std::vector<std::string> transcript, std::string id)
    : script_(transcript.begin(), transcript.end()), id_(std::move(id)) {}

GenerationResponse ScriptedBackend::generate(const GenerationRequest& request) {
    std::string text;
    {
        std::lock_guard lock(mutex_);
        if (script_.empty()) throw ProtocolError("scripted backend exhausted");
        text = std::move(script_.front());
        script_.pop_front();
    }
    return respond(std::move(text), request, id_);
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size();
}

GenerationResponse FunctionBackend::generate(const GenerationRequest& request) {
    auto r = fn_(request);
    if (r.provider_id.empty()) r.provider_id = id_;
    return r;
}

double mock_fitness_landscape(const DecodingConfig& decoding, const MockBackendSpec& spec) {
    double exponent = 0.0;
    for (std::size_t i = 0; i < kContinuousFields.size(); ++i) {
        const auto& axis = spec.axes[i];
        if (axis.width <= 0.0) continue;
        const double z = (decoding.at(kContinuousFields[i]) - axis.target) / axis.width;
        exponent += z * z;
    }
    return std::exp(-exponent);
}

LandscapeBackend::LandscapeBackend(MockBackendSpec spec, AnswerKey key, std::string id)
    : spec_(spec), key_(std::move(key)), id_(std::move(id)) {}

const std::string* LandscapeBackend::find_gold(std::string_view prompt) const {
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [question, gold] : key_) {
        if (question.size() > best_len && prompt.find(question) != std::string_view::npos) {
            best = &gold;
            best_len = question.size();
        }
    }
    return best;
}

GenerationResponse LandscapeBackend::generate(const GenerationRequest& request) {
    const std::string prompt = request.system_text + "\n" + request.user_text;
    const std::string* gold = find_gold(prompt);
    if (!gold) return respond("I cannot determine the answer from the information given.", request, id_);

    const double p = mock_fitness_landscape(request.decoding, spec_);
    Rng rng(derive_seed(spec_.seed, {request.seed.value_or(0), hash_string(*gold), hash_string(prompt)}));
    const bool correct = rng.uniform() < p;
    std::ostringstream text;
    text << "Let's work through the problem step by step.\n"
         << "First, collect the quantities that matter and set aside the rest.\n"
         << "Then combine them as the question asks.\n"
         << "The answer is " << (correct ? *gold : wrong_answer(*gold)) << ".";
    return respond(text.str(), request, id_);
}

MockJudgeBackend::MockJudgeBackend(AnswerKey key, std::string id) : key_(std::move(key)), id_(std::move(id)) {}

GenerationResponse MockJudgeBackend::generate(const GenerationRequest& request) {
    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(request.user_text);
    } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("mock judge expects a JSON judge request");
    }
    const auto question = payload.value("question", std::string{});
    const auto trajectory = payload.value("trajectory", std::string{});
    bool correct = false;
    if (auto it = key_.find(question); it != key_.end()) {
        const auto answer = extract_answer(trajectory, TaskKind::numeric);
        correct = answer && normalize_answer(*answer) == normalize_answer(it->second);
    }
    const std::uint64_t h = mix64(hash_string(trajectory) ^ mix64(request.seed.value_or(0)));
    const int logic = (correct ? 85 : 35) + static_cast<int>(h % 11);
    const int creativity = 50 + static_cast<int>((h >> 8) % 31);
    const int completeness = (correct ? 80 : 45) + static_cast<int>((h >> 16) % 16);
    nlohmann::json reply = {{"scale", 100}, {"logic", logic}, {"creativity", creativity},
                            {"completeness", completeness}};
    return respond(reply.dump(), request, id_);
}

GenerationResponse MockEditorBackend::generate(const GenerationRequest& request) {
    static constexpr std::string_view open = "<current_prompt>";
    static constexpr std::string_view close = "</current_prompt>";
    const auto& u = request.user_text;
    const auto b = u.find(open);
    const auto e = u.find(close);
    if (b == std::string::npos || e == std::string::npos || e < b)
        return respond("", request, id_);
    std::string prompt = u.substr(b + open.size(), e - b - open.size());
    // Trim the newlines the adapter puts around the block.
    while (!prompt.empty() && prompt.front() == '\n') prompt.erase(prompt.begin());
    while (!prompt.empty() && prompt.back() == '\n') prompt.pop_back();

    static constexpr std::array<std::string_view, 3> constraints{
        "Check the final answer against the question before stating it.",
        "Write the final line as: The answer is <value>.",
        "Number each reasoning step."};
    for (auto c : constraints) {
        if (prompt.find(c) != std::string::npos) continue;
        const auto slot = prompt.find(kQuestionSlot);
        if (slot == std::string::npos)
            prompt += "\n" + std::string(c);
        else
            prompt.insert(slot, std::string(c) + "\n");
        break;
    }
    return respond("<revised_prompt>\n" + prompt + "\n</revised_prompt>", request, id_);
}

void RoutingBackend::route(std::string model, std::shared_ptr<Backend> backend) {
    routes_[std::move(model)] = std::move(backend);
}

GenerationResponse RoutingBackend::generate(const GenerationRequest& request) {
    auto it = routes_.find(request.model);
    if (it == routes_.end()) throw ProtocolError("no mock backend for model '" + request.model + "'");
    return it->second->generate(request);
}

} // namespace agwo
