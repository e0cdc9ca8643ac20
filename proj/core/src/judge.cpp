#include "agwo/judge.hpp"

namespace agwo {

nlohmann::json judge_request(std::string_view question, std::string_view trajectory,
                             std::string_view rubric_version) {
    return {{"question", question}, {"trajectory", trajectory}, {"rubric_version", rubric_version}};
}

namespace {

double numeric_field(const nlohmann::json& j, std::initializer_list<const char*> names) {
    for (const char* name : names) {
        auto it = j.find(name);
        if (it == j.end()) continue;
        if (!it->is_number()) throw ProtocolError(std::string("judge field '") + name + "' is not numeric");
        return it->get<double>();
    }
    throw ProtocolError(std::string("judge reply lacks '") + *names.begin() + "'");
}

} // namespace

JudgeScores parse_judge_response(std::string_view text) {
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ProtocolError("judge reply contains no JSON object");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.substr(open, close - open + 1));
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("judge reply is not valid JSON: ") + e.what());
    }
    JudgeScores s;
    s.logic = numeric_field(j, {"logic"});
    s.creativity = numeric_field(j, {"creativity", "ingenuity"});
    s.completeness = numeric_field(j, {"completeness", "complete"});

    double scale = 1.0;
    if (auto it = j.find("scale"); it != j.end()) {
        if (!it->is_number()) throw ProtocolError("judge 'scale' is not numeric");
        scale = it->get<double>();
        if (scale != 1.0 && scale != 100.0) throw ProtocolError("judge 'scale' must be 1 or 100");
    } else if (s.logic > 1.0 || s.creativity > 1.0 || s.completeness > 1.0) {
        scale = 100.0;
    }
    s.logic /= scale;
    s.creativity /= scale;
    s.completeness /= scale;
    if (!s.valid()) throw ProtocolError("judge scores fall outside the 0-100 / 0-1 range");
    return s;
}

DecodingConfig LlmJudge::default_decoding() {
    DecodingConfig d;
    d.temperature = 0.0;
    d.top_p = 1.0;
    d.frequency_penalty = 0.0;
    d.presence_penalty = 0.0;
    d.max_tokens = 256;
    return d;
}

LlmJudge::LlmJudge(LlmClient& client, std::string model, Resource rubric, DecodingConfig decoding)
    : client_(client), model_(std::move(model)), rubric_(std::move(rubric)), decoding_(decoding) {}

JudgeScores LlmJudge::score(std::string_view question, std::string_view trajectory, std::uint64_t seed) {
    GenerationRequest req;
    req.model = model_;
    req.system_text = rubric_.text;
    req.user_text = judge_request(question, trajectory, rubric_.version).dump();
    req.decoding = decoding_;
    req.seed = seed;
    auto scores = parse_judge_response(client_.generate(req).text);
    scores.seeds_used = {seed};
    return scores;
}

JudgeScores judge_averaged(std::string_view question, std::string_view trajectory, Judge& judge,
                           std::span<const std::uint64_t, 3> seeds) {
    std::vector<JudgeScores> runs;
    runs.reserve(3);
    for (auto seed : seeds) {
        try {
            runs.push_back(judge.score(question, trajectory, seed));
        } catch (const Error& e) {
            throw JudgeFailure(std::string("judge run with seed ") + std::to_string(seed) + " failed: " + e.what(),
                               std::move(runs));
        }
    }
    auto mean = mean_scores(runs);
    mean.seeds_used.assign(seeds.begin(), seeds.end());
    return mean;
}

JudgeScores mean_scores(std::span<const JudgeScores> scores) {
    if (scores.empty()) throw EvaluationError("no judge scores to average");
    JudgeScores m;
    for (const auto& s : scores) {
        m.logic += s.logic;
        m.creativity += s.creativity;
        m.completeness += s.completeness;
    }
    const double n = static_cast<double>(scores.size());
    m.logic /= n;
    m.creativity /= n;
    m.completeness /= n;
    return m;
}

} // namespace agwo
