#pragma once

// LLM-as-judge scoring with a frozen rubric, averaged over fixed seeds.

#include "agwo/fitness.hpp"
#include "agwo/provider.hpp"
#include "agwo/resources.hpp"

#include <array>
#include <span>

namespace agwo {

class Judge {
public:
    virtual ~Judge() = default;
    /// One judge run. Scores are normalized into [0, 1].
    virtual JudgeScores score(std::string_view question, std::string_view trajectory, std::uint64_t seed) = 0;
};

/// Judge request payload: {question, trajectory, rubric_version}.
nlohmann::json judge_request(std::string_view question, std::string_view trajectory,
                             std::string_view rubric_version);

/// Parses {logic, creativity, completeness} out of a judge reply. Integer
/// 0-100 scales (declared via "scale": 100 or implied by a value above 1) are
/// divided by 100. "ingenuity" is accepted as an alias of creativity.
/// Throws ProtocolError on anything else.
JudgeScores parse_judge_response(std::string_view text);

/// Judge backed by the shared LLM client and the frozen rubric prompt.
class LlmJudge : public Judge {
public:
    LlmJudge(LlmClient& client, std::string model, Resource rubric, DecodingConfig decoding);
    JudgeScores score(std::string_view question, std::string_view trajectory, std::uint64_t seed) override;

    const Resource& rubric() const noexcept { return rubric_; }
    /// Temperature 0, top_p 1, no penalties, 256 tokens.
    static DecodingConfig default_decoding();

private:
    LlmClient& client_;
    std::string model_;
    Resource rubric_;
    DecodingConfig decoding_;
};

/// A judge run failed; `partial` holds the runs that did succeed.
class JudgeFailure : public EvaluationError {
public:
    JudgeFailure(const std::string& what, std::vector<JudgeScores> partial)
        : EvaluationError(what), partial(std::move(partial)) {}
    std::vector<JudgeScores> partial;
};

/// Componentwise mean of one judge run per seed; records the seeds.
JudgeScores judge_averaged(std::string_view question, std::string_view trajectory, Judge& judge,
                           std::span<const std::uint64_t, 3> seeds);

/// Componentwise mean of already averaged scores (e.g. across a batch).
JudgeScores mean_scores(std::span<const JudgeScores> scores);

} // namespace agwo
