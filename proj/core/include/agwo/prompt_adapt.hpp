#pragma once

// LLM-driven prompt edits guided by the elite prompts, wrapped in a
// structural validation layer that falls back to the unchanged prompt.

#include "agwo/agent_space.hpp"
#include "agwo/provider.hpp"
#include "agwo/resources.hpp"

#include <filesystem>
#include <optional>
#include <span>

namespace agwo {

enum class EditKind { reorder_steps, paraphrase, adjust_format_constraints };

struct AdaptationInstruction {
    Resource resource;
    /// Always the three kinds above; recorded for audit, not enforced semantically.
    std::vector<EditKind> allowed_edits{EditKind::reorder_steps, EditKind::paraphrase,
                                        EditKind::adjust_format_constraints};

    static AdaptationInstruction builtin();
};

enum class RejectionReason { empty, placeholder_lost, over_length, provider_failure };
std::string_view to_string(RejectionReason r) noexcept;

struct AdaptationOutcome {
    PromptTemplate new_prompt;
    bool accepted = false;
    std::optional<RejectionReason> rejection;
    std::string raw_response;
};

/// Which model edits prompts and how it decodes.
struct PromptEditor {
    LlmClient& client;
    std::string model;
    DecodingConfig decoding = default_decoding();

    /// Temperature 0.7, top_p 1, no penalties, 2048 tokens.
    static DecodingConfig default_decoding();
};

/// The request sent to the editor: instruction as system text, the current
/// prompt and the elites (best first) as tagged blocks in the user text.
GenerationRequest adaptation_request(const PromptTemplate& current, std::span<const PromptTemplate> elites,
                                     const AdaptationInstruction& instruction, const PromptEditor& editor,
                                     std::uint64_t seed);

/// Text between <revised_prompt> tags, or the whole reply when untagged.
std::string parse_revised_prompt(std::string_view reply);

/// Upper bound on edited prompt length: twice the longest elite (or the
/// current prompt when no elites are given), in characters.
std::size_t adaptation_length_budget(const PromptTemplate& current, std::span<const PromptTemplate> elites);

/// Never throws for provider trouble: failures come back as a rejected
/// outcome carrying the input prompt. Accepted edits append a lineage entry
/// for `iteration`.
AdaptationOutcome adapt_prompt(const PromptTemplate& current, std::span<const PromptTemplate> elites,
                               const AdaptationInstruction& instruction, const PromptEditor& editor, Rng& rng,
                               int iteration);

/// Validation half of adapt_prompt, exposed for fuzzing.
AdaptationOutcome validate_adaptation(const PromptTemplate& current, std::span<const PromptTemplate> elites,
                                      std::string_view reply, int iteration);

/// Five step-by-step chain-of-thought templates with a {question} slot.
std::vector<PromptTemplate> default_prompt_pool();

/// JSON array of strings or of {"text": ..., "placeholders": [...]} objects.
std::vector<PromptTemplate> load_prompt_pool(const std::filesystem::path& path);

/// Asks the editor model for fresh instructions and wraps each into a template.
struct PromptGenerator {
    PromptEditor editor;
};

/// Draws `count` templates from `pool` (a random permutation when the pool is
/// large enough, every entry plus uniform repeats otherwise). With an empty
/// pool the generator is used; with neither, ConfigError.
std::vector<PromptTemplate> init_prompt_pool(std::span<const PromptTemplate> pool, const PromptGenerator* generator,
                                             std::size_t count, Rng& rng);

} // namespace agwo
