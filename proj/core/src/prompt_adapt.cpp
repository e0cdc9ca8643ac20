#include "agwo/prompt_adapt.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace agwo {

AdaptationInstruction AdaptationInstruction::builtin() { return {builtin_adaptation_instruction()}; }

std::string_view to_string(RejectionReason r) noexcept {
    switch (r) {
    case RejectionReason::empty: return "empty";
    case RejectionReason::placeholder_lost: return "placeholder-lost";
    case RejectionReason::over_length: return "over-length";
    case RejectionReason::provider_failure: return "provider-failure";
    }
    return "?";
}

DecodingConfig PromptEditor::default_decoding() {
    DecodingConfig d;
    d.temperature = 0.7;
    d.top_p = 1.0;
    d.frequency_penalty = 0.0;
    d.presence_penalty = 0.0;
    d.max_tokens = 2048;
    return d;
}

GenerationRequest adaptation_request(const PromptTemplate& current, std::span<const PromptTemplate> elites,
                                     const AdaptationInstruction& instruction, const PromptEditor& editor,
                                     std::uint64_t seed) {
    std::ostringstream user;
    user << "<current_prompt>\n" << current.text << "\n</current_prompt>\n\n";
    user << "Ranked templates, best first:\n";
    for (std::size_t i = 0; i < elites.size(); ++i)
        user << "<rank_" << i + 1 << ">\n" << elites[i].text << "\n</rank_" << i + 1 << ">\n";
    if (!current.placeholders.empty()) {
        user << "\nPlaceholders that must appear exactly once:";
        for (const auto& p : current.placeholders) user << ' ' << p;
        user << '\n';
    }
    GenerationRequest req;
    req.model = editor.model;
    req.system_text = instruction.resource.text;
    req.user_text = user.str();
    req.decoding = editor.decoding;
    req.seed = seed;
    return req;
}

std::string parse_revised_prompt(std::string_view reply) {
    static constexpr std::string_view open = "<revised_prompt>";
    static constexpr std::string_view close = "</revised_prompt>";
    std::string_view body = reply;
    if (const auto b = reply.find(open); b != std::string_view::npos) {
        body = reply.substr(b + open.size());
        if (const auto e = body.find(close); e != std::string_view::npos) body = body.substr(0, e);
    }
    const auto first = body.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = body.find_last_not_of(" \t\r\n");
    return std::string(body.substr(first, last - first + 1));
}

std::size_t adaptation_length_budget(const PromptTemplate& current, std::span<const PromptTemplate> elites) {
    std::size_t longest = 0;
    for (const auto& e : elites) longest = std::max(longest, e.text.size());
    if (elites.empty()) longest = current.text.size();
    return 2 * longest;
}

namespace {

AdaptationOutcome reject(const PromptTemplate& current, RejectionReason why, std::string raw) {
    return {current, false, why, std::move(raw)};
}

} // namespace

AdaptationOutcome validate_adaptation(const PromptTemplate& current, std::span<const PromptTemplate> elites,
                                      std::string_view reply, int iteration) {
    PromptTemplate candidate = current;
    candidate.text = parse_revised_prompt(reply);
    if (candidate.text.empty()) return reject(current, RejectionReason::empty, std::string(reply));
    for (const auto& p : candidate.placeholders)
        if (count_occurrences(candidate.text, p) != 1)
            return reject(current, RejectionReason::placeholder_lost, std::string(reply));
    if (candidate.text.size() > adaptation_length_budget(current, elites))
        return reject(current, RejectionReason::over_length, std::string(reply));
    candidate.lineage.push_back({iteration, "adapt"});
    return {std::move(candidate), true, std::nullopt, std::string(reply)};
}

AdaptationOutcome adapt_prompt(const PromptTemplate& current, std::span<const PromptTemplate> elites,
                               const AdaptationInstruction& instruction, const PromptEditor& editor, Rng& rng,
                               int iteration) {
    std::string reply;
    try {
        reply = editor.client.generate(adaptation_request(current, elites, instruction, editor, rng.next_u64())).text;
    } catch (const Error& e) {
        return reject(current, RejectionReason::provider_failure, e.what());
    }
    return validate_adaptation(current, elites, reply, iteration);
}

// ---------------------------------------------------------------------------

std::vector<PromptTemplate> default_prompt_pool() {
    static const char* const texts[] = {
        "Solve the following problem. Think step by step, showing each intermediate calculation, "
        "then give the final answer on its own line as \"The answer is <value>.\"\n\nQuestion: {question}",
        "Read the question carefully and list the quantities it mentions. Decide which operations connect "
        "them, carry them out one at a time, and finish with \"The answer is <value>.\"\n\nQuestion: {question}",
        "Question: {question}\n\nBreak the problem into smaller sub-problems. Solve each one, check that the "
        "result makes sense in context, and state the final result as \"The answer is <value>.\"",
        "You are a careful math tutor. First restate what is being asked, then work through the solution step "
        "by step, and verify the result before writing \"The answer is <value>.\"\n\nProblem: {question}",
        "Problem: {question}\n\nIdentify the relevant information and ignore details that do not affect the "
        "answer. Write out your reasoning step by step and end with \"The answer is <value>.\""};
    std::vector<PromptTemplate> pool;
    for (const char* t : texts) {
        PromptTemplate p;
        p.text = t;
        pool.push_back(std::move(p));
    }
    return pool;
}

std::vector<PromptTemplate> load_prompt_pool(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read prompt pool " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ParseError(path.string() + ": prompt pool must be a JSON array");
    std::vector<PromptTemplate> pool;
    for (const auto& item : j) {
        PromptTemplate t;
        if (item.is_string())
            t.text = item.get<std::string>();
        else
            t = item.get<PromptTemplate>();
        if (auto v = t.violation()) throw ConfigError(path.string() + ": invalid template: " + *v);
        pool.push_back(std::move(t));
    }
    return pool;
}

namespace {

PromptTemplate generate_template(const PromptGenerator& gen, std::size_t index, Rng& rng) {
    GenerationRequest req;
    req.model = gen.editor.model;
    req.system_text =
        "You write instructions for a step-by-step reasoning assistant. Reply with the instruction only.";
    req.decoding = gen.editor.decoding;
    for (int attempt = 0; attempt < 3; ++attempt) {
        req.user_text = "Write instruction variant #" + std::to_string(index + 1) +
                        " telling the assistant how to reason through a question and state its final answer.";
        req.seed = rng.next_u64();
        auto text = parse_revised_prompt(gen.editor.client.generate(req).text);
        PromptTemplate t;
        t.text = text;
        if (count_occurrences(text, kQuestionSlot) == 0 && !text.empty())
            t.text = text + "\n\nQuestion: " + std::string(kQuestionSlot);
        if (t.valid()) return t;
    }
    throw ProtocolError("template generator did not produce a valid template");
}

} // namespace

std::vector<PromptTemplate> init_prompt_pool(std::span<const PromptTemplate> pool, const PromptGenerator* generator,
                                             std::size_t count, Rng& rng) {
    std::vector<PromptTemplate> out;
    out.reserve(count);
    if (pool.empty()) {
        if (!generator) throw ConfigError("prompt pool is empty and no template generator is configured");
        for (std::size_t i = 0; i < count; ++i) out.push_back(generate_template(*generator, i, rng));
        return out;
    }
    for (const auto& t : pool)
        if (auto v = t.violation()) throw ConfigError("invalid template in pool: " + *v);

    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    for (std::size_t i = 0; i < count && i < idx.size(); ++i) out.push_back(pool[idx[i]]);
    while (out.size() < count)
        out.push_back(pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))]);
    return out;
}

} // namespace agwo
