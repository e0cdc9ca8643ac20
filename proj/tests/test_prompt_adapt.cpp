#include "agwo/mock_backend.hpp"
#include "agwo/prompt_adapt.hpp"
#include "agwo/rng.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace agwo;

namespace {

PromptTemplate tmpl(std::string text, std::vector<std::string> placeholders = {"{question}"}) {
    PromptTemplate t;
    t.text = std::move(text);
    t.placeholders = std::move(placeholders);
    return t;
}

const std::string kBefore =
    "You are given various scenarios involving numerical problems related to quantities, collections, and "
    "arithmetic operations. Your task is to answer questions based on the provided information for each "
    "scenario. Pay attention to details such as initial amounts, changes over time or circumstances (e.g., "
    "additions or subtractions), and specific requests regarding total counts. Use basic mathematical reasoning "
    "and calculations when determining your answers.";

const std::string kAfter =
    "You are presented with various scenarios that involve numerical problems related to quantities and "
    "arithmetic operations. Your task is to answer questions based on the provided information for each "
    "scenario. Start by carefully reading each question to understand what is being asked. Identify all relevant "
    "numerical data and quantities mentioned. Determine which mathematical operations (addition, subtraction, "
    "multiplication, division) are needed based on keywords or phrases that indicate relationships between "
    "numbers. Perform calculations step-by-step, keeping track of intermediate results if necessary, and "
    "double-check your final answer against the context of the problem to ensure it makes sense. Pay attention "
    "to details such as initial amounts, changes over time, and specific requests regarding total counts, using "
    "basic mathematical reasoning and calculations to determine your answers.";

} // namespace

TEST(ParseRevised, TaggedAndUntagged) {
    EXPECT_EQ(parse_revised_prompt("noise <revised_prompt>\n new text \n</revised_prompt> tail"), "new text");
    EXPECT_EQ(parse_revised_prompt("  plain reply \n"), "plain reply");
    EXPECT_EQ(parse_revised_prompt("<revised_prompt>unterminated"), "unterminated");
    EXPECT_EQ(parse_revised_prompt(" \n "), "");
}

TEST(Validate, AppendixEditIsAccepted) {
    const auto before = tmpl(kBefore, {});
    const std::vector<PromptTemplate> elites{before};
    const auto out = validate_adaptation(before, elites, "<revised_prompt>" + kAfter + "</revised_prompt>", 1);
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(out.new_prompt.text, kAfter);
    ASSERT_EQ(out.new_prompt.lineage.size(), 1u);
    EXPECT_EQ(out.new_prompt.lineage[0].iteration, 1);
}

TEST(Validate, RejectionReasons) {
    const auto cur = tmpl("Think step by step. {question}");
    const std::vector<PromptTemplate> elites{cur};

    auto out = validate_adaptation(cur, elites, "   ", 2);
    EXPECT_FALSE(out.accepted);
    EXPECT_EQ(out.rejection, RejectionReason::empty);
    EXPECT_EQ(out.new_prompt, cur);

    out = validate_adaptation(cur, elites, "Think carefully.", 2);
    EXPECT_EQ(out.rejection, RejectionReason::placeholder_lost);
    out = validate_adaptation(cur, elites, "{question} and again {question}", 2);
    EXPECT_EQ(out.rejection, RejectionReason::placeholder_lost);

    out = validate_adaptation(cur, elites, std::string(200, 'x') + "{question}", 2);
    EXPECT_EQ(out.rejection, RejectionReason::over_length);
    EXPECT_EQ(out.new_prompt, cur);

    out = validate_adaptation(cur, elites, "Reason in short steps. {question}", 2);
    EXPECT_TRUE(out.accepted);
    EXPECT_FALSE(out.rejection.has_value());
}

TEST(Validate, FuzzedRepliesKeepInvariants) {
    Rng rng(1729);
    const auto cur = tmpl("Work it out step by step, then answer. {question}");
    const std::vector<PromptTemplate> elites{cur, tmpl("Answer: {question}")};
    const std::vector<std::string> pieces{"{question}", "{question", "question}", "<revised_prompt>",
                                          "</revised_prompt>", " ", "\n", "step", "Answer.", "{", "}", "\t",
                                          std::string(40, 'z'), "\xc3\xa9", ""};
    int accepted = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::string reply;
        const auto n = rng.uniform_int(0, 12);
        for (int i = 0; i < n; ++i)
            reply += pieces[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pieces.size()) - 1))];
        const auto out = validate_adaptation(cur, elites, reply, 3);
        ASSERT_TRUE(out.new_prompt.valid()) << reply;
        ASSERT_LE(out.new_prompt.text.size(), adaptation_length_budget(cur, elites));
        if (out.accepted) {
            ++accepted;
        } else {
            ASSERT_EQ(out.new_prompt, cur);
            ASSERT_TRUE(out.rejection.has_value());
        }
    }
    EXPECT_GT(accepted, 0);
}

TEST(LengthBudget, TwiceLongestElite) {
    const auto cur = tmpl("abc {question}");
    const std::vector<PromptTemplate> elites{tmpl("12345 {question}"), tmpl("1 {question}")};
    EXPECT_EQ(adaptation_length_budget(cur, elites), 32u);
    EXPECT_EQ(adaptation_length_budget(cur, {}), 28u);
}

TEST(AdaptPrompt, RequestShapeAndAcceptance) {
    GenerationRequest seen;
    auto backend = std::make_shared<FunctionBackend>([&](const GenerationRequest& r) {
        seen = r;
        GenerationResponse g;
        g.text = "<revised_prompt>List the numbers first. {question}</revised_prompt>";
        g.provider_id = "fn";
        return g;
    });
    LlmClient client(backend);
    PromptEditor editor{client, "editor"};
    const auto cur = tmpl("Solve: {question}");
    const std::vector<PromptTemplate> elites{tmpl("Best: {question}"), tmpl("Second: {question}")};
    Rng rng(5);
    const auto out = adapt_prompt(cur, elites, AdaptationInstruction::builtin(), editor, rng, 4);
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(out.new_prompt.text, "List the numbers first. {question}");
    EXPECT_EQ(seen.model, "editor");
    EXPECT_EQ(seen.system_text, builtin_adaptation_instruction().text);
    EXPECT_NE(seen.user_text.find("<rank_1>\nBest: {question}"), std::string::npos);
    EXPECT_NE(seen.user_text.find("<rank_2>\nSecond: {question}"), std::string::npos);
    EXPECT_NE(seen.user_text.find("<current_prompt>\nSolve: {question}"), std::string::npos);
    EXPECT_EQ(seen.decoding.temperature, 0.7);
}

TEST(AdaptPrompt, ProviderFailureFallsBack) {
    ClientOptions o;
    o.sleep = [](auto) {};
    LlmClient client(std::make_shared<FunctionBackend>([](const auto&) -> GenerationResponse {
                         throw TransportError("down");
                     }),
                     o);
    PromptEditor editor{client, "editor"};
    const auto cur = tmpl("Solve: {question}");
    Rng rng(1);
    const auto out = adapt_prompt(cur, {}, AdaptationInstruction::builtin(), editor, rng, 1);
    EXPECT_FALSE(out.accepted);
    EXPECT_EQ(out.rejection, RejectionReason::provider_failure);
    EXPECT_EQ(out.new_prompt, cur);
}

TEST(AdaptPrompt, MockEditorKeepsPlaceholder) {
    LlmClient client(std::make_shared<MockEditorBackend>());
    PromptEditor editor{client, "mock-editor"};
    const auto cur = default_prompt_pool()[0];
    const std::vector<PromptTemplate> elites{default_prompt_pool()[1]};
    Rng rng(2);
    const auto out = adapt_prompt(cur, elites, AdaptationInstruction::builtin(), editor, rng, 1);
    EXPECT_TRUE(out.accepted) << out.raw_response;
    EXPECT_TRUE(out.new_prompt.valid());
}

TEST(InitPool, DefaultPoolGivesDistinctTemplates) {
    const auto pool = default_prompt_pool();
    ASSERT_EQ(pool.size(), 5u);
    for (const auto& t : pool) EXPECT_TRUE(t.valid());
    Rng rng(3);
    const auto drawn = init_prompt_pool(pool, nullptr, 5, rng);
    std::set<std::string> distinct;
    for (const auto& t : drawn) distinct.insert(t.text);
    EXPECT_EQ(distinct.size(), 5u);
}

TEST(InitPool, RepeatsWhenPoolIsSmall) {
    const std::vector<PromptTemplate> pool{tmpl("A {question}"), tmpl("B {question}")};
    Rng rng(4);
    const auto drawn = init_prompt_pool(pool, nullptr, 7, rng);
    ASSERT_EQ(drawn.size(), 7u);
    std::set<std::string> distinct;
    for (const auto& t : drawn) distinct.insert(t.text);
    EXPECT_EQ(distinct.size(), 2u);
}

TEST(InitPool, ScriptedGeneratorProducesFiveTemplates) {
    std::vector<std::string> script;
    for (int i = 0; i < 5; ++i) script.push_back("Instruction variant " + std::to_string(i) + ": reason carefully.");
    LlmClient client(std::make_shared<ScriptedBackend>(script));
    PromptGenerator gen{PromptEditor{client, "editor"}};
    Rng rng(6);
    const auto drawn = init_prompt_pool({}, &gen, 5, rng);
    std::set<std::string> distinct;
    for (const auto& t : drawn) {
        EXPECT_TRUE(t.valid());
        distinct.insert(t.text);
    }
    EXPECT_EQ(distinct.size(), 5u);
}

TEST(InitPool, EmptyWithoutGeneratorIsConfigError) {
    Rng rng(1);
    EXPECT_THROW(init_prompt_pool({}, nullptr, 5, rng), ConfigError);
    const std::vector<PromptTemplate> bad{tmpl("no slot here")};
    EXPECT_THROW(init_prompt_pool(bad, nullptr, 5, rng), ConfigError);
}

TEST(LoadPool, StringsAndObjects) {
    agwo::testing::TempDir dir;
    agwo::testing::spit(dir / "pool.json",
                        R"(["Think. {question}", {"text": "Plain <q>", "placeholders": ["<q>"]}])");
    const auto pool = load_prompt_pool(dir / "pool.json");
    ASSERT_EQ(pool.size(), 2u);
    EXPECT_EQ(pool[1].placeholders, (std::vector<std::string>{"<q>"}));
    agwo::testing::spit(dir / "bad.json", R"(["no slot"])");
    EXPECT_THROW(load_prompt_pool(dir / "bad.json"), ConfigError);
    agwo::testing::spit(dir / "broken.json", "[");
    EXPECT_THROW(load_prompt_pool(dir / "broken.json"), ParseError);
    EXPECT_THROW(load_prompt_pool(dir / "missing.json"), IoError);
}
