#include "agwo/dataset.hpp"
#include "agwo/rng.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace agwo;
using agwo::testing::frozen;

namespace {

std::vector<QAItem> numbered(std::size_t n) {
    std::vector<QAItem> items;
    for (std::size_t i = 0; i < n; ++i) items.push_back({"q" + std::to_string(i), "question " + std::to_string(i), "1"});
    return items;
}

std::set<std::string> ids_of(const std::vector<QAItem>& items) {
    std::set<std::string> s;
    for (const auto& i : items) s.insert(i.id);
    return s;
}

} // namespace

TEST(Parse, TiffanyLine) {
    const auto items = parse_dataset(
        R"({"id": "gsm-1", "question": "Tiffany was collecting cans for recycling. On monday she had 3 bags of cans. The next day she found 7 more bags worth of cans. How many bags would she have altogether?", "answer": "10"})");
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].id, "gsm-1");
    EXPECT_EQ(items[0].gold, "10");
    EXPECT_EQ(items[0].task_kind, TaskKind::numeric);
}

TEST(Parse, DefaultsAndKinds) {
    const auto items = parse_dataset("\n{\"question\": \"a\", \"answer\": 5}\n\n"
                                     "{\"question\": \"b\", \"answer\": \"B\", \"task_kind\": \"multiple-choice\"}\r\n");
    ASSERT_EQ(items.size(), 2u);
    EXPECT_EQ(items[0].id, "2");
    EXPECT_EQ(items[0].gold, "5");
    EXPECT_EQ(items[1].id, "4");
    EXPECT_EQ(items[1].task_kind, TaskKind::multiple_choice);
}

TEST(Parse, ErrorsCarryLineNumbers) {
    auto expect_parse_error = [](const std::string& text, const std::string& where) {
        try {
            parse_dataset(text, {}, "data.jsonl");
            FAIL() << "no error for " << text;
        } catch (const ParseError& e) {
            EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
        }
    };
    expect_parse_error("{\"question\": \"a\", \"answer\": \"1\"}\n{broken", "data.jsonl:2");
    expect_parse_error("[1, 2]", "data.jsonl:1");
    expect_parse_error("{\"answer\": \"1\"}", "data.jsonl:1");
    expect_parse_error("{\"question\": \"a\"}", "data.jsonl:1");
    expect_parse_error("{\"question\": \"a\", \"answer\": \"1\", \"task_kind\": \"essay\"}", "data.jsonl:1");
}

TEST(Parse, GoldOptionalWhenNotRequired) {
    LoadOptions o;
    o.require_gold = false;
    EXPECT_FALSE(parse_dataset("{\"question\": \"a\"}", o)[0].gold.has_value());
}

TEST(Parse, DuplicateIdsAndEmpty) {
    EXPECT_THROW(parse_dataset("{\"id\":\"x\",\"question\":\"a\",\"answer\":\"1\"}\n"
                               "{\"id\":\"x\",\"question\":\"b\",\"answer\":\"2\"}"),
                 ConfigError);
    EXPECT_THROW(parse_dataset("\n  \n"), ConfigError);
}

TEST(Files, WriteThenLoadRoundTrips) {
    agwo::testing::TempDir dir;
    const auto items = synthetic_arithmetic_dataset(12, 3);
    write_dataset(dir / "d.jsonl", items);
    EXPECT_EQ(load_dataset(dir / "d.jsonl"), items);
    EXPECT_THROW(load_dataset(dir / "missing.jsonl"), IoError);
}

TEST(Synthetic, DeterministicAndWellFormed) {
    const auto a = synthetic_arithmetic_dataset(50, 9);
    EXPECT_EQ(a, synthetic_arithmetic_dataset(50, 9));
    EXPECT_NE(a, synthetic_arithmetic_dataset(50, 10));
    EXPECT_EQ(ids_of(a).size(), 50u);
    for (const auto& item : a) {
        ASSERT_TRUE(item.gold.has_value());
        EXPECT_TRUE(canonical_number(*item.gold).has_value());
    }
}

TEST(Split, SizesMatchOracle) {
    for (const auto& [n_str, expected] : frozen()["split_sizes"].items()) {
        const auto n = static_cast<std::size_t>(std::stoul(n_str));
        const auto s = make_split(numbered(n), {SplitMode::holdout, 0});
        EXPECT_EQ(s.pool.size(), expected.get<std::size_t>()) << n;
        EXPECT_EQ(s.pool.size() + s.test.size(), n);
    }
}

TEST(Split, HundredItemsGiveTwentyEighty) {
    const auto s = make_split(numbered(100), {SplitMode::holdout, 42});
    EXPECT_EQ(s.pool.size(), 20u);
    EXPECT_EQ(s.test.size(), 80u);
}

TEST(Split, PartitionPropertyFuzz) {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(5, 300));
        const auto items = numbered(n);
        const SplitSpec spec{SplitMode::holdout, rng.next_u64()};
        const auto s = make_split(items, spec);
        const auto pool = ids_of(s.pool), test = ids_of(s.test);
        ASSERT_EQ(pool.size() + test.size(), n);
        for (const auto& id : pool) ASSERT_FALSE(test.contains(id));
        ASSERT_EQ(make_split(items, spec).pool, s.pool);
        EXPECT_NO_THROW(check_disjoint(s.pool, s.test));
    }
}

TEST(Split, KeepsDatasetOrder) {
    const auto s = make_split(numbered(40), {SplitMode::holdout, 1});
    auto index = [](const QAItem& i) { return std::stoi(i.id.substr(1)); };
    for (std::size_t i = 1; i < s.pool.size(); ++i) EXPECT_LT(index(s.pool[i - 1]), index(s.pool[i]));
    for (std::size_t i = 1; i < s.test.size(); ++i) EXPECT_LT(index(s.test[i - 1]), index(s.test[i]));
}

TEST(Split, Errors) {
    EXPECT_THROW(make_split(numbered(4), {SplitMode::holdout, 0}), ConfigError);
    EXPECT_THROW(make_split(numbered(10), {SplitMode::official, 0}), ConfigError);
}

TEST(Leakage, OverlapIsRefused) {
    auto pool = numbered(3);
    auto test = numbered(5);
    EXPECT_THROW(official_split(pool, test), LeakageError);
    test.erase(test.begin(), test.begin() + 3);
    const auto s = official_split(pool, test);
    EXPECT_EQ(s.test.size(), 2u);
    const std::vector<std::string> ids{"q4"};
    EXPECT_THROW(check_disjoint_ids(ids, test), LeakageError);
}
