#include "agwo/dataset.hpp"

#include "agwo/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace agwo {

std::vector<QAItem> parse_dataset(std::string_view jsonl, const LoadOptions& options, std::string_view source) {
    std::vector<QAItem> items;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= jsonl.size()) {
        const auto nl = jsonl.find('\n', pos);
        auto line = jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? jsonl.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        const auto where = std::string(source) + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(where + ": malformed JSON: " + e.what());
        }
        if (!j.is_object()) throw ParseError(where + ": expected a JSON object");

        QAItem item;
        try {
            if (auto it = j.find("id"); it != j.end() && !it->is_null())
                item.id = it->is_string() ? it->get<std::string>() : it->dump();
            else
                item.id = std::to_string(line_no);
            item.question = j.at("question").get<std::string>();
            if (auto it = j.find("answer"); it != j.end() && !it->is_null())
                item.gold = it->is_string() ? it->get<std::string>() : it->dump();
            item.task_kind = j.contains("task_kind") ? parse_task_kind(j.at("task_kind").get<std::string>())
                                                     : options.default_kind;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (item.question.empty()) throw ParseError(where + ": empty question");
        if (options.require_gold && (!item.gold || item.gold->empty()))
            throw ParseError(where + ": missing answer");
        if (!seen.insert(item.id).second) throw ConfigError(where + ": duplicate id '" + item.id + "'");
        items.push_back(std::move(item));
    }
    if (items.empty()) throw ConfigError(std::string(source) + ": dataset is empty");
    return items;
}

std::vector<QAItem> load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read dataset " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str(), options, path.string());
}

void write_dataset(const std::filesystem::path& path, std::span<const QAItem> items) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& it : items) {
        nlohmann::json j = {{"id", it.id}, {"question", it.question}, {"task_kind", to_string(it.task_kind)}};
        if (it.gold) j["answer"] = *it.gold;
        out << j.dump() << '\n';
    }
}

std::vector<QAItem> synthetic_arithmetic_dataset(std::size_t count, std::uint64_t seed) {
    static const char* const names[] = {"Tiffany", "Marcus", "Priya", "Jonas", "Amara", "Kenji", "Lucia", "Omar"};
    static const char* const things[] = {"bags of cans", "boxes of pencils", "jars of jam", "crates of apples",
                                         "stacks of books", "packs of cards"};
    Rng rng(derive_seed(seed, {hash_string("synthetic-arithmetic")}));
    std::vector<QAItem> items;
    items.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto* name = names[rng.uniform_int(0, std::size(names) - 1)];
        const auto* thing = things[rng.uniform_int(0, std::size(things) - 1)];
        const auto a = rng.uniform_int(2, 60);
        const auto b = rng.uniform_int(2, 60);
        const auto distractor = rng.uniform_int(2, 90);
        const bool add = rng.uniform() < 0.5 || b > a;
        std::ostringstream q;
        q << name << " had " << a << ' ' << thing << " on Monday. ";
        if (add)
            q << "The next day " << name << " got " << b << " more " << thing << " and " << distractor
              << " unrelated bottles. How many " << thing << " did " << name << " have altogether?";
        else
            q << "The next day " << name << " gave away " << b << ' ' << thing << " and found " << distractor
              << " unrelated bottles. How many " << thing << " were left?";
        items.push_back({"syn-" + std::to_string(i + 1), q.str(), std::to_string(add ? a + b : a - b),
                         TaskKind::numeric});
    }
    return items;
}

Split make_split(std::span<const QAItem> items, const SplitSpec& spec) {
    if (spec.mode == SplitMode::official)
        throw ConfigError("official splits come from files; use official_split");
    const auto n = items.size();
    if (n < 5) throw ConfigError("hold-out split needs at least 5 items, got " + std::to_string(n));
    const auto pool_size =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) / 5.0)));

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(spec.seed, {hash_string("holdout-split")}));
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

    std::vector<bool> in_pool(n, false);
    for (std::size_t i = 0; i < pool_size; ++i) in_pool[idx[i]] = true;
    Split s;
    for (std::size_t i = 0; i < n; ++i) (in_pool[i] ? s.pool : s.test).push_back(items[i]);
    return s;
}

void check_disjoint_ids(std::span<const std::string> pool_ids, std::span<const QAItem> test) {
    std::unordered_set<std::string_view> ids(pool_ids.begin(), pool_ids.end());
    for (const auto& t : test)
        if (ids.contains(t.id)) throw LeakageError("item '" + t.id + "' is in both the optimization pool and the test set");
}

void check_disjoint(std::span<const QAItem> pool, std::span<const QAItem> test) {
    std::vector<std::string> ids;
    ids.reserve(pool.size());
    for (const auto& p : pool) ids.push_back(p.id);
    check_disjoint_ids(ids, test);
}

Split official_split(std::vector<QAItem> pool, std::vector<QAItem> test) {
    check_disjoint(pool, test);
    return {std::move(pool), std::move(test)};
}

} // namespace agwo
