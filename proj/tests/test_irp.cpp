#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "coref/irp.hpp"

using namespace coref;

namespace {

// one mention per "phrase", phrases laid out back to back
Document doc_of_phrases(const std::vector<std::vector<std::string>>& phrases,
                        std::vector<MentionSpan>* mentions) {
    Document d;
    d.doc_id = "t";
    mentions->clear();
    for (const auto& phrase : phrases) {
        const int start = static_cast<int>(d.tokens.size());
        for (const auto& t : phrase) d.tokens.push_back(t);
        mentions->push_back({start, static_cast<int>(d.tokens.size()) - 1});
    }
    return d;
}

std::vector<std::vector<int>> groups_of(const std::vector<std::vector<std::string>>& phrases,
                                        InclusionMode mode = InclusionMode::TokenSubsequence,
                                        bool excludes_it = true) {
    std::vector<MentionSpan> mentions;
    const Document d = doc_of_phrases(phrases, &mentions);
    return semantic_groups(d, mentions, PronounLexicon::builtin(excludes_it), mode);
}

// literal transitive closure of the pairwise merge relation
std::vector<std::vector<int>> brute_force_groups(const Document& d,
                                                 const std::vector<MentionSpan>& mentions,
                                                 const PronounLexicon& lex, InclusionMode mode) {
    const int n = static_cast<int>(mentions.size());
    auto text = [&](int i) { return mention_text(d, mentions[static_cast<std::size_t>(i)]); };
    auto merges = [&](int i, int j) {
        const std::string a = text(i), b = text(j);
        const bool pa = lex.contains(a), pb = lex.contains(b);
        if (pa != pb) return false;
        if (pa) return a == b;
        if (a == b) return true;
        if (mode == InclusionMode::RawSubstring)
            return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
        const auto ta = lowered_tokens(d, mentions[static_cast<std::size_t>(i)]);
        const auto tb = lowered_tokens(d, mentions[static_cast<std::size_t>(j)]);
        return contains_token_run(ta, tb) || contains_token_run(tb, ta);
    };
    std::vector<int> label(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = i;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (merges(i, j) &&
                    label[static_cast<std::size_t>(i)] != label[static_cast<std::size_t>(j)]) {
                    const int keep = std::min(label[static_cast<std::size_t>(i)],
                                              label[static_cast<std::size_t>(j)]);
                    const int drop = std::max(label[static_cast<std::size_t>(i)],
                                              label[static_cast<std::size_t>(j)]);
                    for (auto& l : label)
                        if (l == drop) l = keep;
                    changed = true;
                }
    }
    std::vector<std::vector<int>> groups;
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        const int root = label[static_cast<std::size_t>(i)];
        if (slot[static_cast<std::size_t>(root)] == -1) {
            slot[static_cast<std::size_t>(root)] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(i);
    }
    return groups;
}

// literal linear-scan version of the quota loop
std::vector<long> brute_force_quotas(const std::vector<long>& sizes, long k) {
    const auto m = static_cast<long>(sizes.size());
    std::vector<long> quota(sizes.size(), 0);
    if (k < m) {
        std::vector<int> order(sizes.size());
        for (std::size_t i = 0; i < sizes.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
        });
        for (long i = 0; i < k; ++i)
            quota[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
        return quota;
    }
    std::vector<long> capacity(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        quota[i] = 1;
        capacity[i] = sizes[i] - 1;
    }
    long r = k - m;
    while (r > 0) {
        long best = -1;
        for (std::size_t i = 0; i < capacity.size(); ++i)
            if (capacity[i] > 0 && (best < 0 || capacity[i] > capacity[static_cast<std::size_t>(best)]))
                best = static_cast<long>(i);
        if (best < 0) break;
        quota[static_cast<std::size_t>(best)] += 1;
        capacity[static_cast<std::size_t>(best)] -= 1;
        --r;
    }
    return quota;
}

void enumerate_size_vectors(long remaining, std::vector<long>& prefix,
                            const std::function<void(const std::vector<long>&)>& visit) {
    if (!prefix.empty()) visit(prefix);
    for (long next = 1; next <= remaining; ++next) {
        prefix.push_back(next);
        enumerate_size_vectors(remaining - next, prefix, visit);
        prefix.pop_back();
    }
}

}  // namespace

TEST_CASE("builtin lexicon follows the 32-entry list, minus 'it' by default") {
    CHECK(PronounLexicon::builtin(false).size() == 32);
    CHECK(PronounLexicon::builtin(true).size() == 31);
    CHECK(is_pronoun("it", false));
    CHECK_FALSE(is_pronoun("it", true));
    CHECK(is_pronoun("its", true));
    CHECK(is_pronoun("itself", true));
    CHECK(is_pronoun("themselves", true));
    CHECK(is_pronoun("that", true));
    CHECK(is_pronoun("this", true));
    CHECK_FALSE(is_pronoun("doctor", true));
    CHECK_FALSE(is_pronoun("the doctor", true));
    for (const char* w : default_pronoun_entries())
        CHECK(is_pronoun(w, false));
}

TEST_CASE("lexicon loads from a plain-text file") {
    const std::string path = "lexicon_test.txt";
    {
        std::ofstream out(path);
        out << "he\nshe\n\nzir\n";
    }
    const auto lex = PronounLexicon::from_file(path);
    CHECK(lex.size() == 3);
    CHECK(lex.contains("zir"));
    CHECK_FALSE(lex.contains("they"));
    {
        std::ofstream out(path);
        out << "He\n";
    }
    CHECK_THROWS_AS(PronounLexicon::from_file(path), DataError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(PronounLexicon::from_file("no_such_lexicon.txt"), DataError);
}

TEST_CASE("contains_token_run") {
    CHECK(contains_token_run({"the", "old", "man"}, {"old", "man"}));
    CHECK(contains_token_run({"the", "old", "man"}, {"the"}));
    CHECK_FALSE(contains_token_run({"the", "old", "man"}, {"the", "man"}));
    CHECK_FALSE(contains_token_run({"old"}, {"old", "man"}));
    CHECK_FALSE(contains_token_run({"the"}, {}));
}

TEST_CASE("semantic grouping: pronoun equality and non-pronoun inclusion") {
    const auto groups = groups_of({{"he"}, {"the", "doctor"}, {"he"}, {"doctor"}});
    REQUIRE(groups.size() == 2);
    CHECK(groups[0] == std::vector<int>{0, 2});
    CHECK(groups[1] == std::vector<int>{1, 3});
}

TEST_CASE("semantic grouping: pronouns never merge with non-pronouns") {
    for (auto mode : {InclusionMode::TokenSubsequence, InclusionMode::RawSubstring}) {
        const auto groups = groups_of({{"he"}, {"the"}}, mode);
        CHECK(groups.size() == 2);
    }
}

TEST_CASE("semantic grouping: inclusion chains close transitively") {
    const auto groups =
        groups_of({{"obama"}, {"barack", "obama"}, {"president", "barack", "obama"}});
    REQUIRE(groups.size() == 1);
    CHECK(groups[0] == std::vector<int>{0, 1, 2});
}

TEST_CASE("inclusion mode changes the verdict on substring-only overlaps") {
    // "rat" is a character substring of "operator" but not a token run
    CHECK(groups_of({{"rat"}, {"operator"}}, InclusionMode::TokenSubsequence).size() == 2);
    CHECK(groups_of({{"rat"}, {"operator"}}, InclusionMode::RawSubstring).size() == 1);
}

TEST_CASE("pronoun_excludes_it moves 'it' to the non-pronoun side") {
    // as a non-pronoun, "it" is a raw substring of "item" and merges; as a
    // pronoun it can never merge with a non-pronoun
    CHECK(groups_of({{"it"}, {"item"}}, InclusionMode::RawSubstring, true).size() == 1);
    CHECK(groups_of({{"it"}, {"item"}}, InclusionMode::RawSubstring, false).size() == 2);
    // "itself" stays a pronoun either way, so the mixed pair never merges
    CHECK(groups_of({{"it"}, {"itself"}}, InclusionMode::RawSubstring, true).size() == 2);
}

TEST_CASE("semantic grouping equals the brute-force transitive closure") {
    const std::vector<std::vector<std::string>> fixture = {
        {"he"},         {"she"},        {"he"},
        {"mira"},       {"mira", "solen"}, {"the", "mira", "solen"},
        {"doctor"},     {"the", "doctor"}, {"them"},
        {"they"},       {"solen"},      {"rat"},
        {"operator"},   {"her"},        {"this"}};
    SplitMix64 rng(99);
    for (int iter = 0; iter < 300; ++iter) {
        const int n = 1 + static_cast<int>(rng.next_below(10));
        std::vector<std::vector<std::string>> phrases;
        for (int i = 0; i < n; ++i)
            phrases.push_back(fixture[rng.next_below(fixture.size())]);
        const auto mode =
            rng.next_below(2) == 0 ? InclusionMode::TokenSubsequence : InclusionMode::RawSubstring;
        std::vector<MentionSpan> mentions;
        const Document d = doc_of_phrases(phrases, &mentions);
        const auto& lex = PronounLexicon::builtin(rng.next_below(2) == 0);
        const auto got = semantic_groups(d, mentions, lex, mode);
        const auto want = brute_force_groups(d, mentions, lex, mode);
        REQUIRE(got == want);
    }
}

TEST_CASE("quota allocation examples") {
    CHECK(allocate_quotas({3, 1}, 3) == std::vector<long>{2, 1});
    CHECK(allocate_quotas({1, 2}, 1) == std::vector<long>{0, 1});
    CHECK(allocate_quotas({2, 2}, 4) == std::vector<long>{2, 2});
    CHECK(allocate_quotas({2, 2, 3}, 2) == std::vector<long>{1, 0, 1});
    CHECK(allocate_quotas({5}, 0) == std::vector<long>{0});
    CHECK_THROWS_AS(allocate_quotas({2, 1}, 4), DataError);
}

TEST_CASE("quota allocation equals the greedy reference for all vectors with total <= 12") {
    std::vector<long> prefix;
    long vectors = 0;
    enumerate_size_vectors(12, prefix, [&](const std::vector<long>& sizes) {
        long total = 0;
        for (long s : sizes) total += s;
        for (long k = 0; k <= total; ++k) {
            const auto got = allocate_quotas(sizes, k);
            const auto want = brute_force_quotas(sizes, k);
            REQUIRE(got == want);
        }
        ++vectors;
    });
    CHECK(vectors == 4095);  // compositions of 1..12
}

TEST_CASE("group_based_sampling draws the quota from each group") {
    std::vector<MentionSpan> mentions;
    const Document d = doc_of_phrases(
        {{"mira"}, {"mira"}, {"mira"}, {"voss"}, {"voss"}, {"kade"}}, &mentions);
    const auto groups = semantic_groups(d, mentions, PronounLexicon::builtin(true),
                                        InclusionMode::TokenSubsequence);
    REQUIRE(groups.size() == 3);
    SplitMix64 rng(5);
    const auto sampled = group_based_sampling(mentions, groups, 4, rng);
    CHECK(sampled.size() == 4);
    // quotas for sizes [3,2,1] and k=4 are [2,1,1]
    std::map<int, int> per_group;
    for (const auto& s : sampled)
        per_group[s.start <= 2 ? 0 : (s.start <= 4 ? 1 : 2)] += 1;
    CHECK(per_group[0] == 2);
    CHECK(per_group[1] == 1);
    CHECK(per_group[2] == 1);
}

TEST_CASE("condense keeps boundaries and hits the exact size") {
    std::vector<MentionSpan> mentions;
    const Document d = doc_of_phrases({{"a"}, {"b"}, {"c"}, {"d"}, {"e"}}, &mentions);
    EngineConfig cfg;

    SplitMix64 rng(1);
    const auto out = condense(d, mentions, 3, cfg, rng);
    REQUIRE(out.size() == 3);
    CHECK(out.front() == mentions.front());
    CHECK(out.back() == mentions.back());

    SplitMix64 rng2(1);
    const auto untouched = condense(d, {mentions[0], mentions[1], mentions[2]}, 3, cfg, rng2);
    CHECK(untouched == std::vector<MentionSpan>{mentions[0], mentions[1], mentions[2]});

    SplitMix64 rng3(1);
    const auto only_ends = condense(d, {mentions[0], mentions[1], mentions[2], mentions[3]}, 2,
                                    cfg, rng3);
    CHECK(only_ends == std::vector<MentionSpan>{mentions[0], mentions[3]});
}

TEST_CASE("condense validates its configuration") {
    std::vector<MentionSpan> mentions;
    const Document d = doc_of_phrases({{"a"}, {"b"}, {"c"}}, &mentions);
    SplitMix64 rng(1);
    CHECK_THROWS_AS(condense(d, mentions, 1, PronounLexicon::builtin(true),
                             InclusionMode::TokenSubsequence, IrpMode::GroupBased, rng),
                    ConfigError);
    CHECK_THROWS_AS(condense(d, mentions, 2, PronounLexicon::builtin(true),
                             InclusionMode::TokenSubsequence, IrpMode::Off, rng),
                    ConfigError);
}

TEST_CASE("condense invariants over random inputs, both sampling modes") {
    SplitMix64 rng(77);
    const std::vector<std::vector<std::string>> pool = {
        {"he"}, {"she"}, {"mira"}, {"mira", "solen"}, {"voss"}, {"the", "voss", "kade"}, {"kade"}};
    for (int iter = 0; iter < 200; ++iter) {
        const int n = 1 + static_cast<int>(rng.next_below(24));
        std::vector<std::vector<std::string>> phrases;
        for (int i = 0; i < n; ++i) phrases.push_back(pool[rng.next_below(pool.size())]);
        std::vector<MentionSpan> mentions;
        const Document d = doc_of_phrases(phrases, &mentions);
        EngineConfig cfg;
        cfg.irp_mode = rng.next_below(2) == 0 ? IrpMode::GroupBased : IrpMode::Random;
        const int tau2 = 2 + static_cast<int>(rng.next_below(8));
        const std::uint64_t seed = rng.next();

        SplitMix64 r1(seed), r2(seed);
        const auto out = condense(d, mentions, tau2, cfg, r1);
        const auto again = condense(d, mentions, tau2, cfg, r2);
        CHECK(out == again);  // fixed seed, fixed output

        REQUIRE(out.size() == std::min<std::size_t>(mentions.size(), static_cast<std::size_t>(tau2)));
        CHECK(std::is_sorted(out.begin(), out.end()));
        const std::set<MentionSpan> input_set(mentions.begin(), mentions.end());
        for (const auto& s : out) CHECK(input_set.count(s) == 1);
        auto sorted = mentions;
        std::sort(sorted.begin(), sorted.end());
        CHECK(out.front() == sorted.front());
        CHECK(out.back() == sorted.back());
    }
}

TEST_CASE("every group contributes when the interior budget covers all groups") {
    // interior after sorting: 5 distinct-text singles + one pair => 6 groups
    std::vector<MentionSpan> mentions;
    const Document d = doc_of_phrases(
        {{"aaa"}, {"bbb"}, {"ccc"}, {"ddd"}, {"eee"}, {"eee"}, {"fff"}, {"ggg"}, {"hhh"}},
        &mentions);
    EngineConfig cfg;
    SplitMix64 rng(3);
    const auto out = condense(d, mentions, 8, cfg, rng);  // k = 6 interior slots, 6 groups
    REQUIRE(out.size() == 8);
    // with k >= group count every interior text must appear
    std::set<std::string> texts;
    for (const auto& s : out) texts.insert(mention_text(d, s));
    for (const char* t : {"bbb", "ccc", "ddd", "eee", "fff", "ggg"}) CHECK(texts.count(t) == 1);
}
