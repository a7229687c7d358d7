#pragma once

#include <array>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "coref/core.hpp"
#include "coref/rng.hpp"

namespace coref {

// Closed-class pronoun list used by the condensation grouping. "it" doubles
// as an expletive far too often, so the default lexicon drops it
// (pronoun_excludes_it); "its" and "itself" stay either way.
inline const std::array<const char*, 32>& default_pronoun_entries() {
    static const std::array<const char*, 32> words = {
        "i",        "me",         "my",   "mine", "myself",  "you",        "your", "yours",
        "yourself", "yourselves", "he",   "him",  "his",     "himself",    "she",  "her",
        "hers",     "herself",    "it",   "its",  "itself",  "we",         "us",   "our",
        "ours",     "ourselves",  "they", "them", "their",   "themselves", "that", "this"};
    return words;
}

class PronounLexicon {
public:
    static const PronounLexicon& builtin(bool excludes_it) {
        static const PronounLexicon with_it = make_builtin(false);
        static const PronounLexicon without_it = make_builtin(true);
        return excludes_it ? without_it : with_it;
    }

    // One lowercase entry per line; blank lines skipped.
    static PronounLexicon from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open pronoun lexicon '" + path + "'");
        PronounLexicon lex;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            for (char c : line)
                if (std::isupper(static_cast<unsigned char>(c)))
                    throw DataError("pronoun lexicon '" + path + "': entry '" + line +
                                    "' is not lowercase");
            lex.entries_.insert(line);
        }
        return lex;
    }

    bool contains(const std::string& text) const { return entries_.count(text) > 0; }
    std::size_t size() const { return entries_.size(); }

private:
    static PronounLexicon make_builtin(bool excludes_it) {
        PronounLexicon lex;
        for (const char* w : default_pronoun_entries()) {
            if (excludes_it && std::string(w) == "it") continue;
            lex.entries_.insert(w);
        }
        return lex;
    }

    std::unordered_set<std::string> entries_;
};

inline bool is_pronoun(const std::string& text, bool excludes_it) {
    return PronounLexicon::builtin(excludes_it).contains(text);
}

inline std::vector<std::string> lowered_tokens(const Document& doc, const MentionSpan& span) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(span.end - span.start + 1));
    for (int i = span.start; i <= span.end; ++i) {
        std::string t = doc.tokens[static_cast<std::size_t>(i)];
        for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(t));
    }
    return out;
}

// True when `inner` occurs as a contiguous run inside `outer`.
inline bool contains_token_run(const std::vector<std::string>& outer,
                               const std::vector<std::string>& inner) {
    if (inner.empty() || inner.size() > outer.size()) return false;
    for (std::size_t i = 0; i + inner.size() <= outer.size(); ++i) {
        std::size_t j = 0;
        while (j < inner.size() && outer[i + j] == inner[j]) ++j;
        if (j == inner.size()) return true;
    }
    return false;
}

namespace detail {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }

    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }

    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace detail

// Partitions mentions into semantic groups. Two pronouns merge only on exact
// text match; two non-pronouns merge on match or containment (either
// direction); a pronoun never merges with a non-pronoun. Groups come back as
// index lists into `mentions`, ordered by first member, members in input
// order.
inline std::vector<std::vector<int>> semantic_groups(const Document& doc,
                                                     const std::vector<MentionSpan>& mentions,
                                                     const PronounLexicon& lexicon,
                                                     InclusionMode inclusion_mode) {
    const int n = static_cast<int>(mentions.size());
    std::vector<std::string> texts(static_cast<std::size_t>(n));
    std::vector<std::vector<std::string>> toks(static_cast<std::size_t>(n));
    std::vector<bool> pron(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        texts[si] = mention_text(doc, mentions[si]);
        pron[si] = lexicon.contains(texts[si]);
        if (inclusion_mode == InclusionMode::TokenSubsequence)
            toks[si] = lowered_tokens(doc, mentions[si]);
    }

    detail::UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
            if (pron[si] != pron[sj]) continue;
            bool merge;
            if (pron[si]) {
                merge = texts[si] == texts[sj];
            } else if (texts[si] == texts[sj]) {
                merge = true;
            } else if (inclusion_mode == InclusionMode::TokenSubsequence) {
                merge = contains_token_run(toks[si], toks[sj]) ||
                        contains_token_run(toks[sj], toks[si]);
            } else {
                merge = texts[si].find(texts[sj]) != std::string::npos ||
                        texts[sj].find(texts[si]) != std::string::npos;
            }
            if (merge) uf.unite(i, j);
        }
    }

    std::vector<std::vector<int>> groups;
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        const int root = uf.find(i);
        if (slot[static_cast<std::size_t>(root)] == -1) {
            slot[static_cast<std::size_t>(root)] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(i);
    }
    return groups;
}

inline std::vector<std::vector<int>> semantic_groups(const Document& doc,
                                                     const std::vector<MentionSpan>& mentions,
                                                     const EngineConfig& cfg) {
    return semantic_groups(doc, mentions, PronounLexicon::builtin(cfg.pronoun_excludes_it),
                           cfg.inclusion_mode);
}

// Splits a sampling budget of k across groups with the given sizes. Every
// group keeps at least one slot when the budget allows; leftover slots go to
// whichever group has the most unsampled members, ties to the earlier group.
// When k is smaller than the group count, only the k largest groups (ties to
// the earlier group) get a slot.
inline std::vector<long> allocate_quotas(const std::vector<long>& sizes, long k) {
    const auto m = static_cast<long>(sizes.size());
    long total = 0;
    for (long s : sizes) total += s;
    if (k > total)
        throw DataError("sampling budget " + std::to_string(k) + " exceeds the " +
                        std::to_string(total) + " available mentions");

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
    long r = k - m;
    long spare = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        quota[i] = 1;
        capacity[i] = sizes[i] - 1;
        spare += capacity[i];
    }
    if (r > spare) r = spare;  // unreachable after the k > total check, kept as a guard

    // max-heap on (remaining capacity, earlier index wins)
    using Entry = std::pair<long, long>;
    auto cmp = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
    for (std::size_t i = 0; i < capacity.size(); ++i)
        if (capacity[i] > 0) heap.emplace(capacity[i], static_cast<long>(i));
    while (r > 0 && !heap.empty()) {
        auto [cap, idx] = heap.top();
        heap.pop();
        quota[static_cast<std::size_t>(idx)] += 1;
        --r;
        if (cap > 1) heap.emplace(cap - 1, idx);
    }
    return quota;
}

// Draws k mentions across the given groups: quotas per allocate_quotas, then
// uniform sampling without replacement inside each group, groups visited in
// order. Output preserves nothing about order; callers sort.
inline std::vector<MentionSpan> group_based_sampling(
    const std::vector<MentionSpan>& mentions, const std::vector<std::vector<int>>& groups,
    long k, SplitMix64& rng) {
    std::vector<long> sizes;
    sizes.reserve(groups.size());
    for (const auto& g : groups) sizes.push_back(static_cast<long>(g.size()));
    const auto quota = allocate_quotas(sizes, k);
    std::vector<MentionSpan> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (quota[gi] == 0) continue;
        const auto& g = groups[gi];
        for (int pos : sample_indices(rng, static_cast<int>(g.size()), static_cast<int>(quota[gi])))
            out.push_back(mentions[static_cast<std::size_t>(g[static_cast<std::size_t>(pos)])]);
    }
    return out;
}

// Condenses a stored mention list down to at most tau2 spans: the earliest
// and latest mentions always survive, and the interior is downsampled either
// per semantic group (GroupBased) or uniformly (Random). Input need not be
// sorted; output is sorted ascending.
inline std::vector<MentionSpan> condense(const Document& doc, std::vector<MentionSpan> mentions,
                                         int tau2, const PronounLexicon& lexicon,
                                         InclusionMode inclusion_mode, IrpMode mode,
                                         SplitMix64& rng) {
    if (tau2 < 2) throw ConfigError("tau2 must be >= 2");
    if (mode == IrpMode::Off) throw ConfigError("condense needs group_based or random mode");
    std::sort(mentions.begin(), mentions.end());
    if (static_cast<int>(mentions.size()) <= tau2) return mentions;

    std::vector<MentionSpan> interior(mentions.begin() + 1, mentions.end() - 1);
    const long k = tau2 - 2;
    std::vector<MentionSpan> kept;
    kept.reserve(static_cast<std::size_t>(tau2));
    kept.push_back(mentions.front());

    if (k > 0 && mode == IrpMode::Random) {
        for (int idx : sample_indices(rng, static_cast<int>(interior.size()), static_cast<int>(k)))
            kept.push_back(interior[static_cast<std::size_t>(idx)]);
    } else if (k > 0) {
        const auto groups = semantic_groups(doc, interior, lexicon, inclusion_mode);
        const auto sampled = group_based_sampling(interior, groups, k, rng);
        kept.insert(kept.end(), sampled.begin(), sampled.end());
    }

    kept.push_back(mentions.back());
    std::sort(kept.begin(), kept.end());
    return kept;
}

inline std::vector<MentionSpan> condense(const Document& doc, std::vector<MentionSpan> mentions,
                                         int tau2, const EngineConfig& cfg, SplitMix64& rng) {
    return condense(doc, std::move(mentions), tau2,
                    PronounLexicon::builtin(cfg.pronoun_excludes_it), cfg.inclusion_mode,
                    cfg.irp_mode, rng);
}

}  // namespace coref
