#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coref {

// Bad configuration or mutually inconsistent options. CLI maps this to exit 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data (parse failures, invariant violations). CLI maps this to exit 1.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Token span, inclusive on both ends: [start, end].
struct MentionSpan {
    int start = 0;
    int end = 0;

    auto operator<=>(const MentionSpan&) const = default;
};

using ClusterSet = std::vector<std::vector<MentionSpan>>;

// A document with gold coreference annotation. gold_clusters may be empty
// (unannotated corpora can still be replayed blind and never scored).
struct Document {
    std::string doc_id;
    std::vector<std::string> tokens;
    ClusterSet gold_clusters;
};

// A cached entity. `mentions` is the stored (possibly condensed) view that a
// classifier would see; `assigned_count` counts every mention ever assigned
// and is never reduced by condensation.
struct TrackedCluster {
    int cluster_id = 0;
    std::vector<MentionSpan> mentions;  // sorted ascending by (start, end)
    long created_step = 0;
    long last_access_step = 0;
    long assigned_count = 1;
    std::optional<int> gold_entity;  // annotated replay only
};

// The object every eviction policy operates on: at most tau1 tracked clusters
// plus the global step counter (number of mentions consumed so far).
struct CacheState {
    std::vector<TrackedCluster> clusters;
    long step = 0;
    int next_cluster_id = 0;
};

enum class IrpMode { GroupBased, Random, Off };

// How non-pronoun mention inclusion is decided during semantic grouping.
// TokenSubsequence: contiguous run of lowercased tokens (default; avoids
// "he"-inside-"the" artifacts). RawSubstring: plain substring on the joined
// lowercased text.
enum class InclusionMode { TokenSubsequence, RawSubstring };

// Eviction policy descriptor. DualCache carries its segment parameters; the
// other kinds ignore them.
struct EvictionPolicy {
    enum class Kind { SaesTrain, SaesInf, Lru, DualCache };

    Kind kind = Kind::SaesInf;
    double lfu_fraction = 0.5;      // DualCache: fraction of tau1 slots in the LFU segment
    long promotion_threshold = 2;   // DualCache: assigned_count that moves a cluster to LFU

    static EvictionPolicy saes_train() { return {Kind::SaesTrain, 0.5, 2}; }
    static EvictionPolicy saes_inf() { return {Kind::SaesInf, 0.5, 2}; }
    static EvictionPolicy lru() { return {Kind::Lru, 0.5, 2}; }
    static EvictionPolicy dual_cache(double fraction = 0.5, long threshold = 2) {
        return {Kind::DualCache, fraction, threshold};
    }
};

// Decision source for the clustering step. Oracle and NoisyOracle derive
// probabilities from gold annotations; Threshold reads an external score
// table and is otherwise inert.
struct ClassifierKind {
    enum class Kind { Oracle, NoisyOracle, Threshold };

    Kind kind = Kind::Oracle;
    double flip_prob = 0.0;  // NoisyOracle only

    static ClassifierKind oracle() { return {Kind::Oracle, 0.0}; }
    static ClassifierKind noisy_oracle(double p) { return {Kind::NoisyOracle, p}; }
    static ClassifierKind threshold() { return {Kind::Threshold, 0.0}; }
};

struct EngineConfig {
    int tau1 = 50;             // max tracked clusters
    int tau2 = 30;             // max stored mentions per cluster
    double delta = 1e-5;       // recency-term stabilizer, must be > 0
    EvictionPolicy train_policy = EvictionPolicy::saes_train();
    EvictionPolicy infer_policy = EvictionPolicy::saes_inf();
    IrpMode irp_mode = IrpMode::GroupBased;
    ClassifierKind classifier = ClassifierKind::oracle();
    std::uint64_t seed = 0;
    int hidden_dim = 1024;     // d_h, used only by the batch budget telemetry
    bool pronoun_excludes_it = true;
    InclusionMode inclusion_mode = InclusionMode::TokenSubsequence;
    // Alternative activity counter: score em from the stored mention count
    // instead of the cumulative assigned_count.
    bool em_uses_stored_count = false;
};

inline void validate_config(const EngineConfig& cfg) {
    if (cfg.tau1 < 1) throw ConfigError("tau1 must be >= 1");
    if (cfg.tau2 < 2) throw ConfigError("tau2 must be >= 2 (first and last mentions are always retained)");
    if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
    if (cfg.hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
    if (cfg.classifier.kind == ClassifierKind::Kind::NoisyOracle &&
        (cfg.classifier.flip_prob < 0.0 || cfg.classifier.flip_prob > 1.0))
        throw ConfigError("noisy-oracle flip probability must lie in [0, 1]");
    for (const EvictionPolicy* p : {&cfg.train_policy, &cfg.infer_policy}) {
        if (p->kind != EvictionPolicy::Kind::DualCache) continue;
        if (!(p->lfu_fraction > 0.0 && p->lfu_fraction < 1.0))
            throw ConfigError("dual-cache lfu_fraction must lie in (0, 1)");
        if (p->promotion_threshold < 1)
            throw ConfigError("dual-cache promotion_threshold must be >= 1");
    }
}

inline bool span_valid(const MentionSpan& span, const Document& doc) {
    return span.start >= 0 && span.start <= span.end &&
           span.end < static_cast<int>(doc.tokens.size());
}

// Lowercased, space-joined surface text of a span. ASCII lowering only; the
// corpora this tool handles are tokenized ASCII/UTF-8 where case folding
// beyond ASCII is not needed.
inline std::string mention_text(const Document& doc, const MentionSpan& span) {
    if (!span_valid(span, doc))
        throw DataError("mention span [" + std::to_string(span.start) + "," +
                        std::to_string(span.end) + "] out of range for doc '" + doc.doc_id + "'");
    std::string out;
    for (int i = span.start; i <= span.end; ++i) {
        if (i > span.start) out.push_back(' ');
        for (char c : doc.tokens[static_cast<std::size_t>(i)])
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

// Steps since the cluster was last accessed (access = creation or assignment).
inline long lru_of(const TrackedCluster& c, long state_step) {
    return state_step - c.last_access_step;
}

// Steps since creation, clamped to 1 so activity ratios are always defined.
inline long age_of(const TrackedCluster& c, long state_step) {
    return std::max<long>(1, state_step - c.created_step);
}

// Enforces every Document invariant: span bounds, pairwise-distinct spans
// within each gold cluster, and disjointness across clusters.
inline void validate_document(const Document& doc) {
    std::vector<MentionSpan> seen;
    for (std::size_t ci = 0; ci < doc.gold_clusters.size(); ++ci) {
        const auto& cluster = doc.gold_clusters[ci];
        std::vector<MentionSpan> local;
        for (const auto& span : cluster) {
            if (!span_valid(span, doc))
                throw DataError("doc '" + doc.doc_id + "': span [" + std::to_string(span.start) +
                                "," + std::to_string(span.end) + "] out of range (" +
                                std::to_string(doc.tokens.size()) + " tokens)");
            local.push_back(span);
        }
        std::sort(local.begin(), local.end());
        if (std::adjacent_find(local.begin(), local.end()) != local.end())
            throw DataError("doc '" + doc.doc_id + "': duplicate span within gold cluster " +
                            std::to_string(ci));
        seen.insert(seen.end(), local.begin(), local.end());
    }
    std::sort(seen.begin(), seen.end());
    auto dup = std::adjacent_find(seen.begin(), seen.end());
    if (dup != seen.end())
        throw DataError("doc '" + doc.doc_id + "': span [" + std::to_string(dup->start) + "," +
                        std::to_string(dup->end) + "] appears in two gold clusters");
}

}  // namespace coref
