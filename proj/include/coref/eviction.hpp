#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "coref/core.hpp"

namespace coref {

// Training-time score: remaining-mention mass weighted by recency. rm is the
// number of gold mentions of the cluster's entity still ahead in the stream.
inline double saes_train_score(long rm, long lru, double delta) {
    return static_cast<double>(rm) * (1.0 + 1.0 / (static_cast<double>(lru) + delta));
}

// Inference-time score: observed activity rate weighted by recency. em is the
// mention count accumulated so far, age the steps since creation.
inline double saes_inf_score(long em, long age, long lru, double delta) {
    return (static_cast<double>(em) / static_cast<double>(age)) *
           (1.0 + 1.0 / (static_cast<double>(lru) + delta));
}

// LRU/LFU segment bookkeeping for the dual-cache baseline. The cache itself
// stays one flat cluster list; this records which ids currently sit in the
// LFU segment. Rebuilt from scratch per document replay.
struct DualCacheSegments {
    std::unordered_set<int> lfu_members;
};

inline int dual_cache_lfu_capacity(int tau1, const EvictionPolicy& policy) {
    return static_cast<int>(std::ceil(policy.lfu_fraction * static_cast<double>(tau1)));
}

namespace detail {

inline const TrackedCluster* find_cluster(const CacheState& state, int cluster_id) {
    for (const auto& c : state.clusters)
        if (c.cluster_id == cluster_id) return &c;
    return nullptr;
}

}  // namespace detail

// Called after a cluster is created or assigned to. Promotes it into the LFU
// segment once its assignment count reaches the threshold; when the segment
// is full, the least-frequently-assigned occupant (ties to the older id) is
// demoted back to the LRU segment.
inline void dual_cache_on_access(DualCacheSegments& seg, const CacheState& state,
                                 const EvictionPolicy& policy, int tau1, int cluster_id) {
    if (seg.lfu_members.count(cluster_id)) return;
    const TrackedCluster* c = detail::find_cluster(state, cluster_id);
    if (c == nullptr || c->assigned_count < policy.promotion_threshold) return;
    const int capacity = dual_cache_lfu_capacity(tau1, policy);
    if (static_cast<int>(seg.lfu_members.size()) >= capacity) {
        int demote_id = -1;
        long demote_count = 0;
        for (int id : seg.lfu_members) {
            const TrackedCluster* m = detail::find_cluster(state, id);
            if (m == nullptr) continue;
            if (demote_id == -1 || m->assigned_count < demote_count ||
                (m->assigned_count == demote_count && id < demote_id)) {
                demote_id = id;
                demote_count = m->assigned_count;
            }
        }
        if (demote_id != -1) seg.lfu_members.erase(demote_id);
    }
    seg.lfu_members.insert(cluster_id);
}

inline void dual_cache_forget(DualCacheSegments& seg, int cluster_id) {
    seg.lfu_members.erase(cluster_id);
}

// Picks the cluster to evict under `policy`. Returns an index into
// state.clusters. rm_by_cluster maps cluster_id to the remaining gold-mention
// count of its entity (SaesTrain only; missing entries read as 0). segments
// is required for DualCache and ignored otherwise.
inline std::size_t select_victim(const CacheState& state, const EvictionPolicy& policy,
                                 const EngineConfig& cfg,
                                 const std::unordered_map<int, long>& rm_by_cluster = {},
                                 const DualCacheSegments* segments = nullptr) {
    if (state.clusters.empty()) throw std::logic_error("select_victim on empty cache");

    using Kind = EvictionPolicy::Kind;
    const std::size_t n = state.clusters.size();

    if (policy.kind == Kind::SaesTrain || policy.kind == Kind::SaesInf) {
        std::size_t best = 0;
        double best_score = 0.0;
        long best_lru = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& c = state.clusters[i];
            const long lru = lru_of(c, state.step);
            double score;
            if (policy.kind == Kind::SaesTrain) {
                const auto it = rm_by_cluster.find(c.cluster_id);
                const long rm = it == rm_by_cluster.end() ? 0 : it->second;
                score = saes_train_score(rm, lru, cfg.delta);
            } else {
                const long em = cfg.em_uses_stored_count
                                    ? static_cast<long>(c.mentions.size())
                                    : c.assigned_count;
                score = saes_inf_score(em, age_of(c, state.step), lru, cfg.delta);
            }
            const bool better =
                i == 0 || score < best_score ||
                (score == best_score &&
                 (lru > best_lru ||
                  (lru == best_lru && c.cluster_id < state.clusters[best].cluster_id)));
            if (better) {
                best = i;
                best_score = score;
                best_lru = lru;
            }
        }
        return best;
    }

    if (policy.kind == Kind::Lru) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const auto& c = state.clusters[i];
            const auto& b = state.clusters[best];
            const long lc = lru_of(c, state.step), lb = lru_of(b, state.step);
            if (lc > lb || (lc == lb && c.cluster_id < b.cluster_id)) best = i;
        }
        return best;
    }

    // DualCache: evict from the LRU segment while it has occupants, else fall
    // back to the least-frequently-assigned LFU member.
    if (segments == nullptr) throw std::logic_error("dual-cache victim selection needs segments");
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = state.clusters[i];
        if (segments->lfu_members.count(c.cluster_id)) continue;
        if (best == n) {
            best = i;
            continue;
        }
        const auto& b = state.clusters[best];
        const long lc = lru_of(c, state.step), lb = lru_of(b, state.step);
        if (lc > lb || (lc == lb && c.cluster_id < b.cluster_id)) best = i;
    }
    if (best != n) return best;
    for (std::size_t i = 0; i < n; ++i) {
        if (best == n) {
            best = i;
            continue;
        }
        const auto& c = state.clusters[i];
        const auto& b = state.clusters[best];
        const long lc = lru_of(c, state.step), lb = lru_of(b, state.step);
        if (c.assigned_count < b.assigned_count ||
            (c.assigned_count == b.assigned_count &&
             (lc > lb || (lc == lb && c.cluster_id < b.cluster_id))))
            best = i;
    }
    return best;
}

}  // namespace coref
