#pragma once

#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coref/core.hpp"
#include "coref/eviction.hpp"
#include "coref/irp.hpp"
#include "coref/rng.hpp"

namespace coref {

// AnnotatedReplay evicts with cfg.train_policy and may consult remaining gold
// mention counts; Blind evicts with cfg.infer_policy and sees no rm. The
// classifier is orthogonal: an Oracle classifier in Blind phase is the usual
// gold-replay setup for isolating cache effects.
enum class Phase { AnnotatedReplay, Blind };

struct StepDecision {
    enum class Kind { Assigned, NewCluster, EvictedThenNew };
    Kind kind = Kind::NewCluster;
    int cluster_id = -1;  // cluster assigned to, or the one just created
    int victim_id = -1;   // EvictedThenNew only
};

struct ReplayTrace {
    std::vector<StepDecision> decisions;
    long evictions = 0;
    long assignments = 0;
    long hit_count = 0;  // assignments made while the mention's gold entity was cached
    long long max_batch_elems = 0;
};

// External per-step score table for the Threshold classifier: stream position
// -> (cluster_id -> probability). Ids absent from a row score 0.
using ScoreTable = std::map<long, std::map<int, double>>;

// Elements of the classifier input batch for w cached clusters whose largest
// stored mention list has max_cluster_size entries: w x (max+1) x d_h.
inline long long batch_budget(long long w, long long max_cluster_size, long long d_h) {
    return w * (max_cluster_size + 1) * d_h;
}

inline std::map<MentionSpan, int> span_to_entity(const Document& doc) {
    std::map<MentionSpan, int> m;
    for (std::size_t e = 0; e < doc.gold_clusters.size(); ++e)
        for (const auto& span : doc.gold_clusters[e]) m.emplace(span, static_cast<int>(e));
    return m;
}

// All gold mentions in document order: the default replay stream.
inline std::vector<MentionSpan> default_stream(const Document& doc) {
    std::vector<MentionSpan> stream;
    for (const auto& c : doc.gold_clusters) stream.insert(stream.end(), c.begin(), c.end());
    std::sort(stream.begin(), stream.end());
    return stream;
}

// rm per gold entity counting stream mentions at positions >= position.
inline std::map<int, long> gold_remaining(const Document& doc,
                                          const std::vector<MentionSpan>& stream,
                                          std::size_t position) {
    std::map<int, long> rm;
    for (std::size_t e = 0; e < doc.gold_clusters.size(); ++e) rm[static_cast<int>(e)] = 0;
    const auto entity_of = span_to_entity(doc);
    for (std::size_t i = position; i < stream.size(); ++i) {
        auto it = entity_of.find(stream[i]);
        if (it != entity_of.end()) rm[it->second] += 1;
    }
    return rm;
}

// One replay of one document. Construct, then call step() until done();
// state() and trace() are valid for inspection between steps.
class Engine {
public:
    Engine(const Document& doc, std::vector<MentionSpan> stream, const EngineConfig& cfg,
           Phase phase, const ScoreTable* scores = nullptr)
        : doc_(doc),
          stream_(std::move(stream)),
          cfg_(cfg),
          phase_(phase),
          scores_(scores),
          rng_(cfg.seed) {
        validate_config(cfg_);
        const bool has_gold = !doc_.gold_clusters.empty();
        if (phase_ == Phase::AnnotatedReplay && !has_gold)
            throw ConfigError("annotated replay requires gold clusters in doc '" + doc_.doc_id + "'");
        if (phase_ == Phase::Blind && active_policy().kind == EvictionPolicy::Kind::SaesTrain)
            throw ConfigError("SaesTrain eviction needs remaining-mention counts; blind phase has none");
        if (cfg_.classifier.kind != ClassifierKind::Kind::Threshold && !has_gold)
            throw ConfigError("oracle classifiers require gold clusters in doc '" + doc_.doc_id + "'");
        for (const auto& span : stream_)
            if (!span_valid(span, doc_))
                throw DataError("stream span out of range in doc '" + doc_.doc_id + "'");
        entity_of_ = span_to_entity(doc_);
        for (const auto& span : stream_) {
            auto it = entity_of_.find(span);
            if (it != entity_of_.end()) remaining_[it->second] += 1;
        }
    }

    bool done() const { return pos_ >= stream_.size(); }
    const CacheState& state() const { return state_; }
    const ReplayTrace& trace() const { return trace_; }
    const EngineConfig& config() const { return cfg_; }
    long long batch_bound() const {
        return batch_budget(cfg_.tau1, cfg_.tau2, cfg_.hidden_dim);
    }

    StepDecision step() {
        if (done()) throw std::logic_error("step() past end of stream");
        const MentionSpan mention = stream_[pos_];
        std::optional<int> entity;
        if (auto it = entity_of_.find(mention); it != entity_of_.end()) entity = it->second;
        if (entity) remaining_[*entity] -= 1;  // rm now counts strictly-later mentions

        const long now = ++state_.step;

        if (!state_.clusters.empty()) {
            std::size_t widest = 0;
            for (const auto& c : state_.clusters) widest = std::max(widest, c.mentions.size());
            trace_.max_batch_elems =
                std::max(trace_.max_batch_elems,
                         batch_budget(static_cast<long long>(state_.clusters.size()),
                                      static_cast<long long>(widest), cfg_.hidden_dim));
        }

        const std::vector<double> probs = classify(mention, entity);
        bool entity_cached = false;
        if (entity)
            for (const auto& c : state_.clusters)
                if (auto it = seed_entity_.find(c.cluster_id);
                    it != seed_entity_.end() && it->second == *entity)
                    entity_cached = true;

        int best = -1;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            if (best < 0) {
                best = static_cast<int>(j);
                continue;
            }
            const auto& c = state_.clusters[j];
            const auto& b = state_.clusters[static_cast<std::size_t>(best)];
            if (probs[j] > probs[static_cast<std::size_t>(best)] ||
                (probs[j] == probs[static_cast<std::size_t>(best)] &&
                 (c.last_access_step > b.last_access_step ||
                  (c.last_access_step == b.last_access_step && c.cluster_id < b.cluster_id))))
                best = static_cast<int>(j);
        }

        StepDecision decision;
        if (best >= 0 && probs[static_cast<std::size_t>(best)] > 0.5) {
            TrackedCluster& c = state_.clusters[static_cast<std::size_t>(best)];
            c.mentions.insert(std::lower_bound(c.mentions.begin(), c.mentions.end(), mention),
                              mention);
            c.last_access_step = now;
            c.assigned_count += 1;
            auto& full = full_mentions_[c.cluster_id];
            full.insert(std::lower_bound(full.begin(), full.end(), mention), mention);
            trace_.assignments += 1;
            if (entity_cached) trace_.hit_count += 1;
            if (cfg_.irp_mode != IrpMode::Off &&
                static_cast<int>(c.mentions.size()) > cfg_.tau2)
                c.mentions = condense(doc_, c.mentions, cfg_.tau2, cfg_, rng_);
            touch_dual_cache(c.cluster_id);
            decision = {StepDecision::Kind::Assigned, c.cluster_id, -1};
        } else {
            int victim_id = -1;
            if (static_cast<int>(state_.clusters.size()) == cfg_.tau1) {
                const EvictionPolicy& policy = active_policy();
                std::unordered_map<int, long> rm;
                if (policy.kind == EvictionPolicy::Kind::SaesTrain)
                    for (const auto& c : state_.clusters)
                        if (auto it = seed_entity_.find(c.cluster_id); it != seed_entity_.end())
                            rm[c.cluster_id] = remaining_.at(it->second);
                const std::size_t idx = select_victim(state_, policy, cfg_, rm, &segments_);
                victim_id = state_.clusters[idx].cluster_id;
                archived_.emplace_back(victim_id, full_mentions_.at(victim_id));
                full_mentions_.erase(victim_id);
                state_.clusters.erase(state_.clusters.begin() + static_cast<std::ptrdiff_t>(idx));
                dual_cache_forget(segments_, victim_id);
                trace_.evictions += 1;
            }
            const int id = state_.next_cluster_id++;
            TrackedCluster fresh;
            fresh.cluster_id = id;
            fresh.mentions = {mention};
            fresh.created_step = now;
            fresh.last_access_step = now;
            fresh.assigned_count = 1;
            if (phase_ == Phase::AnnotatedReplay && entity) fresh.gold_entity = entity;
            state_.clusters.push_back(std::move(fresh));
            full_mentions_[id] = {mention};
            if (entity) seed_entity_[id] = *entity;
            touch_dual_cache(id);
            decision = victim_id >= 0
                           ? StepDecision{StepDecision::Kind::EvictedThenNew, id, victim_id}
                           : StepDecision{StepDecision::Kind::NewCluster, id, -1};
        }

        trace_.decisions.push_back(decision);
        ++pos_;
        return decision;
    }

    // Evicted clusters plus live cache, each as its full assigned mention
    // set, ordered by cluster id.
    ClusterSet predictions() const {
        std::vector<std::pair<int, std::vector<MentionSpan>>> rows = archived_;
        for (const auto& c : state_.clusters) rows.emplace_back(c.cluster_id, full_mentions_.at(c.cluster_id));
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        ClusterSet out;
        out.reserve(rows.size());
        for (auto& [id, mentions] : rows) out.push_back(std::move(mentions));
        return out;
    }

private:
    const EvictionPolicy& active_policy() const {
        return phase_ == Phase::AnnotatedReplay ? cfg_.train_policy : cfg_.infer_policy;
    }

    void touch_dual_cache(int cluster_id) {
        const EvictionPolicy& policy = active_policy();
        if (policy.kind == EvictionPolicy::Kind::DualCache)
            dual_cache_on_access(segments_, state_, policy, cfg_.tau1, cluster_id);
    }

    // Per-cached-cluster probabilities, aligned with state_.clusters.
    std::vector<double> classify(const MentionSpan& mention, const std::optional<int>& entity) {
        std::vector<double> probs(state_.clusters.size(), 0.0);
        switch (cfg_.classifier.kind) {
            case ClassifierKind::Kind::Oracle:
                for (std::size_t j = 0; j < state_.clusters.size(); ++j) {
                    auto it = seed_entity_.find(state_.clusters[j].cluster_id);
                    if (entity && it != seed_entity_.end() && it->second == *entity)
                        probs[j] = 1.0;
                }
                break;
            case ClassifierKind::Kind::NoisyOracle:
                for (std::size_t j = 0; j < state_.clusters.size(); ++j) {
                    auto it = seed_entity_.find(state_.clusters[j].cluster_id);
                    bool match = entity && it != seed_entity_.end() && it->second == *entity;
                    if (rng_.next_double() < cfg_.classifier.flip_prob) match = !match;
                    probs[j] = match ? 1.0 : 0.0;
                }
                break;
            case ClassifierKind::Kind::Threshold:
                if (scores_ != nullptr) {
                    auto row = scores_->find(static_cast<long>(pos_));
                    if (row != scores_->end())
                        for (std::size_t j = 0; j < state_.clusters.size(); ++j) {
                            auto it = row->second.find(state_.clusters[j].cluster_id);
                            if (it != row->second.end()) probs[j] = it->second;
                        }
                }
                break;
        }
        (void)mention;
        return probs;
    }

    const Document& doc_;
    std::vector<MentionSpan> stream_;
    EngineConfig cfg_;
    Phase phase_;
    const ScoreTable* scores_;
    SplitMix64 rng_;
    CacheState state_;
    ReplayTrace trace_;
    DualCacheSegments segments_;
    std::size_t pos_ = 0;
    std::map<MentionSpan, int> entity_of_;
    std::unordered_map<int, long> remaining_;    // gold entity -> mentions not yet consumed
    std::unordered_map<int, int> seed_entity_;   // cluster id -> entity of its first mention
    std::unordered_map<int, std::vector<MentionSpan>> full_mentions_;
    std::vector<std::pair<int, std::vector<MentionSpan>>> archived_;
};

inline std::pair<ClusterSet, ReplayTrace> run_document(const Document& doc,
                                                       std::vector<MentionSpan> stream,
                                                       const EngineConfig& cfg, Phase phase,
                                                       const ScoreTable* scores = nullptr) {
    Engine engine(doc, std::move(stream), cfg, phase, scores);
    while (!engine.done()) engine.step();
    return {engine.predictions(), engine.trace()};
}

}  // namespace coref
