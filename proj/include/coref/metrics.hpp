#pragma once

#include <array>
#include <limits>
#include <map>
#include <vector>

#include "coref/core.hpp"

namespace coref {

// Recall/precision on [0,1] with their harmonic mean.
struct MetricScore {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

// Raw numerators/denominators, so corpus-level pooling (micro) can defer the
// division until after summation.
struct PairCounts {
    double num_r = 0.0;
    double den_r = 0.0;
    double num_p = 0.0;
    double den_p = 0.0;
};

struct DocumentScores {
    MetricScore muc, b3, ceaf;
    PairCounts muc_counts, b3_counts, ceaf_counts;
};

// Reporting scale: [0,100] everywhere downstream of the raw metrics.
struct ScoreReport {
    MetricScore muc, b3, ceaf;
    double avg_f1 = 0.0;
};

inline double avg_f1(double muc_f1, double b3_f1, double ceaf_f1) {
    return (muc_f1 + b3_f1 + ceaf_f1) / 3.0;
}

inline void validate_partition(const ClusterSet& clusters, const std::string& side) {
    std::vector<MentionSpan> all;
    for (const auto& c : clusters) {
        if (c.empty()) throw DataError(side + " contains an empty cluster");
        all.insert(all.end(), c.begin(), c.end());
    }
    std::sort(all.begin(), all.end());
    auto dup = std::adjacent_find(all.begin(), all.end());
    if (dup != all.end())
        throw DataError(side + " is not a partition: span [" + std::to_string(dup->start) + "," +
                        std::to_string(dup->end) + "] appears twice");
}

namespace detail {

// A denominator of zero means that side has nothing to get right; score 0
// unless the other side is empty too, in which case the two agree perfectly.
inline double degenerate_ratio(double num, double den, double other_den) {
    if (den > 0.0) return num / den;
    return other_den > 0.0 ? 0.0 : 1.0;
}

inline std::map<MentionSpan, int> membership(const ClusterSet& clusters) {
    std::map<MentionSpan, int> m;
    for (std::size_t i = 0; i < clusters.size(); ++i)
        for (const auto& span : clusters[i]) m.emplace(span, static_cast<int>(i));
    return m;
}

inline ClusterSet sorted_copy(const ClusterSet& clusters) {
    ClusterSet out = clusters;
    for (auto& c : out) std::sort(c.begin(), c.end());
    return out;
}

inline long intersection_size(const std::vector<MentionSpan>& a, const std::vector<MentionSpan>& b) {
    long count = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else ++count, ++i, ++j;
    }
    return count;
}

// Vilain link counts for one direction: key clusters scored against the
// response partition. Each key cluster of size s contributes s-1 links to the
// denominator and s - p to the numerator, where p counts the parts the
// response splits it into (mentions missing from the response are singleton
// parts).
inline void muc_direction(const ClusterSet& key, const std::map<MentionSpan, int>& response,
                          double& num, double& den) {
    for (const auto& k : key) {
        std::vector<int> parts;
        long missing = 0;
        for (const auto& span : k) {
            auto it = response.find(span);
            if (it == response.end()) ++missing;
            else parts.push_back(it->second);
        }
        std::sort(parts.begin(), parts.end());
        parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
        const long p = static_cast<long>(parts.size()) + missing;
        num += static_cast<double>(static_cast<long>(k.size()) - p);
        den += static_cast<double>(k.size() - 1);
    }
}

inline void b3_direction(const ClusterSet& key, const ClusterSet& response, double& num,
                         double& den) {
    const auto resp_sorted = sorted_copy(response);
    for (const auto& k : key) {
        std::vector<MentionSpan> ks = k;
        std::sort(ks.begin(), ks.end());
        for (const auto& r : resp_sorted) {
            const long inter = intersection_size(ks, r);
            // each of the `inter` shared mentions scores inter/|k|
            num += static_cast<double>(inter) * static_cast<double>(inter) /
                   static_cast<double>(k.size());
        }
        den += static_cast<double>(k.size());
    }
}

}  // namespace detail

inline MetricScore score_from_counts(const PairCounts& c) {
    MetricScore s;
    s.recall = detail::degenerate_ratio(c.num_r, c.den_r, c.den_p);
    s.precision = detail::degenerate_ratio(c.num_p, c.den_p, c.den_r);
    s.f1 = (s.recall + s.precision) > 0.0
               ? 2.0 * s.recall * s.precision / (s.recall + s.precision)
               : 0.0;
    return s;
}

inline PairCounts muc_counts(const ClusterSet& gold, const ClusterSet& pred) {
    validate_partition(gold, "gold");
    validate_partition(pred, "pred");
    PairCounts c;
    const auto gold_members = detail::membership(gold);
    const auto pred_members = detail::membership(pred);
    detail::muc_direction(gold, pred_members, c.num_r, c.den_r);
    detail::muc_direction(pred, gold_members, c.num_p, c.den_p);
    return c;
}

inline PairCounts b3_counts(const ClusterSet& gold, const ClusterSet& pred) {
    validate_partition(gold, "gold");
    validate_partition(pred, "pred");
    PairCounts c;
    detail::b3_direction(gold, pred, c.num_r, c.den_r);
    detail::b3_direction(pred, gold, c.num_p, c.den_p);
    return c;
}

// Maximum-weight one-to-one assignment over a rectangular similarity matrix
// (rows x cols, entries >= 0). Augmenting-path method with potentials, O(k^3)
// after padding to square; unmatched rows/columns pair with zero-weight slack.
inline double max_assignment(const std::vector<std::vector<double>>& sim) {
    const int n = static_cast<int>(sim.size());
    const int m = n == 0 ? 0 : static_cast<int>(sim[0].size());
    if (n == 0 || m == 0) return 0.0;
    const int k = std::max(n, m);
    const double kInf = std::numeric_limits<double>::infinity();

    std::vector<std::vector<double>> cost(static_cast<std::size_t>(k + 1),
                                          std::vector<double>(static_cast<std::size_t>(k + 1), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            cost[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)] =
                -sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    std::vector<double> u(static_cast<std::size_t>(k + 1), 0.0), v(static_cast<std::size_t>(k + 1), 0.0);
    std::vector<int> p(static_cast<std::size_t>(k + 1), 0), way(static_cast<std::size_t>(k + 1), 0);
    for (int i = 1; i <= k; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(k + 1), kInf);
        std::vector<char> used(static_cast<std::size_t>(k + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= k; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0)][static_cast<std::size_t>(j)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= k; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    double total = 0.0;
    for (int j = 1; j <= k; ++j)
        total += cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])][static_cast<std::size_t>(j)];
    return -total;
}

inline double phi4(const std::vector<MentionSpan>& key_sorted,
                   const std::vector<MentionSpan>& resp_sorted) {
    const double inter = static_cast<double>(detail::intersection_size(key_sorted, resp_sorted));
    return 2.0 * inter / static_cast<double>(key_sorted.size() + resp_sorted.size());
}

inline PairCounts ceaf_counts(const ClusterSet& gold, const ClusterSet& pred) {
    validate_partition(gold, "gold");
    validate_partition(pred, "pred");
    const auto g = detail::sorted_copy(gold);
    const auto r = detail::sorted_copy(pred);
    std::vector<std::vector<double>> sim(g.size(), std::vector<double>(r.size(), 0.0));
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < r.size(); ++j) sim[i][j] = phi4(g[i], r[j]);
    const double best = max_assignment(sim);
    PairCounts c;
    c.num_r = c.num_p = best;
    c.den_r = static_cast<double>(g.size());
    c.den_p = static_cast<double>(r.size());
    return c;
}

inline MetricScore muc(const ClusterSet& gold, const ClusterSet& pred) {
    return score_from_counts(muc_counts(gold, pred));
}

inline MetricScore b_cubed(const ClusterSet& gold, const ClusterSet& pred) {
    return score_from_counts(b3_counts(gold, pred));
}

inline MetricScore ceaf_phi4(const ClusterSet& gold, const ClusterSet& pred) {
    return score_from_counts(ceaf_counts(gold, pred));
}

inline DocumentScores score_document(const ClusterSet& gold, const ClusterSet& pred) {
    DocumentScores d;
    d.muc_counts = muc_counts(gold, pred);
    d.b3_counts = b3_counts(gold, pred);
    d.ceaf_counts = ceaf_counts(gold, pred);
    d.muc = score_from_counts(d.muc_counts);
    d.b3 = score_from_counts(d.b3_counts);
    d.ceaf = score_from_counts(d.ceaf_counts);
    return d;
}

inline ScoreReport to_report(const MetricScore& muc01, const MetricScore& b301,
                             const MetricScore& ceaf01) {
    auto scale = [](const MetricScore& s) {
        return MetricScore{s.recall * 100.0, s.precision * 100.0, s.f1 * 100.0};
    };
    ScoreReport r;
    r.muc = scale(muc01);
    r.b3 = scale(b301);
    r.ceaf = scale(ceaf01);
    r.avg_f1 = avg_f1(r.muc.f1, r.b3.f1, r.ceaf.f1);
    return r;
}

inline ScoreReport document_report(const DocumentScores& d) {
    return to_report(d.muc, d.b3, d.ceaf);
}

// Per-document scoring, then an unweighted mean of every reported quantity.
inline ScoreReport macro_report(const std::vector<DocumentScores>& docs) {
    if (docs.empty()) return to_report({}, {}, {});
    MetricScore muc_m, b3_m, ceaf_m;
    auto add = [](MetricScore& acc, const MetricScore& s) {
        acc.recall += s.recall;
        acc.precision += s.precision;
        acc.f1 += s.f1;
    };
    for (const auto& d : docs) {
        add(muc_m, d.muc);
        add(b3_m, d.b3);
        add(ceaf_m, d.ceaf);
    }
    const double n = static_cast<double>(docs.size());
    auto div = [n](MetricScore& s) {
        s.recall /= n;
        s.precision /= n;
        s.f1 /= n;
    };
    div(muc_m);
    div(b3_m);
    div(ceaf_m);
    return to_report(muc_m, b3_m, ceaf_m);
}

// Pools raw counts across documents before dividing.
inline ScoreReport micro_report(const std::vector<DocumentScores>& docs) {
    PairCounts muc_c, b3_c, ceaf_c;
    auto add = [](PairCounts& acc, const PairCounts& c) {
        acc.num_r += c.num_r;
        acc.den_r += c.den_r;
        acc.num_p += c.num_p;
        acc.den_p += c.den_p;
    };
    for (const auto& d : docs) {
        add(muc_c, d.muc_counts);
        add(b3_c, d.b3_counts);
        add(ceaf_c, d.ceaf_counts);
    }
    return to_report(score_from_counts(muc_c), score_from_counts(b3_c),
                     score_from_counts(ceaf_c));
}

}  // namespace coref
