#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coref/core.hpp"
#include "coref/irp.hpp"
#include "coref/rng.hpp"

namespace coref {

// ---------------------------------------------------------------------------
// JSONL corpus format: one object per line,
//   {"doc_id": "...", "tokens": ["..."], "clusters": [[[s,e], ...], ...]}
// with inclusive [start,end] token spans (both endpoints are mention tokens).
// ---------------------------------------------------------------------------

inline Document document_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    for (const char* field : {"doc_id", "tokens", "clusters"})
        if (!j.contains(field)) throw DataError(where + ": missing field '" + field + "'");
    if (!j["doc_id"].is_string()) throw DataError(where + ": doc_id must be a string");
    if (!j["tokens"].is_array()) throw DataError(where + ": tokens must be an array");
    if (!j["clusters"].is_array()) throw DataError(where + ": clusters must be an array");

    Document doc;
    doc.doc_id = j["doc_id"].get<std::string>();
    for (const auto& t : j["tokens"]) {
        if (!t.is_string()) throw DataError(where + ": tokens must all be strings");
        doc.tokens.push_back(t.get<std::string>());
    }
    for (const auto& jc : j["clusters"]) {
        if (!jc.is_array()) throw DataError(where + ": each cluster must be an array of spans");
        std::vector<MentionSpan> cluster;
        for (const auto& js : jc) {
            if (!js.is_array() || js.size() != 2 || !js[0].is_number_integer() ||
                !js[1].is_number_integer())
                throw DataError(where + ": each span must be a [start, end] integer pair");
            cluster.push_back({js[0].get<int>(), js[1].get<int>()});
        }
        doc.gold_clusters.push_back(std::move(cluster));
    }
    validate_document(doc);
    return doc;
}

inline std::vector<Document> parse_jsonl_stream(std::istream& in, const std::string& name) {
    std::vector<Document> docs;
    std::set<std::string> ids;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = name + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        Document doc = document_from_json(j, where);
        if (!ids.insert(doc.doc_id).second)
            throw DataError(where + ": duplicate doc_id '" + doc.doc_id + "'");
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline std::vector<Document> parse_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file '" + path + "'");
    return parse_jsonl_stream(in, path);
}

inline nlohmann::json document_to_json(const Document& doc, const ClusterSet& clusters) {
    nlohmann::json j;
    j["doc_id"] = doc.doc_id;
    j["tokens"] = doc.tokens;
    nlohmann::json jclusters = nlohmann::json::array();
    for (const auto& c : clusters) {
        nlohmann::json jc = nlohmann::json::array();
        for (const auto& span : c) jc.push_back({span.start, span.end});
        jclusters.push_back(std::move(jc));
    }
    j["clusters"] = std::move(jclusters);
    return j;
}

inline void write_jsonl(const std::string& path, const std::vector<Document>& docs,
                        const std::vector<ClusterSet>& clusters_per_doc) {
    if (docs.size() != clusters_per_doc.size())
        throw DataError("prediction sets (" + std::to_string(clusters_per_doc.size()) +
                        ") do not match documents (" + std::to_string(docs.size()) + ")");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (std::size_t i = 0; i < docs.size(); ++i)
        out << document_to_json(docs[i], clusters_per_doc[i]).dump() << '\n';
    if (!out) throw DataError("write failed on '" + path + "'");
}

inline void write_corpus(const std::string& path, const std::vector<Document>& docs) {
    std::vector<ClusterSet> gold;
    gold.reserve(docs.size());
    for (const auto& d : docs) gold.push_back(d.gold_clusters);
    write_jsonl(path, docs, gold);
}

inline void write_predictions(const std::string& path, const std::vector<Document>& docs,
                              const std::vector<ClusterSet>& preds) {
    write_jsonl(path, docs, preds);
}

// ---------------------------------------------------------------------------
// Results CSV
// ---------------------------------------------------------------------------

struct ResultRow {
    std::string policy;
    int tau1 = 0;
    int tau2 = 0;
    std::string irp_mode;
    std::string classifier;
    std::string seed;  // a number for detail rows, "mean"/"std" for summaries
    double muc_f1 = 0.0;
    double b3_f1 = 0.0;
    double ceaf_f1 = 0.0;
    double avg_f1 = 0.0;
    double evictions = 0.0;
    double hit_rate = 0.0;
    double max_batch_elems = 0.0;
};

inline const char* results_csv_header() {
    return "policy,tau1,tau2,irp_mode,classifier,seed,muc_f1,b3_f1,ceaf_f1,avg_f1,evictions,"
           "hit_rate,max_batch_elems";
}

namespace detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Counter columns stay integers on detail rows but turn fractional in
// mean/std summary rows.
inline std::string count_or_fixed6(double v) {
    if (std::floor(v) == v && std::abs(v) < 1e15)
        return std::to_string(static_cast<long long>(v));
    return fixed6(v);
}

}  // namespace detail

inline std::string format_result_row(const ResultRow& r) {
    std::ostringstream out;
    out << r.policy << ',' << r.tau1 << ',' << r.tau2 << ',' << r.irp_mode << ',' << r.classifier
        << ',' << r.seed << ',' << detail::fixed6(r.muc_f1) << ',' << detail::fixed6(r.b3_f1)
        << ',' << detail::fixed6(r.ceaf_f1) << ',' << detail::fixed6(r.avg_f1) << ','
        << detail::count_or_fixed6(r.evictions) << ',' << detail::fixed6(r.hit_rate) << ','
        << detail::count_or_fixed6(r.max_batch_elems);
    return out.str();
}

inline void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << results_csv_header() << '\n';
    for (const auto& r : rows) out << format_result_row(r) << '\n';
    if (!out) throw DataError("write failed on '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic corpus generation
// ---------------------------------------------------------------------------

struct SynthParams {
    int n_documents = 10;
    int entities_per_doc = 32;
    double mentions_per_entity_mean = 9.0;  // Zipf-shaped across entities
    double zipf_shape = 1.0;                // s >= 0; 0 makes every entity the same size
    double span_gap_mean = 5.5;             // filler tokens between mentions, geometric
    double long_range_fraction = 0.3;       // entities spread over the whole document
    double pronoun_rate = 0.4;              // mentions rendered as lexicon pronouns
    std::uint64_t seed = 0;
    long max_tokens = 0;  // 0 = uncapped; otherwise documents over budget fail generation
};

inline void validate_synth_params(const SynthParams& p) {
    if (p.n_documents < 1) throw ConfigError("n_documents must be >= 1");
    if (p.entities_per_doc < 1) throw ConfigError("entities_per_doc must be >= 1");
    if (p.mentions_per_entity_mean < 1.0)
        throw ConfigError("mentions_per_entity_mean must be >= 1");
    if (p.zipf_shape < 0.0) throw ConfigError("zipf_shape must be >= 0");
    if (p.span_gap_mean < 0.0) throw ConfigError("span_gap_mean must be >= 0");
    if (p.long_range_fraction < 0.0 || p.long_range_fraction > 1.0)
        throw ConfigError("long_range_fraction must lie in [0, 1]");
    if (p.pronoun_rate < 0.0 || p.pronoun_rate > 1.0)
        throw ConfigError("pronoun_rate must lie in [0, 1]");
    if (p.max_tokens < 0) throw ConfigError("max_tokens must be >= 0");
}

namespace detail {

inline long geometric_draw(SplitMix64& rng, double mean) {
    if (mean <= 0.0) return 0;
    const double p = 1.0 / (1.0 + mean);
    const double u = rng.next_double();  // in [0, 1)
    return static_cast<long>(std::floor(std::log(1.0 - u) / std::log(1.0 - p)));
}

inline std::string synth_name(SplitMix64& rng) {
    static const char* consonants[] = {"b", "d", "f", "g", "k", "l", "m",
                                       "n", "p", "r", "s", "t", "v", "z"};
    static const char* vowels[] = {"a", "e", "i", "o", "u"};
    const int syllables = 2 + static_cast<int>(rng.next_below(2));
    std::string name;
    for (int s = 0; s < syllables; ++s) {
        name += consonants[rng.next_below(14)];
        name += vowels[rng.next_below(5)];
    }
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    return name;
}

}  // namespace detail

inline std::vector<Document> generate_synthetic(const SynthParams& p) {
    validate_synth_params(p);
    static const char* fillers[] = {"meanwhile", "across",   "town",  "morning", "light", "fell",
                                    "over",      "rooftops", "while", "birds",   "sang"};
    static const char* pronoun_sets[3][3] = {
        {"he", "him", "his"}, {"she", "her", "hers"}, {"they", "them", "their"}};
    const auto& lexicon = PronounLexicon::builtin(false);

    // per-document seeds drawn up front so documents are independent
    SplitMix64 master(p.seed);
    std::vector<std::uint64_t> doc_seeds(static_cast<std::size_t>(p.n_documents));
    for (auto& s : doc_seeds) s = master.next();

    // Zipf mention counts, identical across documents
    const int ne = p.entities_per_doc;
    std::vector<double> weight(static_cast<std::size_t>(ne));
    double weight_mean = 0.0;
    for (int e = 0; e < ne; ++e) {
        weight[static_cast<std::size_t>(e)] = std::pow(static_cast<double>(e + 1), -p.zipf_shape);
        weight_mean += weight[static_cast<std::size_t>(e)];
    }
    weight_mean /= static_cast<double>(ne);
    std::vector<long> counts(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e)
        counts[static_cast<std::size_t>(e)] = std::max<long>(
            1, std::llround(p.mentions_per_entity_mean * weight[static_cast<std::size_t>(e)] /
                            weight_mean));
    const long n_long_range = std::llround(p.long_range_fraction * static_cast<double>(ne));

    std::vector<Document> docs;
    docs.reserve(static_cast<std::size_t>(p.n_documents));
    for (int d = 0; d < p.n_documents; ++d) {
        SplitMix64 rng(doc_seeds[static_cast<std::size_t>(d)]);
        Document doc;
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "synth-%04d", d);
            doc.doc_id = buf;
        }

        // entity surface forms
        std::set<std::string> taken;
        std::vector<std::string> first_name(static_cast<std::size_t>(ne));
        std::vector<std::string> last_name(static_cast<std::size_t>(ne));
        auto fresh_name = [&]() {
            for (;;) {
                std::string name = detail::synth_name(rng);
                std::string lower = name;
                for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                if (lexicon.contains(lower) || !taken.insert(lower).second) continue;
                return name;
            }
        };
        for (int e = 0; e < ne; ++e) {
            first_name[static_cast<std::size_t>(e)] = fresh_name();
            last_name[static_cast<std::size_t>(e)] = fresh_name();
        }

        // mention schedule: sort keys spread long-range entities over the
        // whole document, the rest over a narrow window
        struct Slot {
            double key;
            int entity;
            int seq;
        };
        std::vector<Slot> schedule;
        for (int e = 0; e < ne; ++e) {
            const bool long_range = e < n_long_range;
            const double window_start = long_range ? 0.0 : rng.next_double() * 0.85;
            const double window_size = long_range ? 1.0 : 0.15;
            for (long i = 0; i < counts[static_cast<std::size_t>(e)]; ++i)
                schedule.push_back({window_start + rng.next_double() * window_size, e,
                                    static_cast<int>(i)});
        }
        std::sort(schedule.begin(), schedule.end(), [](const Slot& a, const Slot& b) {
            if (a.key != b.key) return a.key < b.key;
            if (a.entity != b.entity) return a.entity < b.entity;
            return a.seq < b.seq;
        });

        // token layout
        doc.gold_clusters.assign(static_cast<std::size_t>(ne), {});
        std::vector<long> variant_counter(static_cast<std::size_t>(ne), 0);
        std::size_t filler_cursor = 0;
        for (const Slot& slot : schedule) {
            const long gap = detail::geometric_draw(rng, p.span_gap_mean);
            for (long g = 0; g < gap; ++g)
                doc.tokens.emplace_back(fillers[filler_cursor++ % (sizeof fillers / sizeof *fillers)]);

            const auto e = static_cast<std::size_t>(slot.entity);
            std::vector<std::string> surface;
            if (rng.next_double() < p.pronoun_rate) {
                surface = {pronoun_sets[slot.entity % 3][rng.next_below(3)]};
            } else {
                switch (variant_counter[e]++ % 3) {
                    case 0: surface = {first_name[e], last_name[e]}; break;
                    case 1: surface = {first_name[e]}; break;
                    default: surface = {"the", first_name[e], last_name[e]}; break;
                }
            }
            const int start = static_cast<int>(doc.tokens.size());
            for (auto& t : surface) doc.tokens.push_back(std::move(t));
            doc.gold_clusters[e].push_back({start, static_cast<int>(doc.tokens.size()) - 1});
        }

        if (p.max_tokens > 0 && static_cast<long>(doc.tokens.size()) > p.max_tokens)
            throw DataError("doc '" + doc.doc_id + "' needs " + std::to_string(doc.tokens.size()) +
                            " tokens but max_tokens is " + std::to_string(p.max_tokens));
        validate_document(doc);
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace coref
