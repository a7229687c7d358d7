// corefcache: bounded-cache incremental clustering experiments over JSONL
// mention corpora. Subcommands: gen, run, sweep, score.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coref/corpus.hpp"
#include "coref/engine.hpp"
#include "coref/metrics.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// worker pool: tasks pull indices from a shared counter and write results
// into index-addressed slots, so output order never depends on scheduling
// ---------------------------------------------------------------------------

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (jobs < 1) jobs = 1;
    if (static_cast<std::size_t>(jobs) > n) jobs = static_cast<int>(n == 0 ? 1 : n);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// flag token parsing
// ---------------------------------------------------------------------------

coref::EvictionPolicy parse_policy_token(const std::string& token, double lfu_fraction,
                                         long promotion_threshold) {
    if (token == "saes_train") return coref::EvictionPolicy::saes_train();
    if (token == "saes_inf") return coref::EvictionPolicy::saes_inf();
    if (token == "lru") return coref::EvictionPolicy::lru();
    if (token == "dual") return coref::EvictionPolicy::dual_cache(lfu_fraction, promotion_threshold);
    throw coref::ConfigError("unknown eviction policy '" + token +
                             "' (expected saes_train, saes_inf, lru, or dual)");
}

coref::IrpMode parse_irp_token(const std::string& token) {
    if (token == "group") return coref::IrpMode::GroupBased;
    if (token == "random") return coref::IrpMode::Random;
    if (token == "off") return coref::IrpMode::Off;
    throw coref::ConfigError("unknown irp mode '" + token + "' (expected group, random, or off)");
}

coref::ClassifierKind parse_classifier_token(const std::string& token) {
    if (token == "oracle") return coref::ClassifierKind::oracle();
    if (token.rfind("noisy:", 0) == 0) {
        double p = 0.0;
        try {
            std::size_t used = 0;
            p = std::stod(token.substr(6), &used);
            if (used != token.size() - 6) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw coref::ConfigError("cannot parse flip probability in '" + token + "'");
        }
        return coref::ClassifierKind::noisy_oracle(p);
    }
    throw coref::ConfigError("unknown classifier '" + token + "' (expected oracle or noisy:P)");
}

coref::Phase parse_phase_token(const std::string& token) {
    if (token == "annotated") return coref::Phase::AnnotatedReplay;
    if (token == "blind") return coref::Phase::Blind;
    throw coref::ConfigError("unknown phase '" + token + "' (expected annotated or blind)");
}

struct GridCell {
    int tau1 = 0;
    int tau2 = 0;
};

std::vector<GridCell> parse_grid(const std::string& grid) {
    std::vector<GridCell> cells;
    std::size_t pos = 0;
    while (pos <= grid.size()) {
        const std::size_t comma = std::min(grid.find(',', pos), grid.size());
        const std::string entry = grid.substr(pos, comma - pos);
        const std::size_t slash = entry.find('/');
        if (slash == std::string::npos)
            throw coref::ConfigError("grid entry '" + entry + "' is not of the form tau1/tau2");
        try {
            std::size_t u1 = 0, u2 = 0;
            const int t1 = std::stoi(entry.substr(0, slash), &u1);
            const int t2 = std::stoi(entry.substr(slash + 1), &u2);
            if (u1 != slash || u2 != entry.size() - slash - 1) throw std::invalid_argument(entry);
            cells.push_back({t1, t2});
        } catch (const std::exception&) {
            throw coref::ConfigError("grid entry '" + entry + "' is not of the form tau1/tau2");
        }
        pos = comma + 1;
    }
    if (cells.empty()) throw coref::ConfigError("empty tau grid");
    return cells;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = std::min(s.find(',', pos), s.size());
        out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// replay + scoring shared by run and sweep
// ---------------------------------------------------------------------------

struct DocOutcome {
    coref::ClusterSet predictions;
    coref::ReplayTrace trace;
    coref::DocumentScores scores;
};

DocOutcome replay_and_score(const coref::Document& doc, const coref::EngineConfig& base_cfg,
                            std::uint64_t base_seed, std::size_t doc_index, coref::Phase phase) {
    coref::EngineConfig cfg = base_cfg;
    cfg.seed = base_seed ^ static_cast<std::uint64_t>(doc_index);
    DocOutcome out;
    auto [preds, trace] = coref::run_document(doc, coref::default_stream(doc), cfg, phase);
    out.predictions = std::move(preds);
    out.trace = std::move(trace);
    out.scores = coref::score_document(doc.gold_clusters, out.predictions);
    return out;
}

json metric_to_json(const coref::MetricScore& s) {
    return json{{"recall", s.recall}, {"precision", s.precision}, {"f1", s.f1}};
}

json report_to_json(const coref::ScoreReport& r) {
    return json{{"muc", metric_to_json(r.muc)},
                {"b3", metric_to_json(r.b3)},
                {"ceaf", metric_to_json(r.ceaf)},
                {"avg_f1", r.avg_f1}};
}

coref::ScoreReport aggregate_report(const std::vector<coref::DocumentScores>& scores, bool micro) {
    return micro ? coref::micro_report(scores) : coref::macro_report(scores);
}

// ---------------------------------------------------------------------------
// subcommand payloads
// ---------------------------------------------------------------------------

struct GenArgs {
    std::string out;
    coref::SynthParams params;
};

int run_gen(const GenArgs& a) {
    const auto docs = coref::generate_synthetic(a.params);
    coref::write_corpus(a.out, docs);
    std::cout << "wrote " << docs.size() << " documents to " << a.out << "\n";
    return 0;
}

struct RunArgs {
    std::string corpus;
    std::string out_dir;
    int tau1 = 50;
    int tau2 = 30;
    double delta = 1e-5;
    std::string train_policy = "saes_train";
    std::string infer_policy = "saes_inf";
    std::string irp = "group";
    std::string classifier = "oracle";
    std::string phase = "annotated";
    std::uint64_t seed = 0;
    int hidden_dim = 1024;
    double lfu_fraction = 0.5;
    long promotion_threshold = 2;
    bool include_it = false;
    bool raw_substring = false;
    bool stored_count_em = false;
    bool micro = false;
    int jobs = 4;
};

coref::EngineConfig config_from_run_args(const RunArgs& a) {
    coref::EngineConfig cfg;
    cfg.tau1 = a.tau1;
    cfg.tau2 = a.tau2;
    cfg.delta = a.delta;
    cfg.train_policy = parse_policy_token(a.train_policy, a.lfu_fraction, a.promotion_threshold);
    cfg.infer_policy = parse_policy_token(a.infer_policy, a.lfu_fraction, a.promotion_threshold);
    cfg.irp_mode = parse_irp_token(a.irp);
    cfg.classifier = parse_classifier_token(a.classifier);
    cfg.seed = a.seed;
    cfg.hidden_dim = a.hidden_dim;
    cfg.pronoun_excludes_it = !a.include_it;
    cfg.inclusion_mode = a.raw_substring ? coref::InclusionMode::RawSubstring
                                         : coref::InclusionMode::TokenSubsequence;
    cfg.em_uses_stored_count = a.stored_count_em;
    coref::validate_config(cfg);
    return cfg;
}

int run_run(const RunArgs& a) {
    const coref::EngineConfig cfg = config_from_run_args(a);
    const coref::Phase phase = parse_phase_token(a.phase);
    const auto docs = coref::parse_jsonl(a.corpus);

    std::vector<DocOutcome> outcomes(docs.size());
    parallel_for(docs.size(), a.jobs,
                 [&](std::size_t i) { outcomes[i] = replay_and_score(docs[i], cfg, a.seed, i, phase); });

    std::filesystem::create_directories(a.out_dir);
    std::vector<coref::ClusterSet> preds;
    preds.reserve(outcomes.size());
    for (const auto& o : outcomes) preds.push_back(o.predictions);
    const std::string pred_path = (std::filesystem::path(a.out_dir) / "predictions.jsonl").string();
    coref::write_predictions(pred_path, docs, preds);

    json jdocs = json::array();
    std::vector<coref::DocumentScores> scores;
    long long evictions = 0, assignments = 0, hits = 0, mentions = 0;
    long long max_batch = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& o = outcomes[i];
        scores.push_back(o.scores);
        const auto n_mentions = static_cast<long long>(o.trace.decisions.size());
        json jd = report_to_json(coref::document_report(o.scores));
        jd["doc_id"] = docs[i].doc_id;
        jd["mentions"] = n_mentions;
        jd["evictions"] = o.trace.evictions;
        jd["assignments"] = o.trace.assignments;
        jd["hit_count"] = o.trace.hit_count;
        jd["hit_rate"] = n_mentions > 0 ? static_cast<double>(o.trace.hit_count) /
                                              static_cast<double>(n_mentions)
                                        : 0.0;
        jd["max_batch_elems"] = o.trace.max_batch_elems;
        jdocs.push_back(std::move(jd));
        evictions += o.trace.evictions;
        assignments += o.trace.assignments;
        hits += o.trace.hit_count;
        mentions += n_mentions;
        max_batch = std::max(max_batch, static_cast<long long>(o.trace.max_batch_elems));
    }

    json jagg = report_to_json(aggregate_report(scores, a.micro));
    jagg["aggregation"] = a.micro ? "micro" : "macro";
    jagg["documents"] = docs.size();
    jagg["mentions"] = mentions;
    jagg["evictions"] = evictions;
    jagg["assignments"] = assignments;
    jagg["hit_count"] = hits;
    jagg["hit_rate"] = mentions > 0 ? static_cast<double>(hits) / static_cast<double>(mentions) : 0.0;
    jagg["max_batch_elems"] = max_batch;
    jagg["batch_elems_bound"] = coref::batch_budget(cfg.tau1, cfg.tau2, cfg.hidden_dim);

    const json report{{"aggregate", std::move(jagg)}, {"documents", std::move(jdocs)}};
    const std::string report_path = (std::filesystem::path(a.out_dir) / "report.json").string();
    std::ofstream out(report_path);
    if (!out) throw coref::DataError("cannot write '" + report_path + "'");
    out << report.dump(2) << '\n';
    if (!out) throw coref::DataError("write failed on '" + report_path + "'");
    std::cout << "avg_f1 " << coref::detail::fixed6(report["aggregate"]["avg_f1"].get<double>())
              << " over " << docs.size() << " documents; report in " << a.out_dir << "\n";
    return 0;
}

struct SweepArgs {
    std::string corpus;
    std::string out_csv;
    std::string grid = "10/10,10/20,10/30,30/30,50/30";
    std::string policies = "saes,lru,dual";
    int n_seeds = 3;
    std::uint64_t base_seed = 0;
    double delta = 1e-5;
    std::string irp = "group";
    std::string classifier = "oracle";
    std::string phase = "annotated";
    int hidden_dim = 1024;
    double lfu_fraction = 0.5;
    long promotion_threshold = 2;
    int jobs = 4;
};

struct SweepConfig {
    std::string policy_token;
    GridCell cell;
    std::uint64_t seed;
    coref::EngineConfig cfg;
};

// saes pairs the two SAES formulas across phases; lru and dual use the same
// policy in both.
void apply_policy_token(const std::string& token, const SweepArgs& a, coref::EngineConfig& cfg) {
    if (token == "saes") {
        cfg.train_policy = coref::EvictionPolicy::saes_train();
        cfg.infer_policy = coref::EvictionPolicy::saes_inf();
    } else if (token == "lru") {
        cfg.train_policy = coref::EvictionPolicy::lru();
        cfg.infer_policy = coref::EvictionPolicy::lru();
    } else if (token == "dual") {
        cfg.train_policy = coref::EvictionPolicy::dual_cache(a.lfu_fraction, a.promotion_threshold);
        cfg.infer_policy = cfg.train_policy;
    } else {
        throw coref::ConfigError("unknown sweep policy '" + token +
                                 "' (expected saes, lru, or dual)");
    }
}

int run_sweep(const SweepArgs& a) {
    if (a.n_seeds < 1) throw coref::ConfigError("--seeds must be >= 1");
    const coref::Phase phase = parse_phase_token(a.phase);
    const auto cells = parse_grid(a.grid);
    const auto policy_tokens = split_commas(a.policies);
    const auto docs = coref::parse_jsonl(a.corpus);
    if (docs.empty()) throw coref::DataError("corpus '" + a.corpus + "' holds no documents");

    std::vector<SweepConfig> configs;
    for (const auto& token : policy_tokens) {
        for (const auto& cell : cells) {
            for (int s = 0; s < a.n_seeds; ++s) {
                SweepConfig sc;
                sc.policy_token = token;
                sc.cell = cell;
                sc.seed = a.base_seed + static_cast<std::uint64_t>(s);
                sc.cfg.tau1 = cell.tau1;
                sc.cfg.tau2 = cell.tau2;
                sc.cfg.delta = a.delta;
                apply_policy_token(token, a, sc.cfg);
                sc.cfg.irp_mode = parse_irp_token(a.irp);
                sc.cfg.classifier = parse_classifier_token(a.classifier);
                sc.cfg.hidden_dim = a.hidden_dim;
                coref::validate_config(sc.cfg);
                configs.push_back(std::move(sc));
            }
        }
    }

    // one task per (config, document), merged by fixed slot index
    const std::size_t n_docs = docs.size();
    std::vector<DocOutcome> outcomes(configs.size() * n_docs);
    parallel_for(outcomes.size(), a.jobs, [&](std::size_t t) {
        const std::size_t ci = t / n_docs, di = t % n_docs;
        outcomes[t] = replay_and_score(docs[di], configs[ci].cfg, configs[ci].seed, di, phase);
    });

    auto detail_row = [&](std::size_t ci) {
        const SweepConfig& sc = configs[ci];
        coref::ResultRow row;
        row.policy = sc.policy_token;
        row.tau1 = sc.cell.tau1;
        row.tau2 = sc.cell.tau2;
        row.irp_mode = a.irp;
        row.classifier = a.classifier;
        row.seed = std::to_string(sc.seed);
        std::vector<coref::DocumentScores> scores;
        long long evictions = 0, hits = 0, mentions = 0, max_batch = 0;
        for (std::size_t di = 0; di < n_docs; ++di) {
            const auto& o = outcomes[ci * n_docs + di];
            scores.push_back(o.scores);
            evictions += o.trace.evictions;
            hits += o.trace.hit_count;
            mentions += static_cast<long long>(o.trace.decisions.size());
            max_batch = std::max(max_batch, static_cast<long long>(o.trace.max_batch_elems));
        }
        const coref::ScoreReport agg = coref::macro_report(scores);
        row.muc_f1 = agg.muc.f1;
        row.b3_f1 = agg.b3.f1;
        row.ceaf_f1 = agg.ceaf.f1;
        row.avg_f1 = agg.avg_f1;
        row.evictions = static_cast<double>(evictions);
        row.hit_rate = mentions > 0 ? static_cast<double>(hits) / static_cast<double>(mentions) : 0.0;
        row.max_batch_elems = static_cast<double>(max_batch);
        return row;
    };

    std::vector<coref::ResultRow> rows;
    std::size_t ci = 0;
    for (std::size_t pi = 0; pi < policy_tokens.size(); ++pi) {
        for (std::size_t gi = 0; gi < cells.size(); ++gi) {
            std::vector<coref::ResultRow> seed_rows;
            for (int s = 0; s < a.n_seeds; ++s) seed_rows.push_back(detail_row(ci++));
            rows.insert(rows.end(), seed_rows.begin(), seed_rows.end());

            // mean and population-stddev summary rows across seeds
            auto summarize = [&](const char* label, auto&& reduce) {
                coref::ResultRow r = seed_rows.front();
                r.seed = label;
                r.muc_f1 = reduce([](const coref::ResultRow& x) { return x.muc_f1; });
                r.b3_f1 = reduce([](const coref::ResultRow& x) { return x.b3_f1; });
                r.ceaf_f1 = reduce([](const coref::ResultRow& x) { return x.ceaf_f1; });
                r.avg_f1 = reduce([](const coref::ResultRow& x) { return x.avg_f1; });
                r.evictions = reduce([](const coref::ResultRow& x) { return x.evictions; });
                r.hit_rate = reduce([](const coref::ResultRow& x) { return x.hit_rate; });
                r.max_batch_elems =
                    reduce([](const coref::ResultRow& x) { return x.max_batch_elems; });
                return r;
            };
            const double n = static_cast<double>(seed_rows.size());
            auto mean_of = [&](auto&& get) {
                double sum = 0.0;
                for (const auto& r : seed_rows) sum += get(r);
                return sum / n;
            };
            auto std_of = [&](auto&& get) {
                const double mu = mean_of(get);
                double acc = 0.0;
                for (const auto& r : seed_rows) acc += (get(r) - mu) * (get(r) - mu);
                return std::sqrt(acc / n);
            };
            rows.push_back(summarize("mean", mean_of));
            rows.push_back(summarize("std", std_of));
        }
    }

    coref::write_results_csv(a.out_csv, rows);
    std::cout << "wrote " << rows.size() << " rows (" << configs.size() << " runs) to "
              << a.out_csv << "\n";
    return 0;
}

struct ScoreArgs {
    std::string gold;
    std::string pred;
    bool micro = false;
};

int run_score(const ScoreArgs& a) {
    const auto gold_docs = coref::parse_jsonl(a.gold);
    const auto pred_docs = coref::parse_jsonl(a.pred);

    std::map<std::string, std::size_t> pred_index;
    for (std::size_t i = 0; i < pred_docs.size(); ++i) pred_index.emplace(pred_docs[i].doc_id, i);
    std::vector<std::string> missing, extra;
    for (const auto& d : gold_docs)
        if (!pred_index.count(d.doc_id)) missing.push_back(d.doc_id);
    {
        std::set<std::string> gold_ids;
        for (const auto& d : gold_docs) gold_ids.insert(d.doc_id);
        for (const auto& d : pred_docs)
            if (!gold_ids.count(d.doc_id)) extra.push_back(d.doc_id);
    }
    if (!missing.empty() || !extra.empty()) {
        std::string msg = "doc_id mismatch between gold and pred:";
        for (const auto& id : missing) msg += " missing:" + id;
        for (const auto& id : extra) msg += " unexpected:" + id;
        throw coref::DataError(msg);
    }

    json jdocs = json::array();
    std::vector<coref::DocumentScores> scores;
    for (const auto& d : gold_docs) {
        const auto& pred = pred_docs[pred_index.at(d.doc_id)];
        coref::DocumentScores s = coref::score_document(d.gold_clusters, pred.gold_clusters);
        scores.push_back(s);
        json jd = report_to_json(coref::document_report(s));
        jd["doc_id"] = d.doc_id;
        jdocs.push_back(std::move(jd));
    }
    json jagg = report_to_json(aggregate_report(scores, a.micro));
    jagg["aggregation"] = a.micro ? "micro" : "macro";
    jagg["documents"] = gold_docs.size();
    const json report{{"aggregate", std::move(jagg)}, {"documents", std::move(jdocs)}};
    std::cout << report.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bounded-cache incremental clustering harness"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* cgen = app.add_subcommand("gen", "generate a synthetic JSONL corpus");
    cgen->add_option("--out", gen.out, "output corpus path")->required();
    cgen->add_option("--docs", gen.params.n_documents, "number of documents");
    cgen->add_option("--entities", gen.params.entities_per_doc, "entities per document");
    cgen->add_option("--mentions-mean", gen.params.mentions_per_entity_mean,
                     "mean mentions per entity");
    cgen->add_option("--zipf-shape", gen.params.zipf_shape, "Zipf shape across entities");
    cgen->add_option("--gap-mean", gen.params.span_gap_mean, "mean filler tokens between mentions");
    cgen->add_option("--long-range", gen.params.long_range_fraction,
                     "fraction of entities spread over the whole document");
    cgen->add_option("--pronoun-rate", gen.params.pronoun_rate, "fraction of pronoun mentions");
    cgen->add_option("--seed", gen.params.seed, "generator seed")->envname("COREFCACHE_SEED");
    cgen->add_option("--max-tokens", gen.params.max_tokens,
                     "per-document token budget (0 = uncapped)");

    RunArgs run;
    CLI::App* crun = app.add_subcommand("run", "replay one configuration over a corpus");
    crun->add_option("corpus", run.corpus, "JSONL corpus")->required();
    crun->add_option("--out", run.out_dir, "output directory")->required();
    crun->add_option("--tau1", run.tau1, "max tracked clusters");
    crun->add_option("--tau2", run.tau2, "max stored mentions per cluster");
    crun->add_option("--delta", run.delta, "recency stabilizer");
    crun->add_option("--train-policy", run.train_policy,
                     "saes_train|saes_inf|lru|dual (annotated phase)");
    crun->add_option("--infer-policy", run.infer_policy, "saes_train|saes_inf|lru|dual (blind phase)");
    crun->add_option("--irp", run.irp, "group|random|off");
    crun->add_option("--classifier", run.classifier, "oracle|noisy:P");
    crun->add_option("--phase", run.phase, "annotated|blind");
    crun->add_option("--seed", run.seed, "base seed (per-document seed = base xor doc index)")
        ->envname("COREFCACHE_SEED");
    crun->add_option("--hidden-dim", run.hidden_dim, "d_h for batch telemetry");
    crun->add_option("--lfu-fraction", run.lfu_fraction, "dual-cache LFU slot fraction");
    crun->add_option("--promotion-threshold", run.promotion_threshold,
                     "dual-cache promotion threshold");
    crun->add_flag("--include-it", run.include_it, "keep 'it' in the pronoun lexicon");
    crun->add_flag("--raw-substring", run.raw_substring,
                   "raw character-substring inclusion instead of token runs");
    crun->add_flag("--stored-count-em", run.stored_count_em,
                   "score em from stored mentions instead of cumulative assignments");
    crun->add_flag("--micro", run.micro, "micro-average the corpus aggregate");
    crun->add_option("--jobs", run.jobs, "worker threads");

    SweepArgs sweep;
    CLI::App* csweep = app.add_subcommand("sweep", "grid over policies, tau cells, and seeds");
    csweep->add_option("corpus", sweep.corpus, "JSONL corpus")->required();
    csweep->add_option("--out", sweep.out_csv, "results CSV path")->required();
    csweep->add_option("--grid", sweep.grid, "comma-separated tau1/tau2 cells");
    csweep->add_option("--policies", sweep.policies, "comma-separated: saes,lru,dual");
    csweep->add_option("--seeds", sweep.n_seeds, "seeds per cell");
    csweep->add_option("--seed", sweep.base_seed, "base seed (runs use base, base+1, ...)")
        ->envname("COREFCACHE_SEED");
    csweep->add_option("--delta", sweep.delta, "recency stabilizer");
    csweep->add_option("--irp", sweep.irp, "group|random|off");
    csweep->add_option("--classifier", sweep.classifier, "oracle|noisy:P");
    csweep->add_option("--phase", sweep.phase, "annotated|blind");
    csweep->add_option("--hidden-dim", sweep.hidden_dim, "d_h for batch telemetry");
    csweep->add_option("--lfu-fraction", sweep.lfu_fraction, "dual-cache LFU slot fraction");
    csweep->add_option("--promotion-threshold", sweep.promotion_threshold,
                       "dual-cache promotion threshold");
    csweep->add_option("--jobs", sweep.jobs, "worker threads");

    ScoreArgs score;
    CLI::App* cscore = app.add_subcommand("score", "score predictions against gold");
    cscore->add_option("--gold", score.gold, "gold JSONL")->required();
    cscore->add_option("--pred", score.pred, "prediction JSONL")->required();
    cscore->add_flag("--micro", score.micro, "micro-average the corpus aggregate");

    try {
        app.parse(argc, argv);
        if (cgen->parsed()) return run_gen(gen);
        if (crun->parsed()) return run_run(run);
        if (csweep->parsed()) return run_sweep(sweep);
        if (cscore->parsed()) return run_score(score);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const coref::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const coref::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
