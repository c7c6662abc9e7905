#include "roadqa/cli.hpp"

#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "CLI11.hpp"
#include "roadqa/backend.hpp"
#include "roadqa/corpus.hpp"
#include "roadqa/errors.hpp"
#include "roadqa/evaluation.hpp"
#include "roadqa/kmeans.hpp"
#include "roadqa/qa_io.hpp"
#include "roadqa/retrieval.hpp"
#include "roadqa/scorers.hpp"
#include "roadqa/server.hpp"
#include "roadqa/synthesis.hpp"

namespace roadqa::cli {

namespace {

struct BackendOptions {
    std::string kind = "hash";
    std::string fixture;
    std::string endpoint;
    std::size_t dim = 768;
    std::uint64_t seed = 0;
    int timeout_ms = 30000;
    std::size_t batch_size = 64;

    void add_to(CLI::App& app) {
        app.add_option("--backend", kind, "Model backend")
            ->check(CLI::IsMember({"hash", "fixture", "remote"}))
            ->capture_default_str();
        app.add_option("--fixture", fixture, "Fixture JSONL file (fixture backend)");
        app.add_option("--endpoint", endpoint, "Backend server URL (remote backend)");
        app.add_option("--dim", dim, "Embedding dimension")->capture_default_str();
        app.add_option("--backend-seed", seed, "Global seed of the hash backend")->capture_default_str();
        app.add_option("--timeout-ms", timeout_ms, "Remote request timeout")->capture_default_str();
        app.add_option("--batch-size", batch_size, "Remote request batch size")->capture_default_str();
    }

    std::unique_ptr<ModelBackend> make() const {
        BackendConfig config;
        if (kind == "fixture") {
            config.kind = BackendKind::FixtureFile;
        } else if (kind == "remote") {
            config.kind = BackendKind::Remote;
        } else {
            config.kind = BackendKind::DeterministicHash;
        }
        config.fixture_path = fixture;
        config.endpoint = endpoint;
        config.dimension = dim;
        config.seed = seed;
        config.timeout = std::chrono::milliseconds(timeout_ms);
        config.batch_size = batch_size;
        return make_backend(config);
    }
};

struct ScorerOptions {
    std::string scorer = "nli";
    std::string metric = "cosine";
    std::string prompt_template = "default";
    int max_length = 32;

    void add_to(CLI::App& app, bool with_kind) {
        if (with_kind) {
            app.add_option("--scorer", scorer, "Answering strategy")
                ->check(CLI::IsMember({"nli", "plaus", "plausibility", "openbook"}))
                ->capture_default_str();
        }
        app.add_option("--metric", metric, "Open-book answer matching")
            ->check(CLI::IsMember({"cosine", "overlap"}))
            ->capture_default_str();
        app.add_option("--template", prompt_template, "Open-book prompt template")->capture_default_str();
        app.add_option("--max-length", max_length, "Generation length limit")->capture_default_str();
    }

    ScorerConfig config() const {
        ScorerConfig c;
        if (scorer == "nli") {
            c.kind = ScorerKind::Nli;
        } else if (scorer == "openbook") {
            c.kind = ScorerKind::OpenBook;
        } else {
            c.kind = ScorerKind::Plausibility;
        }
        c.metric = metric == "overlap" ? AnswerMetric::TokenOverlap : AnswerMetric::EmbeddingCosine;
        c.prompt_template = prompt_template;
        c.max_length = max_length;
        return c;
    }
};

struct SynthOptions {
    std::string pairs;
    std::string out;
    std::string mode = "ep";
    double t = 0.4;
    double dedup = 0.9;
    int n = 3;
    std::uint64_t seed = 0;
    int max_attempts = 100;
    std::string label_map;
    std::string clusters_out;
    int k = 5;
    BackendOptions backend;
};

int run_synth(const SynthOptions& o, std::ostream& out) {
    SynthesisConfig config;
    config.mode = o.mode == "cp" ? SynthesisMode::CausePrediction : SynthesisMode::EffectPrediction;
    config.distractor_upper_bound = o.t;
    config.dedup_threshold = o.dedup;
    config.num_candidates = o.n;
    config.rng_seed = o.seed;
    config.max_resample_attempts = o.max_attempts;
    validate(config);

    auto backend = o.backend.make();
    auto result = synthesize(load_pairs_file(o.pairs), config, *backend);
    auto& items = result.synthesis.items;

    if (!o.label_map.empty() || !o.clusters_out.empty()) {
        std::vector<std::string> effects;
        for (const auto& p : result.kept_pairs) effects.push_back(p.effect);
        if (effects.empty()) throw ValidationError("no pairs left to cluster");
        const auto vectors = backend->embed(effects);
        auto fit = kmeans_fit(std::span<const EmbeddingVector>(vectors), o.k, o.seed);

        if (!o.clusters_out.empty()) {
            Json clusters = Json::object();
            for (int c = 0; c < o.k; ++c) clusters[std::to_string(c)] = Json::array();
            for (std::size_t i = 0; i < effects.size(); ++i) {
                clusters[std::to_string(fit.assignments[i])].push_back(effects[i]);
            }
            write_text_file(o.clusters_out, clusters.dump(2) + "\n");
        }
        if (!o.label_map.empty()) {
            fit.model.label_map = load_label_map(o.label_map);
            const auto labels = classify_actions(effects, fit.model, *backend);
            std::map<std::string, ActionClass> by_pair;
            for (std::size_t i = 0; i < labels.size(); ++i) by_pair[result.kept_pairs[i].id] = labels[i];
            for (auto& item : items) item.class_label = by_pair.at(item.metadata.at("pair_id"));
        }
    }

    write_qa_file(items, o.out);
    out << "pairs read: " << result.input_pairs << "\n"
        << "removed as near-duplicate causes: " << result.deduplicated_pairs << "\n"
        << "items written: " << items.size() << "\n"
        << "skipped (sampling exhausted): " << result.synthesis.skipped_pair_ids.size() << "\n";
    return kExitOk;
}

int run_filter(const std::string& in_path, const std::string& out_path, std::ostream& out) {
    const auto items = load_qa_file(in_path);
    const auto kept = filter_domain_questions(items);
    write_qa_file(kept, out_path);
    out << "kept " << kept.size() << " of " << items.size() << " items\n";
    return kExitOk;
}

struct IngestOptions {
    std::string dir;
    std::string out;
    int chunk = 10;
    std::string normalizer = "identity";
    std::string prefix;
    BackendOptions backend;
};

int run_ingest(const IngestOptions& o, std::ostream& out) {
    std::vector<Paragraph> paragraphs;
    if (o.normalizer == "backend") {
        auto backend = o.backend.make();
        GenerativeNormalizer normalizer(*backend, o.prefix);
        paragraphs = ingest_directory(o.dir, o.chunk, normalizer);
        if (normalizer.fallback_count()) {
            out << "normalizer fell back to identity for " << normalizer.fallback_count() << " sentences\n";
        }
    } else {
        IdentityNormalizer normalizer;
        paragraphs = ingest_directory(o.dir, o.chunk, normalizer);
    }
    write_paragraphs_file(paragraphs, o.out);
    out << "paragraphs: " << paragraphs.size() << "\n";
    if (!paragraphs.empty()) {
        const auto stats = corpus_stats(paragraphs);
        out << "mean word count: " << stats.mean_word_count << "\n";
    }
    return kExitOk;
}

int run_index(const std::string& paragraphs_path, const std::string& prefix, const BackendOptions& b,
              std::ostream& out) {
    auto backend = b.make();
    const auto index = ParagraphIndex::build(load_paragraphs_file(paragraphs_path), *backend);
    index.save(prefix);
    out << "indexed " << index.size() << " paragraphs (dim " << index.dim() << ")\n";
    return kExitOk;
}

struct ScoreOptions {
    std::string items;
    std::string out;
    std::string index;
    ScorerOptions scorer;
    BackendOptions backend;
};

int run_score(const ScoreOptions& o, std::ostream& out) {
    const auto config = o.scorer.config();
    auto backend = o.backend.make();
    const auto items = load_qa_file(o.items);
    std::optional<ParagraphIndex> index;
    if (config.kind == ScorerKind::OpenBook) {
        if (o.index.empty()) throw ConfigError("--scorer openbook requires --index");
        index = ParagraphIndex::load(o.index);
    }
    const auto records = score_items(items, config, *backend, index ? &*index : nullptr);
    write_predictions_file(records, o.out);
    std::size_t errored = 0;
    for (const auto& r : records) errored += r.errored();
    out << "scored " << records.size() << " items with " << scorer_name(config.kind);
    if (errored) out << " (" << errored << " errored)";
    out << "\n";
    return kExitOk;
}

struct EvalOptions {
    std::vector<std::string> predictions;
    std::string gold;
    std::string format = "markdown";
    std::string out;
    bool lenient = false;
};

int run_eval(const EvalOptions& o, std::ostream& out) {
    const auto gold = load_qa_file(o.gold);
    const auto mode = o.lenient ? CoverageMode::Lenient : CoverageMode::Strict;
    std::vector<EvaluationReport> reports;
    for (const auto& path : o.predictions) reports.push_back(evaluate(load_predictions_file(path), gold, mode));
    const std::string text = emit_report(reports, o.format == "json" ? ReportFormat::Json : ReportFormat::Markdown);
    if (o.out.empty()) {
        out << text;
    } else {
        write_text_file(o.out, text);
    }
    for (const auto& r : reports) {
        if (r.errored || r.missing) {
            out << r.scorer_name << ": " << r.errored << " errored, " << r.missing << " missing (counted wrong)\n";
        }
    }
    return kExitOk;
}

int run_overlap(const std::string& a, const std::string& b, const std::string& gold_path, bool as_json,
                std::ostream& out) {
    const auto gold = load_qa_file(gold_path);
    const auto r = overlap_analysis(load_predictions_file(a), load_predictions_file(b), gold);
    if (as_json) {
        out << to_json(r).dump(2) << "\n";
        return kExitOk;
    }
    out << "total: " << r.total << "\n"
        << "correct A: " << r.correct_a << " (" << format_percent(static_cast<double>(r.correct_a) / static_cast<double>(r.total)) << "%)\n"
        << "correct B: " << r.correct_b << " (" << format_percent(static_cast<double>(r.correct_b) / static_cast<double>(r.total)) << "%)\n"
        << "joint correct: " << r.joint_correct << "\n"
        << "union correct: " << r.union_correct << "\n"
        << "ensemble upper bound: " << format_percent(r.ensemble_upper_bound()) << "%\n";
    return kExitOk;
}

int run_human_eval(const std::string& votes_path, const std::string& gold_path, std::ostream& out) {
    const auto aggregate = aggregate_human(load_votes_file(votes_path));
    Json j = to_json(aggregate);
    if (!gold_path.empty()) {
        const auto tally = human_accuracy(aggregate, load_qa_file(gold_path));
        j["correct"] = tally.correct;
        j["total"] = tally.total;
        j["accuracy"] = tally.total ? Json(tally.accuracy()) : Json(nullptr);
    }
    out << j.dump(2) << "\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", aggregate.mean_confidence);
    out << "mean confidence: " << buf << "\n"
        << "unresolved items: " << aggregate.unresolved.size() << "\n";
    return kExitOk;
}

struct ServeOptions {
    std::string index;
    std::string host = "127.0.0.1";
    int port = 8080;
    ScorerOptions scorer;
    BackendOptions backend;
};

int run_serve(const ServeOptions& o, std::ostream& out) {
    auto backend = o.backend.make();
    const auto index = ParagraphIndex::load(o.index);
    auto config = o.scorer.config();
    config.kind = ScorerKind::OpenBook;
    httplib::Server server;
    install_answer_routes(server, index, *backend, config);
    out << "serving " << index.size() << " paragraphs on " << o.host << ":" << o.port << "\n" << std::flush;
    if (!server.listen(o.host, o.port)) throw IoError("cannot listen on " + o.host + ":" + std::to_string(o.port));
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Benchmark synthesis and zero-shot evaluation for driving-domain MCQA", "roadqa"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Build MCQA items from cause/effect pairs");
    synth_cmd->add_option("--pairs", synth.pairs, "CausalPair JSONL")->required();
    synth_cmd->add_option("--out", synth.out, "Output QA JSONL")->required();
    synth_cmd->add_option("--mode", synth.mode, "ep: predict effect, cp: predict cause")
        ->check(CLI::IsMember({"ep", "cp"}))
        ->capture_default_str();
    synth_cmd->add_option("--t", synth.t, "Distractor similarity upper bound")->capture_default_str();
    synth_cmd->add_option("--dedup", synth.dedup, "Cause deduplication threshold")->capture_default_str();
    synth_cmd->add_option("--n", synth.n, "Candidates per item")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Sampling seed")->capture_default_str();
    synth_cmd->add_option("--max-attempts", synth.max_attempts, "Distractor redraw budget")->capture_default_str();
    synth_cmd->add_option("--label-map", synth.label_map, "Cluster id → class JSON; labels items");
    synth_cmd->add_option("--clusters-out", synth.clusters_out, "Write effect clusters for inspection");
    synth_cmd->add_option("--k", synth.k, "Number of action clusters")->capture_default_str();
    synth.backend.add_to(*synth_cmd);

    std::string filter_in;
    std::string filter_out;
    auto* filter_cmd = app.add_subcommand("filter", "Drop catch-all and image questions");
    filter_cmd->add_option("--in", filter_in, "Raw QA JSONL")->required();
    filter_cmd->add_option("--out", filter_out, "Filtered QA JSONL")->required();

    IngestOptions ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Split manuals into paragraphs");
    ingest_cmd->add_option("--dir", ingest.dir, "Directory of .txt manuals")->required();
    ingest_cmd->add_option("--out", ingest.out, "Paragraph JSONL")->required();
    ingest_cmd->add_option("--chunk", ingest.chunk, "Sentences per paragraph")->capture_default_str();
    ingest_cmd->add_option("--normalizer", ingest.normalizer, "Sentence cleanup")
        ->check(CLI::IsMember({"identity", "backend"}))
        ->capture_default_str();
    ingest_cmd->add_option("--normalizer-prefix", ingest.prefix, "Prompt prefix for the backend normalizer");
    ingest.backend.add_to(*ingest_cmd);

    std::string index_paragraphs;
    std::string index_out;
    BackendOptions index_backend;
    auto* index_cmd = app.add_subcommand("index", "Embed paragraphs into a retrieval index");
    index_cmd->add_option("--paragraphs", index_paragraphs, "Paragraph JSONL")->required();
    index_cmd->add_option("--out", index_out, "Index path prefix")->required();
    index_backend.add_to(*index_cmd);

    ScoreOptions score;
    auto* score_cmd = app.add_subcommand("score", "Answer QA items with a zero-shot scorer");
    score_cmd->add_option("--items", score.items, "QA JSONL")->required();
    score_cmd->add_option("--out", score.out, "Prediction JSONL")->required();
    score_cmd->add_option("--index", score.index, "Index path prefix (openbook)");
    score.scorer.add_to(*score_cmd, true);
    score.backend.add_to(*score_cmd);

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Accuracy report for prediction files");
    eval_cmd->add_option("--predictions", eval.predictions, "Prediction JSONL (repeatable)")->required();
    eval_cmd->add_option("--gold", eval.gold, "Gold QA JSONL")->required();
    eval_cmd->add_option("--format", eval.format, "Report format")
        ->check(CLI::IsMember({"json", "markdown"}))
        ->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "Write the report here instead of stdout");
    eval_cmd->add_flag("--lenient", eval.lenient, "Count missing predictions as wrong");

    std::string overlap_a;
    std::string overlap_b;
    std::string overlap_gold;
    bool overlap_json = false;
    auto* overlap_cmd = app.add_subcommand("overlap", "Joint/union correctness of two models");
    overlap_cmd->add_option("--a", overlap_a, "First prediction JSONL")->required();
    overlap_cmd->add_option("--b", overlap_b, "Second prediction JSONL")->required();
    overlap_cmd->add_option("--gold", overlap_gold, "Gold QA JSONL")->required();
    overlap_cmd->add_flag("--json", overlap_json, "Print JSON");

    std::string votes_path;
    std::string human_gold;
    auto* human_cmd = app.add_subcommand("human-eval", "Aggregate annotator votes");
    human_cmd->add_option("--votes", votes_path, "Vote JSONL")->required();
    human_cmd->add_option("--gold", human_gold, "Gold QA JSONL for human accuracy");

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve retrieval and open-book answering over HTTP");
    serve_cmd->add_option("--index", serve.index, "Index path prefix")->required();
    serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", serve.port, "Port")->capture_default_str();
    serve.scorer.add_to(*serve_cmd, false);
    serve.backend.add_to(*serve_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        err << app.help();
        return kExitValidation;
    }

    try {
        if (synth_cmd->parsed()) return run_synth(synth, out);
        if (filter_cmd->parsed()) return run_filter(filter_in, filter_out, out);
        if (ingest_cmd->parsed()) return run_ingest(ingest, out);
        if (index_cmd->parsed()) return run_index(index_paragraphs, index_out, index_backend, out);
        if (score_cmd->parsed()) return run_score(score, out);
        if (eval_cmd->parsed()) return run_eval(eval, out);
        if (overlap_cmd->parsed()) return run_overlap(overlap_a, overlap_b, overlap_gold, overlap_json, out);
        if (human_cmd->parsed()) return run_human_eval(votes_path, human_gold, out);
        if (serve_cmd->parsed()) return run_serve(serve, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitBackendOrIo;
    }
    err << app.help();
    return kExitValidation;
}

}  // namespace roadqa::cli
