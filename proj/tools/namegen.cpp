// namegen command-line tool: index, run, bench, judge, report.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "namegen/config.hpp"

namespace fs = std::filesystem;
using namespace namegen;

namespace {

struct Globals {
    std::optional<std::int64_t> seed;
};

Config load_with_seed(const std::string& path, const Globals& g) {
    auto c = load_config(path);
    if (g.seed) c.embedding_seed = static_cast<std::uint64_t>(*g.seed);
    return c;
}

RateLimiter* limiter_for(const Config& c) {
    if (!c.rate_per_second) return nullptr;
    RateLimiter::global().configure(*c.rate_per_second, c.rate_burst);
    return &RateLimiter::global();
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

UserQuery query_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::input, "cannot read query file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        UserQuery q;
        q.raw_text = j.at("raw_text").get<std::string>();
        if (j.contains("surname")) q.surname = j["surname"].get<std::string>();
        if (j.contains("birth_datetime")) q.birth = BirthDateTime::parse(j["birth_datetime"].get<std::string>());
        if (j.contains("gender")) q.gender = parse_gender(j["gender"].get<std::string>());
        if (j.contains("objectives")) q.explicit_objectives = j["objectives"].get<std::vector<std::string>>();
        if (j.contains("preferences")) q.preference_hints = j["preferences"].get<std::string>();
        return q;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::input, path + ": " + e.what());
    }
}

int cmd_index(const std::string& corpus_path, const std::string& out, std::size_t dim, const Globals& g) {
    auto ing = ingest(corpus_path);
    for (const auto& w : ing.warnings) std::cerr << "warning: " << w << "\n";
    HashNgramEmbedder embedder(dim, g.seed ? static_cast<std::uint64_t>(*g.seed) : 0);
    VectorIndex::build(ing.corpus, embedder).save(out);
    std::cout << "indexed " << ing.corpus.size() << " records -> " << out << "\nsha256 " << file_digest(out) << "\n";
    return 0;
}

struct RunArgs {
    std::string config;
    std::string query_file;
    std::string text;
    std::string surname;
    std::string birth;
    std::string gender;
    std::vector<std::string> objectives;
    std::string transcript = "namegen_transcript.json";
    std::string plan;
    bool json = false;
};

int cmd_run(const RunArgs& a, const Globals& g) {
    UserQuery q;
    if (!a.query_file.empty()) {
        q = query_from_file(a.query_file);
    } else {
        if (a.text.empty()) throw Error(ErrorKind::input, "run needs --query-file or --text");
        q.raw_text = a.text;
        if (!a.surname.empty()) q.surname = a.surname;
        if (!a.birth.empty()) q.birth = BirthDateTime::parse(a.birth);
        if (!a.gender.empty()) q.gender = parse_gender(a.gender);
        if (!a.objectives.empty()) q.explicit_objectives = a.objectives;
    }
    q.validate();

    auto cfg = load_with_seed(a.config, g);
    std::vector<std::string> warnings;
    auto kb = make_knowledge_base(cfg, &warnings);
    auto opts = pipeline_options(cfg);
    if (!a.plan.empty()) opts.plan = parse_call_plan(a.plan);
    Pipeline pipeline(make_backend(cfg.provider), std::move(kb), opts, make_prompts(cfg));
    pipeline.with_retry(cfg.retry).with_limiter(limiter_for(cfg)).with_seed(g.seed);

    Transcript transcript;
    const auto id = fs::path(a.transcript).stem().string();
    auto save_transcript = [&] {
        if (auto parent = fs::path(a.transcript).parent_path(); !parent.empty()) fs::create_directories(parent);
        write_text(a.transcript, transcript.to_json().dump(2) + "\n");
    };
    PipelineResult res;
    try {
        res = pipeline.run(q, &transcript, id);
    } catch (...) {
        save_transcript();
        throw;
    }
    save_transcript();
    for (auto& w : res.warnings) warnings.push_back(w);

    const auto& y = res.output();
    if (a.json) {
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& r : res.optimization.trace) trace.push_back(r.to_json());
        nlohmann::json out = {{"result", y.result},
                              {"explanations", y.explanations},
                              {"objectives", res.info.objectives.labels()},
                              {"selection", to_string(res.optimization.selection)},
                              {"rounds", res.optimization.rounds},
                              {"ledger", res.ledger.to_json()},
                              {"transcript", a.transcript},
                              {"warnings", warnings},
                              {"trace", trace}};
        if (res.info.retrieved) out["retrieved"] = res.info.retrieved->record.id;
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        std::cout << y.result << "\n";
        auto labels = res.info.objectives.labels();
        for (std::size_t k = 0; k < y.explanations.size(); ++k)
            std::cout << "  [" << (k < labels.size() ? labels[k] : std::to_string(k + 1)) << "] " << y.explanations[k] << "\n";
        std::cout << "selection: " << to_string(res.optimization.selection) << ", rounds: " << res.optimization.rounds
                  << ", backend calls: " << res.ledger.total() << "\ntranscript: " << a.transcript << "\n";
    }
    return 0;
}

int cmd_bench(const std::string& config, const std::string& queries_path, const std::vector<std::string>& methods,
              const std::string& out_dir, int workers, const Globals& g) {
    auto queries = load_queries(queries_path);
    auto cfg = load_with_seed(config, g);
    auto registry = MethodRegistry::with_defaults();
    std::vector<std::shared_ptr<const Method>> selected;
    for (const auto& m : methods) selected.push_back(registry.get(m));

    auto ctx = make_bench_context(cfg, g.seed, limiter_for(cfg));

    fs::create_directories(out_dir);
    const auto log_path = (fs::path(out_dir) / "runs.jsonl").string();
    LogAppender appender(log_path, true);
    std::size_t failed = 0, total = 0;
    for (const auto& m : selected) {
        auto entries = run_method(*m, queries, ctx, workers > 0 ? workers : cfg.workers, nullptr);
        for (const auto& e : entries) {
            appender.append(e.to_json());
            ++total;
            if (!e.ok) {
                ++failed;
                std::cerr << "failed: " << e.method << "/" << e.query_id << ": " << e.error << "\n";
            }
        }
    }
    std::cout << total << " run entries (" << failed << " failed) -> " << log_path << "\n";
    return 0;
}

int cmd_judge(const std::string& config, const std::string& logs, const std::string& out, int workers, const Globals& g) {
    auto cfg = load_with_seed(config, g);
    auto entries = load_run_log(logs);
    auto ctx = make_judge_context(cfg, limiter_for(cfg));
    auto judgments = judge_all(entries, ctx, workers > 0 ? workers : cfg.workers);
    LogAppender appender(out, true);
    std::size_t unscored = 0;
    for (const auto& j : judgments) {
        appender.append(j.to_json());
        if (!j.scored) ++unscored;
    }
    std::cout << judgments.size() << " judgments (" << unscored << " unscored) -> " << out << "\n";
    return 0;
}

int cmd_report(const std::string& logs, const std::string& judgments_path, const std::string& out_dir) {
    auto entries = load_run_log(logs);
    std::optional<std::vector<Judgment>> judgments;
    if (!judgments_path.empty()) judgments = load_judgments(judgments_path);
    auto files = build_report(entries, judgments);
    fs::create_directories(out_dir);
    write_text((fs::path(out_dir) / "metrics.csv").string(), files.metrics_csv);
    write_text((fs::path(out_dir) / "calls_kde.csv").string(), files.calls_csv);
    write_text((fs::path(out_dir) / "traces.csv").string(), files.traces_csv);
    for (const auto& w : files.warnings) std::cerr << "warning: " << w << "\n";
    if (!judgments) std::cerr << "warning: no judgments given; judged columns are NA\n";
    std::cout << files.metrics_csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"namegen: multi-agent creative name generation"};
    app.require_subcommand(1);
    Globals g;
    std::int64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "fix stochastic choices in embedders and mocks");

    std::string corpus, out;
    std::size_t dim = 256;
    auto* index = app.add_subcommand("index", "build a corpus index");
    index->add_option("--corpus", corpus, "corpus JSONL")->required();
    index->add_option("--out", out, "index file")->required();
    index->add_option("--dim", dim, "embedding dimension");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "run the pipeline on one query");
    run->add_option("--config", ra.config)->required();
    run->add_option("--query-file", ra.query_file, "JSON query");
    run->add_option("--text", ra.text, "raw request text");
    run->add_option("--surname", ra.surname);
    run->add_option("--birth", ra.birth, "YYYY-MM-DD[ HH:MM]");
    run->add_option("--gender", ra.gender);
    run->add_option("--objective", ra.objectives, "explicit objective (repeatable)");
    run->add_option("--transcript", ra.transcript, "transcript output path");
    run->add_option("--plan", ra.plan, "staged or compact");
    run->add_flag("--json", ra.json, "machine-readable output");

    std::string config, queries, out_dir, logs, judgments;
    std::vector<std::string> methods{"base", "namegen"};
    int workers = 0;
    auto* bench = app.add_subcommand("bench", "run methods over a query set");
    bench->add_option("--config", config)->required();
    bench->add_option("--queries", queries)->required();
    bench->add_option("--methods", methods)->delimiter(',');
    bench->add_option("--out", out_dir, "output directory")->required();
    bench->add_option("--workers", workers);

    auto* judge = app.add_subcommand("judge", "score run logs with the judge backend");
    judge->add_option("--config", config)->required();
    judge->add_option("--logs", logs)->required();
    judge->add_option("--out", out, "judgments JSONL")->required();
    judge->add_option("--workers", workers);

    auto* report = app.add_subcommand("report", "emit metric tables from logs");
    report->add_option("--logs", logs)->required();
    report->add_option("--judgments", judgments);
    report->add_option("--out", out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (seed_opt->count()) g.seed = seed;

    try {
        if (*index) return cmd_index(corpus, out, dim, g);
        if (*run) return cmd_run(ra, g);
        if (*bench) return cmd_bench(config, queries, methods, out_dir, workers, g);
        if (*judge) return cmd_judge(config, logs, out, workers, g);
        if (*report) return cmd_report(logs, judgments, out_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
