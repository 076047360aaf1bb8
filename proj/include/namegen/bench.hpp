#pragma once

// Benchmark harness: query sets, registered methods (the full pipeline plus prompt baselines),
// run logs, judging and report emission.

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "namegen/metrics.hpp"
#include "namegen/pipeline.hpp"

namespace namegen {

inline constexpr int kRunLogSchema = 1;

inline const std::vector<std::string>& default_naming_objectives() {
    static const std::vector<std::string> o = {"traditional Chinese cultural significance", "parental expectations",
                                               "Bazi & Wuxing", "personal characteristics", "other special requirements"};
    return o;
}

struct BenchQuery {
    std::string id;
    UserQuery query;  // explicit_objectives always set
    WeightVector weights;

    const std::vector<std::string>& objectives() const { return *query.explicit_objectives; }
};

inline BenchQuery bench_query_from_json(const nlohmann::json& j) {
    BenchQuery q;
    q.id = j.at("id").get<std::string>();
    if (q.id.empty()) throw Error(ErrorKind::input, "empty query id");
    q.query.raw_text = j.at("raw_text").get<std::string>();
    if (j.contains("surname") && !j["surname"].is_null()) q.query.surname = j["surname"].get<std::string>();
    if (j.contains("birth_datetime") && !j["birth_datetime"].is_null())
        q.query.birth = BirthDateTime::parse(j["birth_datetime"].get<std::string>());
    if (j.contains("gender") && !j["gender"].is_null()) q.query.gender = parse_gender(j["gender"].get<std::string>());
    if (j.contains("objectives") && !j["objectives"].is_null())
        q.query.explicit_objectives = j["objectives"].get<std::vector<std::string>>();
    else
        q.query.explicit_objectives = default_naming_objectives();
    auto raw = j.at("weights").get<std::vector<double>>();
    if (raw.size() != q.objectives().size())
        throw Error(ErrorKind::input, "query '" + q.id + "' has " + std::to_string(raw.size()) + " weights for " +
                                          std::to_string(q.objectives().size()) + " objectives");
    q.weights = normalize_weights(raw);
    q.query.validate();
    return q;
}

/// One JSON object per line; blank lines are skipped. Any malformed record aborts the load with
/// its line number.
inline std::vector<BenchQuery> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::input, "cannot read query file: " + path);
    std::vector<BenchQuery> out;
    std::set<std::string> ids;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (text::trim(line).empty()) continue;
        BenchQuery q;
        try {
            q = bench_query_from_json(nlohmann::json::parse(line));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::input, path + ":" + std::to_string(n) + ": " + e.what());
        }
        if (!ids.insert(q.id).second) throw Error(ErrorKind::input, path + ":" + std::to_string(n) + ": duplicate query id '" + q.id + "'");
        out.push_back(std::move(q));
    }
    return out;
}

// ---- methods ----

struct BenchContext {
    std::shared_ptr<Backend> backend;
    std::string backbone;
    std::shared_ptr<const Pipeline> pipeline;  // owns the knowledge base and verse index
    std::optional<KnowledgeBase> kb;
    std::shared_ptr<const PromptLibrary> prompts = std::make_shared<const PromptLibrary>();
    AgentOptions agents;
    RetryPolicy retry;
    RateLimiter* limiter = nullptr;
    std::optional<std::int64_t> seed;

    LlmClient client(CallLedger* ledger, Transcript* transcript) const {
        LlmClient c(backend, retry);
        c.with_ledger(ledger).with_transcript(transcript).with_limiter(limiter).with_seed(seed);
        return c;
    }
};

struct MethodOutcome {
    CreativeOutput output;
    std::string task_type;
    std::optional<std::string> selection;
    std::vector<EvalRecord> trace;
    std::vector<std::string> warnings;
};

class Method {
public:
    virtual ~Method() = default;
    virtual std::string id() const = 0;
    virtual MethodOutcome run(const BenchQuery& q, const BenchContext& ctx, CallLedger& ledger, Transcript& transcript) const = 0;
};

inline constexpr const char* kNamingTask = "Create a Chinese baby name for the request below and explain how the name meets each objective.";
inline constexpr const char* kCotSuffix = "Let's think step by step.";
inline constexpr const char* kTdbPhrase = "Take a deep breath and work on this problem step-by-step.";

/// Single-prompt baseline agent; only the prompt differs between baselines.
class BaselineAgent : public AgentBase {
public:
    using AgentBase::AgentBase;

    CreativeOutput generate(std::string prompt, std::size_t m) const {
        return ask(Stage::generation, "system_generator", std::move(prompt), opts_.generator, opts_.generation_reasks,
                   [m](const Envelope& env) { return Generator::parse_creative_output(env, m); });
    }

    std::string draft(const UserQuery& x) const {
        return ask(Stage::retrieval, "system_generator",
                   prompts_->render("q2kw_draft", {{"task_description", kNamingTask}, {"query", render_query(x)}}),
                   opts_.generator, opts_.max_reasks, [](const Envelope& env) { return env.require("NAME"); });
    }
};

struct BaselineStyle {
    std::string prefix;
    std::string suffix;
    bool shots = false;
};

inline std::string baseline_prompt(const PromptLibrary& prompts, const BenchQuery& q, const BaselineStyle& style,
                                   const std::string& knowledge = {}) {
    std::string extra;
    if (!knowledge.empty()) extra += "Reference poem:\n" + knowledge + "\n";
    if (style.shots) extra += "Examples:\n" + render_shots(default_shots()) + "\n";
    auto p = prompts.render("baseline", {{"prefix", style.prefix},
                                         {"task_description", kNamingTask},
                                         {"query", render_query(q.query)},
                                         {"objectives", numbered(q.objectives())},
                                         {"extra", extra},
                                         {"m", std::to_string(q.objectives().size())}});
    if (!style.suffix.empty()) p += "\n" + style.suffix;
    return p;
}

class PromptBaseline final : public Method {
public:
    PromptBaseline(std::string id, BaselineStyle style) : id_(std::move(id)), style_(std::move(style)) {}
    std::string id() const override { return id_; }

    std::string prompt_for(const PromptLibrary& prompts, const BenchQuery& q) const { return baseline_prompt(prompts, q, style_); }

    MethodOutcome run(const BenchQuery& q, const BenchContext& ctx, CallLedger& ledger, Transcript& transcript) const override {
        BaselineAgent agent(ctx.client(&ledger, &transcript), ctx.prompts, ctx.agents);
        MethodOutcome out;
        out.output = agent.generate(prompt_for(*ctx.prompts, q), q.objectives().size());
        return out;
    }

private:
    std::string id_;
    BaselineStyle style_;
};

/// Drafts an answer, retrieves with draft plus query, then prompts like Base with the poem prepended.
class Q2KwBaseline final : public Method {
public:
    std::string id() const override { return "q2kw"; }

    MethodOutcome run(const BenchQuery& q, const BenchContext& ctx, CallLedger& ledger, Transcript& transcript) const override {
        if (!ctx.kb) throw Error(ErrorKind::config, "q2kw needs a corpus");
        BaselineAgent agent(ctx.client(&ledger, &transcript), ctx.prompts, ctx.agents);
        MethodOutcome out;
        auto draft = agent.draft(q.query);
        auto matches = ctx.kb->index->top_k(ctx.kb->embedder->embed(draft + "\n" + q.query.raw_text), ctx.kb->corpus->all(), 1);
        std::string knowledge;
        if (!matches.empty()) knowledge = render_knowledge(RetrievedKnowledge{(*ctx.kb->corpus)[matches[0].index], {}});
        out.output = agent.generate(baseline_prompt(*ctx.prompts, q, {}, knowledge), q.objectives().size());
        return out;
    }
};

class NamegenMethod final : public Method {
public:
    std::string id() const override { return "namegen"; }

    MethodOutcome run(const BenchQuery& q, const BenchContext& ctx, CallLedger& ledger, Transcript& transcript) const override {
        if (!ctx.pipeline) throw Error(ErrorKind::config, "namegen needs a pipeline");
        auto res = ctx.pipeline->run(q.query, &transcript, q.id, &ledger);
        MethodOutcome out;
        out.output = res.output();
        out.task_type = res.info.task_type;
        out.selection = std::string(to_string(res.optimization.selection));
        out.trace = std::move(res.optimization.trace);
        out.warnings = std::move(res.warnings);
        return out;
    }
};

class MethodRegistry {
public:
    static MethodRegistry with_defaults() {
        MethodRegistry r;
        r.add(std::make_shared<PromptBaseline>("base", BaselineStyle{}));
        r.add(std::make_shared<PromptBaseline>("cot", BaselineStyle{"", kCotSuffix, false}));
        r.add(std::make_shared<PromptBaseline>("tdb", BaselineStyle{std::string(kTdbPhrase) + "\n", "", false}));
        r.add(std::make_shared<PromptBaseline>("fewshot", BaselineStyle{"", "", true}));
        r.add(std::make_shared<Q2KwBaseline>());
        r.add(std::make_shared<NamegenMethod>());
        return r;
    }

    void add(std::shared_ptr<const Method> m) { methods_[m->id()] = std::move(m); }

    std::shared_ptr<const Method> get(const std::string& id) const {
        auto it = methods_.find(id);
        if (it == methods_.end()) throw Error(ErrorKind::input, "unregistered method '" + id + "'");
        return it->second;
    }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : methods_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, std::shared_ptr<const Method>> methods_;
};

// ---- run logs ----

inline std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunLogEntry {
    std::string query_id;
    std::string method;
    std::string backbone;
    bool ok = false;
    std::string error;
    std::optional<CreativeOutput> output;
    std::string task_type;
    std::optional<std::string> selection;
    std::vector<std::string> objectives;
    std::vector<double> weights;  // annotated, used by reports
    std::vector<EvalRecord> trace;
    std::vector<std::string> warnings;
    LedgerSnapshot ledger;
    nlohmann::json transcript = nlohmann::json::array();
    std::string started_at;
    std::string finished_at;

    nlohmann::json to_json() const {
        nlohmann::json trace_j = nlohmann::json::array();
        for (const auto& r : trace) trace_j.push_back(r.to_json());
        return {{"schema_version", kRunLogSchema},
                {"query_id", query_id},
                {"method", method},
                {"backbone", backbone},
                {"status", ok ? "ok" : "failed"},
                {"error", error},
                {"output", output ? nlohmann::json{{"result", output->result}, {"explanations", output->explanations}}
                                  : nlohmann::json(nullptr)},
                {"task_type", task_type},
                {"selection", selection ? nlohmann::json(*selection) : nlohmann::json(nullptr)},
                {"objectives", objectives},
                {"weights", weights},
                {"trace", trace_j},
                {"warnings", warnings},
                {"ledger", ledger.to_json()},
                {"transcript", transcript},
                {"started_at", started_at},
                {"finished_at", finished_at}};
    }

    static RunLogEntry from_json(const nlohmann::json& j) {
        if (j.at("schema_version").get<int>() != kRunLogSchema)
            throw Error(ErrorKind::input, "unsupported run log schema " + j.at("schema_version").dump());
        RunLogEntry e;
        e.query_id = j.at("query_id").get<std::string>();
        e.method = j.at("method").get<std::string>();
        e.backbone = j.at("backbone").get<std::string>();
        e.ok = j.at("status").get<std::string>() == "ok";
        e.error = j.at("error").get<std::string>();
        if (!j.at("output").is_null())
            e.output = CreativeOutput{j["output"].at("result").get<std::string>(),
                                      j["output"].at("explanations").get<std::vector<std::string>>(), e.query_id};
        e.task_type = j.at("task_type").get<std::string>();
        if (!j.at("selection").is_null()) e.selection = j["selection"].get<std::string>();
        e.objectives = j.at("objectives").get<std::vector<std::string>>();
        e.weights = j.at("weights").get<std::vector<double>>();
        for (const auto& r : j.at("trace")) e.trace.push_back(EvalRecord::from_json(r));
        e.warnings = j.at("warnings").get<std::vector<std::string>>();
        e.ledger = LedgerSnapshot::from_json(j.at("ledger"));
        e.transcript = j.at("transcript");
        e.started_at = j.at("started_at").get<std::string>();
        e.finished_at = j.at("finished_at").get<std::string>();
        return e;
    }
};

/// Serializes line writes from concurrent workers.
class LogAppender {
public:
    explicit LogAppender(const std::string& path, bool truncate = false)
        : out_(path, truncate ? std::ios::trunc : std::ios::app) {
        if (!out_) throw Error(ErrorKind::input, "cannot write log: " + path);
    }
    void append(const nlohmann::json& j) {
        std::lock_guard lock(mu_);
        out_ << j.dump() << '\n';
        out_.flush();
    }

private:
    std::mutex mu_;
    std::ofstream out_;
};

template <typename T>
std::vector<T> read_jsonl(const std::string& path, const std::function<T(const nlohmann::json&)>& parse) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::input, "cannot read log: " + path);
    std::vector<T> out;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(parse(nlohmann::json::parse(line)));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorKind::input, path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<RunLogEntry> load_run_log(const std::string& path) {
    return read_jsonl<RunLogEntry>(path, RunLogEntry::from_json);
}

inline RunLogEntry run_one(const Method& method, const BenchQuery& q, const BenchContext& ctx) {
    RunLogEntry e;
    e.query_id = q.id;
    e.method = method.id();
    e.backbone = ctx.backbone;
    e.objectives = q.objectives();
    e.weights = q.weights.vec();
    e.started_at = utc_now();
    CallLedger ledger;
    Transcript transcript;
    try {
        auto out = method.run(q, ctx, ledger, transcript);
        e.ok = true;
        out.output.transcript_id = q.id;
        e.output = std::move(out.output);
        e.task_type = std::move(out.task_type);
        e.selection = std::move(out.selection);
        e.trace = std::move(out.trace);
        e.warnings = std::move(out.warnings);
    } catch (const std::exception& ex) {
        e.ok = false;
        e.error = ex.what();
    }
    e.ledger = ledger.snapshot();
    e.transcript = transcript.to_json();
    e.finished_at = utc_now();
    return e;
}

/// Runs every query through `method` on a pool of `workers` threads. Entries come back in query
/// order; `appender`, when given, receives them as they finish.
inline std::vector<RunLogEntry> run_method(const Method& method, const std::vector<BenchQuery>& queries, const BenchContext& ctx,
                                           int workers = 1, LogAppender* appender = nullptr) {
    std::vector<RunLogEntry> out(queries.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < queries.size();) {
            out[i] = run_one(method, queries[i], ctx);
            if (appender) appender->append(out[i].to_json());
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(queries.size())));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return out;
}

// ---- judging ----

struct Judgment {
    std::string query_id;
    std::string method;
    std::string backbone;
    bool scored = false;
    std::string error;
    std::optional<SampleScores> scores;
    std::optional<JudgeVerdict> verdict;
    LedgerSnapshot ledger;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"schema_version", kRunLogSchema}, {"query_id", query_id}, {"method", method},
                            {"backbone", backbone},            {"scored", scored},     {"error", error},
                            {"ledger", ledger.to_json()}};
        j["scores"] = scores ? nlohmann::json{{"explicit", scores->scores},
                                              {"weights", scores->weights},
                                              {"acc", scores->acc},
                                              {"crc", scores->crc},
                                              {"lr", scores->lr}}
                             : nlohmann::json(nullptr);
        j["verdict"] = verdict ? nlohmann::json{{"explicit", verdict->explicit_scores},
                                                {"crc", verdict->crc},
                                                {"lr", verdict->lr},
                                                {"claims", verdict->claims}}
                               : nlohmann::json(nullptr);
        return j;
    }

    static Judgment from_json(const nlohmann::json& j) {
        if (j.at("schema_version").get<int>() != kRunLogSchema) throw Error(ErrorKind::input, "unsupported judgment schema");
        Judgment g;
        g.query_id = j.at("query_id").get<std::string>();
        g.method = j.at("method").get<std::string>();
        g.backbone = j.at("backbone").get<std::string>();
        g.scored = j.at("scored").get<bool>();
        g.error = j.at("error").get<std::string>();
        g.ledger = LedgerSnapshot::from_json(j.at("ledger"));
        if (!j.at("scores").is_null()) {
            const auto& s = j["scores"];
            g.scores = SampleScores{s.at("explicit").get<std::vector<double>>(), s.at("weights").get<std::vector<double>>(),
                                    s.at("acc").get<double>(), s.at("crc").get<double>(), s.at("lr").get<double>()};
        }
        if (!j.at("verdict").is_null()) {
            const auto& v = j["verdict"];
            g.verdict = JudgeVerdict{v.at("explicit").get<std::vector<int>>(), v.at("crc").get<int>(), v.at("lr").get<int>(),
                                     v.at("claims").get<std::vector<std::string>>()};
        }
        return g;
    }
};

inline std::vector<Judgment> load_judgments(const std::string& path) { return read_jsonl<Judgment>(path, Judgment::from_json); }

struct JudgeContext {
    std::shared_ptr<Backend> backend;
    std::shared_ptr<const VerseIndex> verses;
    std::shared_ptr<const PromptLibrary> prompts = std::make_shared<const PromptLibrary>();
    AgentOptions agents;
    RetryPolicy retry;
    RateLimiter* limiter = nullptr;
};

/// One judge call (plus re-asks) per successful run entry; failed runs and unparseable verdicts
/// come back unscored.
inline Judgment judge_entry(const RunLogEntry& e, const JudgeContext& ctx) {
    Judgment g{e.query_id, e.method, e.backbone, false, {}, std::nullopt, std::nullopt, {}};
    if (!e.ok || !e.output) {
        g.error = "run failed";
        return g;
    }
    CallLedger ledger;
    LlmClient client(ctx.backend, ctx.retry);
    client.with_ledger(&ledger).with_limiter(ctx.limiter);
    Judge judge(client, ctx.prompts, ctx.agents);
    try {
        auto v = judge.judge(e.task_type.empty() ? "naming" : e.task_type, *e.output, e.objectives);
        g.scores = to_sample_scores(v, WeightVector::from_normalized(e.weights), *ctx.verses);
        g.verdict = std::move(v);
        g.scored = true;
    } catch (const Error& ex) {
        if (ex.kind() != ErrorKind::parse && ex.kind() != ErrorKind::validation) throw;
        g.error = ex.what();
    }
    g.ledger = ledger.snapshot();
    return g;
}

inline std::vector<Judgment> judge_all(const std::vector<RunLogEntry>& entries, const JudgeContext& ctx, int workers = 1) {
    std::vector<Judgment> out(entries.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < entries.size();) {
            try {
                out[i] = judge_entry(entries[i], ctx);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(entries.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

// ---- reports ----

struct ReportFiles {
    std::string metrics_csv;
    std::string calls_csv;
    std::string traces_csv;
    std::vector<std::string> warnings;
};

inline std::string optional_pct(const std::optional<double>& v) { return v ? text::fixed(*v * 100.0, 4) : std::string("NA"); }

/// Pure function of the logs: no backend is consulted. Without judgments the judged columns
/// are NA.
inline ReportFiles build_report(const std::vector<RunLogEntry>& entries, const std::optional<std::vector<Judgment>>& judgments) {
    using Key = std::pair<std::string, std::string>;  // method, backbone
    std::map<Key, std::map<std::string, const RunLogEntry*>> groups;
    for (const auto& e : entries) {
        auto& slot = groups[{e.method, e.backbone}][e.query_id];
        if (slot) throw Error(ErrorKind::input, "duplicate run entry for " + e.method + "/" + e.query_id);
        slot = &e;
    }
    if (groups.empty()) throw Error(ErrorKind::input, "no run log entries");

    ReportFiles files;
    // DIV compares methods within one backbone.
    std::map<std::string, ResultsByMethod> by_backbone;
    for (const auto& [key, rows] : groups)
        for (const auto& [qid, e] : rows)
            by_backbone[key.second][key.first][qid] = e->ok && e->output ? std::optional(e->output->result) : std::nullopt;
    std::map<Key, double> divs;
    for (const auto& [backbone, results] : by_backbone) {
        if (results.size() < 2) {
            for (const auto& [method, _] : results) divs[{method, backbone}] = 100.0;
            files.warnings.push_back("backbone " + backbone + " has a single method; DIV is trivially 100");
            continue;
        }
        for (const auto& [method, v] : div(results)) divs[{method, backbone}] = v;
    }

    std::map<std::tuple<std::string, std::string, std::string>, const Judgment*> judged;
    if (judgments)
        for (const auto& g : *judgments) judged[{g.method, g.backbone, g.query_id}] = &g;

    std::vector<MethodReport> rows;
    for (const auto& [key, entries_by_q] : groups) {
        std::vector<SampleScores> samples;
        std::size_t unscored = 0;
        if (judgments) {
            for (const auto& [qid, e] : entries_by_q) {
                auto it = judged.find({key.first, key.second, qid});
                if (it != judged.end() && it->second->scored && it->second->scores)
                    samples.push_back(*it->second->scores);
                else
                    ++unscored;
            }
            if (unscored)
                files.warnings.push_back(key.first + "/" + key.second + ": " + std::to_string(unscored) + " unscored sample(s) excluded");
        }
        rows.push_back(make_report(key.first, key.second, samples, divs.at(key), unscored));
    }
    files.metrics_csv = report_csv(std::move(rows));

    std::string calls = "method,backbone,query_id";
    for (auto s : kAllStages) calls += "," + std::string(to_string(s));
    calls += ",total\n";
    std::string traces = "method,backbone,query_id,round,j_imp,j_exp,outcome,theta_imp,psi_imp,theta_exp,psi_exp\n";
    for (const auto& [key, entries_by_q] : groups) {
        for (const auto& [qid, e] : entries_by_q) {
            calls += key.first + "," + key.second + "," + qid;
            for (auto s : kAllStages) calls += "," + std::to_string(e->ledger[s]);
            calls += "," + std::to_string(e->ledger.total()) + "\n";
            for (const auto& r : e->trace)
                traces += key.first + "," + key.second + "," + qid + "," + std::to_string(r.round) + "," + std::to_string(r.j_imp) +
                          "," + std::to_string(r.j_exp) + "," + r.outcome + "," + optional_pct(r.theta_imp) + "," +
                          optional_pct(r.psi_imp) + "," + optional_pct(r.theta_exp) + "," + optional_pct(r.psi_exp) + "\n";
        }
    }
    files.calls_csv = std::move(calls);
    files.traces_csv = std::move(traces);
    return files;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::input, "cannot write " + path);
    out << content;
}

}  // namespace namegen
