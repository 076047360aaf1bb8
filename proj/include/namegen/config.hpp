#pragma once

// Declarative JSON configuration with ${VAR} environment interpolation. Relative paths resolve
// against the config file's directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <regex>
#include <string>

#include <nlohmann/json.hpp>

#include "namegen/bench.hpp"
#include "namegen/remote.hpp"

namespace namegen {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
}

/// Replaces every ${NAME} in string values; an unset variable is a config error.
inline void interpolate_env(nlohmann::json& j, const EnvLookup& env) {
    if (j.is_string()) {
        static const std::regex var(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
        auto s = j.get<std::string>();
        std::string out;
        auto begin = std::sregex_iterator(s.begin(), s.end(), var);
        std::size_t last = 0;
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            auto value = env(m[1].str());
            if (!value) throw Error(ErrorKind::config, "environment variable " + m[1].str() + " is not set");
            out += s.substr(last, static_cast<std::size_t>(m.position(0)) - last) + *value;
            last = static_cast<std::size_t>(m.position(0) + m.length(0));
        }
        out += s.substr(last);
        j = out;
    } else if (j.is_object() || j.is_array()) {
        for (auto& v : j) interpolate_env(v, env);
    }
}

struct ProviderConfig {
    std::string kind = "mock";  // mock | openai | replay
    std::string name;           // backbone label in run logs
    std::string script;         // mock
    std::string cassette;       // replay
    std::string base_url;       // openai
    std::string model;
    std::string api_key_env = "NAMEGEN_API_KEY";
    std::string api_key;  // resolved at load time
    int timeout_seconds = 60;
    std::string record;  // optional cassette to append to
};

struct Config {
    std::filesystem::path base_dir;
    ProviderConfig provider;
    std::optional<ProviderConfig> judge;
    ThresholdParams params;
    CallPlan plan = CallPlan::compact;
    std::string corpus;
    std::string index;
    std::string prompts_dir;
    std::size_t embedding_dim = 256;
    std::uint64_t embedding_seed = 0;
    int workers = 1;
    std::optional<double> rate_per_second;
    double rate_burst = 1;
    RetryPolicy retry;
};

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

inline ProviderConfig parse_provider(const nlohmann::json& j, const std::filesystem::path& base, const EnvLookup& env,
                                     const std::string& default_key_env) {
    ProviderConfig p;
    p.kind = j.value("kind", "mock");
    p.name = j.value("name", "");
    p.record = resolve_path(base, j.value("record", ""));
    if (p.kind == "mock") {
        p.script = resolve_path(base, j.at("script").get<std::string>());
        if (!std::filesystem::exists(p.script)) throw Error(ErrorKind::config, "mock script not found: " + p.script);
        if (p.name.empty()) p.name = "mock";
    } else if (p.kind == "replay") {
        p.cassette = resolve_path(base, j.at("cassette").get<std::string>());
        if (!std::filesystem::exists(p.cassette)) throw Error(ErrorKind::config, "cassette not found: " + p.cassette);
        if (p.name.empty()) p.name = "replay";
    } else if (p.kind == "openai") {
        p.model = j.at("model").get<std::string>();
        p.base_url = j.value("base_url", "");
        if (p.base_url.empty()) p.base_url = env("NAMEGEN_BASE_URL").value_or("");
        if (p.base_url.empty()) throw Error(ErrorKind::config, "provider base_url not set (config or NAMEGEN_BASE_URL)");
        p.api_key_env = j.value("api_key_env", default_key_env);
        auto key = env(p.api_key_env);
        if (!key || key->empty()) throw Error(ErrorKind::config, "API key variable " + p.api_key_env + " is not set");
        p.api_key = *key;
        p.timeout_seconds = j.value("timeout_seconds", 60);
        if (p.name.empty()) p.name = p.model;
    } else {
        throw Error(ErrorKind::config, "unknown provider kind '" + p.kind + "'");
    }
    return p;
}

}  // namespace detail

inline Config parse_config(nlohmann::json j, const std::filesystem::path& base_dir, const EnvLookup& env = process_env) {
    Config c;
    c.base_dir = base_dir;
    try {
        interpolate_env(j, env);
        c.provider = detail::parse_provider(j.at("provider"), base_dir, env, "NAMEGEN_API_KEY");
        if (j.contains("judge") && !j["judge"].is_null())
            c.judge = detail::parse_provider(j["judge"], base_dir, env, "NAMEGEN_JUDGE_KEY");
        if (j.contains("thresholds")) {
            const auto& t = j["thresholds"];
            c.params.delta = t.value("delta", c.params.delta);
            c.params.alpha = t.value("alpha", c.params.alpha);
            c.params.warmup = t.value("warmup", c.params.warmup);
            c.params.max_rounds = t.value("max_rounds", c.params.max_rounds);
        }
        if (j.contains("retrieval")) {
            const auto& r = j["retrieval"];
            c.params.retrieval.coarse_rounds = r.value("coarse_rounds", c.params.retrieval.coarse_rounds);
            c.params.retrieval.max_rounds = r.value("max_rounds", c.params.retrieval.max_rounds);
            c.params.retrieval.top_k = r.value("top_k", c.params.retrieval.top_k);
        }
        c.params.validate();
        c.plan = parse_call_plan(j.value("plan", "compact"));
        c.corpus = detail::resolve_path(base_dir, j.value("corpus", ""));
        c.index = detail::resolve_path(base_dir, j.value("index", ""));
        c.prompts_dir = detail::resolve_path(base_dir, j.value("prompts_dir", ""));
        if (!c.corpus.empty() && !std::filesystem::exists(c.corpus)) throw Error(ErrorKind::config, "corpus not found: " + c.corpus);
        if (!c.index.empty() && !std::filesystem::exists(c.index)) throw Error(ErrorKind::config, "index not found: " + c.index);
        if (!c.prompts_dir.empty() && !std::filesystem::is_directory(c.prompts_dir))
            throw Error(ErrorKind::config, "prompt directory not found: " + c.prompts_dir);
        if (j.contains("embedding")) {
            c.embedding_dim = j["embedding"].value("dim", c.embedding_dim);
            c.embedding_seed = j["embedding"].value("seed", c.embedding_seed);
        }
        c.workers = j.value("workers", 1);
        if (c.workers < 1) throw Error(ErrorKind::config, "workers must be >= 1");
        if (j.contains("rate_limit")) {
            c.rate_per_second = j["rate_limit"].at("per_second").get<double>();
            c.rate_burst = j["rate_limit"].value("burst", 1.0);
        }
        if (j.contains("retry")) {
            c.retry.max_attempts = j["retry"].value("max_attempts", c.retry.max_attempts);
            c.retry.base_delay = std::chrono::milliseconds(j["retry"].value("base_delay_ms", static_cast<long>(c.retry.base_delay.count())));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("config: ") + e.what());
    }
    return c;
}

inline Config load_config(const std::string& path, const EnvLookup& env = process_env) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot read config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, "config " + path + ": " + e.what());
    }
    return parse_config(std::move(j), std::filesystem::absolute(path).parent_path(), env);
}

inline std::shared_ptr<Backend> make_backend(const ProviderConfig& p) {
    std::shared_ptr<Backend> b;
    if (p.kind == "mock")
        b = std::make_shared<ScriptedBackend>(ScriptedBackend::load_rules(p.script), p.name);
    else if (p.kind == "replay")
        b = std::make_shared<ReplayBackend>(p.cassette, p.name);
    else
        b = std::make_shared<OpenAICompatibleBackend>(p.base_url, p.model, p.api_key, p.timeout_seconds);
    if (!p.record.empty()) b = std::make_shared<RecordingBackend>(b, p.record);
    return b;
}

inline std::shared_ptr<const PromptLibrary> make_prompts(const Config& c) {
    return std::make_shared<const PromptLibrary>(PromptLibrary::with_overrides(c.prompts_dir));
}

/// Loads the corpus and either builds the index or loads the configured one (checked against
/// the embedder and corpus).
inline std::optional<KnowledgeBase> make_knowledge_base(const Config& c, std::vector<std::string>* warnings = nullptr) {
    if (c.corpus.empty()) return std::nullopt;
    auto ing = ingest(c.corpus);
    if (warnings)
        for (auto& w : ing.warnings) warnings->push_back(w);
    auto embedder = std::make_shared<const HashNgramEmbedder>(c.embedding_dim, c.embedding_seed);
    if (c.index.empty()) return KnowledgeBase::build(std::move(ing.corpus), embedder);
    auto corpus = std::make_shared<const Corpus>(std::move(ing.corpus));
    auto index = std::make_shared<const VectorIndex>(VectorIndex::load(c.index));
    index->check_compatible(*corpus, *embedder);
    return KnowledgeBase{corpus, embedder, index};
}

inline PipelineOptions pipeline_options(const Config& c) {
    PipelineOptions o;
    o.params = c.params;
    o.plan = c.plan;
    return o;
}

/// Everything a bench run needs, wired from one config.
inline BenchContext make_bench_context(const Config& c, std::optional<std::int64_t> seed = std::nullopt,
                                       RateLimiter* limiter = nullptr, std::vector<std::string>* warnings = nullptr) {
    BenchContext ctx;
    ctx.backend = make_backend(c.provider);
    ctx.backbone = c.provider.name;
    ctx.kb = make_knowledge_base(c, warnings);
    ctx.prompts = make_prompts(c);
    ctx.retry = c.retry;
    ctx.limiter = limiter;
    ctx.seed = seed;
    auto pipeline = std::make_shared<Pipeline>(ctx.backend, ctx.kb, pipeline_options(c), ctx.prompts);
    pipeline->with_retry(c.retry).with_limiter(limiter).with_seed(seed);
    ctx.pipeline = std::move(pipeline);
    return ctx;
}

inline JudgeContext make_judge_context(const Config& c, RateLimiter* limiter = nullptr) {
    if (!c.judge) throw Error(ErrorKind::config, "config has no judge provider");
    JudgeContext ctx;
    ctx.backend = make_backend(*c.judge);
    auto kb = make_knowledge_base(c);
    ctx.verses = kb ? std::make_shared<const VerseIndex>(*kb->corpus) : std::make_shared<const VerseIndex>();
    ctx.prompts = make_prompts(c);
    ctx.retry = c.retry;
    ctx.limiter = limiter;
    return ctx;
}

}  // namespace namegen
