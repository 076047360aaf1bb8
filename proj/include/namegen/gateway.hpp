#pragma once

// Chat-completion contract: backends, scripted mocks, cassettes, retries, rate limiting and
// per-stage call accounting.

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "namegen/error.hpp"
#include "namegen/text.hpp"

namespace namegen {

enum class Role { system, user, assistant };

inline std::string_view to_string(Role r) {
    switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

struct ChatMessage {
    Role role = Role::user;
    std::string content;
};

struct DecodingParams {
    double temperature = 0.2;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;

    void validate() const {
        if (!(temperature >= 0 && temperature <= 2)) throw Error(ErrorKind::validation, "temperature must be in [0,2]");
        if (max_tokens < 1) throw Error(ErrorKind::validation, "max_tokens must be positive");
    }
};

inline constexpr double kGeneratorTemperature = 1.5;
inline constexpr double kEvaluatorTemperature = 0.2;

enum class Stage { preparation, retrieval, generation, implicit_eval, explicit_eval, judge };

inline constexpr std::array<Stage, 6> kAllStages = {Stage::preparation,   Stage::retrieval,
                                                    Stage::generation,    Stage::implicit_eval,
                                                    Stage::explicit_eval, Stage::judge};

inline std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::preparation: return "preparation";
    case Stage::retrieval: return "retrieval";
    case Stage::generation: return "generation";
    case Stage::implicit_eval: return "implicit_eval";
    case Stage::explicit_eval: return "explicit_eval";
    case Stage::judge: return "judge";
    }
    return "";
}

struct LedgerSnapshot {
    std::array<long, kAllStages.size()> counts{};

    long operator[](Stage s) const { return counts[static_cast<std::size_t>(s)]; }
    long total() const {
        long t = 0;
        for (long c : counts) t += c;
        return t;
    }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (auto s : kAllStages) j[std::string(to_string(s))] = (*this)[s];
        j["total"] = total();
        return j;
    }

    static LedgerSnapshot from_json(const nlohmann::json& j) {
        LedgerSnapshot snap;
        for (auto s : kAllStages) snap.counts[static_cast<std::size_t>(s)] = j.value(std::string(to_string(s)), 0L);
        if (j.contains("total") && j["total"].get<long>() != snap.total())
            throw Error(ErrorKind::validation, "ledger total does not match stage counts");
        return snap;
    }

    friend bool operator==(const LedgerSnapshot&, const LedgerSnapshot&) = default;
};

/// Per-stage count of logical backend calls. Thread-safe.
class CallLedger {
public:
    void add(Stage s) { counts_[static_cast<std::size_t>(s)].fetch_add(1, std::memory_order_relaxed); }

    LedgerSnapshot snapshot() const {
        LedgerSnapshot snap;
        for (std::size_t i = 0; i < counts_.size(); ++i) snap.counts[i] = counts_[i].load(std::memory_order_relaxed);
        return snap;
    }

    long total() const { return snapshot().total(); }

private:
    std::array<std::atomic<long>, kAllStages.size()> counts_{};
};

/// A chat-completion provider. Implementations must be safe to call from several threads.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages, const DecodingParams& params) = 0;
    virtual std::string name() const = 0;
};

inline std::string flatten(const std::vector<ChatMessage>& messages) {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += "\n\n";
        out += m.content;
    }
    return out;
}

struct ScriptRule {
    std::string pattern;
    std::string reply;
    bool regex = false;
    std::vector<std::string> also{};    // further substrings that must all occur
    std::vector<std::string> unless{};  // substrings that must not occur
};

/// Deterministic mock: the first rule whose pattern occurs in the flattened conversation (with
/// every `also` and no `unless` substring) wins.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules, std::string name = "mock")
        : rules_(std::move(rules)), name_(std::move(name)) {
        if (rules_.empty()) throw Error(ErrorKind::validation, "mock script needs at least one rule");
        for (const auto& r : rules_) compiled_.push_back(r.regex ? std::optional<std::regex>(std::regex(r.pattern)) : std::nullopt);
    }

    std::string complete(const std::vector<ChatMessage>& messages, const DecodingParams&) override {
        auto prompt = flatten(messages);
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const auto& r = rules_[i];
            bool hit = compiled_[i] ? std::regex_search(prompt, *compiled_[i]) : text::contains(prompt, r.pattern);
            for (const auto& a : r.also) hit = hit && text::contains(prompt, a);
            for (const auto& u : r.unless) hit = hit && !text::contains(prompt, u);
            if (hit) return r.reply;
        }
        auto head = prompt.substr(0, 160);
        throw Error(ErrorKind::scripted_miss, "no scripted rule matches prompt starting: " + head);
    }

    std::string name() const override { return name_; }

    /// Script files are a JSON array of {"match", "reply" (string or lines), "regex", "also", "unless"}.
    static std::vector<ScriptRule> load_rules(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::config, "cannot open mock script " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::config, "mock script " + path + " is not valid JSON: " + e.what());
        }
        std::vector<ScriptRule> rules;
        for (const auto& r : j) {
            ScriptRule rule;
            rule.pattern = r.at("match").get<std::string>();
            if (r.at("reply").is_array()) {
                std::vector<std::string> lines = r.at("reply").get<std::vector<std::string>>();
                rule.reply = text::join(lines, "\n");
            } else {
                rule.reply = r.at("reply").get<std::string>();
            }
            rule.regex = r.value("regex", false);
            rule.also = r.value("also", std::vector<std::string>{});
            rule.unless = r.value("unless", std::vector<std::string>{});
            rules.push_back(std::move(rule));
        }
        return rules;
    }

private:
    std::vector<ScriptRule> rules_;
    std::vector<std::optional<std::regex>> compiled_;
    std::string name_;
};

/// Backend driven by an arbitrary callable; handy for fault injection in tests.
class FunctionBackend final : public Backend {
public:
    using Fn = std::function<std::string(const std::vector<ChatMessage>&, const DecodingParams&)>;
    explicit FunctionBackend(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
    std::string complete(const std::vector<ChatMessage>& m, const DecodingParams& p) override { return fn_(m, p); }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

inline nlohmann::json request_json(const std::vector<ChatMessage>& messages, const DecodingParams& params) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    nlohmann::json j = {{"messages", msgs}, {"temperature", params.temperature}, {"max_tokens", params.max_tokens}};
    if (params.seed) j["seed"] = *params.seed;
    return j;
}

inline std::string request_digest(const std::vector<ChatMessage>& messages, const DecodingParams& params) {
    return sha256_hex(request_json(messages, params).dump());
}

/// Wraps a backend and appends every exchange to a line-delimited cassette file.
class RecordingBackend final : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, const std::string& path)
        : inner_(std::move(inner)), out_(path, std::ios::app) {
        if (!out_) throw Error(ErrorKind::config, "cannot open cassette for writing: " + path);
    }

    std::string complete(const std::vector<ChatMessage>& messages, const DecodingParams& params) override {
        auto reply = inner_->complete(messages, params);
        nlohmann::json rec = {{"request_digest", request_digest(messages, params)}, {"response_text", reply}};
        std::lock_guard lock(mu_);
        out_ << rec.dump() << '\n';
        out_.flush();
        return reply;
    }

    std::string name() const override { return inner_->name(); }

private:
    std::shared_ptr<Backend> inner_;
    std::mutex mu_;
    std::ofstream out_;
};

/// Serves recorded responses by request digest without touching the network. Repeated digests
/// are served in recording order; the last one repeats once the queue is drained.
class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(const std::string& path, std::string name = "replay") : name_(std::move(name)) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::config, "cannot open cassette " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                tapes_[j.at("request_digest").get<std::string>()].push_back(j.at("response_text").get<std::string>());
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::config, "cassette " + path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    std::string complete(const std::vector<ChatMessage>& messages, const DecodingParams& params) override {
        auto digest = request_digest(messages, params);
        std::lock_guard lock(mu_);
        auto it = tapes_.find(digest);
        if (it == tapes_.end()) throw Error(ErrorKind::scripted_miss, "cassette has no response for request " + digest);
        auto& q = it->second;
        auto reply = q.front();
        if (q.size() > 1) q.pop_front();
        return reply;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::mutex mu_;
    std::map<std::string, std::deque<std::string>> tapes_;
};

/// Token bucket. A rate of zero disables limiting.
class RateLimiter {
public:
    explicit RateLimiter(double per_second = 0, double burst = 1) { configure(per_second, burst); }

    void configure(double per_second, double burst) {
        std::lock_guard lock(mu_);
        rate_ = per_second;
        capacity_ = std::max(1.0, burst);
        tokens_ = capacity_;
        last_ = std::chrono::steady_clock::now();
    }

    void acquire() {
        std::unique_lock lock(mu_);
        if (rate_ <= 0) return;
        while (true) {
            auto now = std::chrono::steady_clock::now();
            std::chrono::duration<double> dt = now - last_;
            last_ = now;
            tokens_ = std::min(capacity_, tokens_ + dt.count() * rate_);
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
        }
    }

    static RateLimiter& global() {
        static RateLimiter limiter;
        return limiter;
    }

private:
    std::mutex mu_;
    double rate_ = 0;
    double capacity_ = 1;
    double tokens_ = 1;
    std::chrono::steady_clock::time_point last_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{200};
    std::chrono::milliseconds max_delay{5000};

    std::chrono::milliseconds delay_for(int attempt) const {
        auto d = base_delay * (1LL << std::min(attempt - 1, 20));
        return std::min<std::chrono::milliseconds>(d, max_delay);
    }
};

struct Exchange {
    Stage stage;
    std::vector<ChatMessage> messages;
    std::string reply;
};

/// Append-only record of every completed exchange in one run.
class Transcript {
public:
    void add(Exchange e) {
        std::lock_guard lock(mu_);
        exchanges_.push_back(std::move(e));
    }

    std::vector<Exchange> exchanges() const {
        std::lock_guard lock(mu_);
        return exchanges_;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : exchanges()) {
            auto req = request_json(e.messages, {});
            arr.push_back({{"stage", to_string(e.stage)}, {"messages", req["messages"]}, {"reply", e.reply}});
        }
        return arr;
    }

private:
    mutable std::mutex mu_;
    std::vector<Exchange> exchanges_;
};

/// What agents talk to: a backend plus retry, rate limiting, ledger and transcript hooks.
/// Cheap to copy; the ledger and transcript are borrowed.
class LlmClient {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit LlmClient(std::shared_ptr<Backend> backend, RetryPolicy retry = {})
        : backend_(std::move(backend)), retry_(retry) {
        if (!backend_) throw Error(ErrorKind::config, "null backend");
    }

    LlmClient& with_ledger(CallLedger* ledger) {
        ledger_ = ledger;
        return *this;
    }
    LlmClient& with_transcript(Transcript* t) {
        transcript_ = t;
        return *this;
    }
    LlmClient& with_limiter(RateLimiter* limiter) {
        limiter_ = limiter;
        return *this;
    }
    LlmClient& with_sleeper(Sleeper s) {
        sleep_ = std::move(s);
        return *this;
    }
    LlmClient& with_seed(std::optional<std::int64_t> seed) {
        seed_ = seed;
        return *this;
    }

    /// One logical call: counted once on success regardless of transport retries.
    std::string complete(Stage stage, const std::vector<ChatMessage>& messages, DecodingParams params) const {
        if (messages.empty()) throw Error(ErrorKind::validation, "no messages");
        if (messages.front().role == Role::assistant)
            throw Error(ErrorKind::validation, "conversation must start with a system or user message");
        for (const auto& m : messages)
            if (m.content.empty()) throw Error(ErrorKind::validation, "empty message content");
        if (!params.seed) params.seed = seed_;
        params.validate();

        for (int attempt = 1;; ++attempt) {
            try {
                if (limiter_) limiter_->acquire();
                auto reply = backend_->complete(messages, params);
                if (text::trim(reply).empty()) throw Error(ErrorKind::empty_response, "backend returned empty text");
                if (ledger_) ledger_->add(stage);
                if (transcript_) transcript_->add({stage, messages, reply});
                return reply;
            } catch (const Error& e) {
                if (!e.retryable() || attempt >= retry_.max_attempts) throw;
                auto delay = retry_.delay_for(attempt);
                if (sleep_) sleep_(delay);
                else std::this_thread::sleep_for(delay);
            }
        }
    }

    const Backend& backend() const { return *backend_; }
    std::shared_ptr<Backend> backend_ptr() const { return backend_; }

private:
    std::shared_ptr<Backend> backend_;
    RetryPolicy retry_;
    CallLedger* ledger_ = nullptr;
    Transcript* transcript_ = nullptr;
    RateLimiter* limiter_ = nullptr;
    Sleeper sleep_;
    std::optional<std::int64_t> seed_;
};

}  // namespace namegen
