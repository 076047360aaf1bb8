#pragma once

// Shared fixtures for the test binaries.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "namegen/config.hpp"

namespace testing_support {

using namespace namegen;
namespace fs = std::filesystem;

inline std::string data_path(const std::string& name) { return std::string(NAMEGEN_DATA_DIR) + "/" + name; }

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("namegen_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Counts calls and records prompts around an inner backend.
class CountingBackend final : public Backend {
public:
    explicit CountingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
    std::string complete(const std::vector<ChatMessage>& messages, const DecodingParams& params) override {
        ++calls;
        {
            std::lock_guard lock(mu_);
            prompts.push_back(flatten(messages));
        }
        return inner_->complete(messages, params);
    }
    std::string name() const override { return inner_->name(); }

    std::atomic<int> calls{0};
    std::vector<std::string> prompts;

private:
    std::shared_ptr<Backend> inner_;
    std::mutex mu_;
};

/// Replies from a queue in order; throws once exhausted.
inline std::shared_ptr<FunctionBackend> queue_backend(std::vector<std::string> replies,
                                                      std::vector<std::string>* prompts = nullptr) {
    auto q = std::make_shared<std::vector<std::string>>(std::move(replies));
    auto i = std::make_shared<std::size_t>(0);
    return std::make_shared<FunctionBackend>([q, i, prompts](const std::vector<ChatMessage>& m, const DecodingParams&) {
        if (prompts) prompts->push_back(m.back().content);
        if (*i >= q->size()) throw Error(ErrorKind::scripted_miss, "reply queue exhausted");
        return (*q)[(*i)++];
    });
}

inline LlmClient quiet_client(std::shared_ptr<Backend> b, CallLedger* ledger = nullptr) {
    LlmClient c(std::move(b));
    c.with_ledger(ledger).with_sleeper([](std::chrono::milliseconds) {});
    return c;
}

inline PoemRecord poem(std::string id, std::string poet, std::string title, std::vector<std::string> content,
                       std::vector<std::string> theme = {}, std::string dynasty = "唐") {
    return {std::move(id), std::move(poet), std::move(dynasty), std::move(title), std::move(content), "", std::move(theme)};
}

inline Corpus sample_corpus() { return ingest(data_path("corpus_sample.jsonl")).corpus; }

inline UserQuery li_query() {
    UserQuery x;
    x.raw_text = "为李姓女孩取名，喜欢明月与智慧。";
    x.surname = "李";
    x.birth = BirthDateTime::parse("2024-07-15 09:30");
    x.gender = Gender::female;
    return x;
}

/// HybridInfo with m objectives, uniform weights and filled descriptions.
inline HybridInfo make_info(std::size_t m, std::optional<RetrievedKnowledge> rk = std::nullopt) {
    HybridInfo info;
    info.task_type = "naming a Chinese baby";
    std::vector<std::string> labels;
    for (std::size_t k = 1; k <= m; ++k) labels.push_back("objective " + std::to_string(k));
    info.objectives = ObjectiveSet::from_labels(labels);
    info.preference = WeightVector::uniform(m);
    for (std::size_t k = 1; k <= m; ++k) {
        info.descriptions.push_back("description " + std::to_string(k));
        info.requirements.push_back("requirement " + std::to_string(k));
    }
    info.retrieved = std::move(rk);
    return info;
}

inline std::string generation_reply(const std::string& name, const std::vector<std::string>& explanations) {
    std::string s = "NAME: " + name;
    for (std::size_t k = 0; k < explanations.size(); ++k)
        s += "\nEXPLANATION[" + std::to_string(k + 1) + "]: " + explanations[k];
    return s;
}

}  // namespace testing_support
