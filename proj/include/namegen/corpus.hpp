#pragma once

// Poetry corpus ingestion, coarse metadata filtering and exact cosine search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "namegen/core.hpp"
#include "namegen/error.hpp"
#include "namegen/gateway.hpp"
#include "namegen/text.hpp"

namespace namegen {

inline PoemRecord poem_from_json(const nlohmann::json& j) {
    PoemRecord p;
    const auto& id = j.at("id");
    p.id = id.is_string() ? id.get<std::string>() : id.dump();
    p.poet = j.at("poet").get<std::string>();
    p.dynasty = j.at("dynasty").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.content = j.at("content").get<std::vector<std::string>>();
    p.interpretation = j.at("interpretation").get<std::string>();
    p.theme = j.at("theme").get<std::vector<std::string>>();
    if (p.id.empty()) throw Error(ErrorKind::corpus, "empty id");
    if (p.content.empty()) throw Error(ErrorKind::corpus, "record " + p.id + " has no content");
    return p;
}

inline nlohmann::json poem_to_json(const PoemRecord& p) {
    return {{"id", p.id},       {"poet", p.poet},       {"dynasty", p.dynasty},
            {"title", p.title}, {"content", p.content}, {"interpretation", p.interpretation},
            {"theme", p.theme}};
}

class Corpus {
public:
    Corpus() = default;

    explicit Corpus(std::vector<PoemRecord> records) {
        for (auto& r : records) add(std::move(r));
    }

    void add(PoemRecord r) {
        if (by_id_.count(r.id)) throw Error(ErrorKind::corpus, "duplicate record id " + r.id);
        by_id_.emplace(r.id, records_.size());
        records_.push_back(std::move(r));
    }

    const std::vector<PoemRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const PoemRecord& operator[](std::size_t i) const { return records_[i]; }

    const PoemRecord* find(std::string_view id) const {
        auto it = by_id_.find(std::string(id));
        return it == by_id_.end() ? nullptr : &records_[it->second];
    }

    std::optional<std::size_t> index_of(std::string_view id) const {
        auto it = by_id_.find(std::string(id));
        if (it == by_id_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<std::size_t> all() const {
        std::vector<std::size_t> idx(records_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        return idx;
    }

private:
    std::vector<PoemRecord> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

struct IngestResult {
    Corpus corpus;
    std::vector<std::string> warnings;
};

/// Loads one JSON record per line. Malformed lines become warnings; more than 10% aborts.
inline IngestResult ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::input, "cannot read corpus file " + path);
    IngestResult out;
    std::string line;
    std::size_t lineno = 0, seen = 0, bad = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        ++seen;
        try {
            out.corpus.add(poem_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            ++bad;
            out.warnings.push_back(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (seen == 0) throw Error(ErrorKind::corpus, "empty corpus " + path);
    if (bad * 10 > seen)
        throw Error(ErrorKind::corpus, std::to_string(bad) + " of " + std::to_string(seen) +
                                           " lines malformed in " + path + " (limit 10%)");
    return out;
}

enum class Field { theme, dynasty, poet, title, content };

struct Predicate {
    Field field;
    std::string value;

    static Field parse_field(std::string_view name) {
        if (name == "theme") return Field::theme;
        if (name == "dynasty") return Field::dynasty;
        if (name == "poet") return Field::poet;
        if (name == "title") return Field::title;
        if (name == "content" || name == "keyword") return Field::content;
        throw Error(ErrorKind::predicate, "unknown metadata field '" + std::string(name) + "'");
    }

    static Predicate make(std::string_view field, std::string value) { return {parse_field(field), std::move(value)}; }

    /// Theme matches a tag exactly, dynasty and poet compare exactly, title and content by substring.
    bool matches(const PoemRecord& r) const {
        switch (field) {
        case Field::theme:
            return std::any_of(r.theme.begin(), r.theme.end(), [&](const auto& t) { return t == value || text::contains(t, value); });
        case Field::dynasty: return r.dynasty == value;
        case Field::poet: return r.poet == value;
        case Field::title: return text::contains(r.title, value);
        case Field::content:
            return std::any_of(r.content.begin(), r.content.end(), [&](const auto& l) { return text::contains(l, value); });
        }
        return false;
    }
};

/// Key-info entries named after filterable fields ("theme", "dynasty", "poet", "title",
/// "keyword") become predicates; everything else is informational.
inline std::vector<Predicate> predicates_from_key_info(const std::map<std::string, std::string>& key_info) {
    static const std::unordered_set<std::string> filterable = {"theme", "dynasty", "poet", "title", "keyword"};
    std::vector<Predicate> preds;
    for (const auto& [k, v] : key_info)
        if (filterable.count(k) && !text::trim(v).empty()) preds.push_back(Predicate::make(k, text::trim(v)));
    return preds;
}

inline std::vector<std::size_t> coarse_filter(const Corpus& corpus, const std::vector<std::size_t>& subset,
                                              const std::vector<Predicate>& preds) {
    std::vector<std::size_t> out;
    for (auto i : subset) {
        const auto& r = corpus[i];
        if (std::all_of(preds.begin(), preds.end(), [&](const Predicate& p) { return p.matches(r); })) out.push_back(i);
    }
    return out;
}

inline std::vector<std::size_t> coarse_filter(const Corpus& corpus, const std::vector<Predicate>& preds) {
    return coarse_filter(corpus, corpus.all(), preds);
}

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        throw Error(ErrorKind::dimension_mismatch, "dimension " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0 || nb == 0) return 0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dim() const = 0;
    /// Identifies provider, parameters and dimension; stored in index files.
    virtual std::string fingerprint() const = 0;
};

/// Character unigrams and bigrams hashed (seeded FNV-1a) into a fixed number of buckets,
/// then L2-normalized. Whitespace is ignored.
class HashNgramEmbedder final : public Embedder {
public:
    explicit HashNgramEmbedder(std::size_t dim = 256, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {
        if (dim_ == 0) throw Error(ErrorKind::config, "embedding dimension must be positive");
    }

    EmbeddingVector embed(std::string_view s) const override {
        std::vector<std::string> cs;
        for (auto& c : text::chars(s))
            if (!text::trim(c).empty()) cs.push_back(std::move(c));
        if (cs.empty()) throw Error(ErrorKind::validation, "cannot embed empty text");
        EmbeddingVector v{std::vector<double>(dim_, 0.0)};
        for (std::size_t i = 0; i < cs.size(); ++i) {
            v.values[bucket(cs[i])] += 1.0;
            if (i + 1 < cs.size()) v.values[bucket(cs[i] + cs[i + 1])] += 1.0;
        }
        double norm = 0;
        for (double x : v.values) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v.values) x /= norm;
        return v;
    }

    std::size_t dim() const override { return dim_; }

    std::string fingerprint() const override {
        return "hash-ngram-v1:n=1,2:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
    }

private:
    std::size_t bucket(std::string_view gram) const {
        std::uint64_t h = 1469598103934665603ULL ^ (seed_ * 0x9E3779B97F4A7C15ULL);
        for (unsigned char c : gram) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h % dim_);
    }

    std::size_t dim_;
    std::uint64_t seed_;
};

/// Text embedded for a corpus record: title followed by the verse lines.
inline std::string embedding_text(const PoemRecord& r) {
    return r.title + "\n" + text::join(r.content, "\n");
}

struct Match {
    std::size_t index;
    std::string id;
    double score;
};

/// Flat exact-cosine index aligned one-to-one with a corpus.
class VectorIndex {
public:
    static constexpr int kFormatVersion = 1;

    static VectorIndex build(const Corpus& corpus, const Embedder& embedder) {
        VectorIndex idx;
        idx.dim_ = embedder.dim();
        idx.fingerprint_ = embedder.fingerprint();
        for (const auto& r : corpus.records()) {
            idx.ids_.push_back(r.id);
            idx.vectors_.push_back(embedder.embed(embedding_text(r)));
        }
        return idx;
    }

    std::size_t dim() const { return dim_; }
    const std::string& fingerprint() const { return fingerprint_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const EmbeddingVector& vector(std::size_t i) const { return vectors_[i]; }

    /// The corpus and query-time embedder must be the ones the index was built from.
    void check_compatible(const Corpus& corpus, const Embedder& embedder) const {
        if (embedder.fingerprint() != fingerprint_)
            throw Error(ErrorKind::config, "index built with '" + fingerprint_ + "' but querying with '" + embedder.fingerprint() + "'");
        if (corpus.size() != ids_.size()) throw Error(ErrorKind::config, "index and corpus sizes differ");
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (corpus[i].id != ids_[i]) throw Error(ErrorKind::config, "index and corpus disagree at record " + ids_[i]);
    }

    /// Descending cosine, ties by ascending id; returns min(k, |subset|) matches.
    std::vector<Match> top_k(const EmbeddingVector& query, const std::vector<std::size_t>& subset, std::size_t k) const {
        if (k == 0) throw Error(ErrorKind::validation, "k must be >= 1");
        if (query.dim() != dim_)
            throw Error(ErrorKind::dimension_mismatch, "query dim " + std::to_string(query.dim()) + " vs index dim " + std::to_string(dim_));
        std::vector<Match> all;
        all.reserve(subset.size());
        for (auto i : subset) all.push_back({i, ids_.at(i), cosine(query, vectors_[i])});
        auto n = std::min(k, all.size());
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), [](const Match& a, const Match& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        all.resize(n);
        return all;
    }

    /// Line-delimited: a header object, then one {"id","v"} object per record.
    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw Error(ErrorKind::input, "cannot write index " + path);
        out << nlohmann::json({{"format", "namegen-index"}, {"version", kFormatVersion}, {"dim", dim_},
                               {"fingerprint", fingerprint_}, {"count", ids_.size()}})
                   .dump()
            << '\n';
        for (std::size_t i = 0; i < ids_.size(); ++i) out << nlohmann::json({{"id", ids_[i]}, {"v", vectors_[i].values}}).dump() << '\n';
    }

    static VectorIndex load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::input, "cannot read index " + path);
        std::string line;
        if (!std::getline(in, line)) throw Error(ErrorKind::input, "empty index file " + path);
        VectorIndex idx;
        std::size_t count = 0;
        try {
            auto h = nlohmann::json::parse(line);
            if (h.at("format") != "namegen-index" || h.at("version").get<int>() != kFormatVersion)
                throw Error(ErrorKind::input, "unsupported index format in " + path);
            idx.dim_ = h.at("dim").get<std::size_t>();
            idx.fingerprint_ = h.at("fingerprint").get<std::string>();
            count = h.at("count").get<std::size_t>();
            while (std::getline(in, line)) {
                if (text::trim(line).empty()) continue;
                auto j = nlohmann::json::parse(line);
                idx.ids_.push_back(j.at("id").get<std::string>());
                EmbeddingVector v{j.at("v").get<std::vector<double>>()};
                if (v.dim() != idx.dim_) throw Error(ErrorKind::input, "vector dimension mismatch in " + path);
                idx.vectors_.push_back(std::move(v));
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::input, "malformed index " + path + ": " + e.what());
        }
        if (idx.ids_.size() != count) throw Error(ErrorKind::input, "index " + path + " is truncated");
        return idx;
    }

private:
    std::size_t dim_ = 0;
    std::string fingerprint_;
    std::vector<std::string> ids_;
    std::vector<EmbeddingVector> vectors_;
};

/// Corpus, embedder and index bundled for retrieval. Immutable after construction.
struct KnowledgeBase {
    std::shared_ptr<const Corpus> corpus;
    std::shared_ptr<const Embedder> embedder;
    std::shared_ptr<const VectorIndex> index;

    static KnowledgeBase build(Corpus corpus, std::shared_ptr<const Embedder> embedder) {
        auto c = std::make_shared<const Corpus>(std::move(corpus));
        auto idx = std::make_shared<const VectorIndex>(VectorIndex::build(*c, *embedder));
        return {c, std::move(embedder), idx};
    }
};

}  // namespace namegen
