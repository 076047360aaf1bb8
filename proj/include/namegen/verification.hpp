#pragma once

// Rule-based accuracy gate. Explanations are tokenised into plain text, quotes (「」 “”) and
// titles (《》); rules check quotes and attributions against the retrieved poem and the corpus.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "namegen/core.hpp"
#include "namegen/corpus.hpp"
#include "namegen/text.hpp"

namespace namegen {

struct Violation {
    std::string rule_id;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct AccReport {
    bool passed = true;
    std::vector<Violation> violations;

    std::vector<std::string> feedback() const {
        std::vector<std::string> out;
        for (const auto& v : violations) out.push_back("[" + v.rule_id + "] " + v.detail);
        return out;
    }
};

/// Known verses, titles and poets, normalised for string-level lookup.
class VerseIndex {
public:
    VerseIndex() = default;
    explicit VerseIndex(const Corpus& corpus) {
        for (const auto& r : corpus.records()) add(r);
    }

    void add(const PoemRecord& r) {
        if (!added_.insert(r.id).second) return;
        for (const auto& line : r.content) {
            auto full = text::strip_punctuation(line);
            if (!full.empty()) verses_[full].insert(r.title);
            for (const auto& c : text::clauses(line)) verses_[c].insert(r.title);
        }
        titles_[r.title].insert(r.poet);
        if (!r.poet.empty()) poets_.insert(r.poet);
    }

    bool knows_verse(std::string_view quote) const { return verses_.count(text::strip_punctuation(quote)) > 0; }

    bool verse_in_title(std::string_view quote, const std::string& title) const {
        auto it = verses_.find(text::strip_punctuation(quote));
        return it != verses_.end() && it->second.count(title) > 0;
    }

    bool knows_title(const std::string& title) const { return titles_.count(title) > 0; }

    bool title_by(const std::string& title, const std::string& poet) const {
        auto it = titles_.find(title);
        return it != titles_.end() && it->second.count(poet) > 0;
    }

    /// Longest known poet name that ends exactly at the end of `prefix`.
    std::optional<std::string> poet_suffix(std::string_view prefix) const {
        std::optional<std::string> best;
        for (const auto& p : poets_)
            if (prefix.size() >= p.size() && prefix.substr(prefix.size() - p.size()) == p && (!best || p.size() > best->size()))
                best = p;
        return best;
    }

private:
    std::set<std::string> added_;
    std::unordered_map<std::string, std::set<std::string>> verses_;
    std::unordered_map<std::string, std::set<std::string>> titles_;
    std::set<std::string> poets_;
};

/// Corpus index plus the retrieved record, queried together without copying the corpus index.
class LayeredVerses {
public:
    LayeredVerses(const VerseIndex& base, const VerseIndex* extra) : base_(base), extra_(extra) {}

    bool knows_verse(std::string_view q) const { return base_.knows_verse(q) || (extra_ && extra_->knows_verse(q)); }
    bool verse_in_title(std::string_view q, const std::string& t) const {
        return base_.verse_in_title(q, t) || (extra_ && extra_->verse_in_title(q, t));
    }
    bool knows_title(const std::string& t) const { return base_.knows_title(t) || (extra_ && extra_->knows_title(t)); }
    bool title_by(const std::string& t, const std::string& p) const {
        return base_.title_by(t, p) || (extra_ && extra_->title_by(t, p));
    }
    std::optional<std::string> poet_suffix(std::string_view prefix) const {
        auto a = base_.poet_suffix(prefix);
        auto b = extra_ ? extra_->poet_suffix(prefix) : std::nullopt;
        if (a && b) return a->size() >= b->size() ? a : b;
        return a ? a : b;
    }

private:
    const VerseIndex& base_;
    const VerseIndex* extra_;
};

enum class TokenKind { plain, quote, title };

struct Token {
    TokenKind kind;
    std::string text;
    int sentence = 0;
};

/// Splits an explanation into tokens. Sentence breaks are only recognised outside delimiters.
inline std::vector<Token> tokenize_explanation(std::string_view s) {
    std::vector<Token> out;
    std::string cur;
    int sentence = 0;
    TokenKind mode = TokenKind::plain;
    std::string closer;
    auto flush = [&](TokenKind kind) {
        if (!cur.empty() || kind != TokenKind::plain) out.push_back({kind, cur, sentence});
        cur.clear();
    };
    for (const auto& ch : text::chars(s)) {
        if (mode == TokenKind::plain) {
            if (ch == "「" || ch == "“") {
                flush(TokenKind::plain);
                mode = TokenKind::quote;
                closer = ch == "「" ? "」" : "”";
            } else if (ch == "《") {
                flush(TokenKind::plain);
                mode = TokenKind::title;
                closer = "》";
            } else if (ch == "。" || ch == "；" || ch == "！" || ch == "？" || ch == "\n") {
                cur += ch;
                flush(TokenKind::plain);
                ++sentence;
            } else {
                cur += ch;
            }
        } else if (ch == closer) {
            flush(mode);
            mode = TokenKind::plain;
        } else {
            cur += ch;
        }
    }
    if (mode != TokenKind::plain) {
        // unterminated delimiter: treat the remainder as plain text
        out.push_back({TokenKind::plain, cur, sentence});
    } else if (!cur.empty()) {
        out.push_back({TokenKind::plain, cur, sentence});
    }
    return out;
}

/// Quotes of at least four characters are treated as verse citations; shorter ones name characters.
inline constexpr std::size_t kMinVerseChars = 4;

inline bool is_verse_quote(const Token& t) {
    return t.kind == TokenKind::quote && text::length(text::strip_punctuation(t.text)) >= kMinVerseChars;
}

struct VerificationContext {
    const CreativeOutput& output;
    const std::optional<RetrievedKnowledge>& knowledge;
    const UserQuery& query;
    const LayeredVerses& verses;
};

class Rule {
public:
    virtual ~Rule() = default;
    virtual std::string id() const = 0;
    virtual void check(const VerificationContext& ctx, std::vector<Violation>& out) const = 0;
};

/// R1: every quoted verse appears verbatim as a line or clause of a known poem.
class QuotedVerseRule final : public Rule {
public:
    std::string id() const override { return "R1"; }
    void check(const VerificationContext& ctx, std::vector<Violation>& out) const override {
        for (std::size_t k = 0; k < ctx.output.explanations.size(); ++k)
            for (const auto& t : tokenize_explanation(ctx.output.explanations[k]))
                if (is_verse_quote(t) && !ctx.verses.knows_verse(t.text))
                    out.push_back({id(), "explanation " + std::to_string(k + 1) + " quotes 「" + t.text +
                                             "」 which is not a line of the retrieved poem or the corpus"});
    }
};

/// R2: a character said to come from a quoted verse must occur in that verse.
class CharacterSourceRule final : public Rule {
public:
    std::string id() const override { return "R2"; }
    void check(const VerificationContext& ctx, std::vector<Violation>& out) const override {
        static constexpr std::string_view markers[] = {"取自", "出自", "来自", "源自", "源于", "化用", "comes from", "taken from", "from"};
        static constexpr std::string_view joiners[] = {"", "、", "和", "与", "及", ",", "，", "and"};
        for (std::size_t k = 0; k < ctx.output.explanations.size(); ++k) {
            auto tokens = tokenize_explanation(ctx.output.explanations[k]);
            std::vector<std::string> pending;
            std::string gap;
            for (const auto& t : tokens) {
                if (t.kind == TokenKind::plain) {
                    gap += t.text;
                    continue;
                }
                if (t.kind == TokenKind::title) {
                    // 「X」取自杜甫《望岳》「...」: the cited title sits between marker and verse
                    gap += "《" + t.text + "》";
                    continue;
                }
                if (t.kind == TokenKind::quote && !is_verse_quote(t)) {
                    bool joined = false;
                    for (auto j : joiners)
                        if (text::trim(gap) == j) joined = true;
                    if (!joined) pending.clear();
                    pending.push_back(text::strip_punctuation(t.text));
                } else if (is_verse_quote(t) && !pending.empty()) {
                    bool sourced = false;
                    for (auto mk : markers)
                        if (text::contains(gap, mk)) sourced = true;
                    if (sourced) {
                        auto verse = text::strip_punctuation(t.text);
                        for (const auto& chars : pending)
                            for (const auto& ch : text::chars(chars))
                                if (!text::contains(verse, ch))
                                    out.push_back({id(), "explanation " + std::to_string(k + 1) + " says 「" + ch +
                                                             "」 comes from 「" + t.text + "」 but the verse does not contain it"});
                    }
                    pending.clear();
                } else {
                    pending.clear();
                }
                gap.clear();
            }
        }
    }
};

/// R3: the result starts with the user's surname.
class SurnamePrefixRule final : public Rule {
public:
    std::string id() const override { return "R3"; }
    void check(const VerificationContext& ctx, std::vector<Violation>& out) const override {
        if (!ctx.query.surname) return;
        const auto& r = ctx.output.result;
        if (r.rfind(*ctx.query.surname, 0) != 0)
            out.push_back({id(), "result '" + r + "' does not start with the surname '" + *ctx.query.surname + "'"});
    }
};

/// R4: one or two characters remain after removing the surname.
class GivenNameLengthRule final : public Rule {
public:
    std::string id() const override { return "R4"; }
    void check(const VerificationContext& ctx, std::vector<Violation>& out) const override {
        if (!ctx.query.surname) return;
        const auto& r = ctx.output.result;
        auto given = r.rfind(*ctx.query.surname, 0) == 0 ? r.substr(ctx.query.surname->size()) : r;
        auto n = text::length(text::trim(given));
        if (n < 1 || n > 2)
            out.push_back({id(), "given name of '" + r + "' has " + std::to_string(n) + " characters; expected 1 or 2"});
    }
};

/// R5: cited titles exist, a poet named before a title wrote it, and verses quoted alongside a
/// title belong to that poem.
class AttributionRule final : public Rule {
public:
    std::string id() const override { return "R5"; }
    void check(const VerificationContext& ctx, std::vector<Violation>& out) const override {
        for (std::size_t k = 0; k < ctx.output.explanations.size(); ++k) {
            auto tokens = tokenize_explanation(ctx.output.explanations[k]);
            auto where = "explanation " + std::to_string(k + 1);
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                const auto& t = tokens[i];
                if (t.kind != TokenKind::title) continue;
                if (!ctx.verses.knows_title(t.text)) {
                    out.push_back({id(), where + " cites unknown poem 《" + t.text + "》"});
                    continue;
                }
                if (i > 0 && tokens[i - 1].kind == TokenKind::plain) {
                    std::string prefix = text::trim(tokens[i - 1].text);
                    for (std::string_view tail : {"的", "之"})
                        if (prefix.size() >= tail.size() && prefix.compare(prefix.size() - tail.size(), tail.size(), tail) == 0)
                            prefix.erase(prefix.size() - tail.size());
                    if (auto poet = ctx.verses.poet_suffix(prefix); poet && !ctx.verses.title_by(t.text, *poet))
                        out.push_back({id(), where + " attributes 《" + t.text + "》 to " + *poet + ", who did not write it"});
                }
                for (const auto& q : tokens)
                    if (q.sentence == t.sentence && is_verse_quote(q) && ctx.verses.knows_verse(q.text) &&
                        !ctx.verses.verse_in_title(q.text, t.text))
                        out.push_back({id(), where + " attributes 「" + q.text + "」 to 《" + t.text + "》, which does not contain it"});
            }
        }
    }
};

/// Rule sets per task type; unknown task types get the default set.
class RuleRegistry {
public:
    static RuleRegistry with_defaults() {
        RuleRegistry reg;
        reg.register_rule("R1", std::make_shared<QuotedVerseRule>());
        reg.register_rule("R2", std::make_shared<CharacterSourceRule>());
        reg.register_rule("R3", std::make_shared<SurnamePrefixRule>());
        reg.register_rule("R4", std::make_shared<GivenNameLengthRule>());
        reg.register_rule("R5", std::make_shared<AttributionRule>());
        reg.set_task("naming", {"R1", "R2", "R3", "R4", "R5"});
        reg.set_task("slogan", {"R1", "R2", "R5"});
        reg.set_default({"R1", "R2", "R3", "R4", "R5"});
        return reg;
    }

    void register_rule(const std::string& id, std::shared_ptr<const Rule> rule) { rules_[id] = std::move(rule); }

    void set_task(const std::string& task, std::vector<std::string> ids) {
        for (const auto& id : ids)
            if (!rules_.count(id)) throw Error(ErrorKind::config, "unknown rule id " + id);
        tasks_[task] = std::move(ids);
    }

    void set_default(std::vector<std::string> ids) {
        for (const auto& id : ids)
            if (!rules_.count(id)) throw Error(ErrorKind::config, "unknown rule id " + id);
        default_ = std::move(ids);
    }

    std::vector<std::shared_ptr<const Rule>> rules_for(const std::string& task) const {
        auto it = tasks_.find(task);
        const auto& ids = it == tasks_.end() ? default_ : it->second;
        std::vector<std::shared_ptr<const Rule>> out;
        for (const auto& id : ids) out.push_back(rules_.at(id));
        return out;
    }

private:
    std::map<std::string, std::shared_ptr<const Rule>> rules_;
    std::map<std::string, std::vector<std::string>> tasks_;
    std::vector<std::string> default_;
};

/// Deterministic and backend-free. Returns the regenerate flag and the report.
inline std::pair<RegenFlag, AccReport> f_acc(const CreativeOutput& y, const std::optional<RetrievedKnowledge>& knowledge,
                                             const UserQuery& x, const VerseIndex& corpus_verses,
                                             const std::vector<std::shared_ptr<const Rule>>& rules) {
    VerseIndex extra;
    if (knowledge) extra.add(knowledge->record);
    LayeredVerses verses(corpus_verses, &extra);
    VerificationContext ctx{y, knowledge, x, verses};
    AccReport report;
    for (const auto& r : rules) r->check(ctx, report.violations);
    report.passed = report.violations.empty();
    return {report.passed ? RegenFlag::accept : RegenFlag::regenerate, std::move(report)};
}

inline std::pair<RegenFlag, AccReport> f_acc(const CreativeOutput& y, const std::optional<RetrievedKnowledge>& knowledge,
                                             const UserQuery& x, const VerseIndex& corpus_verses) {
    return f_acc(y, knowledge, x, corpus_verses, RuleRegistry::with_defaults().rules_for("naming"));
}

}  // namespace namegen
