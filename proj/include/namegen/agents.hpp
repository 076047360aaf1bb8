#pragma once

// Manager (MOM), generator (MOG) and evaluator (MOE) roles. Each operation renders a prompt,
// makes one logical call and parses a tagged reply, re-asking on parse failure.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "namegen/core.hpp"
#include "namegen/corpus.hpp"
#include "namegen/envelope.hpp"
#include "namegen/gateway.hpp"
#include "namegen/prompts.hpp"

namespace namegen {

struct AgentOptions {
    int max_reasks = 2;
    int generation_reasks = 1;
    int preference_reasks = 1;
    int retrieval_reasks = 1;
    int feedback_rounds = 3;
    DecodingParams manager{kEvaluatorTemperature, 1024, std::nullopt};
    DecodingParams generator{kGeneratorTemperature, 1024, std::nullopt};
    DecodingParams evaluator{kEvaluatorTemperature, 1024, std::nullopt};
};

/// Shared plumbing: one client, one prompt library, one set of options.
class AgentBase {
public:
    AgentBase(LlmClient client, std::shared_ptr<const PromptLibrary> prompts, AgentOptions opts = {})
        : client_(std::move(client)), prompts_(std::move(prompts)), opts_(opts) {
        if (!prompts_) prompts_ = std::make_shared<const PromptLibrary>();
    }

    const PromptLibrary& prompts() const { return *prompts_; }
    const AgentOptions& options() const { return opts_; }

protected:
    /// Calls the backend and parses; on a parse error the reply and a re-ask are appended to the
    /// conversation, at most `reasks` times.
    template <typename Parse>
    auto ask(Stage stage, const std::string& system_template, std::string prompt, const DecodingParams& params, int reasks,
             Parse&& parse) const {
        std::vector<ChatMessage> messages = {{Role::system, prompts_->raw(system_template)}, {Role::user, std::move(prompt)}};
        for (int attempt = 0;; ++attempt) {
            auto reply = client_.complete(stage, messages, params);
            try {
                return parse(Envelope::parse(reply));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::parse || attempt >= reasks) throw;
                messages.push_back({Role::assistant, reply});
                messages.push_back({Role::user, prompts_->render("reask", {{"reason", e.what()}})});
            }
        }
    }

    LlmClient client_;
    std::shared_ptr<const PromptLibrary> prompts_;
    AgentOptions opts_;
};

inline std::string numbered(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) out += std::to_string(k + 1) + ". " + items[k] + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string render_knowledge(const std::optional<RetrievedKnowledge>& rk) {
    if (!rk) return "(none)";
    const auto& r = rk->record;
    std::string out = "《" + r.title + "》 " + r.poet + " (" + r.dynasty + ")\n" + text::join(r.content, "\n");
    if (!r.interpretation.empty()) out += "\nInterpretation: " + r.interpretation;
    return out;
}

inline std::string render_facts(const std::map<std::string, std::string>& facts) {
    if (facts.empty()) return "(none)";
    std::string out;
    for (const auto& [k, v] : facts) out += "- " + k + ": " + v + "\n";
    out.pop_back();
    return out;
}

inline std::string render_shots(const std::vector<Shot>& shots) {
    if (shots.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < shots.size(); ++i) {
        if (i) out += "\n\n";
        out += "Input: " + shots[i].input + "\nOutput:\n" + shots[i].output;
    }
    return out;
}

inline std::string render_query(const UserQuery& x) {
    std::string out = x.raw_text;
    if (x.surname) out += "\nSurname: " + *x.surname;
    if (x.birth) out += "\nBirth: " + x.birth->str();
    if (x.gender != Gender::unspecified) out += "\nGender: " + std::string(to_string(x.gender));
    if (x.preference_hints) out += "\nPreferences: " + *x.preference_hints;
    return out;
}

inline std::vector<Shot> default_shots() {
    return {
        {"为李姓男孩取名，希望他正直有担当，喜欢山水。",
         "NAME: 李青岳\nEXPLANATION[1]: 「青」「岳」取自「岱宗夫如何，齐鲁青未了」的山岳意象，寓意胸怀高远。\n"
         "EXPLANATION[2]: 父母期望孩子像山岳一样稳重有担当。"},
        {"为王姓女孩取名，出生于秋天，希望她温婉聪慧。",
         "NAME: 王清秋\nEXPLANATION[1]: 「清」「秋」取自「空山新雨后，天气晚来秋」的清新意境。\n"
         "EXPLANATION[2]: 「清」寓意品性清雅，契合温婉聪慧的期望。"},
    };
}

/// Season of a birth month by three-month blocks.
inline std::string season_of_month(int month) {
    if (month < 1 || month > 12) throw Error(ErrorKind::validation, "month out of range");
    if (month >= 3 && month <= 5) return "spring";
    if (month >= 6 && month <= 8) return "summer";
    if (month >= 9 && month <= 11) return "autumn";
    return "winter";
}

/// Facts derivable without a backend call.
inline std::map<std::string, std::string> local_key_info(const UserQuery& x) {
    std::map<std::string, std::string> ki;
    if (x.surname) ki["surname"] = *x.surname;
    if (x.birth) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", x.birth->year, x.birth->month, x.birth->day);
        ki["birth_date"] = buf;
        if (x.birth->hour) {
            std::snprintf(buf, sizeof buf, "%02d:%02d", *x.birth->hour, *x.birth->minute);
            ki["birth_time"] = buf;
        }
        ki["season"] = season_of_month(x.birth->month);
    }
    if (x.gender != Gender::unspecified) ki["gender"] = std::string(to_string(x.gender));
    return ki;
}

inline std::vector<double> parse_weight_list(const std::string& s, std::size_t expected) {
    std::vector<double> raw;
    for (auto part : text::split(s, ',')) {
        auto t = text::trim(part);
        if (t.empty()) continue;
        char* end = nullptr;
        double v = std::strtod(t.c_str(), &end);
        if (end == t.c_str() || *end != '\0' || !(v >= 0) || !std::isfinite(v))
            throw Error(ErrorKind::parse, "bad weight '" + t + "'");
        raw.push_back(v);
    }
    if (raw.size() != expected)
        throw Error(ErrorKind::parse, "expected " + std::to_string(expected) + " weights, got " + std::to_string(raw.size()));
    return raw;
}

struct PreferenceResult {
    WeightVector weights;
    bool fallback = false;
};

struct CompactPreparation {
    std::string task_type;
    PreferenceResult preference;
    std::map<std::string, std::string> key_info;
    std::string query;
};

class Manager : public AgentBase {
public:
    using AgentBase::AgentBase;

    std::string analyze_task(const UserQuery& x) const {
        x.validate();
        return ask(Stage::preparation, "system_manager", prompts_->render("analyze_task", {{"query", render_query(x)}}),
                   opts_.manager, opts_.max_reasks, [](const Envelope& env) { return env.require("TASK_TYPE"); });
    }

    /// One MOM proposal of explicit objectives; `feedback` carries the evaluator's last verdict.
    ObjectiveSet parse_objectives(const std::string& task_type, const std::string& feedback = {}) const {
        std::string fb = feedback.empty() ? "" : "Evaluator feedback on the previous list: " + feedback + "\n";
        return ask(Stage::preparation, "system_manager",
                   prompts_->render("parse_objectives", {{"task_type", task_type}, {"feedback", fb}}), opts_.manager,
                   opts_.max_reasks, [](const Envelope& env) {
                       std::vector<std::string> labels;
                       std::set<std::string> seen;
                       for (auto part : text::split(env.require("OBJECTIVES"), '|')) {
                           auto label = text::trim(part);
                           if (label.empty()) continue;
                           std::string folded = label;
                           std::transform(folded.begin(), folded.end(), folded.begin(), [](unsigned char c) { return std::tolower(c); });
                           if (!seen.insert(folded).second) throw Error(ErrorKind::parse, "duplicate objective '" + label + "'");
                           labels.push_back(label);
                       }
                       if (labels.size() < 2 || labels.size() > 8)
                           throw Error(ErrorKind::parse, "need 2-8 objectives, got " + std::to_string(labels.size()));
                       return ObjectiveSet::from_labels(labels);
                   });
    }

    PreferenceResult estimate_preference(const ObjectiveSet& objectives, const UserQuery& x) const {
        if (objectives.size() == 0) throw Error(ErrorKind::validation, "no objectives to weight");
        std::vector<double> raw;
        try {
            raw = ask(Stage::preparation, "system_manager",
                      prompts_->render("estimate_preference",
                                       {{"query", render_query(x)}, {"objectives", numbered(objectives.labels())}}),
                      opts_.manager, opts_.preference_reasks,
                      [&](const Envelope& env) { return parse_weight_list(env.require("WEIGHTS"), objectives.size()); });
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::parse) throw;
            return {WeightVector::uniform(objectives.size()), true};
        }
        try {
            return {normalize_weights(raw), false};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate_preference) throw;
            return {WeightVector::uniform(objectives.size()), true};
        }
    }

    /// Local facts plus one expansion call; backend facts never overwrite local ones.
    std::map<std::string, std::string> extract_key_info(const UserQuery& x) const {
        auto ki = local_key_info(x);
        try {
            auto extra = ask(Stage::preparation, "system_manager",
                             prompts_->render("extract_key_info", {{"query", render_query(x)}, {"facts", render_facts(ki)}}),
                             opts_.manager, opts_.max_reasks, [](const Envelope& env) {
                                 auto keyed = env.keyed("KEY");
                                 if (keyed.empty()) throw Error(ErrorKind::parse, "no KEY[...] facts");
                                 return keyed;
                             });
            for (auto& [k, v] : extra)
                if (!v.empty()) ki.emplace(k, v);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::parse) throw;
        }
        return ki;
    }

    std::string build_query(const UserQuery& x) const {
        return ask(Stage::retrieval, "system_manager", prompts_->render("build_query", {{"query", render_query(x)}}),
                   opts_.manager, opts_.max_reasks, [](const Envelope& env) { return env.require("QUERY"); });
    }

    /// Descriptions and requirements for every objective. With `previous` set, only items
    /// named in `flags` are re-requested and the rest are kept.
    std::pair<std::vector<std::string>, std::vector<std::string>> design_details(
        const UserQuery& x, const std::string& task_type, const ObjectiveSet& objectives,
        const std::map<std::string, std::string>& key_info, const std::optional<RetrievedKnowledge>& knowledge,
        const std::map<std::size_t, std::string>& flags = {},
        const std::pair<std::vector<std::string>, std::vector<std::string>>* previous = nullptr) const {
        const auto m = objectives.size();
        std::string fb;
        if (previous) {
            fb = "Evaluator flagged these items; rewrite only them:\n";
            for (const auto& [k, f] : flags)
                fb += "- item " + std::to_string(k) + ": " + f + "\n  current DESC: " + previous->first[k - 1] +
                      "\n  current REQ: " + previous->second[k - 1] + "\n";
        }
        auto prompt = prompts_->render("design_details", {{"task_type", task_type},
                                                          {"query", render_query(x)},
                                                          {"key_info", render_facts(key_info)},
                                                          {"knowledge", render_knowledge(knowledge)},
                                                          {"objectives", numbered(objectives.labels())},
                                                          {"feedback", fb}});
        return ask(Stage::preparation, "system_manager", std::move(prompt), opts_.manager, opts_.max_reasks,
                   [&](const Envelope& env) {
                       std::vector<std::string> desc(m), reqs(m);
                       for (std::size_t k = 1; k <= m; ++k) {
                           bool wanted = !previous || flags.count(k);
                           if (wanted) {
                               desc[k - 1] = env.require("DESC", k);
                               reqs[k - 1] = env.require("REQ", k);
                           } else {
                               desc[k - 1] = env.get("DESC", std::to_string(k)).value_or(previous->first[k - 1]);
                               reqs[k - 1] = env.get("REQ", std::to_string(k)).value_or(previous->second[k - 1]);
                               if (desc[k - 1].empty()) desc[k - 1] = previous->first[k - 1];
                               if (reqs[k - 1].empty()) reqs[k - 1] = previous->second[k - 1];
                           }
                       }
                       return std::make_pair(std::move(desc), std::move(reqs));
                   });
    }

    /// Task analysis, preference, key-info expansion and retrieval query in a single call.
    CompactPreparation prepare_compact(const UserQuery& x, const ObjectiveSet& objectives) const {
        x.validate();
        auto local = local_key_info(x);
        auto prompt = prompts_->render("prepare_compact", {{"query", render_query(x)},
                                                           {"facts", render_facts(local)},
                                                           {"objectives", numbered(objectives.labels())}});
        auto prep = ask(Stage::preparation, "system_manager", std::move(prompt), opts_.manager, opts_.max_reasks,
                        [&](const Envelope& env) {
                            CompactPreparation p;
                            p.task_type = env.require("TASK_TYPE");
                            p.query = env.require("QUERY");
                            auto raw = parse_weight_list(env.require("WEIGHTS"), objectives.size());
                            try {
                                p.preference = {normalize_weights(raw), false};
                            } catch (const Error& e) {
                                if (e.kind() != ErrorKind::degenerate_preference) throw;
                                p.preference = {WeightVector::uniform(objectives.size()), true};
                            }
                            p.key_info = env.keyed("KEY");
                            return p;
                        });
        for (auto& [k, v] : prep.key_info)
            if (!v.empty()) local.emplace(k, v);
        prep.key_info = std::move(local);
        return prep;
    }
};

struct Review {
    bool approved = false;
    std::string feedback;
};

struct DetailReview {
    bool approved = false;
    std::map<std::size_t, std::string> flags;
};

struct RetrievalDecision {
    std::optional<std::string> selected_id;
    std::optional<std::string> rewritten_query;
    std::string reason;
};

struct ImplicitScore {
    int completeness = 0;
    int clarity = 0;
    std::string feedback;
};

struct ExplicitScore {
    int score = 0;
    std::string feedback;
};

inline bool parse_verdict(const Envelope& env) {
    auto v = env.require("VERDICT");
    if (v == "APPROVE") return true;
    if (v == "REVISE") return false;
    throw Error(ErrorKind::parse, "VERDICT must be APPROVE or REVISE, got '" + v + "'");
}

inline std::string render_candidates(const std::vector<const PoemRecord*>& records) {
    std::string out;
    for (const auto* r : records) {
        out += "[" + r->id + "] 《" + r->title + "》 " + r->poet + " (" + r->dynasty + "): " + text::join(r->content, " ");
        if (!r->interpretation.empty()) out += " | " + r->interpretation;
        out += "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

class Evaluator : public AgentBase {
public:
    using AgentBase::AgentBase;

    Review review_objectives(const std::string& task_type, const ObjectiveSet& objectives) const {
        return ask(Stage::preparation, "system_evaluator",
                   prompts_->render("review_objectives", {{"task_type", task_type}, {"objectives", numbered(objectives.labels())}}),
                   opts_.evaluator, opts_.max_reasks, [](const Envelope& env) {
                       Review r;
                       r.approved = parse_verdict(env);
                       r.feedback = env.get("FEEDBACK").value_or("");
                       if (!r.approved && r.feedback.empty()) throw Error(ErrorKind::parse, "REVISE needs FEEDBACK");
                       return r;
                   });
    }

    DetailReview review_details(const std::string& task_type, const ObjectiveSet& objectives,
                                const std::vector<std::string>& desc, const std::vector<std::string>& reqs) const {
        std::string details;
        for (std::size_t k = 0; k < desc.size(); ++k)
            details += std::to_string(k + 1) + ". " + objectives.explicit_objectives[k].label + "\n   DESC: " + desc[k] +
                       "\n   REQ: " + reqs[k] + "\n";
        return ask(Stage::preparation, "system_evaluator",
                   prompts_->render("review_details", {{"task_type", task_type}, {"details", details}}), opts_.evaluator,
                   opts_.max_reasks, [&](const Envelope& env) {
                       DetailReview r;
                       r.approved = parse_verdict(env);
                       for (auto& [k, v] : env.keyed("FLAG")) {
                           char* end = nullptr;
                           long idx = std::strtol(k.c_str(), &end, 10);
                           if (*end != '\0' || idx < 1 || static_cast<std::size_t>(idx) > desc.size())
                               throw Error(ErrorKind::parse, "FLAG index out of range: " + k);
                           r.flags[static_cast<std::size_t>(idx)] = v;
                       }
                       if (!r.approved && r.flags.empty()) throw Error(ErrorKind::parse, "REVISE needs at least one FLAG[k]");
                       return r;
                   });
    }

    /// The reply must either select one of the shown candidates or rewrite the query.
    RetrievalDecision evaluate_candidates(const UserQuery& x, const std::string& query,
                                          const std::vector<const PoemRecord*>& candidates) const {
        auto prompt = prompts_->render("evaluate_candidates", {{"query", render_query(x)},
                                                               {"retrieval_query", query},
                                                               {"candidates", render_candidates(candidates)}});
        return ask(Stage::retrieval, "system_evaluator", std::move(prompt), opts_.evaluator, opts_.retrieval_reasks,
                   [&](const Envelope& env) {
                       RetrievalDecision d;
                       auto sel = env.get("SELECT");
                       auto rw = env.get("REWRITE");
                       if (sel && rw) throw Error(ErrorKind::parse, "reply has both SELECT and REWRITE");
                       if (!sel && !rw) throw Error(ErrorKind::parse, "reply needs SELECT or REWRITE");
                       d.reason = env.get("REASON").value_or("");
                       if (sel) {
                           check_candidate(*sel, candidates);
                           d.selected_id = *sel;
                       } else {
                           if (rw->empty()) throw Error(ErrorKind::parse, "empty REWRITE");
                           d.rewritten_query = *rw;
                       }
                       return d;
                   });
    }

    RetrievalDecision select_from_history(const UserQuery& x, const std::vector<const PoemRecord*>& candidates) const {
        auto prompt = prompts_->render("select_from_history",
                                       {{"query", render_query(x)}, {"candidates", render_candidates(candidates)}});
        return ask(Stage::retrieval, "system_evaluator", std::move(prompt), opts_.evaluator, opts_.retrieval_reasks,
                   [&](const Envelope& env) {
                       auto sel = env.require("SELECT");
                       check_candidate(sel, candidates);
                       return RetrievalDecision{sel, std::nullopt, env.get("REASON").value_or("")};
                   });
    }

    ImplicitScore score_implicit(const std::string& explanation, const std::string& requirement,
                                 const std::string& task_type) const {
        if (text::trim(explanation).empty()) throw Error(ErrorKind::validation, "empty explanation");
        auto prompt = prompts_->render("score_implicit", {{"task_type", task_type},
                                                          {"requirement", requirement},
                                                          {"explanation", explanation}});
        return ask(Stage::implicit_eval, "system_evaluator", std::move(prompt), opts_.evaluator, opts_.max_reasks,
                   [](const Envelope& env) {
                       return ImplicitScore{env.score("SCORE_COM"), env.score("SCORE_CLA"), env.get("FEEDBACK").value_or("")};
                   });
    }

    ExplicitScore score_explicit(const std::string& explanation, const std::string& description, const std::string& requirement,
                                 const std::optional<RetrievedKnowledge>& knowledge) const {
        if (text::trim(explanation).empty()) throw Error(ErrorKind::validation, "empty explanation");
        auto prompt = prompts_->render("score_explicit", {{"description", description},
                                                          {"requirement", requirement},
                                                          {"knowledge", render_knowledge(knowledge)},
                                                          {"explanation", explanation}});
        return ask(Stage::explicit_eval, "system_evaluator", std::move(prompt), opts_.evaluator, opts_.max_reasks,
                   [](const Envelope& env) { return ExplicitScore{env.score("SCORE_EXP"), env.get("FEEDBACK").value_or("")}; });
    }

    /// All explanations of one candidate in a single call.
    std::vector<ImplicitScore> score_implicit_batch(const CreativeOutput& y, const std::vector<std::string>& requirements,
                                                    const std::string& task_type) const {
        std::string items;
        for (std::size_t k = 0; k < y.explanations.size(); ++k) {
            if (text::trim(y.explanations[k]).empty()) throw Error(ErrorKind::validation, "empty explanation");
            items += "Item " + std::to_string(k + 1) + "\n  Requirement: " + requirements.at(k) +
                     "\n  Explanation: " + y.explanations[k] + "\n";
        }
        auto prompt = prompts_->render("score_implicit_batch", {{"task_type", task_type}, {"result", y.result}, {"items", items}});
        return ask(Stage::implicit_eval, "system_evaluator", std::move(prompt), opts_.evaluator, opts_.max_reasks,
                   [&](const Envelope& env) {
                       std::vector<ImplicitScore> out;
                       for (std::size_t k = 1; k <= y.explanations.size(); ++k)
                           out.push_back({env.score("SCORE_COM", k), env.score("SCORE_CLA", k),
                                          env.get("FEEDBACK", std::to_string(k)).value_or("")});
                       return out;
                   });
    }

    std::vector<ExplicitScore> score_explicit_batch(const CreativeOutput& y, const std::vector<std::string>& descriptions,
                                                    const std::vector<std::string>& requirements,
                                                    const std::optional<RetrievedKnowledge>& knowledge) const {
        std::string items;
        for (std::size_t k = 0; k < y.explanations.size(); ++k) {
            if (text::trim(y.explanations[k]).empty()) throw Error(ErrorKind::validation, "empty explanation");
            items += "Item " + std::to_string(k + 1) + "\n  Objective: " + descriptions.at(k) +
                     "\n  Requirement: " + requirements.at(k) + "\n  Explanation: " + y.explanations[k] + "\n";
        }
        auto prompt = prompts_->render("score_explicit_batch",
                                       {{"result", y.result}, {"knowledge", render_knowledge(knowledge)}, {"items", items}});
        return ask(Stage::explicit_eval, "system_evaluator", std::move(prompt), opts_.evaluator, opts_.max_reasks,
                   [&](const Envelope& env) {
                       std::vector<ExplicitScore> out;
                       for (std::size_t k = 1; k <= y.explanations.size(); ++k)
                           out.push_back({env.score("SCORE_EXP", k), env.get("FEEDBACK", std::to_string(k)).value_or("")});
                       return out;
                   });
    }

private:
    static void check_candidate(const std::string& id, const std::vector<const PoemRecord*>& candidates) {
        for (const auto* r : candidates)
            if (r->id == id) return;
        throw Error(ErrorKind::parse, "selected id '" + id + "' is not among the candidates");
    }
};

struct GenerationRequest {
    const UserQuery* query = nullptr;
    const HybridInfo* info = nullptr;
    int round = 1;
    RegenFlag flag = RegenFlag::unset;
    std::vector<std::string> feedback;
    std::optional<CreativeOutput> previous;
};

class Generator : public AgentBase {
public:
    using AgentBase::AgentBase;

    /// Prompt construction is pure: identical requests give byte-identical prompts.
    std::string render_prompt(const GenerationRequest& req) const {
        const auto& info = *req.info;
        std::string objectives;
        for (std::size_t k = 0; k < info.objectives.size(); ++k)
            objectives += std::to_string(k + 1) + ". " + info.objectives.explicit_objectives[k].label + ": " +
                          info.descriptions[k] + "\n   Requirement: " + info.requirements[k] + "\n";
        if (!objectives.empty()) objectives.pop_back();
        std::string regeneration;
        if (req.flag == RegenFlag::regenerate) {
            std::string fb;
            for (const auto& f : req.feedback) fb += "- " + f + "\n";
            if (!fb.empty()) fb.pop_back();
            std::string previous = "(none)";
            if (req.previous) {
                previous = req.previous->result;
                for (std::size_t k = 0; k < req.previous->explanations.size(); ++k)
                    previous += "\n  EXPLANATION[" + std::to_string(k + 1) + "]: " + req.previous->explanations[k];
            }
            regeneration = prompts_->render("regeneration", {{"previous", previous}, {"feedback", fb.empty() ? "(none)" : fb}});
        }
        return prompts_->render("generate", {{"task_type", info.task_type},
                                             {"round", std::to_string(req.round)},
                                             {"query", render_query(*req.query)},
                                             {"knowledge", render_knowledge(info.retrieved)},
                                             {"objectives", objectives},
                                             {"shots", render_shots(info.shots)},
                                             {"regeneration", regeneration},
                                             {"m", std::to_string(info.objectives.size())}});
    }

    CreativeOutput generate(const GenerationRequest& req) const {
        const auto m = req.info->objectives.size();
        return ask(Stage::generation, "system_generator", render_prompt(req), opts_.generator, opts_.generation_reasks,
                   [m](const Envelope& env) { return parse_creative_output(env, m); });
    }

    static CreativeOutput parse_creative_output(const Envelope& env, std::size_t m) {
        CreativeOutput y;
        y.result = env.require("NAME");
        for (std::size_t k = 1; k <= m; ++k) y.explanations.push_back(env.require("EXPLANATION", k));
        return y;
    }
};

}  // namespace namegen
