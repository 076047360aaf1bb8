#pragma once

// Dynamic iterative hybrid multi-objective optimization: generate, gate on accuracy, score the
// implicit pair and the weighted explicit objectives against decaying thresholds, regenerate
// with feedback, and fall back to the best of history after the round budget.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "namegen/agents.hpp"
#include "namegen/core.hpp"
#include "namegen/verification.hpp"

namespace namegen {

/// Acceptance threshold for the j-th evaluation pass: delta through warmup, then
/// delta / (alpha * ln(j + warmup)).
inline double psi(int j, const ThresholdParams& p) {
    if (j < 1) throw Error(ErrorKind::validation, "round counter must be >= 1");
    if (j <= p.warmup) return p.delta;
    return p.delta / (p.alpha * std::log(static_cast<double>(j + p.warmup)));
}

inline void check_scores(std::span<const int> s) {
    for (int v : s)
        if (v < 0 || v > 3) throw Error(ErrorKind::validation, "rubric score out of 0-3: " + std::to_string(v));
}

inline double mean(std::span<const int> s) {
    double sum = 0;
    for (int v : s) sum += v;
    return sum / static_cast<double>(s.size());
}

/// Equal-weighted completeness and clarity, each averaged over explanations and scaled to [0,1].
inline double theta_imp(std::span<const int> completeness, std::span<const int> clarity) {
    if (completeness.empty() || completeness.size() != clarity.size())
        throw Error(ErrorKind::validation, "implicit score lists must be non-empty and equal length");
    check_scores(completeness);
    check_scores(clarity);
    return 0.5 * (mean(completeness) / 3.0) + 0.5 * (mean(clarity) / 3.0);
}

inline double theta_exp(std::span<const int> scores, const WeightVector& weights) {
    if (scores.size() != weights.size()) throw Error(ErrorKind::validation, "explicit scores and weights differ in length");
    check_scores(scores);
    double t = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) t += weights[k] * (scores[k] / 3.0);
    return t;
}

enum class HistoryKind { implicit_history, explicit_history };

struct HistoryEntry {
    CreativeOutput output;
    std::optional<double> theta;  // absent when the candidate failed before scoring
    int round = 0;
};

struct History {
    HistoryKind kind;
    std::vector<HistoryEntry> entries;

    /// Highest theta; absent thetas rank last; ties go to the earliest round.
    const HistoryEntry* best() const {
        const HistoryEntry* best = nullptr;
        for (const auto& e : entries) {
            if (!best) {
                best = &e;
                continue;
            }
            if (e.theta && (!best->theta || *e.theta > *best->theta)) best = &e;
        }
        return best;
    }
};

enum class EvalGranularity { per_explanation, batched };

/// One optimizer round as written to the run log.
struct EvalRecord {
    int round = 0;
    int j_imp = 0;
    int j_exp = 0;
    RegenFlag flag = RegenFlag::unset;
    std::string outcome;  // generation_failed | acc_failed | implicit_failed | implicit_rejected | explicit_failed | explicit_rejected | accepted
    std::optional<CreativeOutput> candidate;
    std::optional<bool> acc_passed;
    std::optional<double> theta_imp, psi_imp, theta_exp, psi_exp;
    std::vector<int> s_com, s_cla, s_exp;
    std::vector<std::string> feedback;
    LedgerSnapshot ledger;

    nlohmann::json to_json() const {
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        nlohmann::json j = {{"round", round},
                            {"j_imp", j_imp},
                            {"j_exp", j_exp},
                            {"flag", to_string(flag)},
                            {"outcome", outcome},
                            {"acc_passed", acc_passed ? nlohmann::json(*acc_passed) : nlohmann::json(nullptr)},
                            {"theta_imp", opt(theta_imp)},
                            {"psi_imp", opt(psi_imp)},
                            {"theta_exp", opt(theta_exp)},
                            {"psi_exp", opt(psi_exp)},
                            {"s_com", s_com},
                            {"s_cla", s_cla},
                            {"s_exp", s_exp},
                            {"feedback", feedback},
                            {"ledger", ledger.to_json()}};
        j["candidate"] = candidate ? nlohmann::json{{"result", candidate->result}, {"explanations", candidate->explanations}}
                                   : nlohmann::json(nullptr);
        return j;
    }

    static EvalRecord from_json(const nlohmann::json& j) {
        auto opt = [&](const char* k) { return j.at(k).is_null() ? std::nullopt : std::optional<double>(j.at(k).get<double>()); };
        EvalRecord r;
        r.round = j.at("round").get<int>();
        r.j_imp = j.at("j_imp").get<int>();
        r.j_exp = j.at("j_exp").get<int>();
        auto flag = j.at("flag").get<std::string>();
        r.flag = flag == "accept" ? RegenFlag::accept : flag == "regenerate" ? RegenFlag::regenerate : RegenFlag::unset;
        r.outcome = j.at("outcome").get<std::string>();
        if (!j.at("acc_passed").is_null()) r.acc_passed = j.at("acc_passed").get<bool>();
        r.theta_imp = opt("theta_imp");
        r.psi_imp = opt("psi_imp");
        r.theta_exp = opt("theta_exp");
        r.psi_exp = opt("psi_exp");
        r.s_com = j.at("s_com").get<std::vector<int>>();
        r.s_cla = j.at("s_cla").get<std::vector<int>>();
        r.s_exp = j.at("s_exp").get<std::vector<int>>();
        r.feedback = j.at("feedback").get<std::vector<std::string>>();
        r.ledger = LedgerSnapshot::from_json(j.at("ledger"));
        if (!j.at("candidate").is_null())
            r.candidate = CreativeOutput{j["candidate"].at("result").get<std::string>(),
                                         j["candidate"].at("explanations").get<std::vector<std::string>>(), {}};
        return r;
    }
};

enum class Selection { accepted, best_explicit, best_implicit };

inline std::string_view to_string(Selection s) {
    switch (s) {
    case Selection::accepted: return "accepted";
    case Selection::best_explicit: return "best_explicit";
    case Selection::best_implicit: return "best_implicit";
    }
    return "";
}

struct OptimizationResult {
    CreativeOutput output;
    Selection selection = Selection::accepted;
    int rounds = 0;
    int j_imp = 0;
    int j_exp = 0;
    History implicit_history{HistoryKind::implicit_history, {}};
    History explicit_history{HistoryKind::explicit_history, {}};
    std::vector<EvalRecord> trace;
};

struct OptimizerOptions {
    ThresholdParams params;
    EvalGranularity granularity = EvalGranularity::per_explanation;
    std::string task = "naming";
};

class Optimizer {
public:
    Optimizer(const Generator& generator, const Evaluator& evaluator, const VerseIndex& verses,
              std::vector<std::shared_ptr<const Rule>> rules, OptimizerOptions opts, const CallLedger* ledger = nullptr)
        : generator_(generator), evaluator_(evaluator), verses_(verses), rules_(std::move(rules)), opts_(std::move(opts)),
          ledger_(ledger) {
        opts_.params.validate();
    }

    OptimizationResult optimize(const UserQuery& x, const HybridInfo& info) const {
        info.validate();
        const auto m = info.objectives.size();
        OptimizationResult res;
        std::vector<std::string> feedback;
        std::optional<CreativeOutput> previous;
        RegenFlag flag = RegenFlag::unset;
        int j_imp = 0, j_exp = 0;

        auto finish_round = [&](EvalRecord& rec, std::vector<std::string> fb) {
            rec.j_imp = j_imp;
            rec.j_exp = j_exp;
            rec.feedback = fb;
            if (ledger_) rec.ledger = ledger_->snapshot();
            res.trace.push_back(rec);
            feedback = std::move(fb);
        };

        for (int j = 1; j <= opts_.params.max_rounds; ++j) {
            res.rounds = j;
            EvalRecord rec;
            rec.round = j;

            CreativeOutput y;
            try {
                y = generator_.generate({&x, &info, j, flag, feedback, previous});
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::parse) throw;
                rec.flag = flag = RegenFlag::regenerate;
                rec.outcome = "generation_failed";
                finish_round(rec, {std::string("The previous reply did not follow the required format: ") + e.what()});
                continue;
            }
            rec.candidate = y;
            previous = y;
            std::vector<std::string> bj;

            auto [acc_flag, report] = f_acc(y, info.retrieved, x, verses_, rules_);
            rec.acc_passed = report.passed;
            for (auto& f : report.feedback()) bj.push_back(std::move(f));
            if (acc_flag == RegenFlag::regenerate) {
                res.implicit_history.entries.push_back({y, std::nullopt, j});
                rec.flag = flag = RegenFlag::regenerate;
                rec.outcome = "acc_failed";
                finish_round(rec, std::move(bj));
                continue;
            }

            std::vector<int> com, cla;
            try {
                if (opts_.granularity == EvalGranularity::batched) {
                    for (auto& s : evaluator_.score_implicit_batch(y, info.requirements, info.task_type)) {
                        com.push_back(s.completeness);
                        cla.push_back(s.clarity);
                        if (!s.feedback.empty()) bj.push_back(s.feedback);
                    }
                } else {
                    for (std::size_t k = 0; k < m; ++k) {
                        auto s = evaluator_.score_implicit(y.explanations[k], info.requirements[k], info.task_type);
                        com.push_back(s.completeness);
                        cla.push_back(s.clarity);
                        if (!s.feedback.empty()) bj.push_back(s.feedback);
                    }
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::parse) throw;
                res.implicit_history.entries.push_back({y, std::nullopt, j});
                rec.flag = flag = RegenFlag::regenerate;
                rec.outcome = "implicit_failed";
                bj.push_back(std::string("Implicit evaluation failed: ") + e.what());
                finish_round(rec, std::move(bj));
                continue;
            }
            ++j_imp;
            rec.s_com = com;
            rec.s_cla = cla;
            rec.theta_imp = theta_imp(com, cla);
            rec.psi_imp = psi(j_imp, opts_.params);
            if (*rec.theta_imp < *rec.psi_imp) {
                res.implicit_history.entries.push_back({y, rec.theta_imp, j});
                rec.flag = flag = RegenFlag::regenerate;
                rec.outcome = "implicit_rejected";
                finish_round(rec, std::move(bj));
                continue;
            }

            std::vector<int> sexp;
            try {
                if (opts_.granularity == EvalGranularity::batched) {
                    for (auto& s : evaluator_.score_explicit_batch(y, info.descriptions, info.requirements, info.retrieved)) {
                        sexp.push_back(s.score);
                        if (!s.feedback.empty()) bj.push_back(s.feedback);
                    }
                } else {
                    for (std::size_t k = 0; k < m; ++k) {
                        auto s = evaluator_.score_explicit(y.explanations[k], info.descriptions[k], info.requirements[k],
                                                           info.retrieved);
                        sexp.push_back(s.score);
                        if (!s.feedback.empty()) bj.push_back(s.feedback);
                    }
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::parse) throw;
                res.implicit_history.entries.push_back({y, rec.theta_imp, j});
                rec.flag = flag = RegenFlag::regenerate;
                rec.outcome = "explicit_failed";
                bj.push_back(std::string("Explicit evaluation failed: ") + e.what());
                finish_round(rec, std::move(bj));
                continue;
            }
            ++j_exp;
            rec.s_exp = sexp;
            rec.theta_exp = theta_exp(sexp, info.preference);
            rec.psi_exp = psi(j_exp, opts_.params);
            if (*rec.theta_exp < *rec.psi_exp) {
                res.explicit_history.entries.push_back({y, rec.theta_exp, j});
                rec.flag = flag = RegenFlag::regenerate;
                rec.outcome = "explicit_rejected";
                finish_round(rec, std::move(bj));
                continue;
            }

            rec.flag = RegenFlag::accept;
            rec.outcome = "accepted";
            finish_round(rec, std::move(bj));
            res.output = y;
            res.selection = Selection::accepted;
            res.j_imp = j_imp;
            res.j_exp = j_exp;
            return res;
        }

        res.j_imp = j_imp;
        res.j_exp = j_exp;
        if (const auto* e = res.explicit_history.best()) {
            res.output = e->output;
            res.selection = Selection::best_explicit;
        } else if (const auto* i = res.implicit_history.best()) {
            res.output = i->output;
            res.selection = Selection::best_implicit;
        } else {
            throw Error(ErrorKind::optimization_failed,
                        "no candidate produced in " + std::to_string(opts_.params.max_rounds) + " rounds");
        }
        return res;
    }

private:
    const Generator& generator_;
    const Evaluator& evaluator_;
    const VerseIndex& verses_;
    std::vector<std::shared_ptr<const Rule>> rules_;
    OptimizerOptions opts_;
    const CallLedger* ledger_;
};

}  // namespace namegen
