#pragma once

// Full per-query pipeline: information preparation followed by optimization.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "namegen/agents.hpp"
#include "namegen/corpus.hpp"
#include "namegen/optimizer.hpp"
#include "namegen/retrieval.hpp"
#include "namegen/verification.hpp"

namespace namegen {

/// staged: one call per preparation step and per explanation score.
/// compact: task analysis, preference, key info and retrieval query share one call, and each
/// evaluation pass scores all explanations in one call.
enum class CallPlan { staged, compact };

inline CallPlan parse_call_plan(std::string_view s) {
    if (s == "staged") return CallPlan::staged;
    if (s == "compact") return CallPlan::compact;
    throw Error(ErrorKind::config, "unknown call plan '" + std::string(s) + "'");
}

struct ObjectiveNegotiation {
    ObjectiveSet objectives;
    bool warning = false;
    int manager_calls = 0;
};

/// Manager proposes, evaluator reviews, until approval or the round cap.
inline ObjectiveNegotiation negotiate_objectives(const Manager& mom, const Evaluator& moe, const std::string& task_type) {
    ObjectiveNegotiation out;
    std::string feedback;
    const int rounds = mom.options().feedback_rounds;
    for (int r = 1; r <= rounds; ++r) {
        out.objectives = mom.parse_objectives(task_type, feedback);
        ++out.manager_calls;
        auto review = moe.review_objectives(task_type, out.objectives);
        if (review.approved) return out;
        feedback = review.feedback;
    }
    out.warning = true;
    return out;
}

struct DetailDesign {
    std::vector<std::string> descriptions;
    std::vector<std::string> requirements;
    bool warning = false;
    int manager_calls = 0;
};

inline DetailDesign refine_details(const Manager& mom, const Evaluator& moe, const UserQuery& x, const std::string& task_type,
                                   const ObjectiveSet& objectives, const std::map<std::string, std::string>& key_info,
                                   const std::optional<RetrievedKnowledge>& knowledge) {
    DetailDesign out;
    auto current = mom.design_details(x, task_type, objectives, key_info, knowledge);
    out.manager_calls = 1;
    const int rounds = mom.options().feedback_rounds;
    for (int r = 1;; ++r) {
        auto review = moe.review_details(task_type, objectives, current.first, current.second);
        if (review.approved) break;
        if (r >= rounds) {
            out.warning = true;
            break;
        }
        current = mom.design_details(x, task_type, objectives, key_info, knowledge, review.flags, &current);
        ++out.manager_calls;
    }
    out.descriptions = std::move(current.first);
    out.requirements = std::move(current.second);
    return out;
}

struct PipelineOptions {
    ThresholdParams params;
    CallPlan plan = CallPlan::compact;
    AgentOptions agents;
    std::string task = "naming";
    std::vector<Shot> shots = default_shots();
};

struct PipelineResult {
    HybridInfo info;
    OptimizationResult optimization;
    LedgerSnapshot ledger;
    std::optional<RetrievalState> retrieval;
    std::vector<std::string> warnings;

    const CreativeOutput& output() const { return optimization.output; }
};

class Pipeline {
public:
    Pipeline(std::shared_ptr<Backend> backend, std::optional<KnowledgeBase> kb, PipelineOptions opts = {},
             std::shared_ptr<const PromptLibrary> prompts = nullptr, RuleRegistry rules = RuleRegistry::with_defaults())
        : backend_(std::move(backend)), kb_(std::move(kb)), opts_(std::move(opts)),
          prompts_(prompts ? std::move(prompts) : std::make_shared<const PromptLibrary>()), rules_(std::move(rules)) {
        opts_.params.validate();
        verses_ = kb_ ? std::make_shared<const VerseIndex>(*kb_->corpus) : std::make_shared<const VerseIndex>();
    }

    Pipeline& with_retry(RetryPolicy r) {
        retry_ = r;
        return *this;
    }
    Pipeline& with_limiter(RateLimiter* l) {
        limiter_ = l;
        return *this;
    }
    Pipeline& with_seed(std::optional<std::int64_t> seed) {
        seed_ = seed;
        return *this;
    }

    const VerseIndex& verses() const { return *verses_; }
    const PipelineOptions& options() const { return opts_; }

    /// Runs one query. Calls are counted in `external` when given, so they stay attributable
    /// even if the run throws; every exchange goes to `transcript` when given.
    PipelineResult run(const UserQuery& x, Transcript* transcript = nullptr, const std::string& transcript_id = {},
                       CallLedger* external = nullptr) const {
        x.validate();
        CallLedger local;
        CallLedger& ledger = external ? *external : local;
        LlmClient client(backend_, retry_);
        client.with_ledger(&ledger).with_transcript(transcript).with_limiter(limiter_).with_seed(seed_);
        Manager mom(client, prompts_, opts_.agents);
        Evaluator moe(client, prompts_, opts_.agents);
        Generator mog(client, prompts_, opts_.agents);

        PipelineResult res;
        auto& info = res.info;
        std::string retrieval_query;

        auto adopt_or_negotiate = [&](const std::string& task_type) {
            if (x.explicit_objectives && !x.explicit_objectives->empty()) {
                info.objectives = ObjectiveSet::from_labels(*x.explicit_objectives);
                return;
            }
            auto neg = negotiate_objectives(mom, moe, task_type);
            info.objectives = std::move(neg.objectives);
            if (neg.warning) res.warnings.push_back("objectives not approved after " + std::to_string(neg.manager_calls) + " rounds");
        };

        if (opts_.plan == CallPlan::staged) {
            info.task_type = mom.analyze_task(x);
            adopt_or_negotiate(info.task_type);
            auto pref = mom.estimate_preference(info.objectives, x);
            if (pref.fallback) res.warnings.push_back("preference estimate unusable; using uniform weights");
            info.preference = pref.weights;
            info.key_info = mom.extract_key_info(x);
        } else {
            std::optional<std::string> analysed;
            if (!x.explicit_objectives || x.explicit_objectives->empty()) {
                analysed = mom.analyze_task(x);
                adopt_or_negotiate(*analysed);
            } else {
                adopt_or_negotiate({});
            }
            auto prep = mom.prepare_compact(x, info.objectives);
            info.task_type = analysed ? *analysed : prep.task_type;
            if (prep.preference.fallback) res.warnings.push_back("preference estimate degenerate; using uniform weights");
            info.preference = prep.preference.weights;
            info.key_info = std::move(prep.key_info);
            retrieval_query = std::move(prep.query);
        }

        if (kb_) {
            auto out = moo_retrieve(x, info.key_info, *kb_, opts_.params.retrieval, mom, moe, retrieval_query);
            info.retrieved = std::move(out.knowledge);
            res.retrieval = std::move(out.state);
        }

        auto details = refine_details(mom, moe, x, info.task_type, info.objectives, info.key_info, info.retrieved);
        if (details.warning) res.warnings.push_back("descriptions not approved; using last version");
        info.descriptions = std::move(details.descriptions);
        info.requirements = std::move(details.requirements);
        for (std::size_t k = 0; k < info.objectives.size(); ++k) {
            info.objectives.explicit_objectives[k].description = info.descriptions[k];
            info.objectives.explicit_objectives[k].requirement = info.requirements[k];
        }
        info.shots = opts_.shots;

        OptimizerOptions oo{opts_.params,
                            opts_.plan == CallPlan::compact ? EvalGranularity::batched : EvalGranularity::per_explanation,
                            opts_.task};
        Optimizer optimizer(mog, moe, *verses_, rules_.rules_for(opts_.task), oo, &ledger);
        res.optimization = optimizer.optimize(x, info);
        res.optimization.output.transcript_id = transcript_id;
        res.ledger = ledger.snapshot();
        return res;
    }

private:
    std::shared_ptr<Backend> backend_;
    std::optional<KnowledgeBase> kb_;
    PipelineOptions opts_;
    std::shared_ptr<const PromptLibrary> prompts_;
    RuleRegistry rules_;
    std::shared_ptr<const VerseIndex> verses_;
    RetryPolicy retry_;
    RateLimiter* limiter_ = nullptr;
    std::optional<std::int64_t> seed_;
};

}  // namespace namegen
