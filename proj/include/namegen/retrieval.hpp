#pragma once

// Evaluator-guided iterative retrieval: coarse filtering in the first rounds, style-aligned
// semantic matching, select-or-rewrite evaluation, history exclusion and a fallback pick.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "namegen/agents.hpp"
#include "namegen/corpus.hpp"

namespace namegen {

struct RetrievalRound {
    int round = 0;
    std::string query;
    bool filtered = false;
    std::vector<Match> candidates;
    bool selected = false;
};

struct RetrievalState {
    int round = 0;
    std::vector<Match> history;  // insertion order, each id once
    std::set<std::string> seen;
    std::string query;
    bool exhausted = false;
    std::vector<RetrievalRound> rounds;
    int evaluator_calls = 0;
    bool used_fallback = false;
};

struct RetrievalOutcome {
    RetrievedKnowledge knowledge;
    RetrievalState state;
};

inline constexpr std::size_t kFallbackCandidates = 10;

/// Rounds are 1-based; coarse filtering applies while round <= n_f. When `initial_query` is
/// empty the manager builds one on the first round.
inline RetrievalOutcome moo_retrieve(const UserQuery& x, const std::map<std::string, std::string>& key_info,
                                     const KnowledgeBase& kb, const RetrievalParams& params, const Manager& manager,
                                     const Evaluator& evaluator, std::string initial_query = {}) {
    if (params.max_rounds < 1 || params.top_k < 1) throw Error(ErrorKind::config, "retrieval params must be >= 1");
    const auto& corpus = *kb.corpus;
    const auto preds = predicates_from_key_info(key_info);

    RetrievalState st;
    st.query = std::move(initial_query);
    auto record_ptrs = [&](const std::vector<Match>& ms) {
        std::vector<const PoemRecord*> out;
        for (const auto& m : ms) out.push_back(&corpus[m.index]);
        return out;
    };

    for (st.round = 1; st.round <= params.max_rounds; ++st.round) {
        std::vector<std::size_t> remaining;
        for (auto i : corpus.all())
            if (!st.seen.count(corpus[i].id)) remaining.push_back(i);

        RetrievalRound rr{st.round, {}, false, {}, false};
        std::vector<std::size_t> pool = remaining;
        if (st.round <= params.coarse_rounds && !preds.empty()) {
            pool = coarse_filter(corpus, remaining, preds);
            rr.filtered = true;
        }
        if (pool.empty()) {
            if (st.round == 1) throw Error(ErrorKind::retrieval_empty, "no corpus records survive filtering");
            st.exhausted = true;
            break;
        }
        if (st.query.empty()) st.query = manager.build_query(x);
        rr.query = st.query;

        auto matches = kb.index->top_k(kb.embedder->embed(st.query), pool, static_cast<std::size_t>(params.top_k));
        for (const auto& m : matches)
            if (st.seen.insert(m.id).second) st.history.push_back(m);
        rr.candidates = matches;

        ++st.evaluator_calls;
        auto decision = evaluator.evaluate_candidates(x, st.query, record_ptrs(matches));
        if (decision.selected_id) {
            rr.selected = true;
            st.rounds.push_back(rr);
            const auto* rec = corpus.find(*decision.selected_id);
            return {{*rec, decision.reason}, std::move(st)};
        }
        st.rounds.push_back(rr);
        st.query = *decision.rewritten_query;
    }

    if (st.history.empty()) throw Error(ErrorKind::retrieval_empty, "retrieval produced no candidates");
    auto best = st.history;
    std::stable_sort(best.begin(), best.end(), [](const Match& a, const Match& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    best.resize(std::min(best.size(), kFallbackCandidates));
    ++st.evaluator_calls;
    st.used_fallback = true;
    auto decision = evaluator.select_from_history(x, record_ptrs(best));
    const auto* rec = corpus.find(*decision.selected_id);
    return {{*rec, decision.reason}, std::move(st)};
}

}  // namespace namegen
