#pragma once

// Evaluation suite: explicit completeness (EC), implicit completeness (IC) from the
// ACC/CRC/LR triple, their combination CC, per-sample deviations, DIV, and the judge harness.

#include <algorithm>
#include <cmath>
#include <tuple>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "namegen/agents.hpp"
#include "namegen/verification.hpp"

namespace namegen {

struct SampleScores {
    std::vector<double> scores;   // explicit, 0-100, one per objective
    std::vector<double> weights;  // annotated, non-negative, positive sum
    double acc = 0, crc = 0, lr = 0;

    void validate() const {
        if (scores.empty()) throw Error(ErrorKind::validation, "sample needs at least one objective score");
        if (scores.size() != weights.size()) throw Error(ErrorKind::validation, "scores and weights differ in length");
        double sum = 0;
        for (double w : weights) {
            if (!(w >= 0)) throw Error(ErrorKind::validation, "negative weight");
            sum += w;
        }
        if (!(sum > 0)) throw Error(ErrorKind::validation, "zero weight sum");
        auto in_range = [](double v) { return v >= 0 && v <= 100; };
        for (double s : scores)
            if (!in_range(s)) throw Error(ErrorKind::validation, "score out of [0,100]");
        if (!in_range(acc) || !in_range(crc) || !in_range(lr)) throw Error(ErrorKind::validation, "implicit score out of [0,100]");
    }
};

namespace detail {

inline double pop_std(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

inline void require_samples(const std::vector<SampleScores>& s) {
    if (s.empty()) throw Error(ErrorKind::validation, "metric needs at least one sample");
    for (const auto& x : s) x.validate();
}

}  // namespace detail

inline double sample_ec(const SampleScores& s) {
    double num = 0, den = 0;
    for (std::size_t j = 0; j < s.scores.size(); ++j) {
        num += s.weights[j] * s.scores[j];
        den += s.weights[j];
    }
    return num / den;
}

inline double sample_ic(const SampleScores& s) { return (s.acc + s.crc + s.lr) / 3.0; }

inline double ec(const std::vector<SampleScores>& samples) {
    detail::require_samples(samples);
    double t = 0;
    for (const auto& s : samples) t += sample_ec(s);
    return t / static_cast<double>(samples.size());
}

/// Unweighted within-sample deviation, averaged over samples.
inline double ec_std(const std::vector<SampleScores>& samples) {
    detail::require_samples(samples);
    double t = 0;
    for (const auto& s : samples) t += detail::pop_std(s.scores);
    return t / static_cast<double>(samples.size());
}

struct ImplicitComponents {
    double acc = 0, crc = 0, lr = 0;
};

inline ImplicitComponents ic_components(const std::vector<SampleScores>& samples) {
    detail::require_samples(samples);
    ImplicitComponents c;
    for (const auto& s : samples) {
        c.acc += s.acc;
        c.crc += s.crc;
        c.lr += s.lr;
    }
    const double n = static_cast<double>(samples.size());
    return {c.acc / n, c.crc / n, c.lr / n};
}

inline double ic(const std::vector<SampleScores>& samples) {
    detail::require_samples(samples);
    double t = 0;
    for (const auto& s : samples) t += sample_ic(s);
    return t / static_cast<double>(samples.size());
}

inline double ic_std(const std::vector<SampleScores>& samples) {
    detail::require_samples(samples);
    double t = 0;
    for (const auto& s : samples) t += detail::pop_std({s.acc, s.crc, s.lr});
    return t / static_cast<double>(samples.size());
}

inline double cc(double ec_val, double ic_val) { return (ec_val + ic_val) / 2.0; }

inline double cc_std(const std::vector<SampleScores>& samples) {
    detail::require_samples(samples);
    double t = 0;
    for (const auto& s : samples) {
        const double e = sample_ec(s), i = sample_ic(s), m = (e + i) / 2.0;
        t += std::sqrt(((e - m) * (e - m) + (i - m) * (i - m)) / 2.0);
    }
    return t / static_cast<double>(samples.size());
}

/// method -> sample id -> result text; nullopt marks a failed sample, which scores 0 and
/// matches nothing.
using ResultsByMethod = std::map<std::string, std::map<std::string, std::optional<std::string>>>;

inline std::map<std::string, double> div(const ResultsByMethod& results) {
    if (results.size() < 2) throw Error(ErrorKind::validation, "DIV needs at least two methods");
    const auto& ref = results.begin()->second;
    for (const auto& [method, rs] : results) {
        bool same = rs.size() == ref.size();
        for (auto a = rs.begin(), b = ref.begin(); same && a != rs.end(); ++a, ++b) same = a->first == b->first;
        if (!same) throw Error(ErrorKind::validation, "method '" + method + "' covers different sample ids");
    }
    if (ref.empty()) throw Error(ErrorKind::validation, "DIV needs at least one sample");

    std::map<std::string, double> out;
    for (const auto& [method, _] : results) out[method] = 0;
    for (const auto& [id, _] : ref) {
        std::map<std::string, int> counts;
        for (const auto& [method, rs] : results) {
            const auto& r = rs.at(id);
            if (r) ++counts[text::trim(*r)];
        }
        for (const auto& [method, rs] : results) {
            const auto& r = rs.at(id);
            if (r && counts[text::trim(*r)] == 1) out[method] += 1;
        }
    }
    for (auto& [_, v] : out) v = v / static_cast<double>(ref.size()) * 100.0;
    return out;
}

struct MethodReport {
    std::string method;
    std::string backbone;
    std::optional<double> ec, ec_std, acc, crc, lr, ic, ic_std, cc, cc_std;
    double div = 0;
    std::size_t scored = 0;
    std::size_t unscored = 0;
};

/// Fills every judged column from `samples`; leaves them empty when there are none.
inline MethodReport make_report(std::string method, std::string backbone, const std::vector<SampleScores>& samples,
                                double div_value, std::size_t unscored = 0) {
    MethodReport r;
    r.method = std::move(method);
    r.backbone = std::move(backbone);
    r.div = div_value;
    r.scored = samples.size();
    r.unscored = unscored;
    if (samples.empty()) return r;
    r.ec = ec(samples);
    r.ec_std = ec_std(samples);
    auto c = ic_components(samples);
    r.acc = c.acc;
    r.crc = c.crc;
    r.lr = c.lr;
    r.ic = ic(samples);
    r.ic_std = ic_std(samples);
    r.cc = cc(*r.ec, *r.ic);
    r.cc_std = cc_std(samples);
    return r;
}

inline constexpr const char* kReportHeader = "method,backbone,EC,EC_std,ACC,CRC,LR,IC,IC_std,CC,CC_std,DIV";

inline std::string report_row(const MethodReport& r) {
    auto cell = [](const std::optional<double>& v) { return v ? text::fixed(*v, 4) : std::string("NA"); };
    return r.method + "," + r.backbone + "," + cell(r.ec) + "," + cell(r.ec_std) + "," + cell(r.acc) + "," + cell(r.crc) +
           "," + cell(r.lr) + "," + cell(r.ic) + "," + cell(r.ic_std) + "," + cell(r.cc) + "," + cell(r.cc_std) + "," +
           text::fixed(r.div, 4);
}

/// Rows sorted by (method, backbone) so output is independent of run order.
inline std::string report_csv(std::vector<MethodReport> rows) {
    std::sort(rows.begin(), rows.end(), [](const MethodReport& a, const MethodReport& b) {
        return std::tie(a.method, a.backbone) < std::tie(b.method, b.backbone);
    });
    std::string out = std::string(kReportHeader) + "\n";
    for (const auto& r : rows) out += report_row(r) + "\n";
    return out;
}

// ---- judge ----

struct JudgeVerdict {
    std::vector<int> explicit_scores;  // 0-3
    int crc = 0;
    int lr = 0;
    std::vector<std::string> claims;
};

/// ACC is the share of extracted verse claims found in the corpus; no claims means nothing to
/// contradict.
inline double claim_accuracy(const std::vector<std::string>& claims, const VerseIndex& verses) {
    if (claims.empty()) return 100.0;
    std::size_t ok = 0;
    for (const auto& c : claims)
        if (verses.knows_verse(c)) ++ok;
    return 100.0 * static_cast<double>(ok) / static_cast<double>(claims.size());
}

inline SampleScores to_sample_scores(const JudgeVerdict& v, const WeightVector& weights, const VerseIndex& verses) {
    SampleScores s;
    for (int x : v.explicit_scores) s.scores.push_back(norm_rubric(x));
    s.weights = weights.vec();
    s.acc = claim_accuracy(v.claims, verses);
    s.crc = norm_rubric(v.crc);
    s.lr = norm_rubric(v.lr);
    s.validate();
    return s;
}

class Judge : public AgentBase {
public:
    using AgentBase::AgentBase;

    JudgeVerdict judge(const std::string& task_type, const CreativeOutput& y, const std::vector<std::string>& objectives) const {
        if (objectives.empty()) throw Error(ErrorKind::validation, "judge needs objectives");
        std::string items;
        for (std::size_t k = 0; k < objectives.size(); ++k) {
            const std::string e = k < y.explanations.size() ? y.explanations[k] : "(missing)";
            items += "Objective " + std::to_string(k + 1) + ": " + objectives[k] + "\nExplanation " + std::to_string(k + 1) +
                     ": " + e + "\n";
        }
        auto prompt = prompts_->render("judge", {{"task_type", task_type}, {"result", y.result}, {"items", items}});
        const std::size_t m = objectives.size();
        return ask(Stage::judge, "system_judge", std::move(prompt), opts_.evaluator,
                   opts_.max_reasks, [m](const Envelope& env) {
                       JudgeVerdict v;
                       for (std::size_t k = 1; k <= m; ++k) v.explicit_scores.push_back(env.score("SCORE_EXP", std::to_string(k)));
                       v.crc = env.score("SCORE_CRC");
                       v.lr = env.score("SCORE_LR");
                       std::map<int, std::string> ordered;
                       for (const auto& [key, val] : env.keyed("CLAIM")) {
                           int i = 0;
                           try {
                               i = std::stoi(key);
                           } catch (const std::exception&) {
                               throw Error(ErrorKind::parse, "CLAIM key must be an integer: " + key);
                           }
                           if (!text::trim(val).empty()) ordered[i] = text::trim(val);
                       }
                       for (auto& [_, c] : ordered) v.claims.push_back(std::move(c));
                       return v;
                   });
    }
};

}  // namespace namegen
