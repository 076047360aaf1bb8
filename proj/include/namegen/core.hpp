#pragma once

// Domain types shared by every stage of the pipeline.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "namegen/error.hpp"
#include "namegen/text.hpp"

namespace namegen {

enum class Gender { unspecified, male, female };

inline std::string_view to_string(Gender g) {
    switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    default: return "unspecified";
    }
}

inline Gender parse_gender(std::string_view s) {
    if (s == "male" || s == "m" || s == "男") return Gender::male;
    if (s == "female" || s == "f" || s == "女") return Gender::female;
    if (s.empty() || s == "unspecified") return Gender::unspecified;
    throw Error(ErrorKind::validation, "unknown gender '" + std::string(s) + "'");
}

struct BirthDateTime {
    int year = 0;
    int month = 0;
    int day = 0;
    std::optional<int> hour;
    std::optional<int> minute;

    /// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM" and "YYYY-MM-DDTHH:MM".
    static BirthDateTime parse(std::string_view s) {
        BirthDateTime b;
        int h = -1, mi = -1;
        std::string str(s);
        int n = std::sscanf(str.c_str(), "%d-%d-%d%*[ T]%d:%d", &b.year, &b.month, &b.day, &h, &mi);
        if (n != 3 && n != 5) throw Error(ErrorKind::validation, "bad birth_datetime '" + str + "'");
        if (b.month < 1 || b.month > 12 || b.day < 1 || b.day > 31)
            throw Error(ErrorKind::validation, "birth_datetime out of range '" + str + "'");
        if (n == 5) {
            if (h < 0 || h > 23 || mi < 0 || mi > 59)
                throw Error(ErrorKind::validation, "birth time out of range '" + str + "'");
            b.hour = h;
            b.minute = mi;
        }
        return b;
    }

    std::string str() const {
        char buf[32];
        if (hour)
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", year, month, day, *hour, *minute);
        else
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
        return buf;
    }
};

/// The user input x.
struct UserQuery {
    std::string raw_text;
    std::optional<std::string> surname;
    std::optional<BirthDateTime> birth;
    Gender gender = Gender::unspecified;
    std::optional<std::vector<std::string>> explicit_objectives;
    std::optional<std::string> preference_hints;

    void validate() const {
        if (text::trim(raw_text).empty()) throw Error(ErrorKind::validation, "query raw_text is empty");
        if (surname && surname->empty()) throw Error(ErrorKind::validation, "surname present but empty");
    }
};

enum class ObjectiveKind { explicit_objective, implicit_objective };

enum class ImplicitObjective { accuracy, completeness, clarity };

inline std::string_view to_string(ImplicitObjective o) {
    switch (o) {
    case ImplicitObjective::accuracy: return "accuracy";
    case ImplicitObjective::completeness: return "completeness";
    case ImplicitObjective::clarity: return "clarity";
    }
    return "";
}

struct ObjectiveSpec {
    std::string id;
    ObjectiveKind kind = ObjectiveKind::explicit_objective;
    std::string label;
    std::string description;
    std::string requirement;
};

inline ObjectiveSpec make_implicit(ImplicitObjective o) {
    std::string label(to_string(o));
    return {"imp:" + label, ObjectiveKind::implicit_objective, label, {}, {}};
}

/// Explicit objectives in user order; the implicit triple is fixed.
struct ObjectiveSet {
    std::vector<ObjectiveSpec> explicit_objectives;

    static ObjectiveSet from_labels(const std::vector<std::string>& labels) {
        ObjectiveSet set;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            auto label = text::trim(labels[k]);
            if (label.empty()) throw Error(ErrorKind::validation, "empty objective label");
            set.explicit_objectives.push_back(
                {"exp:" + std::to_string(k + 1), ObjectiveKind::explicit_objective, label, {}, {}});
        }
        return set;
    }

    static std::vector<ObjectiveSpec> implicit_objectives() {
        return {make_implicit(ImplicitObjective::accuracy), make_implicit(ImplicitObjective::completeness),
                make_implicit(ImplicitObjective::clarity)};
    }

    std::size_t size() const { return explicit_objectives.size(); }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& o : explicit_objectives) out.push_back(o.label);
        return out;
    }
};

/// Non-negative weights summing to one, aligned to an ObjectiveSet.
class WeightVector {
public:
    WeightVector() = default;

    static WeightVector uniform(std::size_t n) {
        if (n == 0) throw Error(ErrorKind::validation, "uniform weights need n >= 1");
        return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    /// Wraps weights already known to be normalized; re-validates the invariant.
    static WeightVector from_normalized(std::vector<double> w) {
        double sum = 0;
        for (double v : w) {
            if (!(v >= 0) || !std::isfinite(v)) throw Error(ErrorKind::validation, "weight entries must be >= 0");
            sum += v;
        }
        if (w.empty() || std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorKind::validation, "weights must sum to 1");
        return WeightVector(std::move(w));
    }

    std::span<const double> values() const { return weights_; }
    const std::vector<double>& vec() const { return weights_; }
    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    bool empty() const { return weights_.empty(); }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    explicit WeightVector(std::vector<double> w) : weights_(std::move(w)) {}
    friend WeightVector normalize_weights(std::span<const double> raw);

    std::vector<double> weights_;
};

inline WeightVector normalize_weights(std::span<const double> raw) {
    if (raw.empty()) throw Error(ErrorKind::degenerate_preference, "empty preference vector");
    double sum = 0;
    for (double v : raw) {
        if (!(v >= 0) || !std::isfinite(v))
            throw Error(ErrorKind::validation, "preference entries must be finite and >= 0");
        sum += v;
    }
    if (sum <= 0) throw Error(ErrorKind::degenerate_preference, "all preference entries are zero");
    std::vector<double> w(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) w[i] = raw[i] / sum;
    return WeightVector(std::move(w));
}

inline WeightVector normalize_weights(const std::vector<double>& raw) {
    return normalize_weights(std::span<const double>(raw));
}

/// Maps a 0-3 rubric score onto the 0-100 reporting scale.
inline double norm_rubric(double score) {
    if (!(score >= 0.0 && score <= 3.0))
        throw Error(ErrorKind::validation, "rubric score out of [0,3]: " + std::to_string(score));
    return score / 3.0 * 100.0;
}

struct PoemRecord {
    std::string id;
    std::string poet;
    std::string dynasty;
    std::string title;
    std::vector<std::string> content;
    std::string interpretation;
    std::vector<std::string> theme;
};

/// The selected knowledge item I_rk.
struct RetrievedKnowledge {
    PoemRecord record;
    std::string rationale;
};

struct Shot {
    std::string input;
    std::string output;
};

/// Prepared information bundle handed from preparation to optimization.
struct HybridInfo {
    std::string task_type;
    ObjectiveSet objectives;
    WeightVector preference;
    std::map<std::string, std::string> key_info;
    std::optional<RetrievedKnowledge> retrieved;
    std::vector<std::string> descriptions;
    std::vector<std::string> requirements;
    std::vector<Shot> shots;

    void validate() const {
        auto m = objectives.size();
        if (m == 0) throw Error(ErrorKind::validation, "no explicit objectives");
        if (descriptions.size() != m || requirements.size() != m)
            throw Error(ErrorKind::validation, "descriptions/requirements must align with explicit objectives");
        if (preference.size() != m) throw Error(ErrorKind::validation, "preference weights misaligned");
        for (std::size_t k = 0; k < m; ++k)
            if (descriptions[k].empty() || requirements[k].empty())
                throw Error(ErrorKind::validation, "objective " + std::to_string(k + 1) + " lacks description or requirement");
    }
};

/// Y = {r, E}.
struct CreativeOutput {
    std::string result;
    std::vector<std::string> explanations;
    std::string transcript_id;

    friend bool operator==(const CreativeOutput&, const CreativeOutput&) = default;
};

enum class RegenFlag { unset, regenerate, accept };

inline std::string_view to_string(RegenFlag f) {
    switch (f) {
    case RegenFlag::regenerate: return "regenerate";
    case RegenFlag::accept: return "accept";
    default: return "unset";
    }
}

struct RetrievalParams {
    int coarse_rounds = 1;  // n_f
    int max_rounds = 3;     // n_r_max
    int top_k = 5;          // m_r
};

struct ThresholdParams {
    double delta = 0.85;
    double alpha = 0.75;
    int warmup = 2;
    int max_rounds = 8;
    RetrievalParams retrieval;

    void validate() const {
        if (!(delta > 0 && delta <= 1)) throw Error(ErrorKind::config, "delta must be in (0,1]");
        if (!(alpha > 0)) throw Error(ErrorKind::config, "alpha must be > 0");
        if (warmup < 1) throw Error(ErrorKind::config, "warmup must be >= 1");
        if (max_rounds < 1) throw Error(ErrorKind::config, "max_rounds must be >= 1");
        if (warmup >= max_rounds) throw Error(ErrorKind::config, "warmup must be < max_rounds");
        if (retrieval.coarse_rounds < 0 || retrieval.max_rounds < 1 || retrieval.top_k < 1)
            throw Error(ErrorKind::config, "retrieval params must be positive");
    }
};

}  // namespace namegen
