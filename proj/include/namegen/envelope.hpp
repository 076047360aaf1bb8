#pragma once

// Line-oriented tagged replies: "TAG: value" or "TAG[key]: value". Untagged lines continue the
// previous field; text before the first tag is ignored.

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "namegen/error.hpp"
#include "namegen/text.hpp"

namespace namegen {

class Envelope {
public:
    static Envelope parse(std::string_view reply) {
        static const std::regex tag_re(R"(^\s*([A-Z][A-Z_]*)(?:\[([^\]]+)\])?\s*(?::|：)\s*(.*)$)");
        Envelope env;
        std::string* open = nullptr;
        for (const auto& raw : text::split(reply, '\n')) {
            std::string line = raw;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::smatch m;
            if (std::regex_match(line, m, tag_re)) {
                auto key = field_key(m[1].str(), m[2].matched ? std::optional(text::trim(m[2].str())) : std::nullopt);
                auto [it, inserted] = env.fields_.emplace(key, text::trim(m[3].str()));
                open = inserted ? &it->second : nullptr;
            } else if (open && !text::trim(line).empty()) {
                if (!open->empty()) *open += "\n";
                *open += text::trim(line);
            }
        }
        return env;
    }

    bool has(std::string_view tag, std::optional<std::string> key = std::nullopt) const {
        return fields_.count(field_key(std::string(tag), key)) > 0;
    }

    std::optional<std::string> get(std::string_view tag, std::optional<std::string> key = std::nullopt) const {
        auto it = fields_.find(field_key(std::string(tag), key));
        if (it == fields_.end()) return std::nullopt;
        return it->second;
    }

    std::string require(std::string_view tag, std::optional<std::string> key = std::nullopt) const {
        auto v = get(tag, key);
        if (!v || v->empty()) throw Error(ErrorKind::parse, "missing " + field_key(std::string(tag), key));
        return *v;
    }

    std::string require(std::string_view tag, std::size_t index) const { return require(tag, std::to_string(index)); }

    /// A rubric score: a single integer 0-3.
    int score(std::string_view tag, std::optional<std::string> key = std::nullopt) const {
        auto v = require(tag, key);
        if (v.size() != 1 || v[0] < '0' || v[0] > '3')
            throw Error(ErrorKind::parse, field_key(std::string(tag), key) + " must be an integer 0-3, got '" + v + "'");
        return v[0] - '0';
    }

    int score(std::string_view tag, std::size_t index) const { return score(tag, std::to_string(index)); }

    /// All keyed entries of a tag, e.g. KEY[surname], KEY[season].
    std::map<std::string, std::string> keyed(std::string_view tag) const {
        std::map<std::string, std::string> out;
        std::string prefix = std::string(tag) + "[";
        for (const auto& [k, v] : fields_)
            if (k.rfind(prefix, 0) == 0 && k.back() == ']') out[k.substr(prefix.size(), k.size() - prefix.size() - 1)] = v;
        return out;
    }

    std::size_t size() const { return fields_.size(); }

private:
    static std::string field_key(const std::string& tag, const std::optional<std::string>& key) {
        return key ? tag + "[" + *key + "]" : tag;
    }

    std::map<std::string, std::string> fields_;
};

}  // namespace namegen
