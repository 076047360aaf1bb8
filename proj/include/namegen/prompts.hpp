#pragma once

// Versioned prompt templates with {{named}} placeholders. Defaults are compiled in; a directory
// of <name>.txt files overrides individual templates.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "namegen/error.hpp"

namespace namegen {

using PromptVars = std::map<std::string, std::string>;

inline const std::map<std::string, std::string>& default_templates() {
    static const std::map<std::string, std::string> templates = {
        {"system_manager",
         "You are the Multi-Objective Manager. You analyse creative tasks and prepare the information a generator needs."},
        {"system_generator",
         "You are the Multi-Objective Generator. You produce one creative result with an explanation for every objective."},
        {"system_evaluator",
         "You are the Multi-Objective Evaluator. You judge strictly and reply only in the requested tagged format."},
        {"system_judge", "You are an impartial evaluator of creative results. Reply only in the requested tagged format."},

        {"analyze_task", R"([MOM] Analyze task.
Identify the creative task type of the user request below.
User request: {{query}}
Reply with one line:
TASK_TYPE: <task type>)"},

        {"parse_objectives", R"([MOM] Parse objectives for the task type: {{task_type}}.
List 2 to 8 independent, non-overlapping explicit objectives that a good result must satisfy.
{{feedback}}Reply with one line:
OBJECTIVES: <objective 1> | <objective 2> | ...)"},

        {"review_objectives", R"([MOE] Review objectives for the task type: {{task_type}}.
Objectives:
{{objectives}}
Check that every objective is independent of the others and appropriate for the task.
Reply with:
VERDICT: APPROVE or REVISE
FEEDBACK: <what to merge, drop or add>)"},

        {"estimate_preference", R"([MOM] Estimate preference weights.
User request: {{query}}
Objectives:
{{objectives}}
Rate how much the user cares about each objective on a 0-5 scale, in the order listed.
Reply with one line:
WEIGHTS: <w1>, <w2>, ...)"},

        {"extract_key_info", R"([MOM] Extract key information.
User request: {{query}}
Known facts:
{{facts}}
Add further facts that help the task, such as theme, keyword, dynasty or wuxing.
Reply with one line per fact:
KEY[<name>]: <value>)"},

        {"build_query", R"([MOM] Build retrieval query.
Rewrite the user request as a short query in the register of classical Chinese poetry so that it matches corpus text.
User request: {{query}}
Reply with one line:
QUERY: <query>)"},

        {"evaluate_candidates", R"([MOE] Evaluate retrieved poems.
User request: {{query}}
Current query: {{retrieval_query}}
Candidates:
{{candidates}}
If one candidate suits the request, select it. Otherwise rewrite the current query for a new search, keeping its style.
Reply with exactly one of:
SELECT: <record id>
REWRITE: <new query>
and optionally
REASON: <why>)"},

        {"select_from_history", R"([MOE] Select best from history.
User request: {{query}}
Candidates already reviewed:
{{candidates}}
Pick the single most suitable candidate.
Reply with:
SELECT: <record id>
REASON: <why>)"},

        {"design_details", R"([MOM] Design descriptions and requirements.
Task type: {{task_type}}
User request: {{query}}
Key information:
{{key_info}}
Retrieved knowledge:
{{knowledge}}
Objectives:
{{objectives}}
{{feedback}}For each objective k write a detailed description and an explanatory requirement.
Reply with:
DESC[k]: <description>
REQ[k]: <requirement>)"},

        {"review_details", R"([MOE] Review descriptions and requirements.
Task type: {{task_type}}
{{details}}
Flag every vague or unreasonable item.
Reply with:
VERDICT: APPROVE or REVISE
FLAG[k]: <problem with item k>)"},

        {"generate", R"([MOG] Generate result.
Task type: {{task_type}}
Round: {{round}}
User request: {{query}}
Retrieved knowledge:
{{knowledge}}
Objectives:
{{objectives}}
Examples:
{{shots}}
{{regeneration}}Reply with:
NAME: <result>
EXPLANATION[k]: <how the result meets objective k>, one line for each k = 1..{{m}})"},

        {"regeneration", R"(Regenerate: the previous result was rejected.
Previous result: {{previous}}
Feedback:
{{feedback}}
)"},

        {"score_implicit", R"([MOE] Evaluate implicit quality.
Task type: {{task_type}}
Explanatory requirement: {{requirement}}
Explanation: {{explanation}}
Score completeness and clarity from 0 (invalid) to 3 (excellent).
Reply with:
SCORE_COM: <0-3>
SCORE_CLA: <0-3>
FEEDBACK: <one sentence>)"},

        {"score_explicit", R"([MOE] Evaluate explicit objective.
Objective description: {{description}}
Explanatory requirement: {{requirement}}
Retrieved knowledge: {{knowledge}}
Explanation: {{explanation}}
Score how well the explanation shows the objective is met, from 0 (invalid) to 3 (excellent).
Reply with:
SCORE_EXP: <0-3>
FEEDBACK: <one sentence>)"},

        {"score_implicit_batch", R"([MOE] Evaluate implicit quality of all explanations.
Task type: {{task_type}}
Result: {{result}}
{{items}}
For every item k score completeness and clarity from 0 (invalid) to 3 (excellent).
Reply with:
SCORE_COM[k]: <0-3>
SCORE_CLA[k]: <0-3>
FEEDBACK[k]: <one sentence>)"},

        {"score_explicit_batch", R"([MOE] Evaluate explicit objectives of all explanations.
Result: {{result}}
Retrieved knowledge: {{knowledge}}
{{items}}
For every item k score how well the objective is met, from 0 (invalid) to 3 (excellent).
Reply with:
SCORE_EXP[k]: <0-3>
FEEDBACK[k]: <one sentence>)"},

        {"prepare_compact", R"([MOM] Prepare task.
User request: {{query}}
Known facts:
{{facts}}
Objectives:
{{objectives}}
Identify the task type, rate how much the user cares about each objective (0-5, in order), add helpful facts, and rewrite the request as a short retrieval query in the register of classical Chinese poetry.
Reply with:
TASK_TYPE: <task type>
WEIGHTS: <w1>, <w2>, ...
KEY[<name>]: <value>
QUERY: <query>)"},

        {"reask", R"(Your reply could not be parsed: {{reason}}
Reply again using exactly the required tags.)"},

        {"judge", R"([JUDGE] Judge explanations.
Task type: {{task_type}}
Result: {{result}}
{{items}}
Rate how well each objective k is fulfilled from 0 (invalid) to 3 (excellent). Then rate the explanations overall for comprehensiveness, relevance and clarity (CRC) and for logical consistency (LR). Finally list every verse the explanations quote as classical poetry.
Reply with:
SCORE_EXP[k]: <0-3>
SCORE_CRC: <0-3>
SCORE_LR: <0-3>
CLAIM[i]: <quoted verse>, omitted when there is none)"},

        {"baseline", R"({{prefix}}Task: {{task_description}}
User request: {{query}}
Objectives:
{{objectives}}
{{extra}}Reply with:
NAME: <result>
EXPLANATION[k]: <how the result meets objective k>, one line for each k = 1..{{m}})"},

        {"q2kw_draft", R"([Q2KW] Draft an answer.
Task: {{task_description}}
User request: {{query}}
Reply with:
NAME: <result>)"},
    };
    return templates;
}

inline constexpr const char* kPromptVersion = "v1";

class PromptLibrary {
public:
    PromptLibrary() : templates_(default_templates()) {}

    /// Overrides any template that has a matching <name>.txt in dir.
    static PromptLibrary with_overrides(const std::filesystem::path& dir) {
        PromptLibrary lib;
        if (dir.empty()) return lib;
        if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::config, "prompt directory not found: " + dir.string());
        for (auto& [name, body] : lib.templates_) {
            auto file = dir / (name + ".txt");
            if (!std::filesystem::exists(file)) continue;
            std::ifstream in(file);
            std::stringstream ss;
            ss << in.rdbuf();
            body = ss.str();
            while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
        }
        return lib;
    }

    const std::string& raw(const std::string& name) const {
        auto it = templates_.find(name);
        if (it == templates_.end()) throw Error(ErrorKind::config, "unknown prompt template '" + name + "'");
        return it->second;
    }

    /// Substitutes every {{var}}; a placeholder without a value is a configuration error.
    std::string render(const std::string& name, const PromptVars& vars) const {
        const auto& tpl = raw(name);
        std::string out;
        std::size_t pos = 0;
        while (true) {
            auto open = tpl.find("{{", pos);
            if (open == std::string::npos) {
                out.append(tpl, pos);
                break;
            }
            auto close = tpl.find("}}", open);
            if (close == std::string::npos) throw Error(ErrorKind::config, "unterminated placeholder in template '" + name + "'");
            out.append(tpl, pos, open - pos);
            auto var = tpl.substr(open + 2, close - open - 2);
            auto it = vars.find(var);
            if (it == vars.end()) throw Error(ErrorKind::config, "template '" + name + "' needs value for {{" + var + "}}");
            out += it->second;
            pos = close + 2;
        }
        return out;
    }

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace namegen
