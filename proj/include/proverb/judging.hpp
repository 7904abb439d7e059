#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "proverb/corpus.hpp"
#include "proverb/llm_client.hpp"
#include "proverb/prompting.hpp"
#include "proverb/templates.hpp"

namespace proverb {

enum class AccuracyScale { Binary, FivePointNormalized };

std::string_view accuracy_scale_name(AccuracyScale s) noexcept;
std::optional<AccuracyScale> parse_accuracy_scale(std::string_view name) noexcept;
// Template key of the rubric for a scale.
std::string rubric_key(AccuracyScale s);

struct ParsedVerdict {
    int accuracy = 0;
    int depth = 1;
    bool parse_fallback = true;
    std::string rationale;
};

// Reads the first line containing "VERDICT accuracy=<a> depth=<d>". Values
// outside their range are clamped and flagged; a missing line yields the
// lowest scores, flagged. Never throws.
ParsedVerdict parse_verdict(std::string_view text, AccuracyScale scale = AccuracyScale::Binary) noexcept;

// Maps a parsed accuracy onto [0, 1]: identity for binary, (a - 1) / 4 for five-point.
double accuracy_score(int accuracy, AccuracyScale scale) noexcept;

struct JudgeVerdict {
    std::string proverb_id;
    Strategy strategy = Strategy::ZeroShot;
    std::string judge_tag;
    int accuracy = 0;
    int cultural_depth = 1;
    double accuracy_score = 0.0;
    std::string rationale;
    bool parse_fallback = false;
};

struct MissingVerdict {
    std::string proverb_id;
    Strategy strategy = Strategy::ZeroShot;
    std::string judge_tag;
    std::string reason;
};

nlohmann::ordered_json to_json(const JudgeVerdict& v);
JudgeVerdict verdict_from_json(const nlohmann::json& j);

// Judges sharing one rubric. Tags must be unique.
class JudgePanel {
public:
    JudgePanel(std::vector<std::shared_ptr<LlmClient>> judges, AccuracyScale scale);

    static JudgePanel from_configs(const std::vector<LlmProviderConfig>& configs,
                                   std::shared_ptr<const ResponseCache> cache, AccuracyScale scale);

    const std::vector<std::shared_ptr<LlmClient>>& judges() const noexcept { return judges_; }
    AccuracyScale scale() const noexcept { return scale_; }

private:
    std::vector<std::shared_ptr<LlmClient>> judges_;
    AccuracyScale scale_;
};

PromptBundle build_judge_prompt(const Proverb& p, std::string_view candidate, const PromptTemplate& rubric);

struct JudgeOutcome {
    std::vector<JudgeVerdict> verdicts;
    std::vector<MissingVerdict> missing;
    size_t expected = 0;

    double missing_fraction() const noexcept {
        return expected == 0 ? 0.0 : static_cast<double>(missing.size()) / static_cast<double>(expected);
    }
};

// One verdict per (record, judge), sorted by (proverb_id, strategy, judge_tag).
// Provider exhaustion for an item is recorded as a missing verdict.
JudgeOutcome judge_all(std::span<const GenerationRecord> records, const JudgePanel& panel, const Corpus& corpus,
                       const TemplateSet& templates);

// Throws TooManyMissingVerdicts when the missing fraction exceeds max_fraction.
void enforce_missing_threshold(const JudgeOutcome& outcome, double max_fraction = 0.10);

}  // namespace proverb
