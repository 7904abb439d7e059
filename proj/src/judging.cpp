#include "proverb/judging.hpp"

#include <algorithm>
#include <charconv>
#include <regex>
#include <set>

#include "proverb/error.hpp"
#include "proverb/parallel.hpp"
#include "proverb/text.hpp"

namespace proverb {

std::string_view accuracy_scale_name(AccuracyScale s) noexcept {
    return s == AccuracyScale::Binary ? "binary" : "five_point_normalized";
}

std::optional<AccuracyScale> parse_accuracy_scale(std::string_view name) noexcept {
    if (name == "binary") return AccuracyScale::Binary;
    if (name == "five_point_normalized") return AccuracyScale::FivePointNormalized;
    return std::nullopt;
}

std::string rubric_key(AccuracyScale s) { return "judge_" + std::string(accuracy_scale_name(s)); }

namespace {

// Saturating parse so absurdly long digit runs still clamp instead of failing.
long long parse_int(const std::string& digits) noexcept {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec == std::errc::result_out_of_range) return digits.starts_with("-") ? -1000000 : 1000000;
    (void)ptr;
    return v;
}

int clamp_flag(long long v, int lo, int hi, bool& flagged) noexcept {
    if (v < lo) {
        flagged = true;
        return lo;
    }
    if (v > hi) {
        flagged = true;
        return hi;
    }
    return static_cast<int>(v);
}

}  // namespace

ParsedVerdict parse_verdict(std::string_view text, AccuracyScale scale) noexcept {
    const int acc_lo = scale == AccuracyScale::Binary ? 0 : 1;
    const int acc_hi = scale == AccuracyScale::Binary ? 1 : 5;
    ParsedVerdict out;
    out.accuracy = acc_lo;
    out.depth = 1;
    out.parse_fallback = true;
    try {
        static const std::regex grammar(R"(VERDICT\s+accuracy\s*=\s*(-?\d+)\s+depth\s*=\s*(-?\d+))");
        size_t pos = 0;
        while (pos <= text.size()) {
            auto eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            const std::string line(text.substr(pos, eol - pos));
            std::smatch m;
            if (std::regex_search(line, m, grammar)) {
                bool flagged = false;
                out.accuracy = clamp_flag(parse_int(m[1].str()), acc_lo, acc_hi, flagged);
                out.depth = clamp_flag(parse_int(m[2].str()), 1, 5, flagged);
                out.parse_fallback = flagged;
                out.rationale = std::string(text::trim(eol < text.size() ? text.substr(eol + 1) : std::string_view{}));
                return out;
            }
            pos = eol + 1;
        }
        out.rationale = std::string(text::trim(text));
    } catch (...) {
        out.accuracy = acc_lo;
        out.depth = 1;
        out.parse_fallback = true;
    }
    return out;
}

double accuracy_score(int accuracy, AccuracyScale scale) noexcept {
    if (scale == AccuracyScale::Binary) return static_cast<double>(accuracy);
    return static_cast<double>(accuracy - 1) / 4.0;
}

nlohmann::ordered_json to_json(const JudgeVerdict& v) {
    nlohmann::ordered_json j;
    j["proverb_id"] = v.proverb_id;
    j["strategy"] = std::string(strategy_name(v.strategy));
    j["judge_tag"] = v.judge_tag;
    j["accuracy"] = v.accuracy;
    j["cultural_depth"] = v.cultural_depth;
    j["accuracy_score"] = v.accuracy_score;
    j["parse_fallback"] = v.parse_fallback;
    j["rationale"] = v.rationale;
    return j;
}

JudgeVerdict verdict_from_json(const nlohmann::json& j) {
    JudgeVerdict v;
    v.proverb_id = j.at("proverb_id").get<std::string>();
    const auto s = parse_strategy(j.at("strategy").get<std::string>());
    if (!s) throw Error(ErrorCode::MalformedRecord, "unknown strategy in verdict record");
    v.strategy = *s;
    v.judge_tag = j.at("judge_tag").get<std::string>();
    v.accuracy = j.at("accuracy").get<int>();
    v.cultural_depth = j.at("cultural_depth").get<int>();
    v.accuracy_score = j.at("accuracy_score").get<double>();
    v.parse_fallback = j.value("parse_fallback", false);
    v.rationale = j.value("rationale", "");
    return v;
}

JudgePanel::JudgePanel(std::vector<std::shared_ptr<LlmClient>> judges, AccuracyScale scale)
    : judges_(std::move(judges)), scale_(scale) {
    if (judges_.empty()) throw Error(ErrorCode::ConfigError, "judge panel needs at least one judge");
    std::set<std::string> tags;
    for (const auto& j : judges_) {
        if (!tags.insert(j->config().effective_tag()).second) {
            throw Error(ErrorCode::ConfigError, "duplicate judge tag " + j->config().effective_tag());
        }
    }
}

JudgePanel JudgePanel::from_configs(const std::vector<LlmProviderConfig>& configs,
                                    std::shared_ptr<const ResponseCache> cache, AccuracyScale scale) {
    std::vector<std::shared_ptr<LlmClient>> clients;
    for (const auto& c : configs) clients.push_back(std::make_shared<LlmClient>(c, make_provider(c), cache));
    return JudgePanel(std::move(clients), scale);
}

PromptBundle build_judge_prompt(const Proverb& p, std::string_view candidate, const PromptTemplate& rubric) {
    if (text::trim(candidate).empty()) throw Error(ErrorCode::PreconditionViolation, "judge candidate is empty");
    const std::map<std::string, std::string, std::less<>> values{
        {"proverb", p.yoruba_text}, {"reference", p.reference_gloss}, {"candidate", std::string(candidate)}};
    PromptBundle b;
    b.proverb_id = p.id;
    b.system_text = render_placeholders(rubric.system, values);
    b.user_text = render_placeholders(rubric.user, values);
    b.template_version = rubric.version;
    return b;
}

JudgeOutcome judge_all(std::span<const GenerationRecord> records, const JudgePanel& panel, const Corpus& corpus,
                       const TemplateSet& templates) {
    const PromptTemplate& rubric = templates.get(rubric_key(panel.scale()));
    const auto& judges = panel.judges();
    for (const auto& r : records) {
        if (corpus.find(r.proverb_id) == nullptr) {
            throw Error(ErrorCode::PreconditionViolation, "record for unknown proverb " + r.proverb_id);
        }
        if (!r.strategy) throw Error(ErrorCode::PreconditionViolation, "record without strategy");
    }

    const size_t total = records.size() * judges.size();
    std::vector<std::optional<JudgeVerdict>> verdicts(total);
    std::vector<std::optional<MissingVerdict>> missing(total);
    size_t workers = 0;
    for (const auto& j : judges) workers += j->config().max_concurrency;

    parallel_for(total, workers, [&](size_t task) {
        const GenerationRecord& rec = records[task / judges.size()];
        LlmClient& judge = *judges[task % judges.size()];
        const Proverb& p = *corpus.find(rec.proverb_id);
        const std::string tag = judge.config().effective_tag();

        JudgeVerdict v;
        v.proverb_id = rec.proverb_id;
        v.strategy = *rec.strategy;
        v.judge_tag = tag;
        if (text::trim(rec.final_interpretation).empty()) {
            const ParsedVerdict floor = parse_verdict("", panel.scale());
            v.accuracy = floor.accuracy;
            v.cultural_depth = floor.depth;
            v.accuracy_score = accuracy_score(floor.accuracy, panel.scale());
            v.parse_fallback = true;
            v.rationale = "empty candidate interpretation";
            verdicts[task] = std::move(v);
            return;
        }
        try {
            const GenerationRecord reply = judge.complete(build_judge_prompt(p, rec.final_interpretation, rubric));
            const ParsedVerdict parsed = parse_verdict(reply.raw_output, panel.scale());
            v.accuracy = parsed.accuracy;
            v.cultural_depth = parsed.depth;
            v.accuracy_score = accuracy_score(parsed.accuracy, panel.scale());
            v.parse_fallback = parsed.parse_fallback;
            v.rationale = parsed.rationale;
            verdicts[task] = std::move(v);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProviderExhausted) throw;
            missing[task] = MissingVerdict{rec.proverb_id, *rec.strategy, tag, e.what()};
        }
    });

    JudgeOutcome out;
    out.expected = total;
    for (auto& v : verdicts) {
        if (v) out.verdicts.push_back(std::move(*v));
    }
    for (auto& m : missing) {
        if (m) out.missing.push_back(std::move(*m));
    }
    auto key = [](const auto& x) { return std::tuple(x.proverb_id, static_cast<int>(x.strategy), x.judge_tag); };
    std::sort(out.verdicts.begin(), out.verdicts.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::sort(out.missing.begin(), out.missing.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return out;
}

void enforce_missing_threshold(const JudgeOutcome& outcome, double max_fraction) {
    if (outcome.missing_fraction() > max_fraction) {
        throw Error(ErrorCode::TooManyMissingVerdicts,
                    std::to_string(outcome.missing.size()) + " of " + std::to_string(outcome.expected) +
                        " verdicts missing, above the " + std::to_string(max_fraction) + " limit");
    }
}

}  // namespace proverb
