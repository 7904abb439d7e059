#include <doctest.h>

#include "proverb/error.hpp"
#include "proverb/judging.hpp"
#include "support.hpp"

using namespace proverb;
using nlohmann::json;
using testsupport::TempDir;

namespace {

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::IoError;
}

const TemplateSet& templates() {
    static const TemplateSet t = TemplateSet::load(PROVERB_TEMPLATES_DIR);
    return t;
}

LlmProviderConfig judge_config(const std::string& tag, unsigned retries = 2) {
    LlmProviderConfig c;
    c.model_name = tag + "-model";
    c.tag = tag;
    c.script_path = "inline";
    c.max_retries = retries;
    c.backoff_initial = std::chrono::milliseconds(1);
    return c;
}

std::shared_ptr<LlmClient> judge(const std::string& tag, const char* script, const TempDir& tmp) {
    return std::make_shared<LlmClient>(judge_config(tag), ScriptedMockProvider::from_json(json::parse(script), tag),
                                       std::make_shared<const ResponseCache>(tmp / ("cache-" + tag)));
}

GenerationRecord record(const std::string& id, Strategy s, const std::string& interpretation) {
    GenerationRecord r;
    r.proverb_id = id;
    r.strategy = s;
    r.raw_output = "Final interpretation: " + interpretation;
    r.final_interpretation = interpretation;
    return r;
}

}  // namespace

TEST_CASE("verdict parsing") {
    auto p = parse_verdict("VERDICT accuracy=1 depth=4\nSolid reading.");
    CHECK(p.accuracy == 1);
    CHECK(p.depth == 4);
    CHECK_FALSE(p.parse_fallback);
    CHECK(p.rationale == "Solid reading.");

    p = parse_verdict("Some preamble\n  VERDICT  accuracy = 0   depth=2  \nVERDICT accuracy=1 depth=5");
    CHECK(p.accuracy == 0);
    CHECK(p.depth == 2);
    CHECK_FALSE(p.parse_fallback);
}

TEST_CASE("verdict clamping and fallback") {
    auto p = parse_verdict("VERDICT accuracy=7 depth=9");
    CHECK(p.accuracy == 1);
    CHECK(p.depth == 5);
    CHECK(p.parse_fallback);

    p = parse_verdict("VERDICT accuracy=-3 depth=0");
    CHECK(p.accuracy == 0);
    CHECK(p.depth == 1);
    CHECK(p.parse_fallback);

    p = parse_verdict("VERDICT accuracy=99999999999999999999999 depth=3");
    CHECK(p.accuracy == 1);
    CHECK(p.parse_fallback);

    p = parse_verdict("I think it is accurate, depth four.");
    CHECK(p.accuracy == 0);
    CHECK(p.depth == 1);
    CHECK(p.parse_fallback);

    p = parse_verdict("verdict accuracy=1 depth=3");
    CHECK(p.parse_fallback);

    p = parse_verdict("VERDICT accuracy=5 depth=3", AccuracyScale::FivePointNormalized);
    CHECK(p.accuracy == 5);
    CHECK_FALSE(p.parse_fallback);
    p = parse_verdict("VERDICT accuracy=0 depth=3", AccuracyScale::FivePointNormalized);
    CHECK(p.accuracy == 1);
    CHECK(p.parse_fallback);
    CHECK(parse_verdict("", AccuracyScale::FivePointNormalized).accuracy == 1);
}

TEST_CASE("accuracy scale mapping") {
    CHECK(accuracy_score(1, AccuracyScale::Binary) == 1.0);
    CHECK(accuracy_score(0, AccuracyScale::Binary) == 0.0);
    CHECK(accuracy_score(1, AccuracyScale::FivePointNormalized) == 0.0);
    CHECK(accuracy_score(3, AccuracyScale::FivePointNormalized) == 0.5);
    CHECK(accuracy_score(5, AccuracyScale::FivePointNormalized) == 1.0);
    CHECK(rubric_key(AccuracyScale::Binary) == "judge_binary");
    CHECK(parse_accuracy_scale("five_point_normalized") == AccuracyScale::FivePointNormalized);
    CHECK_FALSE(parse_accuracy_scale("likert").has_value());
}

TEST_CASE("judge_all yields one sorted verdict per record and judge") {
    TempDir tmp;
    const Corpus corpus = testsupport::fixture_corpus();
    const JudgePanel panel(
        {judge("zeta", R"({"default": "VERDICT accuracy=1 depth=4\nfine"})", tmp),
         judge("alpha", R"({"rules": [{"regex": "Candidate interpretation: weak", "output": "VERDICT accuracy=0 depth=2"}],
                            "default": "VERDICT accuracy=1 depth=3"})",
               tmp)},
        AccuracyScale::Binary);
    const std::vector<GenerationRecord> records{record("t02", Strategy::CgCoT, "strong"),
                                                record("t01", Strategy::ZeroShot, "weak"),
                                                record("t01", Strategy::CgCoT, "strong")};
    const JudgeOutcome out = judge_all(records, panel, corpus, templates());
    CHECK(out.expected == 6);
    CHECK(out.missing.empty());
    REQUIRE(out.verdicts.size() == 6);
    const std::vector<std::tuple<std::string, Strategy, std::string>> order{
        {"t01", Strategy::ZeroShot, "alpha"}, {"t01", Strategy::ZeroShot, "zeta"}, {"t01", Strategy::CgCoT, "alpha"},
        {"t01", Strategy::CgCoT, "zeta"},     {"t02", Strategy::CgCoT, "alpha"},   {"t02", Strategy::CgCoT, "zeta"}};
    for (size_t i = 0; i < order.size(); ++i) {
        CHECK(out.verdicts[i].proverb_id == std::get<0>(order[i]));
        CHECK(out.verdicts[i].strategy == std::get<1>(order[i]));
        CHECK(out.verdicts[i].judge_tag == std::get<2>(order[i]));
    }
    CHECK(out.verdicts[0].accuracy == 0);
    CHECK(out.verdicts[0].cultural_depth == 2);
    CHECK(out.verdicts[1].cultural_depth == 4);
}

TEST_CASE("empty candidates get a floor verdict without a provider call") {
    TempDir tmp;
    auto client = judge("solo", R"({"default": "VERDICT accuracy=1 depth=5"})", tmp);
    const JudgePanel panel({client}, AccuracyScale::Binary);
    const std::vector<GenerationRecord> records{record("t01", Strategy::ZeroShot, "")};
    const JudgeOutcome out = judge_all(records, panel, testsupport::fixture_corpus(), templates());
    REQUIRE(out.verdicts.size() == 1);
    CHECK(out.verdicts[0].accuracy == 0);
    CHECK(out.verdicts[0].cultural_depth == 1);
    CHECK(out.verdicts[0].parse_fallback);
    CHECK(client->stats().provider_calls == 0);
}

TEST_CASE("exhausted judges become missing verdicts") {
    TempDir tmp;
    const JudgePanel panel(
        {judge("ok", R"({"default": "VERDICT accuracy=1 depth=3"})", tmp),
         judge("flaky", R"({"rules": [{"regex": "Yoruba proverb: Igi kan", "output": "x", "fail_times": -1}],
                            "default": "VERDICT accuracy=1 depth=3"})",
               tmp)},
        AccuracyScale::Binary);
    std::vector<GenerationRecord> records;
    for (const char* id : {"t01", "t02", "t03", "t04", "t05"}) records.push_back(record(id, Strategy::FewShot, "text"));
    const JudgeOutcome out = judge_all(records, panel, testsupport::fixture_corpus(), templates());
    CHECK(out.verdicts.size() == 9);
    REQUIRE(out.missing.size() == 1);
    CHECK(out.missing[0].proverb_id == "t02");
    CHECK(out.missing[0].judge_tag == "flaky");
    CHECK(out.missing_fraction() == doctest::Approx(0.1));
    CHECK_NOTHROW(enforce_missing_threshold(out, 0.10));
    CHECK(code_of([&] { enforce_missing_threshold(out, 0.05); }) == ErrorCode::TooManyMissingVerdicts);
}

TEST_CASE("panel validation") {
    TempDir tmp;
    CHECK(code_of([] { JudgePanel({}, AccuracyScale::Binary); }) == ErrorCode::ConfigError);
    CHECK(code_of([&] {
              JudgePanel({judge("same", R"({"default": "x"})", tmp), judge("same", R"({"default": "y"})", tmp)},
                         AccuracyScale::Binary);
          }) == ErrorCode::ConfigError);
    const JudgePanel panel({judge("j", R"({"default": "x"})", tmp)}, AccuracyScale::Binary);
    const std::vector<GenerationRecord> unknown{record("zzz", Strategy::ZeroShot, "x")};
    CHECK(code_of([&] { judge_all(unknown, panel, testsupport::fixture_corpus(), templates()); }) ==
          ErrorCode::PreconditionViolation);
}

TEST_CASE("verdict json round trip") {
    JudgeVerdict v{"t01", Strategy::RagFewShot, "j", 1, 4, 1.0, "because", false};
    const JudgeVerdict back = verdict_from_json(json::parse(to_json(v).dump()));
    CHECK(back.proverb_id == v.proverb_id);
    CHECK(back.strategy == v.strategy);
    CHECK(back.cultural_depth == 4);
    CHECK(back.rationale == "because");
}
