#include <doctest.h>

#include <fstream>

#include "proverb/digest.hpp"
#include "proverb/error.hpp"
#include "proverb/judging.hpp"
#include "proverb/prompting.hpp"
#include "proverb/templates.hpp"
#include "proverb/vecindex.hpp"
#include "support.hpp"

using namespace proverb;
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

struct Fixture {
    Corpus corpus = testsupport::fixture_corpus();
    Corpus dev = filter_split(corpus, Split::Dev);
    Corpus retrieval = filter_split(corpus, Split::Retrieval);
    EmbeddingProviderConfig embed = [] {
        EmbeddingProviderConfig c;
        c.dim = 64;
        return c;
    }();
    VectorIndex index = build_index(retrieval, embed);
    const Proverb& target = *corpus.find("t01");
};

// Copies the shipped templates into a scratch directory, optionally replacing one file.
void copy_templates(const std::filesystem::path& dir, const std::string& file = {}, const std::string& content = {}) {
    std::filesystem::copy(PROVERB_TEMPLATES_DIR, dir, std::filesystem::copy_options::recursive);
    if (!file.empty()) {
        std::ofstream(dir / file, std::ios::binary | std::ios::trunc) << content;
        auto manifest = testsupport::load_json(dir / "manifest.json");
        for (auto& [key, entry] : manifest["templates"].items()) {
            if (entry["file"] == file) entry["version"] = sha256_hex(content);
        }
        std::ofstream(dir / "manifest.json", std::ios::trunc) << manifest.dump(2);
    }
}

}  // namespace

TEST_CASE("template sections and placeholders") {
    const PromptTemplate t = parse_template("x", "[system]\nsys {{a}}\n[user]\nhello {{b}} {{a}}\n[steps]\none\ntwo\n");
    CHECK(t.system == "sys {{a}}");
    CHECK(t.user == "hello {{b}} {{a}}");
    CHECK(t.steps == std::vector<std::string>{"one", "two"});
    CHECK(t.version == sha256_hex("[system]\nsys {{a}}\n[user]\nhello {{b}} {{a}}\n[steps]\none\ntwo\n"));
    CHECK(placeholders_in(t.user) == std::vector<std::string>{"b", "a"});
    CHECK(code_of([] { parse_template("x", "no sections"); }) == ErrorCode::TemplateError);
}

TEST_CASE("placeholder substitution is single pass") {
    const std::map<std::string, std::string, std::less<>> v{{"a", "{{b}}"}, {"b", "B"}};
    CHECK(render_placeholders("x{{a}}y{{b}}", v) == "x{{b}}yB");
    CHECK(code_of([&] { render_placeholders("{{missing}}", v); }) == ErrorCode::TemplateError);
    CHECK(count_occurrences("abab ab", "ab") == 3);
}

TEST_CASE("shipped templates match their manifest") {
    for (Strategy s : kAllStrategies) CHECK(templates().contains(strategy_name(s)));
    CHECK(templates().contains("judge_binary"));
    CHECK(templates().contains("judge_five_point_normalized"));
    CHECK(templates().get("cg_cot").steps.size() == 4);
}

TEST_CASE("edited template without manifest update is rejected") {
    TempDir tmp;
    copy_templates(tmp / "t");
    std::ofstream(tmp / "t" / "zero_shot.txt", std::ios::app) << "extra\n";
    CHECK(code_of([&] { TemplateSet::load(tmp / "t"); }) == ErrorCode::TemplateError);
    CHECK(code_of([&] { TemplateSet::load(tmp / "absent"); }) == ErrorCode::IoError);
}

TEST_CASE("stable strategy names") {
    for (Strategy s : kAllStrategies) CHECK(parse_strategy(strategy_name(s)) == s);
    CHECK(strategy_label(Strategy::CgCoT) == "CG-CoT");
    CHECK(strategy_label(Strategy::RagFewShot) == "RAG Few-Shot");
    CHECK_FALSE(parse_strategy("cgcot").has_value());
}

TEST_CASE("seeded sample matches MT19937-64 oracle") {
    for (const auto& c : testsupport::load_json(testsupport::fixture("oracle_shuffle.json"))) {
        const uint64_t seed = std::stoull(c["seed"].get<std::string>());
        CAPTURE(seed);
        CHECK(seeded_sample(c["pool"].get<size_t>(), c["n"].get<size_t>(), seed) ==
              c["order"].get<std::vector<size_t>>());
    }
    CHECK(seeded_sample(5, 0, 1).empty());
    CHECK(code_of([] { seeded_sample(3, 4, 1); }) == ErrorCode::InsufficientExamples);
}

TEST_CASE("all five builders match frozen goldens") {
    Fixture f;
    const std::vector<std::pair<std::string, PromptBundle>> bundles{
        {"zero_shot", build_zero_shot(f.target, templates())},
        {"zero_shot_cot", build_zero_shot_cot(f.target, templates())},
        {"few_shot", build_few_shot(f.target, f.dev, 3, 42, templates())},
        {"rag_few_shot", build_rag_few_shot(f.target, f.index, f.retrieval, f.embed, 3, templates())},
        {"cg_cot", build_cg_cot(f.target, f.index, f.retrieval, f.embed, 3, templates())},
    };
    for (const auto& [name, b] : bundles) {
        CAPTURE(name);
        CHECK(testsupport::matches_golden("prompt_" + name + ".json", bundle_to_json(b)));
        CHECK(count_occurrences(b.user_text, kSentinel) == 1);
        CHECK(b.user_text.find(f.target.yoruba_text) != std::string::npos);
    }
}

TEST_CASE("prompt structure per strategy") {
    Fixture f;
    const PromptBundle zs = build_zero_shot(f.target, templates());
    const PromptBundle cot = build_zero_shot_cot(f.target, templates());
    CHECK(zs.user_text.find(kCotTrigger) == std::string::npos);
    CHECK(count_occurrences(cot.user_text, kCotTrigger) == 1);
    CHECK(zs.exemplar_ids.empty());

    const PromptBundle fs = build_few_shot(f.target, f.dev, 3, 42, templates());
    CHECK(fs.exemplar_ids.size() == 3);
    CHECK(build_few_shot(f.target, f.dev, 3, 42, templates()) == fs);
    CHECK(build_few_shot(f.target, f.dev, 3, 7, templates()).exemplar_ids != fs.exemplar_ids);
    for (const auto& id : fs.exemplar_ids) CHECK(id.starts_with("d"));
    CHECK(code_of([&] { build_few_shot(f.target, f.dev, 5, 42, templates()); }) == ErrorCode::InsufficientExamples);

    const PromptBundle cg = build_cg_cot(f.target, f.index, f.retrieval, f.embed, 3, templates());
    const PromptBundle rag = build_rag_few_shot(f.target, f.index, f.retrieval, f.embed, 3, templates());
    CHECK(cg.exemplar_ids == rag.exemplar_ids);
    CHECK(cg.exemplar_ids.size() == 3);
    for (const char* header : {"Step 1:", "Step 2:", "Step 3:", "Step 4:"}) CHECK(count_occurrences(cg.user_text, header) == 1);
    CHECK(count_occurrences(cg.user_text, "Step 5:") == 0);
    CHECK(count_occurrences(rag.user_text, "Step 1:") == 0);
    CHECK(build_cg_cot(f.target, f.index, f.retrieval, f.embed, 20, templates()).exemplar_ids.size() == 10);
}

TEST_CASE("retrieval exemplars resolve in rank order") {
    Fixture f;
    const auto ex = retrieve_exemplars(f.target, f.index, f.retrieval, f.embed, 3);
    const auto hits = search(f.index, deterministic_test_embed(f.target.yoruba_text, 64), 3);
    REQUIRE(ex.size() == 3);
    for (size_t i = 0; i < 3; ++i) CHECK(ex[i].id == hits[i].proverb_id);
}

TEST_CASE("stale index detection") {
    Fixture f;
    EmbeddingProviderConfig other = f.embed;
    other.kind = EmbeddingProviderKind::RemoteHttp;
    other.model_name = "different-model";
    CHECK(code_of([&] { build_rag_few_shot(f.target, f.index, f.retrieval, other, 3, templates()); }) ==
          ErrorCode::StaleIndex);
    const Corpus shrunk = Corpus::from_records({*f.retrieval.find("r01")});
    CHECK(code_of([&] { build_cg_cot(f.target, f.index, shrunk, f.embed, 3, templates()); }) == ErrorCode::StaleIndex);
}

TEST_CASE("cg_cot template must define four steps") {
    TempDir tmp;
    std::string cg = read_file(std::filesystem::path(PROVERB_TEMPLATES_DIR) / "cg_cot.txt");
    cg = cg.substr(0, cg.rfind("Synthesis."));
    copy_templates(tmp / "t", "cg_cot.txt", cg);
    const TemplateSet broken = TemplateSet::load(tmp / "t");
    Fixture f;
    CHECK(code_of([&] { render_bundle(Strategy::CgCoT, f.target, {}, broken); }) == ErrorCode::TemplateError);
}

TEST_CASE("sentinel must appear exactly once") {
    TempDir tmp;
    copy_templates(tmp / "t", "zero_shot.txt",
                   "[system]\ns\n[user]\n{{proverb}}\nFinal interpretation:\nFinal interpretation:\n");
    const TemplateSet broken = TemplateSet::load(tmp / "t");
    Fixture f;
    CHECK(code_of([&] { build_zero_shot(f.target, broken); }) == ErrorCode::TemplateError);
}

TEST_CASE("answer extraction") {
    CHECK(extract_final("reasoning\nFinal interpretation:  Choices matter. \n").text == "Choices matter.");
    CHECK_FALSE(extract_final("x Final interpretation: y").fallback);
    const auto twice = extract_final("Final interpretation: draft\nFinal interpretation: final");
    CHECK(twice.text == "final");
    const auto none = extract_final("  just an answer ");
    CHECK(none.fallback);
    CHECK(none.text == "just an answer");
    CHECK(extract_final("Final interpretation:").text.empty());
}

TEST_CASE("judge prompt golden") {
    Fixture f;
    const PromptBundle b =
        build_judge_prompt(f.target, "Choices have consequences.", templates().get(rubric_key(AccuracyScale::Binary)));
    CHECK_FALSE(b.strategy.has_value());
    CHECK(testsupport::matches_golden("judge_prompt_binary.json", bundle_to_json(b)));
    CHECK(code_of([&] { build_judge_prompt(f.target, "  ", templates().get("judge_binary")); }) ==
          ErrorCode::PreconditionViolation);
}
