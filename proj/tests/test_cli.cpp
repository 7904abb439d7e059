#include <doctest.h>

#include <sstream>

#include "proverb/cli.hpp"
#include "proverb/fsutil.hpp"
#include "support.hpp"

using nlohmann::json;
using testsupport::TempDir;

namespace {

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "proverb-ground");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Invocation r;
    r.code = proverb::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

json first_error(const std::string& err) { return json::parse(err.substr(0, err.find('\n'))); }

}  // namespace

TEST_CASE("missing config exits 1 with MissingConfig") {
    const auto r = invoke({"run", "--config", "missing.toml"});
    CHECK(r.code == 1);
    const json e = first_error(r.err);
    CHECK(e["error"] == "MissingConfig");
    CHECK(e["kind"] == "validation");
}

TEST_CASE("score on identical pairs prints BLEU 100.0") {
    const auto r = invoke({"score", "--pairs", testsupport::fixture("pairs_identical.tsv").string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("BLEU 100.0\n", 0) == 0);
}

TEST_CASE("score on the fixture pairs") {
    const auto r = invoke({"score", "--pairs", testsupport::fixture("bleu_pairs.tsv").string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("BLEU 69.0\n", 0) == 0);
}

TEST_CASE("usage errors and help") {
    CHECK(invoke({"--help"}).code == 0);
    CHECK(invoke({"run", "--help"}).code == 0);
    const auto unknown = invoke({"run", "--no-such-flag"});
    CHECK(unknown.code == 1);
    CHECK(first_error(unknown.err)["error"] == "UsageError");
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"score"}).code == 1);
}

TEST_CASE("full pipeline through the command line") {
    TempDir tmp;
    const std::string config = testsupport::fixture("run.toml").string();
    const std::vector<std::string> dirs{"--output-dir", (tmp / "runs").string(), "--cache-dir", (tmp / "cache").string()};
    auto with = [&](std::vector<std::string> args) {
        args.insert(args.end(), dirs.begin(), dirs.end());
        return args;
    };
    const auto run = invoke(with({"run", "--config", config, "-q"}));
    REQUIRE(run.code == 0);
    CHECK(run.out.find("| CG-CoT | 0.80 | 4.00 |") != std::string::npos);
    const std::string md = proverb::read_file(tmp / "runs/fixture/report.md");
    CHECK(testsupport::matches_golden("fixture_report.md", md));

    const auto again = invoke(with({"run", "--config", config}));
    CHECK(again.code == 1);
    CHECK(first_error(again.err)["error"] == "RunExists");

    const auto report = invoke(with({"report", "--config", config, "--ablation", "--replication"}));
    CHECK(report.code == 0);
    CHECK(report.out.find("CG-CoT vs. RAG Few-Shot") != std::string::npos);
    const auto as_json = invoke(with({"report", "--config", config, "--format", "json"}));
    CHECK(json::parse(as_json.out)["methods"].size() == 5);

    const auto judged = invoke(with({"judge", "--config", config, "-q"}));
    CHECK(judged.code == 0);
    CHECK(proverb::read_file(tmp / "runs/fixture/report.md") == md);
}

TEST_CASE("dry run and flag overrides") {
    TempDir tmp;
    const auto r = invoke({"run", "--config", testsupport::fixture("run.toml").string(), "--output-dir",
                           (tmp / "runs").string(), "--cache-dir", (tmp / "cache").string(), "--run-id", "dry",
                           "--strategies", "zero_shot,cg_cot", "--dry-run", "-q"});
    CHECK(r.code == 0);
    CHECK(r.out == "prompts: 10\n");
    CHECK(std::filesystem::exists(tmp / "runs/dry/prompts.jsonl"));
    CHECK_FALSE(std::filesystem::exists(tmp / "runs/dry/report.json"));
    CHECK_FALSE(std::filesystem::exists(tmp / "cache"));

    const auto bad = invoke({"run", "--config", testsupport::fixture("run.toml").string(), "--strategies", "bogus"});
    CHECK(bad.code == 1);
    CHECK(first_error(bad.err)["error"] == "ConfigError");
}

TEST_CASE("provider and io failures exit 2") {
    TempDir tmp;
    const auto r = invoke({"run", "--config", testsupport::fixture("run.toml").string(), "--output-dir",
                           (tmp / "runs").string(), "--cache-dir", (tmp / "cache").string(), "--corpus",
                           (tmp / "absent.jsonl").string()});
    CHECK(r.code == 2);
    const json e = first_error(r.err);
    CHECK(e["error"] == "IoError");
    CHECK(e["kind"] == "provider_or_io");
    CHECK(invoke({"report", "--config", testsupport::fixture("run.toml").string(), "--output-dir",
                  (tmp / "runs").string(), "--run-id", "nothing"})
              .code == 2);
}

TEST_CASE("ingest and index subcommands") {
    TempDir tmp;
    const std::string corpus = testsupport::fixture("corpus.jsonl").string();
    const auto ingest = invoke({"ingest", "--corpus", corpus});
    REQUIRE(ingest.code == 0);
    const json summary = json::parse(ingest.out);
    CHECK(summary["records"] == 19);
    CHECK(summary["splits"]["retrieval"] == 10);
    CHECK(summary["checksum"] == testsupport::fixture_corpus().checksum());

    const auto index = invoke({"index", "--config", testsupport::fixture("run.toml").string(), "--out",
                               (tmp / "r.pvix").string()});
    REQUIRE(index.code == 0);
    CHECK(json::parse(index.out)["entries"] == 10);
    CHECK(std::filesystem::exists(tmp / "r.pvix"));

    const auto with_index = invoke({"run", "--config", testsupport::fixture("run.toml").string(), "--output-dir",
                                    (tmp / "runs").string(), "--cache-dir", (tmp / "cache").string(), "--index",
                                    (tmp / "r.pvix").string(), "--dry-run", "-q"});
    CHECK(with_index.code == 0);

    CHECK(invoke({"index", "--corpus", corpus}).code == 1);
}
