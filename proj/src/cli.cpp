#include "proverb/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "proverb/config.hpp"
#include "proverb/corpus.hpp"
#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"
#include "proverb/metrics.hpp"
#include "proverb/runner.hpp"
#include "proverb/text.hpp"
#include "proverb/vecindex.hpp"

namespace proverb::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
    std::string config;
    int verbosity = 0;
    bool quiet = false;

    std::optional<std::string> run_id, output_dir, cache_dir, corpus, index;
    std::optional<std::vector<std::string>> strategies;
    std::optional<size_t> k, n;
    std::optional<uint64_t> seed;
    bool dry_run = false, skip_bertscore = false, score_raw = false, allow_overlap = false;

    std::string out;
    std::string format = "markdown";
    bool ablation = false, replication = false;
    std::string pairs;
    std::optional<std::string> bertscore_url;
};

void print_error(std::ostream& err, std::string_view code, std::string_view kind, const std::string& message) {
    ordered_json j;
    j["error"] = code;
    j["kind"] = kind;
    j["message"] = message;
    err << j.dump() << "\n" << "error: " << message << "\n";
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

RunConfig resolve_config(const Options& o, bool need_config) {
    RunConfig c;
    if (!o.config.empty()) {
        c = load_run_config(o.config);
    } else if (need_config) {
        throw Error(ErrorCode::MissingConfig, "--config <path> is required");
    } else {
        c.templates_dir = default_templates_dir();
    }
    apply_environment(c);
    if (o.run_id) c.run_id = *o.run_id;
    if (o.output_dir) c.output_dir = *o.output_dir;
    if (o.cache_dir) c.cache_dir = *o.cache_dir;
    if (o.corpus) c.corpus_path = *o.corpus;
    if (o.index) c.index_path = fs::path(*o.index);
    if (o.strategies) {
        c.strategies.clear();
        for (const auto& name : *o.strategies) {
            const auto s = parse_strategy(name);
            if (!s) throw Error(ErrorCode::ConfigError, "unknown strategy '" + name + "'");
            c.strategies.push_back(*s);
        }
    }
    if (o.k) c.k = *o.k;
    if (o.n) c.n = *o.n;
    if (o.seed) c.seed = *o.seed;
    if (o.bertscore_url) c.bertscore_url = *o.bertscore_url;
    c.dry_run = c.dry_run || o.dry_run;
    c.skip_bertscore = c.skip_bertscore || o.skip_bertscore;
    c.score_raw = c.score_raw || o.score_raw;
    c.allow_overlap = c.allow_overlap || o.allow_overlap;
    return c;
}

void log(const Options& o, std::ostream& err, int level, const std::string& msg) {
    if (!o.quiet && o.verbosity >= level) err << msg << "\n";
}

void print_summary(const Options& o, const RunSummary& s, std::ostream& out, std::ostream& err) {
    log(o, err, 1,
        "generations: " + std::to_string(s.generations.size()) + ", failed: " +
            std::to_string(s.failed_generations.size()) + ", verdicts: " + std::to_string(s.judging.verdicts.size()) +
            ", missing: " + std::to_string(s.judging.missing.size()) +
            ", provider calls: " + std::to_string(s.provider_calls()));
    if (!s.reports.empty()) out << render_markdown(s.reports);
    log(o, err, 0, "wrote " + s.run_dir.string());
}

int cmd_ingest(const Options& o, std::ostream& out) {
    const RunConfig c = resolve_config(o, false);
    if (c.corpus_path.empty()) throw Error(ErrorCode::ConfigError, "--corpus or --config is required");
    const Corpus corpus = load_corpus(c.corpus_path, {Split::Test});
    if (!c.allow_overlap) check_disjoint(corpus);
    ordered_json j;
    j["corpus"] = c.corpus_path.string();
    j["checksum"] = corpus.checksum();
    j["records"] = corpus.size();
    for (Split s : kAllSplits) j["splits"][std::string(split_name(s))] = filter_split(corpus, s).size();
    if (!o.out.empty()) {
        save_corpus(corpus, o.out);
        j["written"] = o.out;
    }
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_index(const Options& o, std::ostream& out) {
    const RunConfig c = resolve_config(o, false);
    if (c.corpus_path.empty()) throw Error(ErrorCode::ConfigError, "--corpus or --config is required");
    fs::path target = o.out.empty() ? c.index_path.value_or(fs::path{}) : fs::path(o.out);
    if (target.empty()) throw Error(ErrorCode::ConfigError, "--out <path> is required");
    c.embed.validate();
    const Corpus corpus = load_corpus(c.corpus_path, {Split::Retrieval});
    const VectorIndex idx = build_index(filter_split(corpus, Split::Retrieval), c.embed);
    save_index(idx, target);
    ordered_json j;
    j["index"] = target.string();
    j["entries"] = idx.size();
    j["dim"] = idx.dim();
    j["provider"] = idx.provider_tag();
    j["corpus_checksum"] = idx.corpus_checksum();
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig c = resolve_config(o, true);
    log(o, err, 1, "run " + c.run_id + " -> " + c.run_dir().string());
    const RunSummary s = run_experiment(c);
    if (c.dry_run) {
        out << "prompts: " << s.prompts_written << "\n";
        log(o, err, 0, "wrote " + s.run_dir.string());
        return 0;
    }
    print_summary(o, s, out, err);
    return 0;
}

int cmd_judge(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig c = resolve_config(o, true);
    print_summary(o, judge_run(c), out, err);
    return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
    const RunConfig c = resolve_config(o, true);
    const RunSummary s = report_run(c);
    if (o.format == "json") {
        out << read_file(s.run_dir / "report.json");
    } else {
        out << render_markdown(s.reports);
    }
    if (o.ablation) out << "\n" << render_ablation_markdown(ablation_report(s.reports));
    if (o.replication) out << "\n" << render_replication(replication_check(s.reports));
    return 0;
}

std::vector<TextPair> read_pairs(const fs::path& path) {
    const std::string content = read_file(path);
    std::vector<TextPair> pairs;
    size_t pos = 0, line_no = 0;
    while (pos < content.size()) {
        auto eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw Error(ErrorCode::MalformedRecord,
                        path.string() + " line " + std::to_string(line_no) + ": expected candidate<TAB>reference");
        }
        pairs.emplace_back(std::string(line.substr(0, tab)), std::string(line.substr(tab + 1)));
    }
    return pairs;
}

int cmd_score(const Options& o, std::ostream& out) {
    const std::vector<TextPair> pairs = read_pairs(o.pairs);
    const BleuReport b = corpus_bleu(pairs);
    out << "BLEU " << fmt("%.1f", b.score) << "\n";
    out << "precisions " << fmt("%.4f", b.precisions[0]) << " " << fmt("%.4f", b.precisions[1]) << " "
        << fmt("%.4f", b.precisions[2]) << " " << fmt("%.4f", b.precisions[3]) << "\n";
    out << "brevity_penalty " << fmt("%.4f", b.brevity_penalty) << " candidate_len " << b.candidate_len
        << " reference_len " << b.reference_len << (b.smoothing_applied ? " smoothed" : "") << "\n";
    if (o.bertscore_url) {
        const auto scores = bertscore_batch(pairs, *o.bertscore_url);
        double sum = 0.0;
        for (const auto& s : scores) sum += s.f1;
        out << "BERTScore " << fmt("%.4f", scores.empty() ? 0.0 : sum / static_cast<double>(scores.size()))
            << (scores.empty() ? "" : " " + scores.front().model_tag) << "\n";
    }
    return 0;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "Run configuration file");
    sub->add_flag_function(
        "-v,--verbose", [&o](std::int64_t count) { o.verbosity = static_cast<int>(count); },
        "More progress output (repeatable)");
    sub->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
}

void add_run_overrides(CLI::App* sub, Options& o) {
    sub->add_option("--run-id", o.run_id, "Run identifier");
    sub->add_option("--output-dir", o.output_dir, "Directory holding run directories");
    sub->add_option("--cache-dir", o.cache_dir, "Response cache directory");
    sub->add_option("--corpus", o.corpus, "Corpus JSONL file");
    sub->add_option("--index", o.index, "Prebuilt PVIX index file");
    sub->add_option("--strategies", o.strategies, "Strategies to run")->delimiter(',');
    sub->add_option("--k", o.k, "Retrieved exemplars per prompt")->check(CLI::PositiveNumber);
    sub->add_option("--n", o.n, "Few-shot exemplars per prompt")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Few-shot sampling seed");
    sub->add_option("--bertscore-url", o.bertscore_url, "BERTScore sidecar base URL");
    sub->add_flag("--skip-bertscore", o.skip_bertscore, "Do not contact the BERTScore sidecar");
    sub->add_flag("--score-raw", o.score_raw, "Score raw outputs instead of extracted interpretations");
    sub->add_flag("--allow-overlap", o.allow_overlap, "Permit test proverbs to reappear in other splits");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Batch harness for proverb interpretation prompting strategies", "proverb-ground"};
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "Validate a corpus and print its checksum");
    add_common(ingest, o);
    ingest->add_option("--corpus", o.corpus, "Corpus JSONL file");
    ingest->add_flag("--allow-overlap", o.allow_overlap, "Permit test proverbs to reappear in other splits");
    ingest->add_option("--out", o.out, "Write the canonical corpus here");

    auto* index = app.add_subcommand("index", "Build a PVIX index over the retrieval split");
    add_common(index, o);
    index->add_option("--corpus", o.corpus, "Corpus JSONL file");
    index->add_option("--out", o.out, "Output index path");

    auto* run_cmd = app.add_subcommand("run", "Generate, judge and score all configured strategies");
    add_common(run_cmd, o);
    add_run_overrides(run_cmd, o);
    run_cmd->add_flag("--dry-run", o.dry_run, "Render and persist prompts only");

    auto* judge = app.add_subcommand("judge", "Judge a run's persisted generations");
    add_common(judge, o);
    add_run_overrides(judge, o);

    auto* report = app.add_subcommand("report", "Recompute reports from persisted records");
    add_common(report, o);
    add_run_overrides(report, o);
    report->add_option("--format", o.format, "markdown or json")->check(CLI::IsMember({"markdown", "json"}));
    report->add_flag("--ablation", o.ablation, "Append the ablation comparison");
    report->add_flag("--replication", o.replication, "Append the directional replication check");

    auto* score = app.add_subcommand("score", "Corpus BLEU over a candidate<TAB>reference file");
    add_common(score, o);
    score->add_option("--pairs", o.pairs, "Pairs file")->required();
    score->add_option("--bertscore-url", o.bertscore_url, "Also score with the BERTScore sidecar");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        print_error(err, "UsageError", "validation", e.what());
        return 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(o, out);
        if (index->parsed()) return cmd_index(o, out);
        if (run_cmd->parsed()) return cmd_run(o, out, err);
        if (judge->parsed()) return cmd_judge(o, out, err);
        if (report->parsed()) return cmd_report(o, out);
        if (score->parsed()) return cmd_score(o, out);
    } catch (const Error& e) {
        const bool validation = e.kind() == ErrorKind::Validation;
        print_error(err, error_code_name(e.code()), validation ? "validation" : "provider_or_io", e.what());
        return validation ? 1 : 2;
    } catch (const std::exception& e) {
        print_error(err, "Internal", "provider_or_io", e.what());
        return 2;
    }
    return 1;
}

}  // namespace proverb::cli
